"""Monte Carlo campaigns: gate failure tables, logical curves, threshold
scan, and the resource-overhead comparison.

All campaigns are deterministic given (config, seed): shots are drawn in
fixed-size blocks with per-block generator streams, results are reduced in
block order, and the optional adaptive stop consumes whole blocks in index
order, so the worker count never changes an estimate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import channel
from .channel import PAULI_ORDER_2Q
from .gkp import BLOCK_SIZE, GkpParams, shot_rng
from .memory import DOMAIN_GATE, MemoryResult, MemoryRunner

TWO_QUBIT_LABELS = ("II",) + PAULI_ORDER_2Q


@dataclass
class RunConfig:
    """Campaign configuration; CLI flags override config-file values."""

    command: str = ""
    d: tuple[int, ...] = (3,)
    sigma_db: tuple[float, ...] = (10.0,)
    lam: float = 1.0
    decoder: str = "ml"  # "ml" | "closest"
    weights: str = "analog"  # "analog" | "none"
    shots: int = 100_000
    seed: int = 2026
    workers: int = 1
    out: str = ""
    rel_se: float = 0.0  # adaptive stop target; 0 disables
    gate: str = "cnot"  # cnot-table gate kind
    target_pl: float = 1e-7  # overhead target logical failure rate
    gkp_d: int = 0  # overhead: surface-GKP distance (0 = from curve file)
    curve_file: str = ""  # overhead: measured logical-curve CSV
    p: tuple[float, ...] = ()  # overhead: gate failure rates given directly

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.decoder not in ("ml", "closest"):
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.weights not in ("analog", "none"):
            raise ValueError(f"unknown weights mode {self.weights!r}")
        for s in self.sigma_db:
            if not (5.0 <= s <= 20.0):
                raise ValueError(f"sigma_db {s} outside the supported 5-20 dB range")
        for d in self.d:
            if d < 3 or d % 2 == 0:
                raise ValueError(f"distance {d} must be an odd integer >= 3")
        if not (0 < self.lam <= 2.0):
            raise ValueError(f"lambda {self.lam} out of range")

    @property
    def analog(self) -> bool:
        return self.weights == "analog"


def parse_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment; lists are comma-separated."""
    out: dict = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def config_from_mapping(mapping: dict, command: str = "") -> RunConfig:
    cfg = RunConfig(command=command)
    converters = {
        "d": lambda v: tuple(int(x) for x in str(v).split(",")),
        "sigma_db": lambda v: tuple(float(x) for x in str(v).split(",")),
        "lam": float,
        "decoder": str,
        "weights": str,
        "shots": int,
        "seed": int,
        "workers": int,
        "out": str,
        "rel_se": float,
        "gate": str,
        "target_pl": float,
        "gkp_d": int,
        "curve_file": str,
        "p": lambda v: tuple(float(x) for x in str(v).split(",")),
    }
    values = {}
    for key, val in mapping.items():
        if val is None:
            continue
        if key == "lambda":
            key = "lam"
        if key not in converters:
            raise ValueError(f"unknown config key {key!r}")
        values[key] = converters[key](val)
    return replace(cfg, command=command, **values)


# Campaign data points are plain row dicts (one CSV row each) carrying the
# estimate, its binomial standard error sqrt(p(1-p)/shots), the shots used,
# and the wall-clock time; the configuration is echoed in the CSV header.

# ---------------------------------------------------------------------------
# error-corrected gate campaigns
# ---------------------------------------------------------------------------


def gate_error_tally(
    kind: str,
    params: GkpParams,
    decoder: str,
    shots: int,
    seed: int,
) -> np.ndarray:
    """Counts of the 16 sampled two-qubit Pauli classes over ``shots``."""
    counts = np.zeros(16, dtype=np.int64)
    done = 0
    block = 0
    while done < shots:
        nb = min(BLOCK_SIZE, shots - done)
        rng = shot_rng(seed, DOMAIN_GATE, block)
        (x1, z1, x2, z2), _ = channel.gate_sample_batch(
            kind, params, rng, nb, decoder, want_cond=False
        )
        # class index: first qubit (x1, z1), second (x2, z2)
        idx = ((x1 | (z1 << 1)) << 2) | (x2 | (z2 << 1))
        counts += np.bincount(idx, minlength=16)
        done += nb
        block += 1
    return counts


_BITS_TO_LABEL = {}
for _i, _lab in enumerate(TWO_QUBIT_LABELS):
    _bits = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
    _x1, _z1 = _bits[_lab[0]]
    _x2, _z2 = _bits[_lab[1]]
    _BITS_TO_LABEL[((_x1 | (_z1 << 1)) << 2) | (_x2 | (_z2 << 1))] = _lab


def gate_pauli_table(kind, params, decoder, shots, seed) -> dict[str, float]:
    """Monte Carlo two-qubit Pauli probabilities, labeled II..YY."""
    counts = gate_error_tally(kind, params, decoder, shots, seed)
    return {_BITS_TO_LABEL[i]: counts[i] / shots for i in range(16)}


def gate_failure_rate(kind, params, decoder, shots, seed):
    """Total failure probability 1 - p_II with its standard error."""
    counts = gate_error_tally(kind, params, decoder, shots, seed)
    fails = shots - counts[0]
    p = fails / shots
    return p, math.sqrt(p * (1.0 - p) / shots)


def cmd_cnot_table(cfg: RunConfig) -> list[dict]:
    """Table-I style campaign: CNOT total failure vs squeezing and decoder."""
    rows = []
    for sigma_db in cfg.sigma_db:
        for decoder in ("ml", "closest"):
            t0 = time.perf_counter()
            p, se = gate_failure_rate(
                cfg.gate, GkpParams(sigma_db, cfg.lam), decoder, cfg.shots, cfg.seed
            )
            rows.append(
                {
                    "sigma_db": sigma_db,
                    "decoder": decoder,
                    "failure_rate": p,
                    "stderr": se,
                    "shots": cfg.shots,
                    "wall_seconds": round(time.perf_counter() - t0, 3),
                }
            )
    return rows


# ---------------------------------------------------------------------------
# logical failure campaigns
# ---------------------------------------------------------------------------


def logical_point(
    d: int,
    sigma_db: float,
    cfg: RunConfig,
) -> tuple[MemoryResult, MemoryRunner]:
    runner = MemoryRunner(d, analog=cfg.analog, decoder=cfg.decoder)
    res = runner.run(
        GkpParams(sigma_db, cfg.lam),
        seed=cfg.seed,
        shots=cfg.shots,
        workers=cfg.workers,
        rel_se_target=cfg.rel_se,
    )
    return res, runner


def cmd_logical_curve(cfg: RunConfig) -> list[dict]:
    """Logical Z and X failure rates per (distance, squeezing)."""
    rows = []
    for d in cfg.d:
        for sigma_db in cfg.sigma_db:
            res, _ = logical_point(d, sigma_db, cfg)
            rows.append(
                {
                    "d": d,
                    "sigma_db": sigma_db,
                    "weights": cfg.weights,
                    "logical_z_rate": res.p_fail_z,
                    "stderr_z": res.stderr_z(),
                    "logical_x_rate": res.p_fail_x,
                    "stderr_x": res.stderr_x(),
                    "shots": res.shots,
                    "wall_seconds": round(res.wall_seconds, 3),
                }
            )
    return rows


def find_crossing(
    sigma_grid, rates_a, rates_b
) -> tuple[float, tuple[float, float]] | None:
    """Log-linear interpolated crossing of two failure-rate curves.

    Returns (sigma_db estimate, bracketing grid interval), or None when the
    sign of log(a) - log(b) never changes on the grid.
    """
    sigma_grid = np.asarray(sigma_grid, dtype=float)
    la = np.log(np.asarray(rates_a, dtype=float))
    lb = np.log(np.asarray(rates_b, dtype=float))
    diff = la - lb
    for i in range(len(sigma_grid) - 1):
        if diff[i] == 0.0:
            return float(sigma_grid[i]), (float(sigma_grid[i]), float(sigma_grid[i + 1]))
        if diff[i] * diff[i + 1] < 0:
            frac = diff[i] / (diff[i] - diff[i + 1])
            est = sigma_grid[i] + frac * (sigma_grid[i + 1] - sigma_grid[i])
            return float(est), (float(sigma_grid[i]), float(sigma_grid[i + 1]))
    return None


def cmd_threshold(cfg: RunConfig) -> dict:
    """Locate the crossing of adjacent-distance logical-failure curves."""
    if len(cfg.d) < 2:
        raise ValueError("threshold scan needs at least two distances")
    curve_rows = cmd_logical_curve(cfg)
    by_d = {d: [r for r in curve_rows if r["d"] == d] for d in cfg.d}
    crossings = []
    ds = sorted(cfg.d)
    for d1, d2 in zip(ds, ds[1:]):
        rows1 = sorted(by_d[d1], key=lambda r: r["sigma_db"])
        rows2 = sorted(by_d[d2], key=lambda r: r["sigma_db"])
        grid = [r["sigma_db"] for r in rows1]
        cross = find_crossing(
            grid,
            [r["logical_z_rate"] for r in rows1],
            [r["logical_z_rate"] for r in rows2],
        )
        crossings.append(
            {
                "d_pair": (d1, d2),
                "crossing_db": None if cross is None else round(cross[0], 4),
                "bracket": None if cross is None else cross[1],
            }
        )
    return {"curve": curve_rows, "crossings": crossings}


# ---------------------------------------------------------------------------
# resource overhead (closed-form comparison)
# ---------------------------------------------------------------------------


def standard_surface_overhead(p: float, target_pl: float = 1e-7) -> dict:
    """Smallest odd distance with 0.1*(100 p)^((d+1)/2) below the target.

    Valid below the toy-model threshold p = 1e-2.
    """
    if p >= 1e-2:
        return {"p": p, "achievable": False, "reason": "p at or above the 1e-2 toy threshold"}
    d = 3
    while True:
        pl = 0.1 * (100.0 * p) ** ((d + 1) // 2)
        if pl < target_pl:
            return {
                "p": p,
                "achievable": True,
                "d_min": d,
                "p_l": pl,
                "qubits": 2 * d * d - 1,
            }
        d += 2
        if d > 501:
            return {"p": p, "achievable": False, "reason": "no d <= 501 reaches the target"}


def surface_gkp_overhead(d_min: int) -> dict:
    """Mode/qubit counts of the surface-GKP code at a given distance."""
    qubits = 2 * d_min * d_min - 1
    return {"d_min": d_min, "qubits": qubits, "modes": 3 * qubits}


def gkp_d_from_curve(rows: list[dict], sigma_db: float, target_pl: float) -> int | None:
    """Smallest measured distance whose logical-Z rate is below the target."""
    cands = [
        r for r in rows
        if abs(r["sigma_db"] - sigma_db) < 1e-9 and r["logical_z_rate"] < target_pl
    ]
    return min((r["d"] for r in cands), default=None)


def cmd_overhead(cfg: RunConfig) -> list[dict]:
    """Overhead table rows: standard surface code vs surface-GKP.

    Gate failure rates come either directly from ``p`` or from a
    Table-I-style Monte Carlo estimate at each requested squeezing.
    """
    if cfg.p:
        sources = [(None, p) for p in cfg.p]
    else:
        sources = [
            (db, gate_failure_rate("cnot", GkpParams(db, 1.0), "ml", cfg.shots, cfg.seed)[0])
            for db in cfg.sigma_db
        ]
    rows = []
    for sigma_db, p in sources:
        std = standard_surface_overhead(p, cfg.target_pl)
        row = {"sigma_db": sigma_db, "p_cnot": p, **{f"std_{k}": v for k, v in std.items()}}
        gkp_d = cfg.gkp_d or None
        if gkp_d is None and cfg.curve_file and sigma_db is not None:
            curve = read_csv_rows(cfg.curve_file)
            gkp_d = gkp_d_from_curve(curve, sigma_db, cfg.target_pl)
        if gkp_d:
            row.update({f"gkp_{k}": v for k, v in surface_gkp_overhead(gkp_d).items()})
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def write_csv(path: str, rows: list[dict], config_echo: dict) -> None:
    """Write rows with the config echoed in '#' comments.

    The timestamp lives in its own comment line so that byte-level
    reproducibility holds for everything below it.
    """
    if not rows:
        raise ValueError("no rows to write")
    cols = list(rows[0].keys())
    lines = [f"# timestamp={time.strftime('%Y-%m-%dT%H:%M:%S')}"]
    for key in sorted(config_echo):
        lines.append(f"# {key}={config_echo[key]}")
    lines.append(",".join(cols))
    for row in rows:
        lines.append(",".join(_fmt(row.get(c)) for c in cols))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, tuple):
        return ";".join(str(v) for v in value)
    return str(value)


def read_csv_rows(path: str) -> list[dict]:
    """Read a campaign CSV back into typed rows (comments skipped)."""
    rows = []
    with open(path) as fh:
        header = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                continue
            vals = line.split(",")
            row = {}
            for key, val in zip(header, vals):
                try:
                    row[key] = int(val)
                except ValueError:
                    try:
                        row[key] = float(val)
                    except ValueError:
                        row[key] = val
            rows.append(row)
    return rows
