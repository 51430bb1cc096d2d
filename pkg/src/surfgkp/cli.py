"""Command-line interface: ``surfgkp <subcommand>``.

Subcommands
-----------
cnot-table     Error-corrected two-qubit gate failure rates vs squeezing,
               for both the maximum-likelihood and closest-integer decoders.
               CSV columns: sigma_db, decoder, failure_rate, stderr, shots,
               wall_seconds.
logical-curve  Surface-GKP logical Z/X failure rates per (distance,
               squeezing).  CSV columns: d, sigma_db, weights,
               logical_z_rate, stderr_z, logical_x_rate, stderr_x, shots,
               wall_seconds.
threshold      Runs logical curves for >= 2 distances and reports the
               log-linear crossing of adjacent-distance curves.
overhead       Resource comparison: standard surface code distance/qubits
               from the closed-form logical-rate estimate vs surface-GKP
               modes and qubits.

Exit status is 0 on success, 2 on configuration errors (argparse), and 1
on I/O or runtime failures.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments as xp


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key=value config file; flags override it")
    sub.add_argument("--d", help="comma-separated odd distances, e.g. 3,5")
    sub.add_argument("--sigma-db", dest="sigma_db", help="comma-separated squeezings in dB")
    sub.add_argument("--lambda", dest="lam", type=float, help="ancilla lattice aspect ratio")
    sub.add_argument("--decoder", choices=("ml", "closest"), help="shift decoder")
    sub.add_argument("--weights", choices=("analog", "none"), help="edge-weight mode")
    sub.add_argument("--shots", type=int, help="shot cap per data point")
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--workers", type=int, help="worker processes")
    sub.add_argument("--out", help="output CSV path (default: stdout)")
    sub.add_argument(
        "--rel-se",
        dest="rel_se",
        type=float,
        help="adaptive stop: halt when the relative standard error drops "
        "below this value (0 disables; default 0.1 for logical campaigns)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surfgkp",
        description="Monte Carlo simulator of the surface-GKP code",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("cnot-table", help="gate failure rates vs squeezing", description="CSV columns: sigma_db, decoder, failure_rate, stderr, shots, wall_seconds")
    _add_common(p)
    p.add_argument("--gate", choices=("cnot", "cz"), help="gate kind (default cnot)")

    p = subs.add_parser("logical-curve", help="logical failure rates per (d, sigma_db)", description="CSV columns: d, sigma_db, weights, logical_z_rate, stderr_z, logical_x_rate, stderr_x, shots, wall_seconds")
    _add_common(p)

    p = subs.add_parser("threshold", help="crossing of adjacent-distance curves")
    _add_common(p)

    p = subs.add_parser("overhead", help="resource overhead comparison")
    _add_common(p)
    p.add_argument("--target-pl", dest="target_pl", type=float, help="target logical failure rate (default 1e-7)")
    p.add_argument("--gkp-d", dest="gkp_d", type=int, help="surface-GKP distance (otherwise read from --curve-file)")
    p.add_argument("--curve-file", dest="curve_file", help="logical-curve CSV to read the surface-GKP distance from")
    p.add_argument("--p", dest="p", help="comma-separated gate failure rates (skips the Monte Carlo estimate)")

    return parser


def _make_config(args: argparse.Namespace) -> xp.RunConfig:
    mapping: dict = {}
    if getattr(args, "config", None):
        mapping.update(xp.parse_config_file(args.config))
    for key in (
        "d", "sigma_db", "lam", "decoder", "weights", "shots", "seed",
        "workers", "out", "rel_se", "gate", "target_pl", "gkp_d", "curve_file", "p",
    ):
        val = getattr(args, key, None)
        if val is not None:
            mapping[key] = val
    if args.command in ("logical-curve", "threshold") and "rel_se" not in mapping:
        mapping["rel_se"] = 0.1
    return xp.config_from_mapping(mapping, command=args.command)


def _emit(rows, cfg: xp.RunConfig) -> None:
    echo = {k: v for k, v in vars(cfg).items() if v not in ("", None)}
    if cfg.out:
        xp.write_csv(cfg.out, rows, echo)
    else:
        cols = list(rows[0].keys())
        print(",".join(cols))
        for row in rows:
            print(",".join(xp._fmt(row.get(c)) for c in cols))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _make_config(args)
        if cfg.command == "cnot-table":
            _emit(xp.cmd_cnot_table(cfg), cfg)
        elif cfg.command == "logical-curve":
            _emit(xp.cmd_logical_curve(cfg), cfg)
        elif cfg.command == "threshold":
            report = xp.cmd_threshold(cfg)
            _emit(report["curve"], cfg)
            for c in report["crossings"]:
                if c["crossing_db"] is None:
                    print(f"# d={c['d_pair']}: no crossing in range", file=sys.stderr)
                else:
                    print(
                        f"# d={c['d_pair']}: crossing at {c['crossing_db']} dB "
                        f"in bracket {c['bracket']}",
                        file=sys.stderr,
                    )
        elif cfg.command == "overhead":
            _emit(xp.cmd_overhead(cfg), cfg)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"surfgkp: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
