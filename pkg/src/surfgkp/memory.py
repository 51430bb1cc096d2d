"""Surface-GKP memory experiments: simulate, decode, adjudicate.

A memory experiment is t = d noisy syndrome rounds followed by one
noiseless stabilizer-reconstruction layer.  Shots are processed in fixed
4096-shot blocks, each drawing from its own deterministic generator
stream, so estimates are bit-identical for any worker count.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import MarginalCache
from .circuit import FrameSimulator, marginal_pe
from .decoder import Decoder, adjudicate, assign_weights
from .gkp import BLOCK_SIZE, GkpParams, shot_rng
from .graphs import cached_graphs
from .lattice import build_lattice

#: Stream-domain tags feeding :func:`surfgkp.gkp.shot_rng`.
DOMAIN_MEMORY = 1
DOMAIN_GATE = 2


@dataclass
class MemoryResult:
    """Aggregated Monte Carlo tallies of a memory-experiment campaign."""

    shots: int = 0
    fail_z: int = 0
    fail_x: int = 0
    single_fault_shots: int = 0
    single_fault_failures: int = 0
    wall_seconds: float = 0.0

    def merge(self, other: "MemoryResult") -> "MemoryResult":
        return MemoryResult(
            self.shots + other.shots,
            self.fail_z + other.fail_z,
            self.fail_x + other.fail_x,
            self.single_fault_shots + other.single_fault_shots,
            self.single_fault_failures + other.single_fault_failures,
            self.wall_seconds + other.wall_seconds,
        )

    @property
    def p_fail_z(self) -> float:
        return self.fail_z / self.shots if self.shots else float("nan")

    @property
    def p_fail_x(self) -> float:
        return self.fail_x / self.shots if self.shots else float("nan")

    def stderr_z(self) -> float:
        p = self.p_fail_z
        return float(np.sqrt(p * (1.0 - p) / self.shots)) if self.shots else float("nan")

    def stderr_x(self) -> float:
        p = self.p_fail_x
        return float(np.sqrt(p * (1.0 - p) / self.shots)) if self.shots else float("nan")


@lru_cache(maxsize=8)
def _context(dx: int, dz: int, t: int):
    lattice = build_lattice(dx, dz)
    sim = FrameSimulator(lattice, t)
    graph_z, graph_x = cached_graphs(dx, dz, t)
    return lattice, sim, graph_z, graph_x, Decoder(graph_z), Decoder(graph_x)


class MemoryRunner:
    """Reusable decoder pipeline for one (dx, dz, t, weight-mode) setup."""

    def __init__(
        self,
        d: int,
        dz: int | None = None,
        t: int | None = None,
        analog: bool = True,
        decoder: str = "ml",
        cache: MarginalCache | None = None,
    ):
        self.dx = d
        self.dz = d if dz is None else dz
        self.t = max(self.dx, self.dz) if t is None else t
        self.analog = analog
        self.decoder = decoder
        self.cache = cache
        (
            self.lattice,
            self.sim,
            self.graph_z,
            self.graph_x,
            self.dec_z,
            self.dec_x,
        ) = _context(self.dx, self.dz, self.t)
        self._static: dict[tuple, tuple] = {}

    # ------------------------------------------------------------------

    def _static_tables(self, params: GkpParams):
        """Precompute weights and all-pairs routes for no-analog decoding."""
        key = (round(params.sigma_db, 12), round(params.lam, 12))
        if key not in self._static:
            pe = marginal_pe(self.lattice, params, self.t, self.cache)
            wz = assign_weights(self.graph_z, pe)
            wx = assign_weights(self.graph_x, pe)
            dz_, pz = self.dec_z.all_pairs(wz)
            dx_, px = self.dec_x.all_pairs(wx)
            self._static[key] = (wz, wx, dz_, pz, dx_, px)
        return self._static[key]

    def run_block(self, params: GkpParams, rng: np.random.Generator, nshots: int) -> MemoryResult:
        """Simulate and decode one block of shots with one rng stream."""
        t0 = time.perf_counter()
        lat = self.lattice
        t = self.t
        m1 = lat.m1
        res = self.sim.run_batch(params, rng, nshots, analog=self.analog, decoder=self.decoder)

        if self.analog:
            wz_all = assign_weights(self.graph_z, res.pe)
            wx_all = assign_weights(self.graph_x, res.pe)
        else:
            wz, wx, dzt, pzt, dxt, pxt = self._static_tables(params)

        # group detection events by shot
        shots_idx, layers, stabs = np.nonzero(res.events)
        starts = np.searchsorted(shots_idx, np.arange(nshots + 1))
        vert_z = stabs * (t + 1) + layers  # valid where stabs < m1
        vert_x = (stabs - m1) * (t + 1) + layers

        out = MemoryResult()
        out.shots = nshots
        out.single_fault_shots = int(np.count_nonzero(res.n_faults == 1))
        for s in range(nshots):
            lo, hi = starts[s], starts[s + 1]
            if lo == hi and not res.xf[s].any() and not res.zf[s].any():
                continue
            sel = slice(lo, hi)
            isz = stabs[sel] < m1
            evz = vert_z[sel][isz]
            evx = vert_x[sel][~isz]
            if self.analog:
                corr_z, _ = self.dec_z.decode(wz_all[s], evz)
                corr_x, _ = self.dec_x.decode(wx_all[s], evx)
            else:
                corr_z, _ = self.dec_z.decode_static(wz, dzt, pzt, evz)
                corr_x, _ = self.dec_x.decode_static(wx, dxt, pxt, evx)
            fx, fz = adjudicate(res.xf[s], res.zf[s], corr_x, corr_z, lat)
            out.fail_z += fz
            out.fail_x += fx
            if res.n_faults[s] == 1:
                out.single_fault_failures += int(fx or fz)
        out.wall_seconds = time.perf_counter() - t0
        return out

    def run(
        self,
        params: GkpParams,
        seed: int,
        shots: int,
        workers: int = 1,
        rel_se_target: float = 0.0,
        check_every: int = 16,
    ) -> MemoryResult:
        """Run up to ``shots`` shots (cap), in deterministic 4096-shot blocks.

        With ``rel_se_target`` > 0, stops after the first whole block at
        which the logical-Z relative standard error drops below the
        target; the stop rule consumes blocks in index order, so results
        do not depend on the worker count.
        """
        blocks = _block_sizes(shots)
        args = [
            (self.dx, self.dz, self.t, self.analog, self.decoder,
             params.sigma_db, params.lam, seed, b, n)
            for b, n in enumerate(blocks)
        ]
        total = MemoryResult()
        if workers <= 1:
            results = (_run_block_job(a) for a in args)
        else:
            import multiprocessing as mp

            pool = mp.get_context("spawn").Pool(workers)
            results = pool.imap(_run_block_job, args, chunksize=1)
        try:
            for b, r in enumerate(results):
                total = total.merge(r)
                if (
                    rel_se_target > 0
                    and (b + 1) % check_every == 0
                    and total.fail_z > 0
                    and total.stderr_z() < rel_se_target * total.p_fail_z
                ):
                    break
        finally:
            if workers > 1:
                pool.terminate()
                pool.join()
        return total


def _block_sizes(shots: int) -> list[int]:
    full, rem = divmod(shots, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rem] if rem else [])


def _run_block_job(arg) -> MemoryResult:
    (dx, dz, t, analog, decoder, sigma_db, lam, seed, block_index, nshots) = arg
    runner = MemoryRunner(dx, dz, t, analog, decoder)
    rng = shot_rng(seed, DOMAIN_MEMORY, block_index)
    return runner.run_block(GkpParams(sigma_db, lam), rng, nshots)


def run_memory_experiment(
    d: int,
    params: GkpParams,
    use_analog: bool,
    rng: np.random.Generator,
    decoder: str = "ml",
) -> dict:
    """Single-shot memory experiment; returns the logical failure flags."""
    runner = MemoryRunner(d, analog=use_analog, decoder=decoder)
    res = runner.run_block(params, rng, 1)
    return {"logical_x_failed": bool(res.fail_x), "logical_z_failed": bool(res.fail_z)}
