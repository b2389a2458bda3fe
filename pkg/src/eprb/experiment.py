"""Run loop, dataset assembly, moment estimation, CHSH evaluation, sweeps.

A run emits ``n_pairs`` photon pairs and records, per station, the branch
signs and the photon/not-photon flag for every emission index.  Moments
come in two families: K-type averages over all emitted pairs, and E-type
averages restricted (through the w weights) to events identified as
photon pairs at both stations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    IdentKind,
    RandomStream,
    RunConfig,
    Settings,
    Topology,
    mix_seed,
)
from .optics import BeamSplitter, emit_pair
from .station import apply_efficiency, identify_coincidence, identify_local, process_arm, stage


@dataclass
class Dataset:
    """Per-station event records, index-aligned by emission number.

    Station 1 holds (s1, s3, w1), station 2 holds (s2, s4, w2); s3/s4 are
    None in the EPRB topology.  The reduced time tags are kept as
    diagnostics; all estimators depend only on the s and w columns.
    """

    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray | None
    s4: np.ndarray | None
    w1: np.ndarray
    w2: np.ndarray
    tau1: np.ndarray
    tau2: np.ndarray
    config: RunConfig

    @property
    def n_pairs(self) -> int:
        return len(self.s1)

    def spin_columns(self) -> dict[int, np.ndarray]:
        cols = {1: self.s1, 2: self.s2}
        if self.s3 is not None:
            cols[3] = self.s3
            cols[4] = self.s4
        return cols


def datasets_equal(a: Dataset, b: Dataset) -> bool:
    for name in ("s1", "s2", "s3", "s4", "w1", "w2", "tau1", "tau2"):
        x, y = getattr(a, name), getattr(b, name)
        if (x is None) != (y is None):
            return False
        if x is not None and not np.array_equal(x, y):
            return False
    return True


def moment_keys(indices: tuple[int, ...] = (1, 2, 3, 4)) -> list[tuple[int, ...]]:
    """All index subsets of orders 1..len(indices), in canonical order."""
    keys: list[tuple[int, ...]] = []
    for order in range(1, len(indices) + 1):
        keys.extend(itertools.combinations(indices, order))
    return keys


@dataclass(frozen=True)
class MomentEstimates:
    """All K- and E-type moments of one dataset.

    Keys are index tuples, e.g. (1, 2) for the first pair correlation.
    E-moments are None when no pair survived identification; that state is
    explicit rather than silently zero.
    """

    k: dict[tuple[int, ...], float]
    e: dict[tuple[int, ...], float | None]
    n_pairs: int
    n_coincident: int


def estimate_moments(ds: Dataset) -> MomentEstimates:
    cols = ds.spin_columns()
    n = ds.n_pairs
    w12 = (ds.w1 * ds.w2).astype(np.int8)
    nc = int(w12.sum(dtype=np.int64))
    k: dict[tuple[int, ...], float] = {}
    e: dict[tuple[int, ...], float | None] = {}
    for key in moment_keys(tuple(sorted(cols))):
        prod = cols[key[0]]
        for i in key[1:]:
            prod = prod * cols[i]
        # integer sums keep the estimates exactly rational before the
        # single final division
        k[key] = int(prod.sum(dtype=np.int64)) / n
        e[key] = int((prod * w12).sum(dtype=np.int64)) / nc if nc else None
    return MomentEstimates(k=k, e=e, n_pairs=n, n_coincident=nc)


# --------------------------------------------------------------------------
# CHSH combinations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ChshCounts:
    """Exact integer accumulators for the single-run CHSH combination.

    num/den give sum w * (s1s3 + s1s4 + s2s3 - s2s4) over sum w; the
    per-event combination is +-2 identically, so |num| <= 2*den holds as
    an integer statement with no floating-point slack.
    """

    e_num: int
    e_den: int
    k_num: int
    k_den: int


def chsh_counts(ds: Dataset) -> ChshCounts:
    if ds.s3 is None:
        raise ValueError("single-run CHSH needs the EEPRB topology")
    g = ds.s1 * (ds.s3 + ds.s4) + ds.s2 * (ds.s3 - ds.s4)  # +-2 per event
    w12 = (ds.w1 * ds.w2).astype(np.int8)
    return ChshCounts(
        e_num=int((g * w12).sum(dtype=np.int64)),
        e_den=int(w12.sum(dtype=np.int64)),
        k_num=int(g.sum(dtype=np.int64)),
        k_den=ds.n_pairs,
    )


def chsh_single_run(m: MomentEstimates) -> tuple[float, float | None]:
    """E13 + E14 + E23 - E24 from the K- and E-moments of one EEPRB run.

    The per-event identity s1(s3+s4) + s2(s3-s4) = +-2 bounds both values
    by 2 in magnitude for any dataset whatsoever.
    """
    if (1, 3) not in m.k:
        raise ValueError("single-run CHSH needs the EEPRB topology")
    k = m.k[(1, 3)] + m.k[(1, 4)] + m.k[(2, 3)] - m.k[(2, 4)]
    es = (m.e[(1, 3)], m.e[(1, 4)], m.e[(2, 3)], m.e[(2, 4)])
    e = None if any(v is None for v in es) else es[0] + es[1] + es[2] - es[3]
    return k, e


def chsh_multi_run(e_ab: float, e_abp: float, e_apb: float, e_apbp: float) -> float:
    """|E(a,b) - E(a,b') + E(a',b) + E(a',b')| from four separate runs."""
    return abs(e_ab - e_abp + e_apb + e_apbp)


# --------------------------------------------------------------------------
# Single run
# --------------------------------------------------------------------------

def run(config: RunConfig, engine: str = "batch") -> Dataset:
    """Simulate one run; deterministic given the seed.

    ``engine="batch"`` is the vectorized production path,
    ``engine="event_loop"`` the literal one-event-at-a-time reference.
    Both consume the identical stream layout and produce equal datasets.
    """
    config.validate()
    if engine == "batch":
        from . import engine as _engine
        return _engine.simulate(config)
    if engine == "event_loop":
        return run_event_loop(config)
    raise ValueError(f"unknown engine {engine!r}")


def run_event_loop(config: RunConfig) -> Dataset:
    """Reference implementation: explicit per-event loop over all pairs."""
    config.validate()
    st = RandomStream(config.seed)
    s = config.settings
    eeprb = config.topology is Topology.EEPRB

    def bs(orientation):
        return BeamSplitter(orientation, config.law, config.t_max,
                            config.alpha, config.beta)

    bs1, bs2 = bs(s.a), bs(s.b)
    if eeprb:
        bs3, bs4, bs5, bs6 = bs(s.c), bs(s.c), bs(s.d), bs(s.d)

    n = config.n_pairs
    s1 = np.empty(n, np.int8)
    s2 = np.empty(n, np.int8)
    s3 = np.empty(n, np.int8) if eeprb else None
    s4 = np.empty(n, np.int8) if eeprb else None
    w1 = np.empty(n, np.uint8)
    w2 = np.empty(n, np.uint8)
    t1 = np.empty(n)
    t2 = np.empty(n)

    for i in range(n):
        p1, p2 = emit_pair(config.source, st)
        if eeprb:
            # Both first-stage splitters consume their draws before the
            # second stage, matching the core draw-order contract.
            v1, out1, tau1 = stage(bs1, p1, st)
            v2, out2, tau2 = stage(bs2, p2, st)
            v3, _, tau3 = stage(bs3 if v1 > 0 else bs4, out1, st)
            v4, _, tau4 = stage(bs5 if v2 > 0 else bs6, out2, st)
            s3[i], s4[i] = v3, v4
            t1[i] = tau1 + tau3
            t2[i] = tau2 + tau4
        else:
            arm1 = process_arm(bs1, None, None, p1, st)
            arm2 = process_arm(bs2, None, None, p2, st)
            v1, v2 = arm1.s_first, arm2.s_first
            t1[i] = arm1.tau_reduced
            t2[i] = arm2.tau_reduced
        s1[i], s2[i] = v1, v2

        if config.identification is IdentKind.LOCAL:
            a1 = identify_local(t1[i], config.window)
            a2 = identify_local(t2[i], config.window)
        elif config.identification is IdentKind.COINCIDENCE:
            a1, a2 = identify_coincidence(t1[i], t2[i], config.window)
        else:
            a1 = a2 = 1
        w1[i] = apply_efficiency(a1, config.eta, st)
        w2[i] = apply_efficiency(a2, config.eta, st)

    return Dataset(s1=s1, s2=s2, s3=s3, s4=s4, w1=w1, w2=w2,
                   tau1=t1, tau2=t2, config=config)


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepGeometry:
    """How the four orientations follow the swept angle theta = a - b."""

    b: float = 0.0
    c_offset: float = np.pi / 6   # c = a + c_offset
    d: float = np.pi / 3


def settings_for_theta(theta: float, geom: SweepGeometry) -> Settings:
    a = geom.b + theta
    return Settings(a=a, b=geom.b, c=a + geom.c_offset, d=geom.d)


@dataclass(frozen=True)
class SweepRow:
    theta: float
    config: RunConfig
    moments: MomentEstimates
    chsh: ChshCounts | None   # None in the EPRB topology


def run_sweep(base: RunConfig, thetas, geometry: SweepGeometry | None = None,
              engine: str = "batch") -> list[SweepRow]:
    """One run per grid point; settings follow the geometry.

    In cfd mode every point replays the identical stream (same seed);
    otherwise each point gets a seed mixed deterministically from the base
    seed and the grid index, so sweeps are reproducible point by point.
    """
    geom = geometry or SweepGeometry()
    rows = []
    for i, theta in enumerate(thetas):
        seed = base.seed if base.cfd else mix_seed(base.seed, i)
        cfg = replace(base, settings=settings_for_theta(float(theta), geom), seed=seed)
        ds = run(cfg, engine=engine)
        rows.append(SweepRow(
            theta=float(theta),
            config=cfg,
            moments=estimate_moments(ds),
            chsh=chsh_counts(ds) if cfg.topology is Topology.EEPRB else None,
        ))
    return rows
