"""Vectorized run engine.

Draws the whole per-event word block up front (row major, so the word
order equals the event loop's) and evaluates the splitter rules on
columns.  Every expression mirrors the scalar operations in optics and
station operation for operation, in the same order, so the two paths
produce bit-identical datasets; the test suite pins that equivalence.

The branching structure makes the second splitter stage vectorizable:
photons arrive there with one of two constant polarizations (the first
splitter's axes), so the memoryless factor is (1/2)^beta on the first
arrival and exactly zero afterwards, and the learning memory follows the
same linear recurrence restricted to that splitter's arrival subsequence.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

from .core import (
    FixedPolarization,
    IdentKind,
    Learning,
    Memoryless,
    NoRetardation,
    OrthogonalRandom,
    ParallelRandom,
    RandomStream,
    RunConfig,
    Topology,
    TWO_PI,
    draws_per_event,
    open01,
)
from .experiment import Dataset


def _ema(values: np.ndarray, gamma: float) -> np.ndarray:
    """u_n = (1-gamma) * x_n + gamma * u_{n-1} with u_{-1} = 0."""
    return lfilter([1.0 - gamma], [1.0, -gamma], values)


def _first_stage_tau(phi: np.ndarray, orientation: float, r_prime: np.ndarray,
                     law, t_max: float, alpha: float, beta: float) -> np.ndarray:
    """Retardations at a first-stage splitter fed the full event sequence."""
    n = len(phi)
    if isinstance(law, NoRetardation):
        return np.zeros(n)
    pref = np.power(np.abs(np.sin(2.0 * (phi - orientation))), alpha)
    if isinstance(law, Memoryless):
        # u is the previous event's unit polarization; u0 = 0
        dot = np.empty(n)
        dot[0] = 0.0
        dot[1:] = np.cos(phi[1:] - phi[:-1])
    else:
        ux = _ema(np.cos(phi), law.gamma)
        uy = _ema(np.sin(phi), law.gamma)
        dot = np.empty(n)   # here: |u|^2 before the update
        dot[0] = 0.0
        dot[1:] = ux[:-1] * ux[:-1] + uy[:-1] * uy[:-1]
    factor = np.power(np.abs((1.0 - dot) / 2.0), beta)
    return r_prime * t_max * pref * factor


def _second_stage_tau(s_first: np.ndarray, branch_plus: float, orientation: float,
                      r_prime: np.ndarray, law, t_max: float, alpha: float,
                      beta: float) -> np.ndarray:
    """Retardations at the second stage, split by the branch taken.

    ``branch_plus`` is the first splitter's orientation: +1 photons arrive
    polarized along it, -1 photons along its perpendicular.
    """
    n = len(s_first)
    tau = np.zeros(n)
    if isinstance(law, NoRetardation):
        return tau
    for sign, phi_in in ((1, branch_plus), (-1, branch_plus + np.pi / 2)):
        idx = np.nonzero(s_first == sign)[0]
        if idx.size == 0:
            continue
        m = idx.size
        pref = np.power(np.abs(np.sin(2.0 * (phi_in - orientation))), alpha)
        if isinstance(law, Memoryless):
            # constant input: x.u is 0 on the first arrival, cos(0) after
            dot = np.empty(m)
            dot[0] = 0.0
            dot[1:] = np.cos(0.0)
        else:
            ux = _ema(np.full(m, np.cos(phi_in)), law.gamma)
            uy = _ema(np.full(m, np.sin(phi_in)), law.gamma)
            dot = np.empty(m)
            dot[0] = 0.0
            dot[1:] = ux[:-1] * ux[:-1] + uy[:-1] * uy[:-1]
        factor = np.power(np.abs((1.0 - dot) / 2.0), beta)
        tau[idx] = r_prime[idx] * t_max * pref * factor
    return tau


def simulate(config: RunConfig) -> Dataset:
    config.validate()
    st = RandomStream(config.seed)
    s = config.settings
    n = config.n_pairs
    eeprb = config.topology is Topology.EEPRB

    raw = st.raw((n, draws_per_event(config.topology, config.source)))
    col = 0
    if isinstance(config.source, FixedPolarization):
        phi1 = np.full(n, config.source.p)
        phi2 = np.full(n, config.source.q)
    else:
        phi1 = TWO_PI * raw[:, 0]
        phi2 = phi1 + np.pi / 2 if isinstance(config.source, OrthogonalRandom) else phi1
        col = 1
    draws = open01(raw[:, col:])
    r1, rp1, r2, rp2 = draws[:, 0], draws[:, 1], draws[:, 2], draws[:, 3]

    s1 = np.where(np.power(np.cos(phi1 - s.a), 2) > r1, 1, -1).astype(np.int8)
    s2 = np.where(np.power(np.cos(phi2 - s.b), 2) > r2, 1, -1).astype(np.int8)
    tau1 = _first_stage_tau(phi1, s.a, rp1, config.law, config.t_max,
                            config.alpha, config.beta)
    tau2 = _first_stage_tau(phi2, s.b, rp2, config.law, config.t_max,
                            config.alpha, config.beta)

    if eeprb:
        r3, rp3, r4, rp4 = draws[:, 4], draws[:, 5], draws[:, 6], draws[:, 7]
        e1, e2 = draws[:, 8], draws[:, 9]
        out1 = np.where(s1 == 1, s.a, s.a + np.pi / 2)
        out2 = np.where(s2 == 1, s.b, s.b + np.pi / 2)
        s3 = np.where(np.power(np.cos(out1 - s.c), 2) > r3, 1, -1).astype(np.int8)
        s4 = np.where(np.power(np.cos(out2 - s.d), 2) > r4, 1, -1).astype(np.int8)
        t1 = tau1 + _second_stage_tau(s1, s.a, s.c, rp3, config.law,
                                      config.t_max, config.alpha, config.beta)
        t2 = tau2 + _second_stage_tau(s2, s.b, s.d, rp4, config.law,
                                      config.t_max, config.alpha, config.beta)
    else:
        e1, e2 = draws[:, 4], draws[:, 5]
        s3 = s4 = None
        t1, t2 = tau1, tau2

    if config.identification is IdentKind.LOCAL:
        w1 = t1 <= config.window
        w2 = t2 <= config.window
    elif config.identification is IdentKind.COINCIDENCE:
        w1 = w2 = np.abs(t1 - t2) <= config.window
    else:
        w1 = w2 = np.ones(n, dtype=bool)
    w1 = (w1 & (e1 <= config.eta)).astype(np.uint8)
    w2 = (w2 & (e2 <= config.eta)).astype(np.uint8)

    return Dataset(s1=s1, s2=s2, s3=s3, s4=s4, w1=w1, w2=w2,
                   tau1=t1, tau2=t2, config=config)
