"""Acceptance gate: the statistical verification matrix at desk scale.

Every criterion runs 10^6 pairs per grid point on the 25-point theta grid
(b = 0, c = a + pi/6, d = pi/3) with the fixed seed below, and compares
against the closed-form models under the tolerance policy: an estimate
built from M effective samples (M = emitted pairs for K-moments, M =
coincident pairs for E-moments) must sit within 5/sqrt(M) of its
reference, and at least 95% of the estimates in a check must sit within
3/sqrt(M).  The 95% clause is pooled over all (moment, grid point)
estimates of one check.

Results are cached per configuration, so criteria that share a sweep
(e.g. the W = 1 ratios and the efficiency baseline) reuse the same runs.
"""

from __future__ import annotations

import math
import os
import subprocess
import sys
import tempfile
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .core import (
    FixedPolarization,
    IdentKind,
    Learning,
    Memoryless,
    NoRetardation,
    OrthogonalRandom,
    ParallelRandom,
    RunConfig,
    Settings,
    Topology,
)
from .experiment import (
    SweepGeometry,
    SweepRow,
    chsh_multi_run,
    chsh_single_run,
    estimate_moments,
    run,
    run_sweep,
    settings_for_theta,
)
from . import oracle

DESK_PAIRS = 1_000_000
SEED = 12345
GEOM = SweepGeometry()
THETAS = np.linspace(0.0, np.pi, 25)

SINGLES = [(1,), (2,), (3,), (4,)]
PAIRS = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
TRIPLES = [(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)]
QUAD = (1, 2, 3, 4)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def report_line(self) -> str:
        return f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'}  {self.title}"


def _base_config(**overrides) -> RunConfig:
    kw = dict(settings=settings_for_theta(0.0, GEOM), seed=SEED,
              topology=Topology.EEPRB, source=OrthogonalRandom(),
              law=Memoryless(), t_max=5000.0, alpha=4.0, beta=0.5,
              identification=IdentKind.LOCAL, window=1.0, eta=1.0,
              n_pairs=DESK_PAIRS, cfd=False)
    kw.update(overrides)
    return RunConfig(**kw)


# Every EEPRB sweep row produced during acceptance, for the CHSH bound check.
_EEPRB_ROWS: list[SweepRow] = []


@lru_cache(maxsize=None)
def _sweep(base: RunConfig) -> tuple[SweepRow, ...]:
    rows = tuple(run_sweep(base, THETAS, GEOM))
    if base.topology is Topology.EEPRB:
        _EEPRB_ROWS.extend(rows)
    return rows


@lru_cache(maxsize=None)
def _single(cfg: RunConfig):
    return estimate_moments(run(cfg))


# --------------------------------------------------------------------------
# Tolerance policy
# --------------------------------------------------------------------------

def _policy(name: str, samples: list[tuple[float | None, float, int]]) -> Check:
    """Hard 5/sqrt(M) per estimate; >= 95% of estimates within 3/sqrt(M)."""
    worst = 0.0
    within3 = 0
    hard_failures = []
    for est, ref, m in samples:
        if est is None or m <= 0:
            return Check(name, False, "estimate undefined (no coincident pairs)")
        err = abs(est - ref)
        tol5 = 5.0 / math.sqrt(m)
        if err <= 3.0 / math.sqrt(m):
            within3 += 1
        worst = max(worst, err / tol5)
        if err > tol5:
            hard_failures.append(f"|{est:+.4f} - {ref:+.4f}| = {err:.4f} > {tol5:.4f}")
    frac = within3 / len(samples)
    passed = not hard_failures and frac >= 0.95
    detail = f"max err/(5/sqrt M) = {worst:.2f}; {frac:.1%} within 3/sqrt(M)"
    if hard_failures:
        detail += f"; {len(hard_failures)} outside 5/sqrt(M), worst {hard_failures[0]}"
    return Check(name, passed, detail)


def _family_checks(rows, family: str, oracle_fn, prefix: str,
                   key_groups=None) -> list[Check]:
    """Policy checks of one moment family against a per-point oracle table."""
    tables = [oracle_fn(r.config) for r in rows]

    def samples(keys):
        out = []
        for r, table in zip(rows, tables):
            m = r.moments
            m_eff = m.n_pairs if family == "k" else m.n_coincident
            vals = m.k if family == "k" else m.e
            out.extend((vals[key], table[key], m_eff) for key in keys)
        return out

    groups = key_groups or [("pair moments", PAIRS), ("single moments", SINGLES),
                            ("triple moments", TRIPLES), ("fourfold moment", [QUAD])]
    return [_policy(f"{prefix} {label}", samples(keys)) for label, keys in groups]


def _ratio_check(name: str, rows, index: int, lo: float, hi: float) -> Check:
    m = rows[index].moments
    ratio = m.n_coincident / m.n_pairs
    return Check(name, lo <= ratio <= hi,
                 f"ratio = {ratio:.4%} (accept {lo:.2%}..{hi:.2%})")


# --------------------------------------------------------------------------
# Criteria
# --------------------------------------------------------------------------

def criterion_1() -> CriterionResult:
    """Without identification the K-moments follow the wave-intensity model."""
    rows = _sweep(_base_config(law=NoRetardation(), identification=IdentKind.NONE))
    checks = _family_checks(
        rows, "k", lambda cfg: oracle.maxwell_moments(cfg.settings, phi0=np.pi / 2),
        "K vs wave intensities (phi0=pi/2):")
    return CriterionResult(1, "maxwell regime (orthogonal source, no identification)",
                           tuple(checks))


def criterion_2() -> CriterionResult:
    """With the W=1 local window the E-moments follow the singlet prediction."""
    rows = _sweep(_base_config())
    checks = _family_checks(
        rows, "e", lambda cfg: oracle.quantum_moments(cfg.settings),
        "E vs singlet quantum theory:")
    return CriterionResult(2, "quantum regime (local window W=1)", tuple(checks))


def criterion_3() -> CriterionResult:
    """Identified-pair ratios at theta = 0 and pi/4 for W = 1 and W = 8.

    The W=8 sweep also re-runs the quantum-agreement policy.  Note the
    finite-window systematic offset of the model scales like
    sqrt(W/t_max) (about 0.04 at W=8) which exceeds 5/sqrt(n_coincident)
    at the high-statistics grid points; see the policy discussion in the
    README.
    """
    rows_w1 = _sweep(_base_config())
    rows_w8 = _sweep(_base_config(window=8.0))
    idx_pi4 = 6  # THETAS[6] == pi/4 on the 25-point grid
    assert abs(THETAS[idx_pi4] - np.pi / 4) < 1e-12
    checks = [
        _ratio_check("W=1 ratio at a=b", rows_w1, 0, 0.09, 0.13),
        _ratio_check("W=1 ratio at |a-b|=pi/4", rows_w1, idx_pi4, 0.0005, 0.0015),
        _ratio_check("W=8 ratio at a=b", rows_w8, 0, 0.16, 0.20),
        _ratio_check("W=8 ratio at |a-b|=pi/4", rows_w8, idx_pi4, 0.006, 0.010),
    ]
    checks += _family_checks(
        rows_w8, "e", lambda cfg: oracle.quantum_moments(cfg.settings),
        "W=8 E vs quantum:")
    return CriterionResult(3, "identified-pair ratios (W=1, W=8)", tuple(checks))


def criterion_4() -> CriterionResult:
    """Parallel source: wave K's (phi0=0), flipped-sign E's, and no density matrix."""
    rows = _sweep(_base_config(source=ParallelRandom()))
    checks = _family_checks(
        rows, "k", lambda cfg: oracle.maxwell_moments(cfg.settings, phi0=0.0),
        "K vs wave intensities (phi0=0):", key_groups=[("pair moments", PAIRS)])
    checks += _family_checks(
        rows, "e", lambda cfg: oracle.flipped_moments(cfg.settings),
        "E vs flipped-sign model:", key_groups=[("pair moments", PAIRS)])
    eig_min = float(oracle.rho_q_eigenvalues(-1.0).min())
    checks.append(Check(
        "E12 = +cos2(a-b) admits no two-spin density matrix",
        not oracle.rho_q_is_density(-1.0) and eig_min < 0,
        f"min eigenvalue of rho(q=-1) = {eig_min:.4f}"))
    return CriterionResult(4, "parallel source (flipped-sign statistics)", tuple(checks))


def criterion_5() -> CriterionResult:
    """Fixed source polarizations reproduce the product state with and without
    identification (K's and E's both follow the product model)."""
    p, q = 0.3, 1.2
    rows = _sweep(_base_config(source=FixedPolarization(p, q)))
    checks = _family_checks(
        rows, "k", lambda cfg: oracle.product_moments(cfg.settings, p, q),
        "K vs product model:")
    checks += _family_checks(
        rows, "e", lambda cfg: oracle.product_moments(cfg.settings, p, q),
        "E vs product model:")
    return CriterionResult(5, "fixed polarizations reproduce the product state",
                           tuple(checks))


def criterion_6() -> CriterionResult:
    """The learning law reproduces the quantum regime across its gamma range."""
    checks = []
    for gamma in (0.1, 0.5, 0.98):
        rows = _sweep(_base_config(law=Learning(gamma)))
        checks += _family_checks(
            rows, "e", lambda cfg: oracle.quantum_moments(cfg.settings),
            f"gamma={gamma}: E vs quantum:")
    return CriterionResult(6, "learning-law robustness (gamma 0.1/0.5/0.98)",
                           tuple(checks))


def criterion_7() -> CriterionResult:
    """EPRB topology, counterfactually definite replay.

    Four runs over the CHSH setting quadruple share one seed; the
    identified correlations must combine to 2*sqrt(2) within the policy
    tolerance, and a cfd sweep must match an ordinary (per-point seeded)
    sweep pointwise.
    """
    a, ap = 0.0, np.pi / 4
    b, bp = np.pi / 8, 3 * np.pi / 8
    base = _base_config(topology=Topology.EPRB, cfd=True)
    e12 = {}
    ms = []
    for key, (sa, sb) in {"ab": (a, b), "abp": (a, bp),
                          "apb": (ap, b), "apbp": (ap, bp)}.items():
        m = _single(replace(base, settings=Settings(a=sa, b=sb)))
        e12[key] = m.e[(1, 2)]
        ms.append(m.n_coincident)
    value = chsh_multi_run(e12["ab"], e12["abp"], e12["apb"], e12["apbp"])
    tol = 5.0 * max(1.0 / math.sqrt(m) for m in ms)
    target = 2.0 * math.sqrt(2.0)
    checks = [Check("multi-run CHSH at the optimal settings",
                    abs(value - target) <= tol,
                    f"|CHSH| = {value:.4f}, target {target:.4f} +- {tol:.4f}")]

    rows_on = _sweep(_base_config(topology=Topology.EPRB, cfd=True))
    rows_off = _sweep(_base_config(topology=Topology.EPRB, cfd=False))
    worst, bad = 0.0, 0
    for r_on, r_off in zip(rows_on, rows_off):
        m = min(r_on.moments.n_coincident, r_off.moments.n_coincident)
        diff = abs(r_on.moments.e[(1, 2)] - r_off.moments.e[(1, 2)])
        tol_pt = 5.0 / math.sqrt(m)
        worst = max(worst, diff / tol_pt)
        bad += diff > tol_pt
    checks.append(Check("cfd on/off E12 curves agree pointwise",
                        bad == 0, f"max |diff|/(5/sqrt M) = {worst:.2f}"))
    return CriterionResult(7, "EPRB counterfactual-definite CHSH", tuple(checks))


def criterion_8() -> CriterionResult:
    """|E13 + E14 + E23 - E24| <= 2 for every EEPRB run, with zero tolerance.

    Checked as the integer statement |sum w*g| <= 2*sum w (the per-event
    combination g is +-2 identically), plus the floating-point moment
    combination against the exact bound.
    """
    _sweep(_base_config())  # ensure at least the quantum sweep is in the ledger
    n_rows = 0
    for row in _EEPRB_ROWS:
        c = row.chsh
        if abs(c.k_num) > 2 * c.k_den:
            return CriterionResult(8, "single-run EEPRB CHSH bound", (Check(
                "integer bound (K)", False, f"theta={row.theta}: {c}"),))
        if c.e_den and abs(c.e_num) > 2 * c.e_den:
            return CriterionResult(8, "single-run EEPRB CHSH bound", (Check(
                "integer bound (E)", False, f"theta={row.theta}: {c}"),))
        k_val, e_val = chsh_single_run(row.moments)
        if abs(k_val) > 2.0 or (e_val is not None and abs(e_val) > 2.0):
            return CriterionResult(8, "single-run EEPRB CHSH bound", (Check(
                "moment combination", False,
                f"theta={row.theta}: K {k_val}, E {e_val}"),))
        n_rows += 1
    return CriterionResult(8, "single-run EEPRB CHSH bound", (Check(
        "|E13+E14+E23-E24| <= 2 on every run", True,
        f"{n_rows} runs checked, exact bound"),))


def criterion_9() -> CriterionResult:
    """A 50% detector efficiency only thins the statistics.

    E-agreement is re-checked with tolerances from the reduced coincidence
    counts; the total coincidence count must scale like eta^2 within 20%
    (checked on the grid aggregate, where the binomial noise is far below
    the 20% band).
    """
    eta = 0.5
    rows_eta = _sweep(_base_config(eta=eta))
    rows_full = _sweep(_base_config())
    checks = _family_checks(
        rows_eta, "e", lambda cfg: oracle.quantum_moments(cfg.settings),
        "eta=0.5 E vs quantum:", key_groups=[("pair moments", PAIRS)])
    total_eta = sum(r.moments.n_coincident for r in rows_eta)
    total_full = sum(r.moments.n_coincident for r in rows_full)
    scale = total_eta / total_full
    checks.append(Check("coincidences scale like eta^2",
                        0.8 * eta ** 2 <= scale <= 1.2 * eta ** 2,
                        f"aggregate ratio = {scale:.4f}, eta^2 = {eta ** 2}"))
    return CriterionResult(9, "detection efficiency eta = 0.5", tuple(checks))


def criterion_10() -> CriterionResult:
    """The closed-form oracles agree with their independent reconstructions."""
    rng = np.random.default_rng(SEED)
    checks = []

    worst = 0.0
    for _ in range(100):
        s = Settings(*rng.uniform(0.0, 2 * np.pi, size=4))
        diff = np.abs(oracle.quantum_joint_trace(s).table - oracle.quantum_joint(s).table)
        worst = max(worst, float(diff.max()))
    checks.append(Check("projector-trace distribution equals the closed form",
                        worst <= 1e-12, f"max |diff| = {worst:.2e}"))

    phis = (np.arange(10_000) + 0.5) * (2 * np.pi / 10_000)
    worst = 0.0
    for _ in range(20):
        a, b, phi0 = rng.uniform(0.0, 2 * np.pi, size=3)
        for s1 in (1, -1):
            for s2 in (1, -1):
                quad = float(np.mean(oracle.maxwell_intensity_phi(s1, s2, a, b, phis, phi0)))
                worst = max(worst, abs(quad - oracle.maxwell_pair(s1, s2, a, b, phi0)))
    checks.append(Check("phi-quadrature of the per-realization intensity",
                        worst <= 1e-6, f"max |quadrature - closed form| = {worst:.2e}"))

    eps = 1e-6
    boundary_ok = (oracle.rho_q_is_density(-1.0 / 3.0 + eps)
                   and not oracle.rho_q_is_density(-1.0 / 3.0 - eps)
                   and oracle.rho_q_is_density(1.0 - eps)
                   and not oracle.rho_q_is_density(1.0 + eps))
    checks.append(Check("rho_q positivity boundary at q = -1/3 and q = 1",
                        boundary_ok, f"probed at +-{eps}"))

    lo_chsh, hi_chsh = 0.0, 0.0
    lo3, hi3 = 0.0, 0.0
    for _ in range(200):
        s = Settings(*rng.uniform(0.0, 2 * np.pi, size=4))
        dist = oracle.quantum_joint(s)
        v = oracle.bell_functional(dist, oracle.g_chsh)
        lo_chsh, hi_chsh = min(lo_chsh, v), max(hi_chsh, v)
        v = oracle.bell_functional(dist, oracle.g_three_pairs)
        lo3, hi3 = min(lo3, v), max(hi3, v)
    tol = 1e-12
    checks.append(Check("quantum CHSH functional stays in [-2, 2]",
                        -2 - tol <= lo_chsh and hi_chsh <= 2 + tol,
                        f"range [{lo_chsh:.4f}, {hi_chsh:.4f}]"))
    checks.append(Check("quantum three-pair functional stays in [-1, 3]",
                        -1 - tol <= lo3 and hi3 <= 3 + tol,
                        f"range [{lo3:.4f}, {hi3:.4f}]"))
    return CriterionResult(10, "oracle self-consistency", tuple(checks))


def criterion_11() -> CriterionResult:
    """Identical seeds give byte-identical CSV files, in and across processes.

    Determinism is structural, so a reduced point count keeps this check
    quick without weakening it.
    """
    from . import cli

    flags = ["sweep", "--pairs", "20000", "--grid-points", "5", "--seed", "777"]
    with tempfile.TemporaryDirectory() as tmp:
        paths = [os.path.join(tmp, f"out{i}.csv") for i in range(4)]
        for path in paths[:2]:
            rc = cli.main(flags + ["--out", path])
            if rc != 0:
                return CriterionResult(11, "byte-identical reruns", (Check(
                    "in-process sweep", False, f"exit code {rc}"),))
        for path in paths[2:]:
            proc = subprocess.run(
                [sys.executable, "-m", "eprb.cli"] + flags + ["--out", path],
                capture_output=True, text=True)
            if proc.returncode != 0:
                return CriterionResult(11, "byte-identical reruns", (Check(
                    "subprocess sweep", False, proc.stderr.strip()),))
        blobs = [open(p, "rb").read() for p in paths]
    checks = (
        Check("same process, twice", blobs[0] == blobs[1]),
        Check("two separate processes", blobs[2] == blobs[3]),
        Check("in-process equals subprocess", blobs[0] == blobs[2]),
    )
    return CriterionResult(11, "byte-identical reruns", checks)


ALL = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
}


def run_criteria(numbers=None) -> list[CriterionResult]:
    if numbers is None:
        numbers = sorted(ALL)
    unknown = [n for n in numbers if n not in ALL]
    if unknown:
        raise ValueError(f"unknown criterion numbers {unknown}; available: {sorted(ALL)}")
    return [ALL[n]() for n in numbers]
