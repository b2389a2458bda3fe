"""Closed-form reference predictions for the simulated experiments.

Four models over the sixteen outcomes (s1, s2, s3, s4) in {+1, -1}^4:

* classical wave intensities for two beams whose random polarizations
  differ by a fixed offset phi0 (orthogonal beams: phi0 = pi/2, parallel
  beams: phi0 = 0); entries sum to I0^2,
* the quantum singlet prediction, with the pair factor [1 - s1 s2 cos2(a-b)],
* the same expression with the pair factor's sign flipped, which is the
  (non-quantum) distribution matching the parallel-source simulation with
  identification on,
* the uncorrelated product model for a source with fixed polarizations.

A small density-matrix engine rebuilds the quantum probabilities from the
singlet state and projector algebra as an independent cross-check, and
the rho_q positivity test decides which isotropic pair correlations admit
a two-spin density matrix at all.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    FixedPolarization,
    OrthogonalRandom,
    ParallelRandom,
    PolarizationMode,
    Settings,
)
from .experiment import moment_keys

SPIN_PAIRS = tuple(itertools.product((1, -1), repeat=2))
SPIN_QUADS = tuple(itertools.product((1, -1), repeat=4))


def _slot(s: int) -> int:
    return 0 if s == 1 else 1


@dataclass(frozen=True)
class JointDistribution16:
    """Probability (or normalized intensity) of each four-outcome event.

    ``table[slot(s1), slot(s2), slot(s3), slot(s4)]`` with +1 in slot 0.
    Probability models sum to 1; intensity models sum to i0^2.  ``model``
    records provenance only and plays no computational role.
    """

    table: np.ndarray
    model: str
    i0: float = 1.0

    def prob(self, s1: int, s2: int, s3: int, s4: int) -> float:
        return float(self.table[_slot(s1), _slot(s2), _slot(s3), _slot(s4)])

    def total(self) -> float:
        return float(self.table.sum())

    def pair_marginal(self) -> dict[tuple[int, int], float]:
        """Marginal over (s1, s2)."""
        m = self.table.sum(axis=(2, 3))
        return {(u, v): float(m[_slot(u), _slot(v)]) for u, v in SPIN_PAIRS}


def moments_from_distribution(dist: JointDistribution16) -> dict[tuple[int, ...], float]:
    """All moments of orders 1..4 by direct summation over the 16 outcomes."""
    out = {}
    for key in moment_keys():
        acc = 0.0
        for s in SPIN_QUADS:
            weight = 1
            for i in key:
                weight *= s[i - 1]
            acc += weight * dist.prob(*s)
        out[key] = acc
    return out


def _chain_joint(c12: float, c13: float, c24: float, scale: float,
                 model: str, i0: float = 1.0) -> JointDistribution16:
    """Distribution (scale/16)[1 + c12 s1s2][1 + c13 s1s3][1 + c24 s2s4]."""
    table = np.empty((2, 2, 2, 2))
    for s1, s2, s3, s4 in SPIN_QUADS:
        table[_slot(s1), _slot(s2), _slot(s3), _slot(s4)] = (scale / 16.0) * (
            (1.0 + c12 * s1 * s2) * (1.0 + c13 * s1 * s3) * (1.0 + c24 * s2 * s4))
    return JointDistribution16(table=table, model=model, i0=i0)


def _chain_moments(c12: float, c13: float, c24: float,
                   scale: float) -> dict[tuple[int, ...], float]:
    """Closed-form moments of a _chain_joint distribution."""
    out = {key: 0.0 for key in moment_keys()}
    out[(1, 2)] = scale * c12
    out[(1, 3)] = scale * c13
    out[(2, 4)] = scale * c24
    out[(2, 3)] = scale * c12 * c13
    out[(1, 4)] = scale * c12 * c24
    out[(3, 4)] = scale * c12 * c13 * c24
    out[(1, 2, 3, 4)] = scale * c13 * c24
    return out


# --------------------------------------------------------------------------
# Classical wave intensities
# --------------------------------------------------------------------------

def maxwell_intensity_phi(s1: int, s2: int, a: float, b: float, phi: float,
                          phi0: float = np.pi / 2, i0: float = 1.0) -> float:
    """Correlated two-beam intensity for one polarization realization phi.

    Malus' law applied at each first-stage splitter; averaging this over
    phi uniform on [0, 2pi) gives :func:`maxwell_pair`.
    """
    return (i0 ** 2
            * (1.0 + s1 * np.cos(2.0 * (phi - a))) / 2.0
            * (1.0 + s2 * np.cos(2.0 * (phi - b + phi0))) / 2.0)


def maxwell_pair(s1: int, s2: int, a: float, b: float,
                 phi0: float = np.pi / 2, i0: float = 1.0) -> float:
    """Phi-averaged pair intensity (i0^2/4)[1 + (1/2) s1 s2 cos2(a-b+phi0)]."""
    return (i0 ** 2 / 4.0) * (1.0 + 0.5 * s1 * s2 * np.cos(2.0 * (a - b + phi0)))


def maxwell_joint(settings: Settings, phi0: float = np.pi / 2,
                  i0: float = 1.0) -> JointDistribution16:
    return _chain_joint(0.5 * np.cos(2.0 * (settings.a - settings.b + phi0)),
                        np.cos(2.0 * (settings.a - settings.c)),
                        np.cos(2.0 * (settings.b - settings.d)),
                        scale=i0 ** 2, model="maxwell", i0=i0)


def maxwell_moments(settings: Settings, phi0: float = np.pi / 2,
                    i0: float = 1.0) -> dict[tuple[int, ...], float]:
    """Closed-form intensity moments; singles and triples vanish."""
    return _chain_moments(0.5 * np.cos(2.0 * (settings.a - settings.b + phi0)),
                          np.cos(2.0 * (settings.a - settings.c)),
                          np.cos(2.0 * (settings.b - settings.d)),
                          scale=i0 ** 2)


# --------------------------------------------------------------------------
# Quantum singlet and its sign-flipped counterpart
# --------------------------------------------------------------------------

def quantum_pair(s1: int, s2: int, a: float, b: float) -> float:
    """Singlet pair probability [1 - s1 s2 cos2(a-b)]/4."""
    return (1.0 - s1 * s2 * np.cos(2.0 * (a - b))) / 4.0


def quantum_joint(settings: Settings) -> JointDistribution16:
    return _chain_joint(-np.cos(2.0 * (settings.a - settings.b)),
                        np.cos(2.0 * (settings.a - settings.c)),
                        np.cos(2.0 * (settings.b - settings.d)),
                        scale=1.0, model="quantum")


def quantum_moments(settings: Settings) -> dict[tuple[int, ...], float]:
    return _chain_moments(-np.cos(2.0 * (settings.a - settings.b)),
                          np.cos(2.0 * (settings.a - settings.c)),
                          np.cos(2.0 * (settings.b - settings.d)),
                          scale=1.0)


def flipped_joint(settings: Settings) -> JointDistribution16:
    """quantum_joint with the sign of the s1 s2 factor flipped.

    This is the distribution a parallel-polarization source produces under
    photon identification; no two-spin density matrix reproduces it (see
    :func:`rho_q_is_density`).
    """
    return _chain_joint(np.cos(2.0 * (settings.a - settings.b)),
                        np.cos(2.0 * (settings.a - settings.c)),
                        np.cos(2.0 * (settings.b - settings.d)),
                        scale=1.0, model="flipped")


def flipped_moments(settings: Settings) -> dict[tuple[int, ...], float]:
    return _chain_moments(np.cos(2.0 * (settings.a - settings.b)),
                          np.cos(2.0 * (settings.a - settings.c)),
                          np.cos(2.0 * (settings.b - settings.d)),
                          scale=1.0)


# --------------------------------------------------------------------------
# Product state (fixed source polarizations p, q)
# --------------------------------------------------------------------------

def product_pair(s1: int, s2: int, a: float, b: float, p: float, q: float) -> float:
    """[1 + s1 cos2(a-p)][1 + s2 cos2(b-q)]/4; also the classical case at i0=1."""
    return ((1.0 + s1 * np.cos(2.0 * (a - p))) / 2.0
            * (1.0 + s2 * np.cos(2.0 * (b - q))) / 2.0)


def product_joint(settings: Settings, p: float, q: float) -> JointDistribution16:
    cp = np.cos(2.0 * (settings.a - p))
    cq = np.cos(2.0 * (settings.b - q))
    lam = np.cos(2.0 * (settings.a - settings.c))
    mu = np.cos(2.0 * (settings.b - settings.d))
    table = np.empty((2, 2, 2, 2))
    for s1, s2, s3, s4 in SPIN_QUADS:
        table[_slot(s1), _slot(s2), _slot(s3), _slot(s4)] = (
            (1.0 + s1 * cp) * (1.0 + s2 * cq)
            * (1.0 + s1 * s3 * lam) * (1.0 + s2 * s4 * mu) / 16.0)
    return JointDistribution16(table=table, model="product")


def product_moments(settings: Settings, p: float, q: float) -> dict[tuple[int, ...], float]:
    """Closed-form product-state moments; everything factorizes."""
    cp = np.cos(2.0 * (settings.a - p))
    cq = np.cos(2.0 * (settings.b - q))
    lam = np.cos(2.0 * (settings.a - settings.c))
    mu = np.cos(2.0 * (settings.b - settings.d))
    return {
        (1,): cp, (2,): cq, (3,): cp * lam, (4,): cq * mu,
        (1, 2): cp * cq, (1, 3): lam, (1, 4): cp * cq * mu,
        (2, 3): cp * cq * lam, (2, 4): mu, (3, 4): cp * cq * lam * mu,
        (1, 2, 3): cq * lam, (1, 2, 4): cp * mu,
        (1, 3, 4): cq * lam * mu, (2, 3, 4): cp * lam * mu,
        (1, 2, 3, 4): lam * mu,
    }


# --------------------------------------------------------------------------
# Density-matrix engine (independent route to the quantum probabilities)
# --------------------------------------------------------------------------

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)
_SIGMA_DOT_SIGMA = sum(np.kron(s, s) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))


def singlet_density() -> np.ndarray:
    """rho = (1 - sigma1.sigma2)/4, the two-spin singlet state."""
    return (np.eye(4, dtype=complex) - _SIGMA_DOT_SIGMA) / 4.0


def projector(s: int, angle: float) -> np.ndarray:
    """Selective-measurement projector (1 + s sigma.x)/2 for one photon.

    Polarization observables live on doubled angles: the projector axis is
    the unit vector (cos 2*angle, sin 2*angle, 0), which turns the spin
    overlap a.b into the photon overlap cos 2(a - b).
    """
    axis = np.cos(2.0 * angle) * SIGMA_X + np.sin(2.0 * angle) * SIGMA_Y
    return (_ID2 + s * axis) / 2.0


def quantum_joint_trace(settings: Settings) -> JointDistribution16:
    """Four-outcome probabilities from the projector/trace formula.

    Each arm applies its first-stage projector, then the second-stage one,
    then the first again (the selective measurement is repeated on the way
    back through the operator product); the result must agree with
    :func:`quantum_joint` to machine precision.
    """
    rho = singlet_density()
    table = np.empty((2, 2, 2, 2))
    for s1, s2, s3, s4 in SPIN_QUADS:
        m1a = np.kron(projector(s1, settings.a), _ID2)
        m1c = np.kron(projector(s3, settings.c), _ID2)
        m2b = np.kron(_ID2, projector(s2, settings.b))
        m2d = np.kron(_ID2, projector(s4, settings.d))
        op = m1a @ m1c @ m1a @ m2b @ m2d @ m2b
        table[_slot(s1), _slot(s2), _slot(s3), _slot(s4)] = np.trace(rho @ op).real
    return JointDistribution16(table=table, model="quantum-trace")


def single_outcome_probability(s1: int, angle: float) -> float:
    """Tr[rho M(s1, sigma1, axis)] for the singlet; equals 1/2 for any angle."""
    m = np.kron(projector(s1, angle), _ID2)
    return float(np.trace(singlet_density() @ m).real)


# --------------------------------------------------------------------------
# rho_q representability
# --------------------------------------------------------------------------

def rho_q_matrix(q: float) -> np.ndarray:
    """Isotropic two-spin operator (1 - q sigma1.sigma2)/4."""
    return (np.eye(4, dtype=complex) - q * _SIGMA_DOT_SIGMA) / 4.0


def rho_q_eigenvalues(q: float) -> np.ndarray:
    """The four (real) eigenvalues, ascending."""
    return np.linalg.eigvalsh(rho_q_matrix(q))


def rho_q_is_density(q: float) -> bool:
    """True iff rho_q is positive semidefinite, i.e. -1/3 <= q <= 1."""
    return bool(rho_q_eigenvalues(q).min() >= -1e-12)


# --------------------------------------------------------------------------
# Bell functionals
# --------------------------------------------------------------------------

def bell_functional(dist: JointDistribution16, g) -> float:
    """Expectation of g(s1, s2, s3, s4) under a normalized distribution."""
    return sum(g(*s) * dist.prob(*s) for s in SPIN_QUADS)


def g_chsh(s1: int, s2: int, s3: int, s4: int) -> int:
    """s1s3 + s1s4 + s2s3 - s2s4; equals +-2 on every outcome."""
    return s1 * s3 + s1 * s4 + s2 * s3 - s2 * s4


def g_three_pairs(s1: int, s2: int, s3: int, s4: int) -> int:
    """s1s2 + s1s3 + s2s3; ranges over {-1, 3} outcome-wise."""
    return s1 * s2 + s1 * s3 + s2 * s3


# --------------------------------------------------------------------------
# Which theory a given source mode should reproduce
# --------------------------------------------------------------------------

def reference_moments(source: PolarizationMode,
                      settings: Settings) -> tuple[dict, dict]:
    """(K-oracle, E-oracle) moment tables for a source mode.

    K-moments (no identification) follow the wave-intensity model; E-moments
    (with identification) follow the quantum model for an orthogonal
    source, the sign-flipped model for a parallel source, and the product
    model either way for a fixed source.
    """
    if isinstance(source, OrthogonalRandom):
        return maxwell_moments(settings, phi0=np.pi / 2), quantum_moments(settings)
    if isinstance(source, ParallelRandom):
        return maxwell_moments(settings, phi0=0.0), flipped_moments(settings)
    if isinstance(source, FixedPolarization):
        pm = product_moments(settings, source.p, source.q)
        return pm, dict(pm)
    raise ValueError(f"unknown source mode {source!r}")
