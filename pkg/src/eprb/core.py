"""Foundational types for the event-by-event EPRB/EEPRB simulator.

Angles are plain radians, stored unnormalized: every consumer feeds them
into cos/sin, so no range reduction is ever needed.  All randomness flows
through :class:`RandomStream`, a thin wrapper around numpy's PCG64 with a
documented per-event draw layout, so that replaying a seed reproduces a
run bit for bit on any platform.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields

import numpy as np

TWO_PI = 2.0 * np.pi

#: Name of the pseudo-random generator, recorded in every output header.
PRNG_NAME = "numpy-pcg64"

# Smallest value uniform_open01 may return; the measure-zero raw draw 0.0
# is lifted here so that draws stay strictly inside (0, 1).
OPEN01_FLOOR = 2.0 ** -54

_MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    """Raised when a run configuration violates a documented constraint."""


class Topology(str, enum.Enum):
    EPRB = "eprb"        # one beam splitter per arm
    EEPRB = "eeprb"      # two beam splitters per arm, four detectors per side


class IdentKind(str, enum.Enum):
    LOCAL = "local"              # station-local time window
    COINCIDENCE = "coincidence"  # |t1 - t2| <= W, paired by emission index
    NONE = "none"                # every event counts as a photon


# --------------------------------------------------------------------------
# Source and retardation variants (plain data; behavior lives in optics)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OrthogonalRandom:
    """Pair polarizations phi and phi + pi/2 with phi uniform in [0, 2pi)."""

    name = "orthogonal"


@dataclass(frozen=True)
class ParallelRandom:
    """Both photons share the same uniformly random polarization."""

    name = "parallel"


@dataclass(frozen=True)
class FixedPolarization:
    """Every pair leaves the source with fixed polarizations p and q.

    No polarization draw is consumed, which is the one documented
    exception to the per-event draw layout (the mode is constant within a
    run, so stream alignment across settings is unaffected).
    """

    p: float
    q: float
    name = "fixed"


PolarizationMode = OrthogonalRandom | ParallelRandom | FixedPolarization


@dataclass(frozen=True)
class NoRetardation:
    name = "none"


@dataclass(frozen=True)
class Memoryless:
    """Retardation scaled by |(1 - x.u)/2|^beta with u <- x after each event."""

    name = "memoryless"


@dataclass(frozen=True)
class Learning:
    """Retardation scaled by |(1 - u.u)/2|^beta with u <- gamma*u + (1-gamma)*x.

    The update is a deterministic learning machine: u converges to the
    running time average of the incoming polarization vectors at a rate
    set by gamma.
    """

    gamma: float
    name = "learning"

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"learning rate gamma must be in (0, 1), got {self.gamma}")


RetardationLaw = NoRetardation | Memoryless | Learning


# --------------------------------------------------------------------------
# Angles, unit vectors, detector encoding
# --------------------------------------------------------------------------

def unit_vec(theta: float) -> np.ndarray:
    """(cos theta, sin theta)."""
    return np.array([np.cos(theta), np.sin(theta)])


def perp_vec(theta: float) -> np.ndarray:
    """(-sin theta, cos theta), orthogonal to unit_vec(theta)."""
    return np.array([-np.sin(theta), np.cos(theta)])


def detector_index(s_first: int, s_second: int) -> int:
    """Map the two branch signs of one arm onto its firing detector 1..4.

    The encoding is the unique one for which, with x_i the one-hot
    detector indicators, s_first = x1 + x2 - x3 - x4 and
    s_second = x1 - x2 + x3 - x4.
    """
    if s_first not in (1, -1) or s_second not in (1, -1):
        raise ValueError(f"spin values must be +1 or -1, got ({s_first}, {s_second})")
    return 1 + (2 if s_first < 0 else 0) + (1 if s_second < 0 else 0)


_SPIN_VALUES = {1: (1, 1), 2: (1, -1), 3: (-1, 1), 4: (-1, -1)}


def spin_values(index: int) -> tuple[int, int]:
    """Inverse of :func:`detector_index`."""
    try:
        return _SPIN_VALUES[index]
    except KeyError:
        raise ValueError(f"detector index must be 1..4, got {index}") from None


# --------------------------------------------------------------------------
# Random stream
# --------------------------------------------------------------------------

class RandomStream:
    """Deterministic uniform source backed by numpy's PCG64.

    Every draw consumes exactly one 64-bit generator word, converted to a
    float64 on the lattice k * 2**-53, k in [0, 2**53).  The per-event
    layout is fixed so that the draw count never depends on outcomes and
    identical seeds stay aligned across different settings:

    ========  =======================================================
    draw      meaning
    ========  =======================================================
    1         source polarization angle (skipped for a fixed source)
    2, 3      branch draw r and retardation draw r' at BS1
    4, 5      r, r' at BS2
    6, 7      r, r' at the second splitter reached in arm 1
    8, 9      r, r' at the second splitter reached in arm 2
    10, 11    detection-efficiency draws for stations 1 and 2
    ========  =======================================================

    Draws 6..9 are skipped in the EPRB topology.  Batch draws fill
    row-major, so ``raw((n, k))`` consumes words in exactly the same
    order as ``k`` scalar draws per event over ``n`` events.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.default_rng(self.seed)

    def raw(self, size=None):
        """Uniform float64 in [0, 1)."""
        return self._gen.random(size)

    def uniform_open01(self, size=None):
        """Uniform float64 strictly inside (0, 1)."""
        return open01(self.raw(size))

    def uniform_angle(self, size=None):
        """Uniform float64 in [0, 2pi)."""
        return TWO_PI * self.raw(size)


def open01(raw):
    """Map raw [0, 1) draws onto (0, 1); only the draw 0.0 is moved."""
    return np.maximum(raw, OPEN01_FLOOR)


def draws_per_event(topology: Topology, source: PolarizationMode) -> int:
    """Generator words consumed per emitted pair (see RandomStream layout)."""
    n = 11 if topology is Topology.EEPRB else 7
    if isinstance(source, FixedPolarization):
        n -= 1
    return n


def mix_seed(base_seed: int, index: int) -> int:
    """Derive the seed for sweep point ``index`` (SplitMix64 finalizer)."""
    z = (base_seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


# --------------------------------------------------------------------------
# Run configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Settings:
    """Beam-splitter orientations: first stage a/b, second stage c/c and d/d."""

    a: float
    b: float
    c: float = 0.0
    d: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    settings: Settings
    seed: int
    topology: Topology = Topology.EEPRB
    source: PolarizationMode = field(default_factory=OrthogonalRandom)
    law: RetardationLaw = field(default_factory=Memoryless)
    t_max: float = 5000.0
    alpha: float = 4.0
    beta: float = 0.5
    identification: IdentKind = IdentKind.LOCAL
    window: float = 1.0
    eta: float = 1.0
    n_pairs: int = 1_000_000
    cfd: bool = False

    def validate(self) -> None:
        if self.n_pairs < 1:
            raise ConfigError(f"n_pairs must be >= 1, got {self.n_pairs}")
        if self.t_max < 0:
            raise ConfigError(f"t_max must be >= 0, got {self.t_max}")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError(f"alpha and beta must be >= 0, got {self.alpha}, {self.beta}")
        if self.window < 0:
            raise ConfigError(f"window must be >= 0, got {self.window}")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError(f"eta must be in [0, 1], got {self.eta}")
        if not isinstance(self.source, (OrthogonalRandom, ParallelRandom, FixedPolarization)):
            raise ConfigError(f"unknown source mode {self.source!r}")
        if not isinstance(self.law, (NoRetardation, Memoryless, Learning)):
            raise ConfigError(f"unknown retardation law {self.law!r}")

    def header_dict(self) -> dict:
        """Flat, JSON-friendly view of the full resolved configuration."""
        d = {
            "topology": self.topology.value,
            "source": self.source.name,
            "law": self.law.name,
            "t_max": self.t_max,
            "alpha": self.alpha,
            "beta": self.beta,
            "identification": self.identification.value,
            "window": self.window,
            "eta": self.eta,
            "n_pairs": self.n_pairs,
            "seed": self.seed,
            "cfd": self.cfd,
            "settings": {f.name: getattr(self.settings, f.name) for f in fields(Settings)},
        }
        if isinstance(self.source, FixedPolarization):
            d["p"] = self.source.p
            d["q"] = self.source.q
        if isinstance(self.law, Learning):
            d["gamma"] = self.law.gamma
        return d


def parse_angle(text: str) -> float:
    """Angle from the command line: radians, or degrees via a ``deg:`` prefix."""
    if text.startswith("deg:"):
        return math.radians(float(text[4:]))
    return float(text)
