"""Subquantum optics: pair source, Malus-law branching, retardation laws.

A photon carries exactly two numbers: its current linear-polarization
angle and the retardation time it has accumulated so far.  A beam
splitter branches each photon stochastically in concert with Malus' law
and assigns it a random retardation that depends on how far the incoming
polarization is from the splitter's axes and on the splitter's internal
memory vector u.  Both retardation laws silence themselves when the
incoming polarization is constant in time; that self-silencing is what
keeps the second splitter stage of the extended experiment quiet after a
short transient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ConfigError,
    FixedPolarization,
    Learning,
    Memoryless,
    NoRetardation,
    OrthogonalRandom,
    ParallelRandom,
    PolarizationMode,
    RandomStream,
    RetardationLaw,
)

__all__ = [
    "Photon",
    "BeamSplitter",
    "emit_pair",
    # re-exported variant types; the data definitions live in core
    "PolarizationMode",
    "OrthogonalRandom",
    "ParallelRandom",
    "FixedPolarization",
    "RetardationLaw",
    "NoRetardation",
    "Memoryless",
    "Learning",
]


@dataclass
class Photon:
    """Linear polarization angle plus accumulated retardation time.

    This is the *only* information that travels from the source to an
    observation station.
    """

    phi: float
    tau_total: float = 0.0


def emit_pair(mode: PolarizationMode, stream: RandomStream) -> tuple[Photon, Photon]:
    """Create one photon pair; consumes one angle draw unless mode is fixed."""
    if isinstance(mode, OrthogonalRandom):
        phi = stream.uniform_angle()
        return Photon(phi), Photon(phi + np.pi / 2)
    if isinstance(mode, ParallelRandom):
        phi = stream.uniform_angle()
        return Photon(phi), Photon(phi)
    if isinstance(mode, FixedPolarization):
        return Photon(mode.p), Photon(mode.q)
    raise ConfigError(f"unknown polarization mode {mode!r}")


class BeamSplitter:
    """Polarizing beam splitter with an internal memory vector.

    The memory u (norm <= 1) starts at the zero vector, a settings-free
    symmetric default; its only effect is a one-event transient in the
    retardation factor.  ``split`` and ``retard`` each consume exactly one
    stream draw, in that order, per the core draw layout.
    """

    def __init__(self, orientation: float, law: RetardationLaw,
                 t_max: float, alpha: float, beta: float, u0=None):
        self.orientation = float(orientation)
        self.law = law
        self.t_max = float(t_max)
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.u = np.zeros(2) if u0 is None else np.asarray(u0, dtype=float).copy()
        if self.u @ self.u > 1.0 + 1e-12:
            raise ConfigError("beam-splitter memory must have norm <= 1")
        # Angle of u when u is exactly a previously seen unit polarization
        # (memoryless law).  Using the angle keeps x.u == cos(phi - phi')
        # exact, so a repeated polarization yields tau == 0.0 identically.
        self._mem_angle: float | None = None

    def split(self, photon: Photon, stream: RandomStream) -> tuple[int, Photon]:
        """Branch the photon: +1 with relative frequency cos^2(phi - a).

        The outgoing polarization snaps to the splitter axis of the chosen
        branch; accumulated retardation is carried over unchanged.  The
        boundary case cos^2(phi - a) == r branches to -1.
        """
        r = stream.uniform_open01()
        if np.power(np.cos(photon.phi - self.orientation), 2) > r:
            return 1, Photon(self.orientation, photon.tau_total)
        return -1, Photon(self.orientation + np.pi / 2, photon.tau_total)

    def retard(self, photon: Photon, stream: RandomStream) -> float:
        """Random retardation for the *incoming* photon; updates the memory.

        Returns tau in [0, t_max]; the caller adds it to the photon's
        running total.  The expressions mirror the batch engine operation
        for operation so both paths produce identical floats.
        """
        r_prime = stream.uniform_open01()
        law = self.law
        if isinstance(law, NoRetardation):
            return 0.0
        pref = np.power(np.abs(np.sin(2.0 * (photon.phi - self.orientation))), self.alpha)
        if isinstance(law, Memoryless):
            if self._mem_angle is None:
                dot = self.u[0] * np.cos(photon.phi) + self.u[1] * np.sin(photon.phi)
            else:
                dot = np.cos(photon.phi - self._mem_angle)
            factor = np.power(np.abs((1.0 - dot) / 2.0), self.beta)
            tau = r_prime * self.t_max * pref * factor
            self._mem_angle = photon.phi
            self.u = np.array([np.cos(photon.phi), np.sin(photon.phi)])
            return float(tau)
        if isinstance(law, Learning):
            g = law.gamma
            normsq = self.u[0] * self.u[0] + self.u[1] * self.u[1]
            factor = np.power(np.abs((1.0 - normsq) / 2.0), self.beta)
            tau = r_prime * self.t_max * pref * factor
            self.u = np.array([
                (1.0 - g) * np.cos(photon.phi) + g * self.u[0],
                (1.0 - g) * np.sin(photon.phi) + g * self.u[1],
            ])
            return float(tau)
        raise ConfigError(f"unknown retardation law {law!r}")
