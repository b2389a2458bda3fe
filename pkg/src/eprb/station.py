"""Observation stations: splitter chains, time tags, photon identification.

Everything here is local to one station: ``process_arm`` sees one photon
and one station's splitters only, and the identification rule for local
windows reads nothing but that station's reduced time tag.  The two
stations share only the source polarization angle carried by the photons.

Time tags are kept in reduced form (arrival time minus time of flight and
emission time), which is the quantity the window rule compares against;
the absolute clock offsets cancel out of the algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import RandomStream, detector_index
from .optics import BeamSplitter, Photon


@dataclass(frozen=True)
class ArmResult:
    """One arm's outcome for one emitted pair."""

    s_first: int
    s_second: int | None      # None in the EPRB topology
    tau_reduced: float        # sum of retardations along the traversed chain
    detector: int             # 1..4 (EEPRB) or 1..2 (EPRB)


def stage(bs: BeamSplitter, photon: Photon, stream: RandomStream) -> tuple[int, Photon, float]:
    """One splitter passage: branch draw r, then retardation draw r'."""
    s, out = bs.split(photon, stream)
    tau = bs.retard(photon, stream)
    out.tau_total = photon.tau_total + tau
    return s, out, tau


def process_arm(first: BeamSplitter, plus: BeamSplitter | None,
                minus: BeamSplitter | None, photon: Photon,
                stream: RandomStream) -> ArmResult:
    """Route one photon through a station's splitter chain.

    With ``plus``/``minus`` absent (EPRB) the arm ends after the first
    splitter.  Otherwise the +1 branch goes to ``plus`` and the -1 branch
    to ``minus``; the reduced time tag is the sum of the two retardations.
    """
    s_first, out, tau_first = stage(first, photon, stream)
    if plus is None:
        return ArmResult(s_first, None, tau_first, 1 if s_first > 0 else 2)
    chosen = plus if s_first > 0 else minus
    s_second, _, tau_second = stage(chosen, out, stream)
    return ArmResult(s_first, s_second, tau_first + tau_second,
                     detector_index(s_first, s_second))


def identify_local(tau_reduced: float, window: float) -> int:
    """1 ("a photon") iff the reduced time tag is inside [0, window]."""
    return 1 if tau_reduced <= window else 0


def identify_coincidence(tau1: float, tau2: float, window: float) -> tuple[int, int]:
    """Accept the pair iff |tau1 - tau2| <= window.

    Pairing is by emission index: the emission interval exceeds twice the
    maximum retardation, so tags from different pairs can never overlap.
    """
    w = 1 if abs(tau1 - tau2) <= window else 0
    return w, w


def apply_efficiency(w: int, eta: float, stream: RandomStream) -> int:
    """Thin the event with probability 1 - eta.

    The draw is consumed even when w is already 0, keeping the stream
    aligned; thinned events stay in the dataset with w = 0 so the two
    stations' records remain index-aligned.
    """
    r = stream.uniform_open01()
    return w if r <= eta else 0
