import numpy as np

from eprb.core import Memoryless, NoRetardation, RandomStream, detector_index
from eprb.optics import BeamSplitter, Photon
from eprb.station import (
    apply_efficiency,
    identify_coincidence,
    identify_local,
    process_arm,
    stage,
)

from conftest import FakeStream


def _bs(orientation=0.0, law=Memoryless(), t_max=5000.0, alpha=4.0, beta=0.5):
    return BeamSplitter(orientation, law, t_max, alpha, beta)


def test_identify_local_window_boundaries():
    assert identify_local(0.0, 0.0) == 1
    assert identify_local(0.0, 5.0) == 1
    assert identify_local(5.0, 5.0) == 1          # inclusive upper edge
    assert identify_local(5.0 + 1e-9, 5.0) == 0   # strict exceedance


def test_identify_coincidence():
    assert identify_coincidence(0.0, 0.0, 1.0) == (1, 1)
    assert identify_coincidence(0.0, 1.5, 1.0) == (0, 0)
    assert identify_coincidence(2.0, 3.0, 1.0) == (1, 1)   # |diff| == W accepted
    assert identify_coincidence(7.0, 2.0, 1.0) == (0, 0)


def test_apply_efficiency_trivial_cases():
    st_ = RandomStream(1)
    assert all(apply_efficiency(1, 1.0, st_) == 1 for _ in range(50))
    assert all(apply_efficiency(1, 0.0, st_) == 0 for _ in range(50))
    # draw consumed even when w = 0
    fake = FakeStream(open01=[0.3])
    assert apply_efficiency(0, 1.0, fake) == 0
    assert fake.consumed == 1


def test_apply_efficiency_binomial():
    n = 100_000
    st_ = RandomStream(77)
    passed = sum(apply_efficiency(1, 0.5, st_) for _ in range(n))
    assert abs(passed / n - 0.5) < 0.007   # 4 sigma


def test_process_arm_no_law_zero_tag():
    arm = process_arm(_bs(0.3, law=NoRetardation()), _bs(0.8, law=NoRetardation()),
                      _bs(0.8, law=NoRetardation()), Photon(1.0), RandomStream(4))
    assert arm.tau_reduced == 0.0
    assert arm.detector == detector_index(arm.s_first, arm.s_second)


def test_process_arm_eprb_shape():
    arm = process_arm(_bs(0.3), None, None, Photon(1.0), RandomStream(4))
    assert arm.s_second is None
    assert arm.detector == (1 if arm.s_first == 1 else 2)
    assert arm.tau_reduced >= 0.0


def test_process_arm_plus_minus_branch_detector():
    # photon aligned with the first splitter forces s_first = +1; second
    # splitters orthogonal to the incoming branch force s_second = -1
    a = 0.4
    arm = process_arm(_bs(a), _bs(a + np.pi / 2), _bs(a + np.pi / 2),
                      Photon(a), RandomStream(5))
    assert (arm.s_first, arm.s_second) == (1, -1)
    assert arm.detector == 2


def test_process_arm_sums_stage_taus():
    st_ = RandomStream(6)
    first, plus, minus = _bs(0.1), _bs(0.9), _bs(0.9)
    # replay the same stream on clones to decompose the sum
    st_replay = RandomStream(6)
    f2, p2, m2 = _bs(0.1), _bs(0.9), _bs(0.9)
    s_first, out, tau_first = stage(f2, Photon(2.0), st_replay)
    _, _, tau_second = stage(p2 if s_first > 0 else m2, out, st_replay)

    arm = process_arm(first, plus, minus, Photon(2.0), st_)
    assert arm.tau_reduced == tau_first + tau_second


def test_second_splitter_silences_after_first_arrival():
    # constant-polarization input: the memoryless law retards at most once
    bs3 = _bs(orientation=0.9)
    st_ = RandomStream(13)
    taus = [stage(bs3, Photon(0.4), st_)[2] for _ in range(50)]
    assert all(t == 0.0 for t in taus[1:])
