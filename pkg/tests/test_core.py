import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from eprb.core import (
    ConfigError,
    FixedPolarization,
    IdentKind,
    Learning,
    OPEN01_FLOOR,
    OrthogonalRandom,
    ParallelRandom,
    RandomStream,
    RunConfig,
    Settings,
    Topology,
    detector_index,
    draws_per_event,
    mix_seed,
    open01,
    parse_angle,
    perp_vec,
    spin_values,
    unit_vec,
)

angles = st.floats(-20.0, 20.0, allow_nan=False)


def _cfg(**kw):
    base = dict(settings=Settings(0.1, 0.0, 0.2, 0.3), seed=1, n_pairs=10)
    base.update(kw)
    return RunConfig(**base)


def test_unit_vec_identity_cases():
    assert np.allclose(unit_vec(0.0), [1.0, 0.0])
    assert np.allclose(unit_vec(np.pi / 2), [0.0, 1.0], atol=1e-15)


def test_unit_perp_orthogonal():
    v, w = unit_vec(0.3), perp_vec(0.3)
    # the products cancel exactly: c*(-s) + s*c
    assert v[0] * w[0] + v[1] * w[1] == 0.0
    assert abs(v @ w) < 1e-15


@given(angles)
def test_unit_vec_norm(theta):
    v = unit_vec(theta)
    assert abs(v @ v - 1.0) < 1e-12


def test_detector_index_paper_cases():
    assert detector_index(1, 1) == 1
    assert detector_index(-1, -1) == 4
    assert detector_index(1, -1) == 2
    assert detector_index(-1, 1) == 3


def test_detector_index_bijection():
    seen = set()
    for sf in (1, -1):
        for ss in (1, -1):
            idx = detector_index(sf, ss)
            assert spin_values(idx) == (sf, ss)
            seen.add(idx)
    assert seen == {1, 2, 3, 4}


def test_detector_index_rejects_bad_values():
    with pytest.raises(ValueError):
        detector_index(0, 1)
    with pytest.raises(ValueError):
        spin_values(5)


def test_stream_reproducibility_one_million():
    a = RandomStream(987654321).raw(1_000_000)
    b = RandomStream(987654321).raw(1_000_000)
    assert np.array_equal(a, b)
    c = RandomStream(987654322).raw(1_000_000)
    assert not np.array_equal(a, c)


def test_stream_batch_equals_scalar_sequence():
    block = RandomStream(7).raw((200, 7))
    st7 = RandomStream(7)
    scalars = np.array([st7.raw() for _ in range(200 * 7)]).reshape(200, 7)
    assert np.array_equal(block, scalars)


def test_open01_strictly_inside():
    vals = RandomStream(3).uniform_open01(100_000)
    assert vals.min() > 0.0 and vals.max() < 1.0
    # the lattice point 0.0 is lifted onto the floor, nothing else moves
    raw = np.array([0.0, 0.25, 1.0 - 2.0 ** -53])
    lifted = open01(raw)
    assert lifted[0] == OPEN01_FLOOR
    assert np.array_equal(lifted[1:], raw[1:])


def test_uniform_angle_range():
    vals = RandomStream(5).uniform_angle(100_000)
    assert vals.min() >= 0.0 and vals.max() < 2 * np.pi


def test_draws_per_event_layout():
    assert draws_per_event(Topology.EEPRB, OrthogonalRandom()) == 11
    assert draws_per_event(Topology.EPRB, ParallelRandom()) == 7
    assert draws_per_event(Topology.EEPRB, FixedPolarization(0.1, 0.2)) == 10
    assert draws_per_event(Topology.EPRB, FixedPolarization(0.1, 0.2)) == 6


def test_mix_seed_deterministic_and_spread():
    outs = {mix_seed(12345, i) for i in range(1000)}
    assert len(outs) == 1000
    assert all(0 <= v < 2 ** 64 for v in outs)
    assert mix_seed(12345, 17) == mix_seed(12345, 17)
    assert mix_seed(12345, 17) != mix_seed(12346, 17)


def test_config_validation():
    with pytest.raises(ConfigError):
        _cfg(n_pairs=0).validate()
    with pytest.raises(ConfigError):
        _cfg(eta=1.5).validate()
    with pytest.raises(ConfigError):
        _cfg(window=-1.0).validate()
    with pytest.raises(ConfigError):
        Learning(0.0)
    with pytest.raises(ConfigError):
        Learning(1.0)
    _cfg(law=Learning(0.5)).validate()


def test_header_dict_records_everything():
    cfg = _cfg(source=FixedPolarization(0.2, 1.1), law=Learning(0.9),
               identification=IdentKind.COINCIDENCE)
    d = cfg.header_dict()
    assert d["source"] == "fixed" and d["p"] == 0.2 and d["q"] == 1.1
    assert d["law"] == "learning" and d["gamma"] == 0.9
    assert d["identification"] == "coincidence"
    assert d["settings"]["a"] == 0.1
    assert d["seed"] == 1


def test_parse_angle():
    assert parse_angle("0.75") == 0.75
    assert math.isclose(parse_angle("deg:45"), np.pi / 4, rel_tol=1e-15)
    assert math.isclose(parse_angle("deg:-90"), -np.pi / 2, rel_tol=1e-15)
