import numpy as np
import pytest

from eprb.core import Settings


class FakeStream:
    """Stand-in for RandomStream yielding queued draws; counts consumption."""

    def __init__(self, open01=(), angles=()):
        self._open01 = list(open01)
        self._angles = list(angles)
        self.consumed = 0

    def uniform_open01(self, size=None):
        assert size is None
        self.consumed += 1
        return self._open01.pop(0)

    def uniform_angle(self, size=None):
        assert size is None
        self.consumed += 1
        return self._angles.pop(0)


@pytest.fixture
def fig2_settings():
    """theta = 0.4 on the default sweep geometry."""
    a = 0.4
    return Settings(a=a, b=0.0, c=a + np.pi / 6, d=np.pi / 3)
