import numpy as np
import pytest
from hypothesis import assume, strategies as st

from projinv.invariant_field import bracket_conditioning
from projinv.jet_config import JetConfiguration, check_general_position
from projinv.sampling import sample_configuration

# points on the cross-section with the gradients used in the worked examples
ON_K = JetConfiguration([[1, 0, 1, 0], [0, 0, 2, 3], [0, 1, 4, 5]])


def rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


@pytest.fixture
def cfg4():
    return sample_configuration(11, 4)


@pytest.fixture(params=[3, 4, 5, 6])
def cfg_n(request):
    return sample_configuration(100 + request.param, request.param)


coord = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)


@st.composite
def configurations(draw, n=4, eps=1e-2, cond=0.0):
    """Random configurations passing general position at ``eps``; with
    ``cond > 0`` also the first gradient is bounded below (relative to the
    point spread) and every feature factor must have scaled size ``>= cond``."""
    data = np.array(draw(st.lists(coord, min_size=4 * n, max_size=4 * n))).reshape(n, 4)
    cfg = JetConfiguration(data)
    assume(check_general_position(cfg, eps).passes)
    if cond > 0:
        assume(np.hypot(*cfg.data[0, 2:]) * cfg.scale() >= cond)
        assume(bracket_conditioning(cfg) >= cond)
    return cfg
