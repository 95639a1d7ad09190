"""Random configurations for trials."""

from __future__ import annotations

import numpy as np

from .errors import SamplingExhausted
from .jet_config import JetConfiguration, check_general_position
from .rng import as_generator

# stricter than the default eps_gp: trial inputs stay away from the singular locus
SAMPLING_EPS_GP = 1e-2


def sample_configuration(
    rng: int | np.random.Generator,
    n: int,
    *,
    box: float = 1.0,
    grad_scale: float = 1.0,
    eps_gp: float = SAMPLING_EPS_GP,
    max_tries: int = 1000,
) -> JetConfiguration:
    """Points uniform in ``[-box, box]^2``, gradients ``N(0, grad_scale^2)``;
    redrawn until the general-position check passes at ``eps_gp``."""
    gen = as_generator(rng)
    for _ in range(max_tries):
        data = np.empty((n, 4))
        data[:, :2] = gen.uniform(-box, box, size=(n, 2))
        data[:, 2:] = gen.normal(0.0, grad_scale, size=(n, 2))
        cfg = JetConfiguration(data)
        if check_general_position(cfg, eps_gp).passes:
            return cfg
    raise SamplingExhausted(f"no general-position configuration after {max_tries} draws")
