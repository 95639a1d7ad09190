import math
from fractions import Fraction

import pytest

from projinv.cochain import (
    Cochain,
    coboundary,
    coboundary_of_relative,
    constant_cochain,
    contraction_residual,
    homotopy,
    jacobian_cochain,
    key_relation_residual,
    log_residual,
    random_cochain,
    reconstruction_residual,
    rho,
    verify_contraction,
)
from projinv.errors import EvaluationFailure
from projinv.invariant_field import generating_array
from projinv.projective_action import act_config, jacobian_multiplier, sample_homography
from projinv.relative_invariants import gcd3, invariantized_jacobian, primitive_element, real_power
from projinv.rng import stream
from projinv.sampling import sample_configuration


def _draw(seed, m, n=4):
    rng = stream(seed, "cochain-test", m)
    cfg = sample_configuration(rng, n)
    return rng, cfg, [sample_homography(rng, 0.1, cfg) for _ in range(m)]


def test_constant_is_closed():
    _, cfg, gs = _draw(0, 2)
    assert coboundary(constant_cochain(1))(gs, cfg) == 1.0
    assert homotopy(constant_cochain(2))(gs[:1], cfg) == 1.0


@pytest.mark.parametrize("seed", range(20))
def test_jacobian_cocycle(seed):
    _, cfg, gs = _draw(seed, 2)
    assert log_residual(coboundary(jacobian_cochain())(gs, cfg), 1.0) < 1e-9


@pytest.mark.parametrize("m", [0, 1])
@pytest.mark.parametrize("seed", range(10))
def test_dd_trivial(m, seed):
    rng, cfg, gs = _draw(seed, m + 2)
    c = random_cochain(m, rng, cfg.n)
    assert log_residual(coboundary(coboundary(c))(gs, cfg), 1.0) < 1e-8


@pytest.mark.parametrize("seed", range(10))
def test_h1_of_J_is_inverse_C(seed):
    _, cfg, gs = _draw(seed, 1)
    hJ = homotopy(jacobian_cochain())((), cfg)
    assert hJ == pytest.approx(1.0 / invariantized_jacobian(cfg), rel=1e-12)
    assert reconstruction_residual(jacobian_cochain(), gs[0], cfg) < 1e-9


def test_h2_verbatim():
    rng, cfg, (g,) = _draw(3, 1)
    c = random_cochain(2, rng, cfg.n)
    frame = rho(act_config(g, cfg))
    assert homotopy(c)((g,), cfg) == c((frame, g), cfg)


def test_h1_without_inverse_breaks_contraction():
    # the degree-1 homotopy must carry an inverse with this d0
    rng, cfg, (g,) = _draw(4, 1)
    c = random_cochain(1, rng, cfg.n)
    plain_h1 = Cochain(0, lambda gs, x: c((rho(x),), x))
    lhs = coboundary(plain_h1)((g,), cfg) * homotopy(coboundary(c))((g,), cfg)
    assert log_residual(lhs, c((g,), cfg)) > 1e-3
    assert contraction_residual(c, (g,), cfg) < 1e-10


def test_contraction_trivial_cochain():
    rep = verify_contraction(2, 10, 0, constant_cochain(2))
    assert rep.max_rel_residual == 0.0 and rep.passes


def test_contraction_J_degree_one():
    assert verify_contraction(1, 50, 1, jacobian_cochain(), tolerance=1e-9).passes


@pytest.mark.parametrize("m", [1, 2, 3])
def test_contraction_random(m):
    rep = verify_contraction(m, 100, 7, tolerance=1e-7)
    assert rep.passes, rep.to_dict()


@pytest.mark.parametrize("seed", range(10))
def test_key_relation(seed):
    _, cfg, gs = _draw(seed, 3)
    assert key_relation_residual(gs, cfg) < 1e-9


def test_coboundary_of_absolute_invariant():
    _, cfg, (g,) = _draw(5, 1)
    mu = coboundary_of_relative(lambda c: generating_array(c)[0])
    assert mu((g,), cfg) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_coboundary_of_C_is_inverse_J(seed):
    _, cfg, (g,) = _draw(seed, 1)
    mu = coboundary_of_relative(invariantized_jacobian)
    assert mu((g,), cfg) == pytest.approx(1.0 / jacobian_multiplier(g, cfg), rel=1e-9)


@pytest.mark.parametrize("n", [4, 6])
def test_coboundary_of_z_prime(n):
    _, cfg, (g,) = _draw(n, 1, n)
    mu = coboundary_of_relative(primitive_element)
    expected = real_power(jacobian_multiplier(g, cfg), Fraction(1, gcd3(n)))
    assert mu((g,), cfg) == pytest.approx(expected, rel=1e-9)


def test_degree_mismatch_and_zero_values():
    _, cfg, gs = _draw(0, 2)
    with pytest.raises(ValueError):
        constant_cochain(1)(gs, cfg)
    with pytest.raises(EvaluationFailure):
        Cochain(0, lambda gs, x: 0.0)((), cfg)


def test_log_residual_sign_mismatch():
    assert log_residual(-1.0, 1.0) == math.inf


def test_report_dict():
    d = verify_contraction(1, 3, 0).to_dict()
    assert d["tolerance"] is None and d["passes"] is True
