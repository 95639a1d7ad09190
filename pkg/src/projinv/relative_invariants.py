"""Relative invariants with the Jacobian multiplier.

``invariantized_jacobian`` is J evaluated at the frame element,
``C(x) = J(rho(x), x)``, a relative invariant of weight -1:
``C(g.x) = J(g, x)**-1 * C(x)``.  Its real ``-1/gcd(n, 3)`` power is the
primitive element ``z'``, of weight ``+1/gcd(n, 3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ProjInvError
from .invariant_field import _Brackets
from .jet_config import DEFAULT_EPS_GP, JetConfiguration
from .moving_frame import solve_frame
from .projective_action import act_config, jacobian_multiplier, sample_homography
from .rng import stream
from .sampling import sample_configuration
from .verification import TrialReport


def gcd3(n: int) -> int:
    return math.gcd(n, 3)


def invariantized_jacobian(cfg: JetConfiguration, eps_gp: float = DEFAULT_EPS_GP) -> float:
    frame = solve_frame(cfg, eps_gp=eps_gp)
    return jacobian_multiplier(frame.homography(), cfg)


def _closed_form_parts(cfg: JetConfiguration):
    B = _Brackets(cfg)
    d123 = B.delta(1, 2, 3)
    f12, f13 = B.phi(1, 1, 2), B.phi(1, 1, 3)
    dens = [B.delta(2, 3, k) + d123 * B.phi(1, 1, k) for k in range(4, cfg.n + 1)]
    return d123, f12 * f13, np.array(dens)


def closed_form_jacobian(cfg: JetConfiguration) -> float:
    """``delta123**(2n-9) (Phi1(1,2) Phi1(1,3))**(n-3) prod_k (delta23k + delta123 Phi1(1,k))**-3``.

    Equals ``C`` up to the sign ``(-1)**n``; it is used as an independent
    magnitude check.
    """
    n = cfg.n
    d123, ff, dens = _closed_form_parts(cfg)
    return float(d123 ** (2 * n - 9) * ff ** (n - 3) * np.prod(dens**-3.0))


def real_power(x: float, w: Fraction) -> float:
    """Real branch of ``x**w``; odd denominators keep the sign of ``x``."""
    w = Fraction(w)
    if x == 0.0:
        if w < 0:
            raise ZeroDivisionError("zero to a negative power")
        return 0.0
    if x > 0:
        return float(x ** float(w))
    if w.denominator % 2 == 0:
        return math.nan
    sign = -1.0 if w.numerator % 2 else 1.0
    return sign * float((-x) ** float(w))


def primitive_element(cfg: JetConfiguration, eps_gp: float = DEFAULT_EPS_GP) -> float:
    """``C**(-1/g)``: ``1/C`` when g = 1, the real cube root of ``1/C`` when g = 3."""
    c = invariantized_jacobian(cfg, eps_gp)
    if gcd3(cfg.n) == 1:
        return 1.0 / c
    return float(np.cbrt(1.0 / c))


def primitive_element_closed_form(cfg: JetConfiguration) -> float:
    """``z'`` from the closed form, without taking roots when 3 | n.

    For n = 3m the closed form is the cube of
    ``delta123**(2m-3) (Phi1(1,2) Phi1(1,3))**(m-1) / prod_k (delta23k + delta123 Phi1(1,k))``
    and ``C = (-1)**n * closed form``.
    """
    n = cfg.n
    if gcd3(n) == 1:
        return (-1.0) ** n / closed_form_jacobian(cfg)
    m = n // 3
    d123, ff, dens = _closed_form_parts(cfg)
    base = d123 ** (2 * m - 3) * ff ** (m - 1) / np.prod(dens)
    return float((-1.0) ** m / base)


@dataclass(frozen=True)
class RelativeInvariantValue:
    c_value: float
    z_prime: float
    g_div: int
    c_weight: Fraction = Fraction(-1)

    @property
    def z_weight(self) -> Fraction:
        return Fraction(1, self.g_div)

    def to_dict(self) -> dict:
        return {
            "c_value": self.c_value,
            "z_prime": self.z_prime,
            "g_div": self.g_div,
            "c_weight": str(self.c_weight),
            "z_weight": str(self.z_weight),
        }


def relative_invariants(cfg: JetConfiguration, eps_gp: float = DEFAULT_EPS_GP) -> RelativeInvariantValue:
    c = invariantized_jacobian(cfg, eps_gp)
    g = gcd3(cfg.n)
    z = 1.0 / c if g == 1 else float(np.cbrt(1.0 / c))
    return RelativeInvariantValue(c, z, g)


def check_relative(
    f: Callable[[JetConfiguration], float],
    weight: Fraction | int | str,
    trials: int = 100,
    seed: int = 0,
    *,
    n: int = 4,
    spread: float = 0.2,
    tolerance: float = math.inf,
) -> TrialReport:
    """Max relative residual of ``f(g.x) - J(g, x)**weight f(x)`` over trials."""
    w = Fraction(weight)
    worst = 0.0
    failures = skipped = 0
    for t in range(trials):
        for attempt in range(100):
            rng = stream(seed, "relative", t, attempt)
            cfg = sample_configuration(rng, n)
            g = sample_homography(rng, spread, cfg)
            try:
                lhs = float(f(act_config(g, cfg)))
                rhs = real_power(jacobian_multiplier(g, cfg), w) * float(f(cfg))
                break
            except ProjInvError:
                skipped += 1
        else:
            failures += 1
            continue
        den = max(abs(lhs), abs(rhs))
        res = 0.0 if den == 0.0 else abs(lhs - rhs) / den
        if not math.isfinite(res) or res > tolerance:
            failures += 1
        worst = max(worst, res if math.isfinite(res) else math.inf)
    return TrialReport(trials, failures, worst, seed, spread, tolerance, skipped)
