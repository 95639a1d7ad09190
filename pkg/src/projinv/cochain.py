"""Multiplicative inhomogeneous cochains ``G^m x M -> R^x`` and the
frame-induced contracting homotopy.

Coboundaries::

    (d0 c)(g; x)          = c(g.x) / c(x)
    (dm c)(g1..g_{m+1}; x) = c(g2..g_{m+1}; x)
                            * prod_{i=1..m} c(g1.., g_i g_{i+1}, ..g_{m+1}; x)**(-1)**i
                            * c(g1..g_m; g_{m+1}.x)**(-1)**(m+1)          (m >= 1)

Homotopies::

    (h1 c)(x)              = c(rho(x); x)**-1
    (hm c)(g1..g_{m-1}; x) = c(rho(g1...g_{m-1}.x), g1, .., g_{m-1}; x)   (m >= 2)

The degree-1 homotopy carries an inverse because ``d0`` above is the
reciprocal of what the general formula gives at m = 0; with it,
``d^{m-1} h^m c * h^{m+1} d^m c = c`` holds for every m >= 1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from .errors import EvaluationFailure, ProjInvError, ZeroValue
from .jet_config import DEFAULT_EPS_GP, JetConfiguration
from .moving_frame import solve_frame
from .projective_action import Homography, act_config, jacobian_multiplier, sample_homography
from .rng import as_generator, stream
from .sampling import sample_configuration

CochainFn = Callable[[Sequence[Homography], JetConfiguration], float]


@dataclass(frozen=True)
class Cochain:
    degree: int
    fn: CochainFn
    name: str = "c"

    def __call__(self, gs: Sequence[Homography], cfg: JetConfiguration) -> float:
        gs = tuple(gs)
        if len(gs) != self.degree:
            raise ValueError(f"{self.name} has degree {self.degree}, got {len(gs)} group arguments")
        try:
            val = float(self.fn(gs, cfg))
        except EvaluationFailure:
            raise
        except (ProjInvError, ArithmeticError) as exc:
            raise EvaluationFailure(f"{self.name}: {exc}") from exc
        if val == 0.0 or not math.isfinite(val):
            raise EvaluationFailure(f"{self.name} returned {val!r}")
        return val


def rho(cfg: JetConfiguration, eps_gp: float = DEFAULT_EPS_GP) -> Homography:
    return solve_frame(cfg, eps_gp=eps_gp).homography()


def _product(gs: Sequence[Homography]) -> Homography:
    return reduce(lambda a, b: a @ b, gs, Homography.identity())


def coboundary(c: Cochain) -> Cochain:
    m = c.degree
    if m < 0:
        raise ValueError("degree must be nonnegative")

    if m == 0:
        def d0(gs, x):
            (g,) = gs
            return c((), act_config(g, x)) / c((), x)

        return Cochain(1, d0, f"d({c.name})")

    def dm(gs, x):
        val = c(gs[1:], x)
        for i in range(1, m + 1):
            merged = gs[: i - 1] + (gs[i - 1] @ gs[i],) + gs[i + 1 :]
            val *= c(merged, x) ** ((-1) ** i)
        val *= c(gs[:m], act_config(gs[m], x)) ** ((-1) ** (m + 1))
        return val

    return Cochain(m + 1, dm, f"d({c.name})")


def homotopy(c: Cochain, eps_gp: float = DEFAULT_EPS_GP) -> Cochain:
    m = c.degree
    if m < 1:
        raise ValueError("homotopy is defined for degree >= 1")

    if m == 1:
        def h1(gs, x):
            return 1.0 / c((rho(x, eps_gp),), x)

        return Cochain(0, h1, f"h({c.name})")

    def hm(gs, x):
        frame = rho(act_config(_product(gs), x), eps_gp)
        return c((frame,) + tuple(gs), x)

    return Cochain(m - 1, hm, f"h({c.name})")


def coboundary_of_relative(f: Callable[[JetConfiguration], float], name: str = "f") -> Cochain:
    """Degree-1 multiplier ``(g, x) -> f(g.x) / f(x)``."""

    def mu(gs, x):
        (g,) = gs
        fx = float(f(x))
        if fx == 0.0:
            raise ZeroValue(f"{name} vanishes at the configuration")
        return float(f(act_config(g, x))) / fx

    return Cochain(1, mu, f"d({name})")


def constant_cochain(m: int, value: float = 1.0) -> Cochain:
    return Cochain(m, lambda gs, x: value, f"const{m}")


def jacobian_cochain() -> Cochain:
    return Cochain(1, lambda gs, x: jacobian_multiplier(gs[0], x), "J")


def random_cochain(m: int, rng: int | np.random.Generator, n: int, scale: float = 0.3) -> Cochain:
    """``exp(poly)`` in the canonical group entries and the configuration.

    The polynomial has linear terms in every entry, products of group
    entries with configuration coordinates, and a quadratic form in the
    coordinates; coefficients are ``U[-scale, scale]`` divided by the
    number of terms they multiply.  Values are strictly positive.
    """
    gen = as_generator(rng)
    ng, nx = 8 * m, 4 * n
    w_g = gen.uniform(-scale, scale, ng) / max(ng, 1)
    w_x = gen.uniform(-scale, scale, nx) / nx
    cross = gen.uniform(-scale, scale, (ng, nx)) / max(ng * nx, 1)
    quad = gen.uniform(-scale, scale, (nx, nx)) / nx**2
    eye = np.eye(3).ravel()[:8]

    def fn(gs, x):
        z_g = np.concatenate([g.matrix.ravel()[:8] - eye for g in gs]) if gs else np.zeros(0)
        z_x = x.data.ravel()
        expo = w_g @ z_g + w_x @ z_x + z_g @ cross @ z_x + z_x @ quad @ z_x
        return math.exp(expo)

    return Cochain(m, fn, f"rand{m}")


@dataclass(frozen=True)
class HomotopyReport:
    degree: int
    trials: int
    max_rel_residual: float
    failures: int
    tolerance: float = math.inf
    skipped: int = 0

    @property
    def passes(self) -> bool:
        return self.failures == 0 and self.max_rel_residual <= self.tolerance

    def to_dict(self) -> dict:
        out = asdict(self)
        if math.isinf(self.tolerance):
            out["tolerance"] = None
        out["passes"] = self.passes
        return out


def log_residual(lhs: float, rhs: float) -> float:
    """``|log(lhs / rhs)|``; infinite when the signs differ."""
    ratio = lhs / rhs
    return abs(math.log(ratio)) if ratio > 0 else math.inf


def contraction_residual(c: Cochain, gs: Sequence[Homography], cfg: JetConfiguration) -> float:
    lhs = coboundary(homotopy(c))(gs, cfg) * homotopy(coboundary(c))(gs, cfg)
    return log_residual(lhs, c(gs, cfg))


CochainFamily = Callable[[int, np.random.Generator, int], Cochain]


def verify_contraction(
    m: int,
    trials: int = 100,
    seed: int = 0,
    cochain_family: CochainFamily | Cochain | None = None,
    *,
    spread: float = 0.1,
    n: int = 4,
    tolerance: float = math.inf,
) -> HomotopyReport:
    """Max of ``|log(d h c * h d c / c)|`` over random ``(c, g1..gm, x)``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    family = cochain_family or random_cochain
    worst = 0.0
    failures = skipped = 0
    for t in range(trials):
        for attempt in range(100):
            rng = stream(seed, "contraction", m, t, attempt)
            cfg = sample_configuration(rng, n)
            gs = [sample_homography(rng, spread, cfg) for _ in range(m)]
            c = family if isinstance(family, Cochain) else family(m, rng, n)
            try:
                res = contraction_residual(c, gs, cfg)
                break
            except ProjInvError:
                skipped += 1
        else:
            failures += 1
            continue
        if not math.isfinite(res) or res > tolerance:
            failures += 1
        worst = max(worst, res)
    return HomotopyReport(m, trials, worst, failures, tolerance, skipped)


def key_relation_residual(gs: Sequence[Homography], cfg: JetConfiguration) -> float:
    """Entrywise relative gap between ``rho(g1...gm.x) g1`` and ``rho(g2...gm.x)``."""
    gs = tuple(gs)
    R = rho(act_config(_product(gs), cfg))
    lhs = (R @ gs[0]).matrix
    rhs = rho(act_config(_product(gs[1:]), cfg)).matrix
    return float(np.abs(lhs - rhs).max() / np.abs(rhs).max())


def reconstruction_residual(b: Cochain, g: Homography, cfg: JetConfiguration) -> float:
    """``|log(d0(h1 b)(g, x) / b(g, x))|``; zero for a 1-cocycle ``b``."""
    return log_residual(coboundary(homotopy(b))((g,), cfg), b((g,), cfg))
