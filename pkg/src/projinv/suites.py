"""Named verification suites.

Each suite is a function ``(SuiteParams) -> dict`` whose result carries a
boolean ``"passes"``; ``run_suites`` runs a selection in a fixed order.
Everything random is drawn from ``stream(seed, ...)`` so results repeat
bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import cochain as co
from .errors import ProjInvError
from .invariant_field import generating_array, iota_coordinates, relation_residuals
from .jet_config import DEFAULT_EPS_GP, JetConfiguration
from .moving_frame import DEFAULT_EPS_RES, frame_residuals, normalize, solve_frame
from .projective_action import act_config, sample_homography
from .relative_invariants import (
    check_relative,
    closed_form_jacobian,
    gcd3,
    invariantized_jacobian,
    primitive_element,
)
from .rng import stream
from .sampling import sample_configuration
from .verification import independence_rank, invariance_trials, rel_dev

TOL = {
    "frame_residual": 1e-9,
    "equivariance": 1e-8,
    "invariance": 1e-8,
    "closed_form": 1e-9,
    "relations": 1e-10,
    "relative": 1e-8,
    "closed_form_jacobian": 1e-9,
    "cocycle": 1e-9,
    "dd": 1e-8,
    "contraction": 1e-7,
    "reconstruction": 1e-9,
}


@dataclass(frozen=True)
class SuiteParams:
    seed: int = 0
    trials: int = 100
    spread: float = 0.2
    eps_gp: float = DEFAULT_EPS_GP
    eps_res: float = DEFAULT_EPS_RES
    ns: tuple[int, ...] = (3, 4, 5, 6)
    cfg: JetConfiguration | None = None
    tol: dict = field(default_factory=lambda: dict(TOL))


def _draws(p: SuiteParams, tag: str, n: int, t: int):
    """Yields ``(cfg, g)`` candidates for trial ``t``; callers stop at the first usable one."""
    for attempt in range(100):
        rng = stream(p.seed, tag, n, t, attempt)
        cfg = sample_configuration(rng, n)
        yield cfg, sample_homography(rng, p.spread, cfg)


def frame_suite(p: SuiteParams) -> dict:
    worst_res = worst_eq = 0.0
    failures = 0
    per_n = max(1, p.trials // len(p.ns))
    for n in p.ns:
        for t in range(per_n):
            for cfg, g in _draws(p, "frame", n, t):
                try:
                    rho = solve_frame(cfg, p.eps_gp, p.eps_res).matrix
                    rho_g = solve_frame(act_config(g, cfg), p.eps_gp, p.eps_res).matrix
                    break
                except ProjInvError:
                    continue
            else:
                failures += 1
                continue
            worst_res = max(worst_res, float(np.abs(frame_residuals(rho, cfg)).max()))
            expected = rho @ np.linalg.inv(g.matrix)
            expected = expected / expected[2, 2]
            worst_eq = max(worst_eq, float(np.abs(rho_g - expected).max() / np.abs(expected).max()))
    out = {
        "trials": per_n * len(p.ns),
        "max_frame_residual": worst_res,
        "max_equivariance_dev": worst_eq,
        "failures": failures,
    }
    if p.cfg is not None:
        out["sample_frame_residual"] = float(np.abs(frame_residuals(solve_frame(p.cfg, p.eps_gp, p.eps_res), p.cfg)).max())
        worst_res = max(worst_res, out["sample_frame_residual"])
    out["passes"] = failures == 0 and worst_res <= p.tol["frame_residual"] and worst_eq <= p.tol["equivariance"]
    return out


def invariance_suite(p: SuiteParams) -> dict:
    per_n = max(1, p.trials // len(p.ns))
    reports = {
        str(n): invariance_trials(
            lambda c: generating_array(c, p.eps_gp), per_n, p.seed, p.spread, n=n, tolerance=p.tol["invariance"]
        ).to_dict()
        for n in p.ns
    }
    return {"by_n": reports, "passes": all(r["passes"] for r in reports.values())}


def closed_form_suite(p: SuiteParams) -> dict:
    worst = 0.0
    for t in range(p.trials):
        n = p.ns[t % len(p.ns)]
        cfg = sample_configuration(stream(p.seed, "closed_form", t), n)
        free = normalize(cfg, eps_gp=p.eps_gp, eps_res=p.eps_res).free_coordinates()
        worst = max(worst, rel_dev(iota_coordinates(cfg, p.eps_gp).as_array(), free))
    return {"trials": p.trials, "max_rel_dev": worst, "passes": worst <= p.tol["closed_form"]}


def relations_suite(p: SuiteParams) -> dict:
    worst: dict[str, float] = {}
    cfgs = [sample_configuration(stream(p.seed, "relations", t), 3) for t in range(p.trials)]
    if p.cfg is not None:
        cfgs.append(p.cfg)
    for cfg in cfgs:
        for name, r in relation_residuals(cfg, p.eps_gp).items():
            worst[name] = max(worst.get(name, 0.0), r)
    return {"trials": len(cfgs), "max_rel_residual": worst, "passes": max(worst.values()) <= p.tol["relations"]}


def rank_suite(p: SuiteParams) -> dict:
    reports = {str(n): independence_rank(n, 10, p.seed).to_dict() for n in (3, 4, 5)}
    return {"by_n": reports, "passes": all(r["passes"] for r in reports.values())}


def relative_suite(p: SuiteParams) -> dict:
    tol = p.tol["relative"]
    out: dict = {}
    c_rep = check_relative(
        lambda c: invariantized_jacobian(c, p.eps_gp), -1, p.trials, p.seed, n=4, spread=p.spread, tolerance=tol
    )
    out["C_weight_-1"] = c_rep.to_dict()
    for n in (3, 4, 6):
        w = Fraction(1, gcd3(n))
        rep = check_relative(
            lambda c: primitive_element(c, p.eps_gp), w, p.trials, p.seed, n=n, spread=p.spread, tolerance=tol
        )
        out[f"z_prime_n{n}_weight_{w}"] = rep.to_dict()
    worst = 0.0
    for t in range(p.trials):
        cfg = sample_configuration(stream(p.seed, "closed_form_C", t), p.ns[t % len(p.ns)])
        a, b = abs(invariantized_jacobian(cfg, p.eps_gp)), abs(closed_form_jacobian(cfg))
        worst = max(worst, abs(a - b) / b)
    out["closed_form_abs_C"] = {"trials": p.trials, "max_rel_dev": worst}
    out["passes"] = all(v["passes"] for k, v in out.items() if isinstance(v, dict) and "passes" in v) and worst <= p.tol[
        "closed_form_jacobian"
    ]
    return out


def _pointwise(p: SuiteParams, tag: str, degree: int, fn: Callable, n: int = 4) -> tuple[float, int]:
    """Max of ``fn(gs, cfg)`` over trials, with ``degree`` random group elements each."""
    worst, failures = 0.0, 0
    for t in range(p.trials):
        for attempt in range(100):
            rng = stream(p.seed, tag, t, attempt)
            cfg = sample_configuration(rng, n)
            gs = [sample_homography(rng, p.spread, cfg) for _ in range(degree)]
            try:
                val = fn(gs, cfg, rng)
                break
            except ProjInvError:
                continue
        else:
            failures += 1
            continue
        worst = max(worst, val if math.isfinite(val) else math.inf)
    return worst, failures


def cochain_suite(p: SuiteParams) -> dict:
    tol = p.tol
    J = co.jacobian_cochain()
    out: dict = {}

    def cocycle(gs, cfg, rng):
        return co.log_residual(co.coboundary(J)(gs, cfg), 1.0)

    out["cocycle_J"], f1 = _pointwise(p, "cocycle", 2, cocycle)

    def dd0(gs, cfg, rng):
        c = co.random_cochain(0, rng, cfg.n)
        return co.log_residual(co.coboundary(co.coboundary(c))(gs, cfg), 1.0)

    def dd1(gs, cfg, rng):
        c = co.random_cochain(1, rng, cfg.n)
        return co.log_residual(co.coboundary(co.coboundary(c))(gs, cfg), 1.0)

    d0, f2 = _pointwise(p, "dd0", 2, dd0)
    d1, f3 = _pointwise(p, "dd1", 3, dd1)
    out["dd_degree0"], out["dd_degree1"] = d0, d1

    contraction = {}
    for m in (1, 2, 3):
        contraction[str(m)] = co.verify_contraction(
            m, p.trials, p.seed, spread=min(p.spread, 0.1), tolerance=tol["contraction"]
        ).to_dict()
    out["contraction"] = contraction

    def recon(gs, cfg, rng):
        return co.reconstruction_residual(J, gs[0], cfg)

    out["reconstruction_J"], f4 = _pointwise(p, "reconstruction", 1, recon)
    out["failures"] = f1 + f2 + f3 + f4
    out["passes"] = (
        out["failures"] == 0
        and out["cocycle_J"] <= tol["cocycle"]
        and max(d0, d1) <= tol["dd"]
        and all(r["passes"] for r in contraction.values())
        and out["reconstruction_J"] <= tol["reconstruction"]
    )
    return out


SUITES: dict[str, Callable[[SuiteParams], dict]] = {
    "frame": frame_suite,
    "invariance": invariance_suite,
    "closed-form": closed_form_suite,
    "relations": relations_suite,
    "rank": rank_suite,
    "relative": relative_suite,
    "cochain": cochain_suite,
}


def run_suites(names: list[str] | str, params: SuiteParams) -> dict:
    if names == "all" or names == ["all"]:
        names = list(SUITES)
    results = {name: SUITES[name](params) for name in names}
    return {"suites": results, "passes": all(r["passes"] for r in results.values())}
