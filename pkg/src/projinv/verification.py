"""Finite-difference Jacobians, numerical rank and batched invariance trials."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import invariant_field
from .errors import EvaluationFailure, ProjInvError
from .jet_config import JetConfiguration
from .projective_action import act_config, sample_homography
from .rng import stream
from .sampling import sample_configuration

VectorFn = Callable[[JetConfiguration], np.ndarray]

DEFAULT_STEP = 1e-6
RANK_RTOL = 1e-6


def fd_jacobian(f: VectorFn, cfg: JetConfiguration, step: float = DEFAULT_STEP) -> np.ndarray:
    """Central differences; coordinate i is perturbed by ``step * max(1, |x_i|)``.

    Returns an ``(m, 4n)`` array with columns in the order
    ``x1, y1, p1, q1, x2, ...``.
    """
    x0 = cfg.data.ravel().copy()
    cols = []
    for i in range(x0.size):
        h = step * max(1.0, abs(x0[i]))
        xp, xm = x0.copy(), x0.copy()
        xp[i] += h
        xm[i] -= h
        try:
            fp = np.atleast_1d(np.asarray(f(JetConfiguration(xp.reshape(-1, 4))), dtype=float))
            fm = np.atleast_1d(np.asarray(f(JetConfiguration(xm.reshape(-1, 4))), dtype=float))
        except ProjInvError as exc:
            raise EvaluationFailure(f"f undefined near the configuration: {exc}") from exc
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise EvaluationFailure("f is not finite in the step neighbourhood")
        cols.append((fp - fm) / (2.0 * h))
    return np.column_stack(cols)


@dataclass(frozen=True)
class RankReport:
    n: int
    jacobian_shape: tuple[int, int]
    singular_values: tuple[float, ...]
    rank: int
    expected_rank: int
    ratio: float
    trials_used: int

    @property
    def passes(self) -> bool:
        return self.rank == self.expected_rank

    def to_dict(self) -> dict:
        out = asdict(self)
        out["jacobian_shape"] = list(self.jacobian_shape)
        out["singular_values"] = list(self.singular_values)
        out["passes"] = self.passes
        return out


def numerical_rank(sv: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv >= rtol * sv[0]))


def independence_rank(
    n: int,
    trials: int = 10,
    seed: int = 0,
    *,
    f: VectorFn | None = None,
    expected: int | None = None,
    step: float = DEFAULT_STEP,
    rtol: float = RANK_RTOL,
) -> RankReport:
    """Numerical rank of the generating set's Jacobian; best of ``trials``
    random configurations (largest ``sigma_min / sigma_max``)."""
    if n < 3:
        raise ValueError("n must be at least 3")
    f = f or invariant_field.generating_array
    expected = 4 * n - 8 if expected is None else expected
    best = None
    for t in range(trials):
        cfg = sample_configuration(stream(seed, "rank", n, t), n)
        try:
            jac = fd_jacobian(f, cfg, step)
        except EvaluationFailure:
            continue
        sv = np.linalg.svd(jac, compute_uv=False)
        k = min(expected, sv.size)
        ratio = float(sv[k - 1] / sv[0]) if sv[0] > 0 else 0.0
        if best is None or ratio > best[0]:
            best = (ratio, jac.shape, sv, t + 1)
    if best is None:
        return RankReport(n, (expected, 4 * n), (), 0, expected, 0.0, trials)
    ratio, shape, sv, used = best
    return RankReport(
        n, tuple(shape), tuple(float(s) for s in sv), numerical_rank(sv, rtol), expected, ratio, used
    )


@dataclass(frozen=True)
class TrialReport:
    trials: int
    failures: int
    max_rel_residual: float
    seed: int
    spread: float
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


def rel_dev(a, ref, eps: float = 1e-300) -> float:
    """Largest entrywise ``|a - ref| / (|ref| + eps)``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    ref = np.atleast_1d(np.asarray(ref, dtype=float))
    return float(np.max(np.abs(a - ref) / (np.abs(ref) + eps)))


def invariance_trials(
    f: VectorFn,
    trials: int = 1000,
    seed: int = 0,
    spread: float = 0.2,
    *,
    n: int = 4,
    tolerance: float = math.inf,
    eps: float = 1e-300,
) -> TrialReport:
    """Max over trials of ``|f(g.cfg) - f(cfg)| / (|f| + eps)``.

    A trial whose configuration or transformed configuration cannot be
    evaluated is redrawn (counted in ``skipped``), not failed.
    """
    worst = 0.0
    failures = skipped = 0
    for t in range(trials):
        for attempt in range(100):
            rng = stream(seed, "invariance", t, attempt)
            cfg = sample_configuration(rng, n)
            g = sample_homography(rng, spread, cfg)
            try:
                before = f(cfg)
                after = f(act_config(g, cfg))
                break
            except ProjInvError:
                skipped += 1
        else:
            failures += 1
            continue
        dev = rel_dev(after, before, eps)
        if not np.isfinite(dev) or dev > tolerance:
            failures += 1
        worst = max(worst, dev if np.isfinite(dev) else math.inf)
    return TrialReport(trials, failures, worst, seed, spread, tolerance, skipped)
