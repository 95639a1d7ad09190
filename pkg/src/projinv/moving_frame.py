"""Moving frame for the cross-section

    x1 = 1, y1 = 0, x2 = 0, y2 = 0, x3 = 0, y3 = 1, p1 = 1, q1 = 0.

``solve_frame`` returns the group element sending a configuration onto
the cross-section.  The closed form is the primary path; every solution
is checked against the eight normalization equations and, if that check
fails, recomputed by a null-space solve of the linearized system.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EvaluationFailure, FrameDenominatorNearZero, NotInGeneralPosition
from .jet_config import DEFAULT_EPS_GP, JetConfiguration, check_general_position
from .projective_action import Homography, act_config

DEFAULT_EPS_RES = 1e-9

CROSS_SECTION = {
    "x1": 1.0, "y1": 0.0, "p1": 1.0, "q1": 0.0,
    "x2": 0.0, "y2": 0.0, "x3": 0.0, "y3": 1.0,
}
# (block index, column) of each pinned coordinate, 0-based
_PINNED = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 0), (1, 1), (2, 0), (2, 1)]
_TARGET = np.array([1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0])


@dataclass(frozen=True)
class FrameParameters:
    a1: float
    a2: float
    a3: float
    b1: float
    b2: float
    b3: float
    c1: float
    c2: float
    method: str = "closed_form"

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.a1, self.a2, self.a3], [self.b1, self.b2, self.b3], [self.c1, self.c2, 1.0]]
        )

    def homography(self) -> Homography:
        return Homography(self.matrix)

    @classmethod
    def from_matrix(cls, m: np.ndarray, method: str) -> "FrameParameters":
        m = np.asarray(m, dtype=np.float64) / m[2, 2]
        return cls(*map(float, m.ravel()[:8]), method=method)

    def to_dict(self) -> dict:
        return {
            "a": [self.a1, self.a2, self.a3],
            "b": [self.b1, self.b2, self.b3],
            "c": [self.c1, self.c2, 1.0],
            "method": self.method,
        }


def closed_form_frame(cfg: JetConfiguration) -> np.ndarray:
    (x1, y1, p1, q1), (x2, y2, _, _), (x3, y3, _, _) = cfg.data[:3]
    d = x1 * (y2 - y3) - x2 * (y1 - y3) + x3 * (y1 - y2)
    m23 = x2 * y3 - x3 * y2
    den = d * (q1 * y1 + p1 * x1) + m23
    phi13 = (x1 - x3) * p1 + (y1 - y3) * q1
    L = cfg.scale()
    if abs(den) <= 1e-14 * L**2 * max(1.0, L * np.hypot(p1, q1)):
        raise FrameDenominatorNearZero("common frame denominator vanishes")
    return np.array(
        [
            [(y2 - y3) / den, (x3 - x2) / den, m23 / den],
            [phi13 * (y1 - y2) / den, phi13 * (x2 - x1) / den, phi13 * (x1 * y2 - x2 * y1) / den],
            [(y2 - y3 - p1 * d) / den, (x3 - x2 - q1 * d) / den, 1.0],
        ]
    )


def constructive_frame(cfg: JetConfiguration) -> np.ndarray:
    """Frame from the homogeneous linear system in (alpha, beta, c).

    Rows: a = alpha * (X2 x X3), b = beta * (X1 x X2); the x1- and
    y3-equations and the two gradient equations at X1 are linear in
    (alpha, beta, c1, c2, c3).
    """
    X = np.c_[cfg.points[:3], np.ones(3)]
    p1, q1 = cfg.data[0, 2:]
    l23 = np.cross(X[1], X[2])
    l12 = np.cross(X[0], X[1])
    d = l23 @ X[0]
    e = l12 @ X[2]
    A = np.array(
        [
            [-d, 0.0, X[0, 0], X[0, 1], 1.0],
            [0.0, -e, X[2, 0], X[2, 1], 1.0],
            [d * p1 - l23[0], 0.0, 1.0, 0.0, 0.0],
            [d * q1 - l23[1], 0.0, 0.0, 1.0, 0.0],
        ]
    )
    _, sv, vt = np.linalg.svd(A)
    v = vt[-1]
    if abs(v[4]) <= 1e-14 * np.abs(v).max():
        raise FrameDenominatorNearZero("normalization system has no c3 = 1 solution")
    alpha, beta, c1, c2, c3 = v / v[4]
    return np.vstack([alpha * l23, beta * l12, [c1, c2, c3]])


def frame_residuals(m: np.ndarray | FrameParameters | Homography, cfg: JetConfiguration) -> np.ndarray:
    """The eight normalization equations evaluated at ``m``: transformed
    pinned coordinates minus their cross-section values."""
    if isinstance(m, FrameParameters):
        g = m.homography()
    elif isinstance(m, Homography):
        g = m
    else:
        g = Homography(m)
    head = JetConfiguration(cfg.data[:3])
    moved = act_config(g, head).data
    return np.array([moved[i, j] for i, j in _PINNED]) - _TARGET


def solve_frame(
    cfg: JetConfiguration,
    eps_gp: float = DEFAULT_EPS_GP,
    eps_res: float = DEFAULT_EPS_RES,
) -> FrameParameters:
    report = check_general_position(cfg, eps_gp)
    if not report.passes:
        raise NotInGeneralPosition(f"configuration fails the general-position check: {report.to_dict()}")
    try:
        m = closed_form_frame(cfg)
        if np.abs(frame_residuals(m, cfg)).max() <= eps_res:
            return FrameParameters.from_matrix(m, "closed_form")
    except FrameDenominatorNearZero:
        pass
    m = constructive_frame(cfg)
    res = np.abs(frame_residuals(m, cfg)).max()
    if res > eps_res:
        raise FrameDenominatorNearZero(f"frame residual {res:.3g} exceeds {eps_res:.3g}")
    return FrameParameters.from_matrix(m, "constructive")


def frame_matrix(cfg: JetConfiguration, **kw) -> np.ndarray:
    return solve_frame(cfg, **kw).matrix


@dataclass(frozen=True)
class NormalizedConfiguration:
    cfg: JetConfiguration
    frame: FrameParameters

    def free_coordinates(self) -> np.ndarray:
        """``(p2, q2, p3, q3, x4, y4, p4, q4, ...)`` of the normalized point."""
        d = self.cfg.data
        return np.concatenate([d[1, 2:], d[2, 2:], d[3:].ravel()])

    def pinned_residual(self) -> float:
        d = self.cfg.data
        return float(np.abs(np.array([d[i, j] for i, j in _PINNED]) - _TARGET).max())

    def to_dict(self) -> dict:
        return {
            "frame": self.frame.to_dict(),
            "normalized": self.cfg.to_dict(),
            "pinned_residual": self.pinned_residual(),
        }


def normalize(cfg: JetConfiguration, **kw) -> NormalizedConfiguration:
    frame = solve_frame(cfg, **kw)
    return NormalizedConfiguration(act_config(frame.homography(), cfg), frame)


def invariantize(f: Callable[[JetConfiguration], float], cfg: JetConfiguration, **kw) -> float:
    """``f`` evaluated at the normalized configuration."""
    norm = normalize(cfg, **kw)
    try:
        val = float(f(norm.cfg))
    except (ArithmeticError, ValueError) as exc:
        raise EvaluationFailure(f"function undefined at the normalized point: {exc}") from exc
    if not np.isfinite(val):
        raise EvaluationFailure("function is not finite at the normalized point")
    return val
