"""PGL(3, R) acting on points, its first prolongation to jets, and the
joint Jacobian multiplier.

Group elements are stored as their representative with bottom-right entry
``c3 = 1``, so that ``s = c1 x + c2 y + 1`` is the point denominator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CanonicalizationError, DenominatorNearZero, SamplingExhausted, SingularMatrix
from .jet_config import JetBlock, JetConfiguration
from .rng import as_generator

DEN_TOL = 1e-10
_C3_TOL = 1e-13
_DET_TOL = 1e-14


def canonicalize(m) -> np.ndarray:
    arr = np.array(m, dtype=np.float64)
    if arr.shape != (3, 3):
        raise ValueError(f"homography must be 3x3, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("homography entries must be finite")
    c3 = arr[2, 2]
    if abs(c3) <= _C3_TOL * np.abs(arr).max():
        raise CanonicalizationError("c3 = 0: no representative with c3 = 1")
    out = arr / c3
    out[2, 2] = 1.0
    if abs(np.linalg.det(out)) <= _DET_TOL * np.abs(out).max() ** 3:
        raise SingularMatrix("homography matrix is singular")
    return out


@dataclass(frozen=True, eq=False)
class Homography:
    """Projective transformation, canonical representative ``c3 = 1``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = canonicalize(self.matrix)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def __matmul__(self, other: "Homography") -> "Homography":
        return Homography(self.matrix @ other.matrix)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.matrix))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Homography):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash(self.matrix.tobytes())

    def __repr__(self) -> str:
        return f"Homography({self.matrix.tolist()!r})"

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "Homography":
        try:
            return cls(np.array(obj["matrix"], dtype=np.float64))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed homography object: {exc}") from None

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "Homography":
        return cls.from_dict(json.loads(text))


def load_homography(path: str | Path) -> Homography:
    return Homography.from_json(Path(path).read_text())


def _den_tol(m: np.ndarray, scale: float) -> float:
    return DEN_TOL * (1.0 + abs(m[2, 0]) + abs(m[2, 1])) * max(1.0, scale)


def _dens(m: np.ndarray, d: np.ndarray) -> np.ndarray:
    return d[:, 0] * m[2, 0] + d[:, 1] * m[2, 1] + 1.0


def denominators(g: Homography, cfg: JetConfiguration) -> np.ndarray:
    """Per-point ``s_i = c1 x_i + c2 y_i + 1``."""
    return _dens(g.matrix, cfg.data)


def _check_dens(g: Homography, s, scale: float) -> None:
    tol = _den_tol(g.matrix, scale)
    if np.any(np.abs(s) <= tol):
        raise DenominatorNearZero(f"point maps to the line at infinity (|s| <= {tol:.3g})")


def act_point(g: Homography, pt) -> tuple[float, float]:
    x, y = float(pt[0]), float(pt[1])
    m = g.matrix
    s = m[2, 0] * x + m[2, 1] * y + 1.0
    _check_dens(g, s, max(abs(x), abs(y)))
    return (
        float((m[0, 0] * x + m[0, 1] * y + m[0, 2]) / s),
        float((m[1, 0] * x + m[1, 1] * y + m[1, 2]) / s),
    )


def _prolong(m: np.ndarray, d: np.ndarray) -> np.ndarray:
    # minors of the (b, c) and (a, c) row pairs
    (a1, a2, a3), (b1, b2, b3), (c1, c2, c3) = m
    det = np.linalg.det(m)
    x, y, p, q = d[:, 0], d[:, 1], d[:, 2], d[:, 3]
    s = c1 * x + c2 * y + c3
    euler = p * x + q * y
    pt = s / det * (-(b1 * c2 - b2 * c1) * euler + (b2 * c3 - b3 * c2) * p - (b1 * c3 - b3 * c1) * q)
    qt = s / det * ((a1 * c2 - a2 * c1) * euler - (a2 * c3 - a3 * c2) * p + (a1 * c3 - a3 * c1) * q)
    out = np.empty_like(d)
    out[:, 0] = (a1 * x + a2 * y + a3) / s
    out[:, 1] = (b1 * x + b2 * y + b3) / s
    out[:, 2] = pt
    out[:, 3] = qt
    return out


def prolong_block(g: Homography, blk) -> JetBlock:
    d = np.array([tuple(blk)], dtype=np.float64)
    s = _dens(g.matrix, d)
    _check_dens(g, s, float(np.abs(d[:, :2]).max()))
    return JetBlock(*map(float, _prolong(g.matrix, d)[0]))


def act_config(g: Homography, cfg: JetConfiguration) -> JetConfiguration:
    s = denominators(g, cfg)
    _check_dens(g, s, float(np.abs(cfg.points).max()))
    return JetConfiguration(_prolong(g.matrix, cfg.data))


def jacobian_multiplier(g: Homography, cfg: JetConfiguration) -> float:
    """``D**n / prod(s_i**3)`` with ``D = det`` of the canonical matrix."""
    s = denominators(g, cfg)
    _check_dens(g, s, float(np.abs(cfg.points).max()))
    return float(np.prod(g.det / s**3))


def sample_homography(
    rng: int | np.random.Generator,
    spread: float,
    cfg: JetConfiguration | None = None,
    *,
    min_det: float = 1e-3,
    min_den: float = 0.1,
    max_tries: int = 1000,
) -> Homography:
    """Identity plus entrywise ``U[-spread, spread]`` noise, c3-normalized.

    Draws are rejected until ``|det| > min_det`` and, when ``cfg`` is given,
    every point denominator exceeds ``min_den`` in magnitude.
    """
    if spread < 0:
        raise ValueError("spread must be nonnegative")
    gen = as_generator(rng)
    for _ in range(max_tries):
        m = np.eye(3) + gen.uniform(-spread, spread, size=(3, 3))
        if abs(m[2, 2]) < 1e-6:
            continue
        m = m / m[2, 2]
        m[2, 2] = 1.0
        if abs(np.linalg.det(m)) <= min_det:
            continue
        if cfg is not None:
            s = cfg.data[:, 0] * m[2, 0] + cfg.data[:, 1] * m[2, 1] + 1.0
            if np.any(np.abs(s) <= min_den):
                continue
        return Homography(m)
    raise SamplingExhausted(f"no admissible homography after {max_tries} draws")
