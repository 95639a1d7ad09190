"""Configurations of n points carrying first jets ``(x, y, p, q)``.

Indices in the public functions are 1-based, matching the usual way the
bracket functions are written (``delta(cfg, 1, 2, 3)``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

DEFAULT_EPS_GP = 1e-8


class JetBlock(NamedTuple):
    x: float
    y: float
    p: float
    q: float


@dataclass(frozen=True, eq=False)
class JetConfiguration:
    """n >= 3 jet blocks stored as a read-only ``(n, 4)`` float array."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError(f"expected an (n, 4) array, got shape {arr.shape}")
        if arr.shape[0] < 3:
            raise ValueError("a configuration needs at least 3 points")
        if not np.all(np.isfinite(arr)):
            raise ValueError("configuration entries must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[float]]) -> "JetConfiguration":
        return cls(np.array([tuple(b) for b in blocks], dtype=np.float64))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def __len__(self) -> int:
        return self.n

    def block(self, i: int) -> JetBlock:
        _check_index(self, i)
        return JetBlock(*map(float, self.data[i - 1]))

    @property
    def blocks(self) -> tuple[JetBlock, ...]:
        return tuple(JetBlock(*map(float, row)) for row in self.data)

    @property
    def points(self) -> np.ndarray:
        return self.data[:, :2]

    @property
    def gradients(self) -> np.ndarray:
        return self.data[:, 2:]

    def scale(self) -> float:
        """Largest pairwise point distance, floored at 1e-300."""
        pts = self.points
        diff = pts[:, None, :] - pts[None, :, :]
        return max(float(np.sqrt((diff**2).sum(-1)).max()), 1e-300)

    def __eq__(self, other) -> bool:
        if not isinstance(other, JetConfiguration):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash(self.data.tobytes())

    def __repr__(self) -> str:
        return f"JetConfiguration(n={self.n}, data={self.data.tolist()!r})"

    # serialization

    def to_dict(self) -> dict:
        return {
            "points": [
                {"x": float(x), "y": float(y), "p": float(p), "q": float(q)}
                for x, y, p, q in self.data
            ]
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "JetConfiguration":
        try:
            pts = obj["points"]
            rows = [(pt["x"], pt["y"], pt["p"], pt["q"]) for pt in pts]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed configuration object: {exc}") from None
        return cls(np.array(rows, dtype=np.float64))

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "JetConfiguration":
        return cls.from_dict(json.loads(text))


def load_configuration(path: str | Path) -> JetConfiguration:
    return JetConfiguration.from_json(Path(path).read_text())


def save_configuration(cfg: JetConfiguration, path: str | Path, indent: int | None = 2) -> None:
    Path(path).write_text(cfg.to_json(indent=indent) + "\n")


def _check_index(cfg: JetConfiguration, *idx: int) -> None:
    for i in idx:
        if not 1 <= i <= cfg.n:
            raise IndexError(f"index {i} out of range 1..{cfg.n}")


def delta(cfg: JetConfiguration, i: int, j: int, k: int) -> float:
    """Determinant of the 3x3 matrix with rows (x_i,x_j,x_k), (y_i,y_j,y_k), (1,1,1)."""
    _check_index(cfg, i, j, k)
    if len({i, j, k}) != 3:
        raise ValueError("delta needs three distinct indices")
    d = cfg.data
    xi, yi = d[i - 1, 0], d[i - 1, 1]
    xj, yj = d[j - 1, 0], d[j - 1, 1]
    xk, yk = d[k - 1, 0], d[k - 1, 1]
    return float(xi * (yj - yk) - xj * (yi - yk) + xk * (yi - yj))


def phi(cfg: JetConfiguration, k: int, i: int, j: int) -> float:
    """Bracket ``(x_i - x_j) p_k + (y_i - y_j) q_k``."""
    _check_index(cfg, k, i, j)
    if i == j:
        raise ValueError("phi requires i != j")
    d = cfg.data
    return float((d[i - 1, 0] - d[j - 1, 0]) * d[k - 1, 2] + (d[i - 1, 1] - d[j - 1, 1]) * d[k - 1, 3])


@dataclass(frozen=True)
class GeneralPositionReport:
    """Scaled minima of the quantities the closed forms divide by.

    ``delta`` values are divided by ``L**2`` (L = configuration diameter),
    brackets by ``L * G`` (G = largest gradient norm) and the xi
    denominators by ``L**2 * max(1, L * G)``.  ``min_abs_xi_denominator``
    is ``inf`` for n = 3.
    """

    min_abs_delta123: float
    min_abs_phi: float
    min_abs_xi_denominator: float
    eps_gp: float

    @property
    def passes(self) -> bool:
        return (
            self.min_abs_delta123 > self.eps_gp
            and self.min_abs_phi > self.eps_gp
            and self.min_abs_xi_denominator > self.eps_gp
        )

    def to_dict(self) -> dict:
        xi = self.min_abs_xi_denominator
        return {
            "min_abs_delta123": self.min_abs_delta123,
            "min_abs_phi": self.min_abs_phi,
            "min_abs_xi_denominator": None if math.isinf(xi) else xi,
            "eps_gp": self.eps_gp,
            "passes": self.passes,
        }


def check_general_position(cfg: JetConfiguration, eps_gp: float = DEFAULT_EPS_GP) -> GeneralPositionReport:
    L = cfg.scale()
    G = float(np.sqrt((cfg.gradients**2).sum(1)).max())
    if L**2 == 0.0 or not math.isfinite(L * L * max(1.0, L * G)):
        # coincident points (or a scale the minima cannot be formed at)
        return GeneralPositionReport(0.0, 0.0, 0.0 if cfg.n > 3 else math.inf, eps_gp)
    d123 = delta(cfg, 1, 2, 3)
    min_delta = abs(d123) / L**2
    phis = (phi(cfg, 1, 1, 2), phi(cfg, 1, 1, 3))
    min_phi = min(abs(v) for v in phis) / (L * G) if G > 0 else 0.0
    xi_scale = L**2 * max(1.0, L * G)
    min_xi = math.inf
    for k in range(4, cfg.n + 1):
        den = delta(cfg, 2, 3, k) + d123 * phi(cfg, 1, 1, k)
        min_xi = min(min_xi, abs(den) / xi_scale)
    return GeneralPositionReport(min_delta, min_phi, min_xi, eps_gp)
