"""Closed-form absolute invariants.

For n points the generating set has 4n - 8 members: the four three-point
invariants ``zeta12, zeta23, zeta13, tau`` followed by one block
``(xi1, xi2, xi3, xi4)`` per extra point k = 4..n.  All formulas are
written with the bracket ``Phi[k](i, j) = (x_i - x_j) p_k + (y_i - y_j) q_k``
and the triangle determinant ``delta(i, j, k)``; both helpers below take
1-based indices.

The iota-coordinates are the free coordinates of the normalized
configuration; ``moving_frame.normalize`` computes the same numbers by
actually applying the frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DenominatorNearZero, NotInGeneralPosition
from .jet_config import DEFAULT_EPS_GP, JetConfiguration, check_general_position

_TINY = 1e-14


class _Brackets:
    """Cached access to delta and Phi for one configuration."""

    def __init__(self, cfg: JetConfiguration):
        self.d = cfg.data
        self.n = cfg.n
        self.L = cfg.scale()

    def delta(self, i: int, j: int, k: int) -> float:
        d = self.d
        xi, yi = d[i - 1, :2]
        xj, yj = d[j - 1, :2]
        xk, yk = d[k - 1, :2]
        return float(xi * (yj - yk) - xj * (yi - yk) + xk * (yi - yj))

    def phi(self, k: int, i: int, j: int) -> float:
        d = self.d
        return float((d[i - 1, 0] - d[j - 1, 0]) * d[k - 1, 2] + (d[i - 1, 1] - d[j - 1, 1]) * d[k - 1, 3])

    def cross(self, i: int, k: int) -> float:
        """``p_i q_k - p_k q_i``."""
        d = self.d
        return float(d[i - 1, 2] * d[k - 1, 3] - d[k - 1, 2] * d[i - 1, 3])


def _nonzero(value: float, scale: float, what: str) -> float:
    if not abs(value) > _TINY * scale:
        raise DenominatorNearZero(f"{what} vanishes")
    return value


def _require_general_position(cfg: JetConfiguration, eps_gp: float) -> None:
    report = check_general_position(cfg, eps_gp)
    if not report.passes:
        raise NotInGeneralPosition(f"configuration fails the general-position check: {report.to_dict()}")


def basis_n3(cfg: JetConfiguration) -> tuple[float, float, float, float]:
    """``(zeta12, zeta23, zeta13, tau)`` built from blocks 1-3.

    These are polynomials, so no general-position check is made.
    """
    B = _Brackets(cfg)
    phi = B.phi
    zeta12 = phi(1, 1, 2) * phi(2, 1, 2)
    zeta23 = phi(2, 2, 3) * phi(3, 2, 3)
    zeta13 = phi(1, 1, 3) * phi(3, 1, 3)
    tau = phi(1, 1, 3) * phi(3, 2, 3) * phi(2, 1, 2)
    return zeta12, zeta23, zeta13, tau


def _xi_parts(B: _Brackets, k: int):
    phi, delta = B.phi, B.delta
    d123 = delta(1, 2, 3)
    d23k = delta(2, 3, k)
    f12, f13, f1k = phi(1, 1, 2), phi(1, 1, 3), phi(1, 1, k)
    s_k = d23k + d123 * f1k  # proportional to the frame denominator at block k
    a_k = phi(k, 1, k) * f12 - phi(k, 2, k)
    num4 = f1k * phi(k, 2, 3) + d23k * B.cross(1, k)
    return d123, d23k, f12, f13, f1k, s_k, a_k, num4


def xi_block(cfg: JetConfiguration, k: int) -> tuple[float, float, float, float]:
    """Invariants contributed by block ``k >= 4``.

    xi1 = delta123 Phi1(1,k) / delta23k
    xi2 = delta12k Phi1(1,3) / delta23k
    xi3 = (delta23k + delta123 Phi1(1,k)) (Phik(1,k) Phi1(1,2) - Phik(2,k)) / (delta123 Phi1(1,2))
    xi4 = (Phi1(1,k) Phik(2,3) + delta23k (p1 qk - pk q1)) / (Phi1(1,3) (Phik(1,k) Phi1(1,2) - Phik(2,k)))

    xi3 is exactly the normalized p_k; in terms of the normalized block,
    ``1/x = 1 + xi1``, ``y = xi2 x``, ``p = xi3`` and ``q = -xi4 p``.
    """
    if not 4 <= k <= cfg.n:
        raise IndexError(f"xi blocks exist for 4 <= k <= {cfg.n}, got {k}")
    B = _Brackets(cfg)
    d123, d23k, f12, f13, f1k, s_k, a_k, num4 = _xi_parts(B, k)
    L2 = B.L**2
    _nonzero(d23k, L2, f"delta(2,3,{k})")
    _nonzero(d123 * f12, L2 * B.L * np.abs(B.d[0, 2:]).max(), "delta123 * Phi1(1,2)")
    _nonzero(f13 * a_k, 1e-300, "Phi1(1,3) * (Phik(1,k) Phi1(1,2) - Phik(2,k))")
    xi1 = d123 * f1k / d23k
    xi2 = B.delta(1, 2, k) * f13 / d23k
    xi3 = s_k * a_k / (d123 * f12)
    xi4 = num4 / (f13 * a_k)
    return float(xi1), float(xi2), float(xi3), float(xi4)


@dataclass(frozen=True)
class IotaCoordinates:
    """Free coordinates of the normalized configuration, in closed form."""

    iota_p2: float
    iota_q2: float
    iota_p3: float
    iota_q3: float
    blocks: tuple[tuple[float, float, float, float], ...] = field(default=())

    def as_array(self) -> np.ndarray:
        head = [self.iota_p2, self.iota_q2, self.iota_p3, self.iota_q3]
        return np.array(head + [v for blk in self.blocks for v in blk])

    def to_dict(self) -> dict:
        return {
            "iota_p2": self.iota_p2,
            "iota_q2": self.iota_q2,
            "iota_p3": self.iota_p3,
            "iota_q3": self.iota_q3,
            "blocks": [
                {"k": k, "iota_x": b[0], "iota_y": b[1], "iota_p": b[2], "iota_q": b[3]}
                for k, b in enumerate(self.blocks, start=4)
            ],
        }


def iota_coordinates(cfg: JetConfiguration, eps_gp: float = DEFAULT_EPS_GP) -> IotaCoordinates:
    _require_general_position(cfg, eps_gp)
    B = _Brackets(cfg)
    phi = B.phi
    f12, f13 = phi(1, 1, 2), phi(1, 1, 3)
    ip2 = f12 * phi(2, 1, 2)
    iq2 = -f12 * phi(2, 2, 3) / f13
    ip3 = f13 * (phi(3, 1, 3) * f12 - phi(3, 2, 3)) / f12
    iq3 = -f13 * phi(3, 2, 3) / f12
    blocks = []
    for k in range(4, cfg.n + 1):
        d123, d23k, f12, f13, f1k, s_k, a_k, num4 = _xi_parts(B, k)
        ix = d23k / s_k
        iy = B.delta(1, 2, k) * f13 / s_k
        ip = s_k * a_k / (d123 * f12)
        iq = -s_k * num4 / (d123 * f12 * f13)
        blocks.append((float(ix), float(iy), float(ip), float(iq)))
    return IotaCoordinates(float(ip2), float(iq2), float(ip3), float(iq3), tuple(blocks))


@dataclass(frozen=True)
class InvariantVector:
    zeta12: float
    zeta23: float
    zeta13: float
    tau: float
    xi_blocks: tuple[tuple[float, float, float, float], ...] = field(default=())

    def __len__(self) -> int:
        return 4 + 4 * len(self.xi_blocks)

    def as_array(self) -> np.ndarray:
        head = [self.zeta12, self.zeta23, self.zeta13, self.tau]
        return np.array(head + [v for blk in self.xi_blocks for v in blk])

    def names(self) -> list[str]:
        out = ["zeta12", "zeta23", "zeta13", "tau"]
        for k in range(4, 4 + len(self.xi_blocks)):
            out += [f"xi{j}_{k}" for j in range(1, 5)]
        return out

    def to_dict(self) -> dict:
        return {
            "zeta12": self.zeta12,
            "zeta23": self.zeta23,
            "zeta13": self.zeta13,
            "tau": self.tau,
            "xi_blocks": [
                {"k": k, "xi1": b[0], "xi2": b[1], "xi3": b[2], "xi4": b[3]}
                for k, b in enumerate(self.xi_blocks, start=4)
            ],
            "length": len(self),
        }


def generating_set(cfg: JetConfiguration, eps_gp: float = DEFAULT_EPS_GP) -> InvariantVector:
    _require_general_position(cfg, eps_gp)
    z12, z23, z13, tau = basis_n3(cfg)
    blocks = tuple(xi_block(cfg, k) for k in range(4, cfg.n + 1))
    return InvariantVector(z12, z23, z13, tau, blocks)


def generating_array(cfg: JetConfiguration, eps_gp: float = DEFAULT_EPS_GP) -> np.ndarray:
    return generating_set(cfg, eps_gp).as_array()


def tau_prime(cfg: JetConfiguration) -> float:
    """Product of the gradient determinant |p q px+qy| and the triangle
    determinant |x y 1| over blocks 1-3."""
    d = cfg.data[:3]
    grad = np.c_[d[:, 2], d[:, 3], d[:, 2] * d[:, 0] + d[:, 3] * d[:, 1]]
    tri = np.c_[d[:, 0], d[:, 1], np.ones(3)]
    return float(np.linalg.det(grad) * np.linalg.det(tri))


def _rel(lhs: float, rhs: float) -> float:
    den = max(abs(lhs), abs(rhs))
    return 0.0 if den == 0.0 else abs(lhs - rhs) / den


def relation_residuals(cfg: JetConfiguration, eps_gp: float = DEFAULT_EPS_GP) -> dict[str, float]:
    """Relative residuals of the identities tying the iota-coordinates of
    blocks 2-3 to the three-point basis."""
    z12, z23, z13, tau = basis_n3(cfg)
    io = iota_coordinates(cfg, eps_gp)
    return {
        "iota_q2*iota_q3 = zeta23": _rel(io.iota_q2 * io.iota_q3, z23),
        "iota_p3 = zeta13 + iota_q3": _rel(io.iota_p3, z13 + io.iota_q3),
        "iota_p2*iota_q3 = -tau": _rel(io.iota_p2 * io.iota_q3, -tau),
        "tau_prime = tau - zeta12*zeta13*zeta23/tau": _rel(tau_prime(cfg), tau - z12 * z13 * z23 / tau),
    }


def bracket_conditioning(cfg: JetConfiguration) -> float:
    """Smallest scaled magnitude among the bracket factors of the generating set.

    Each ``delta`` is divided by ``L**2`` and each ``Phi^k`` by ``L |grad_k|``;
    the composite factors of the xi blocks get the matching products.  A
    feature whose factor is small has a large relative condition number, so
    this measures how far ``cfg`` is from the zero set of any feature.
    """
    B = _Brackets(cfg)
    L = B.L
    g = np.maximum(np.hypot(cfg.data[:, 2], cfg.data[:, 3]), 1e-300)

    def ph(k, i, j):
        return abs(B.phi(k, i, j)) / (L * g[k - 1])

    vals = [
        abs(B.delta(1, 2, 3)) / L**2,
        ph(1, 1, 2), ph(1, 1, 3), ph(2, 1, 2), ph(2, 2, 3), ph(3, 2, 3), ph(3, 1, 3),
    ]
    for k in range(4, cfg.n + 1):
        _, d23k, _, _, _, s_k, a_k, num4 = _xi_parts(B, k)
        gk, g1 = g[k - 1], g[0]
        vals += [
            abs(d23k) / L**2,
            abs(B.delta(1, 2, k)) / L**2,
            ph(1, 1, k),
            abs(s_k) / (L**2 * max(1.0, L * g1)),
            abs(a_k) / (L * gk * max(1.0, L * g1)),
            abs(num4) / (L**2 * g1 * gk),
        ]
    return float(min(vals))


def stated_relation_residuals(cfg: JetConfiguration, eps_gp: float = DEFAULT_EPS_GP) -> dict[str, float]:
    """Residuals of the relations in the form they are usually quoted.

    Only the first holds identically; the other three differ from the true
    identities of ``relation_residuals`` by a sign and are reported so the
    discrepancy stays visible.
    """
    z12, z23, z13, tau = basis_n3(cfg)
    io = iota_coordinates(cfg, eps_gp)
    return {
        "iota_q2*iota_q3 = zeta23": _rel(io.iota_q2 * io.iota_q3, z23),
        "iota_p3 = zeta13 - iota_q3": _rel(io.iota_p3, z13 - io.iota_q3),
        "iota_p2*iota_q3 = tau": _rel(io.iota_p2 * io.iota_q3, tau),
        "tau_prime = tau + zeta12*zeta13*zeta23/tau": _rel(tau_prime(cfg), tau + z12 * z13 * z23 / tau),
    }
