"""Pure numpy implementations of the hot kernels.

Signatures and semantics match ``_ckernels``; ``projinv.kernels`` picks
one of the two at import.
"""

from __future__ import annotations

import numpy as np


def bilinear(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    h, w = img.shape
    xs = np.clip(np.asarray(xs, dtype=np.float64), 0.0, w - 1.0)
    ys = np.clip(np.asarray(ys, dtype=np.float64), 0.0, h - 1.0)
    x0 = np.minimum(np.floor(xs).astype(np.intp), w - 2) if w > 1 else np.zeros(xs.shape, np.intp)
    y0 = np.minimum(np.floor(ys).astype(np.intp), h - 2) if h > 1 else np.zeros(ys.shape, np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def sobel(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel at (possibly fractional) points, kernels scaled by 1/8."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)

    def at(dx, dy):
        return bilinear(img, xs + dx, ys + dy)

    # a b c / d . f / g k l around (x, y); differences first so flat regions give exact zeros
    a, b, c = at(-1, -1), at(0, -1), at(1, -1)
    d, f = at(-1, 0), at(1, 0)
    g, k, l = at(-1, 1), at(0, 1), at(1, 1)
    p = ((c - a) + 2.0 * (f - d) + (l - g)) / 8.0
    q = ((g - a) + 2.0 * (k - b) + (l - c)) / 8.0
    return p, q


def warp(img: np.ndarray, hinv: np.ndarray, out_h: int, out_w: int, threads: int = 1) -> np.ndarray:
    """``out[r, c] = img(hinv . (c, r, 1))``, bilinear with border clamp."""
    rr, cc = np.mgrid[0:out_h, 0:out_w].astype(np.float64)
    den = hinv[2, 0] * cc + hinv[2, 1] * rr + hinv[2, 2]
    bad = np.abs(den) < 1e-300
    den = np.where(bad, 1.0, den)
    xs = (hinv[0, 0] * cc + hinv[0, 1] * rr + hinv[0, 2]) / den
    ys = (hinv[1, 0] * cc + hinv[1, 1] * rr + hinv[1, 2]) / den
    out = bilinear(img, xs, ys)
    out[bad] = 0.0
    return out


def frame_jacobian_batch(
    cfgs: np.ndarray, eps_gp: float, threads: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Invariantized Jacobian for a stack of configurations ``(m, n, 4)``.

    Returns ``(C, ok)``; ``ok`` is False where the general-position check
    fails or the frame denominator vanishes, and ``C`` is 0 there.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _frame_jacobian(np.asarray(cfgs, dtype=np.float64), eps_gp)


def _frame_jacobian(cfgs: np.ndarray, eps_gp: float) -> tuple[np.ndarray, np.ndarray]:
    m, n, _ = cfgs.shape
    x, y, p, q = (cfgs[..., i] for i in range(4))

    dx = x[:, :, None] - x[:, None, :]
    dy = y[:, :, None] - y[:, None, :]
    L = np.maximum(np.sqrt(dx**2 + dy**2).max(axis=(1, 2)), 1e-300)
    G = np.sqrt(p**2 + q**2).max(axis=1)

    def delta(i, j, k):
        return x[:, i] * (y[:, j] - y[:, k]) - x[:, j] * (y[:, i] - y[:, k]) + x[:, k] * (y[:, i] - y[:, j])

    def phi1(i, j):
        return (x[:, i] - x[:, j]) * p[:, 0] + (y[:, i] - y[:, j]) * q[:, 0]

    d = delta(0, 1, 2)
    f12, f13 = phi1(0, 1), phi1(0, 2)
    ok = np.abs(d) / L**2 > eps_gp
    min_phi = np.where(G > 0, np.minimum(np.abs(f12), np.abs(f13)) / (L * G), 0.0)
    ok &= min_phi > eps_gp
    xi_scale = L**2 * np.maximum(1.0, L * G)
    for k in range(3, n):
        ok &= np.abs(delta(1, 2, k) + d * phi1(0, k)) / xi_scale > eps_gp

    x1, y1, p1, q1 = x[:, 0], y[:, 0], p[:, 0], q[:, 0]
    x2, y2, x3, y3 = x[:, 1], y[:, 1], x[:, 2], y[:, 2]
    m23 = x2 * y3 - x3 * y2
    den = d * (q1 * y1 + p1 * x1) + m23
    ok &= np.abs(den) > 1e-14 * L**2 * np.maximum(1.0, L * np.hypot(p1, q1))
    den = np.where(ok, den, 1.0)

    frame = np.empty((m, 3, 3))
    frame[:, 0, 0] = (y2 - y3) / den
    frame[:, 0, 1] = (x3 - x2) / den
    frame[:, 0, 2] = m23 / den
    frame[:, 1, 0] = f13 * (y1 - y2) / den
    frame[:, 1, 1] = f13 * (x2 - x1) / den
    frame[:, 1, 2] = f13 * (x1 * y2 - x2 * y1) / den
    frame[:, 2, 0] = (y2 - y3 - p1 * d) / den
    frame[:, 2, 1] = (x3 - x2 - q1 * d) / den
    frame[:, 2, 2] = 1.0
    D = np.linalg.det(frame)
    s = frame[:, 2, 0][:, None] * x + frame[:, 2, 1][:, None] * y + 1.0
    ok &= np.all(np.abs(s) > 1e-10 * (1.0 + np.abs(frame[:, 2, 0]) + np.abs(frame[:, 2, 1]))[:, None], axis=1)
    C = np.prod(D[:, None] / s**3, axis=1)
    C = np.where(ok, C, 0.0)
    return C, ok
