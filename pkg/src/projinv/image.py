"""Raster images: PGM I/O, Sobel jets, pointwise features, homography warps
and an experimental weight -1 Monte Carlo integrand.

Pixel coordinates are ``(x, y) = (column, row)`` with y pointing down; an
intensity sample at a non-integer position is bilinear with the border
clamped.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ImageFormatError, OutOfBounds, ProjInvError, SamplingExhausted
from .invariant_field import InvariantVector, bracket_conditioning, generating_set
from .jet_config import DEFAULT_EPS_GP, JetConfiguration
from .projective_action import Homography, act_point, sample_homography
from .relative_invariants import invariantized_jacobian
from .rng import stream


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Row-major intensities in [0, 1], stored read-only as ``(height, width)``."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True, order="C")
        if arr.ndim != 2 or min(arr.shape) < 1:
            raise ValueError(f"expected a nonempty 2-D array, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def sample(self, xs, ys) -> np.ndarray:
        return kernels.bilinear(self.data, xs, ys)



def _tokens(buf: bytes, count: int) -> tuple[list[int], int]:
    """First ``count`` header integers after the magic, and the data offset."""
    pos, out = 2, []
    while len(out) < count:
        while pos < len(buf) and (buf[pos : pos + 1].isspace() or buf[pos : pos + 1] == b"#"):
            if buf[pos : pos + 1] == b"#":
                end = buf.find(b"\n", pos)
                pos = len(buf) if end < 0 else end + 1
            else:
                pos += 1
        start = pos
        while pos < len(buf) and buf[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated or malformed PGM header")
        out.append(int(buf[start:pos]))
    if pos >= len(buf) or not buf[pos : pos + 1].isspace():
        raise ImageFormatError("missing whitespace after PGM header")
    return out, pos + 1


def read_pgm(path: str | Path) -> GrayImage:
    buf = Path(path).read_bytes()
    if not buf.startswith(b"P5"):
        raise ImageFormatError(f"{path}: not a binary PGM (P5)")
    (w, h, maxval), off = _tokens(buf, 3)
    if w < 1 or h < 1 or not 1 <= maxval <= 65535:
        raise ImageFormatError(f"{path}: bad PGM header {w}x{h} maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = w * h * dtype.itemsize
    if len(buf) - off < need:
        raise ImageFormatError(f"{path}: expected {need} data bytes, found {len(buf) - off}")
    raw = np.frombuffer(buf, dtype=dtype, count=w * h, offset=off)
    return GrayImage(raw.reshape(h, w).astype(np.float64) / maxval)


def write_pgm(img: GrayImage, path: str | Path, bits: int = 16) -> None:
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    maxval = 255 if bits == 8 else 65535
    q = np.rint(np.clip(img.data, 0.0, 1.0) * maxval)
    payload = q.astype(">u2" if bits == 16 else "u1").tobytes()
    Path(path).write_bytes(b"P5\n%d %d\n%d\n" % (img.width, img.height, maxval) + payload)


def _as_points(pts) -> np.ndarray:
    arr = np.asarray(pts, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) pixel coordinates, got shape {arr.shape}")
    return arr


def sobel_jet(img: GrayImage, pts) -> JetConfiguration:
    """Configuration at ``pts`` with Sobel gradients (kernels scaled by 1/8)."""
    pts = _as_points(pts)
    xs, ys = pts[:, 0], pts[:, 1]
    inside = (xs >= 1) & (xs <= img.width - 2) & (ys >= 1) & (ys <= img.height - 2)
    if not np.all(inside):
        bad = pts[~inside][0]
        raise OutOfBounds(f"point ({bad[0]}, {bad[1]}) is within 1 px of the border")
    p, q = kernels.sobel(img.data, xs, ys)
    return JetConfiguration(np.column_stack([xs, ys, p, q]))


@dataclass(frozen=True)
class FeatureSample:
    cfg: JetConfiguration
    features: InvariantVector
    c_value: float

    def to_dict(self) -> dict:
        return {"cfg": self.cfg.to_dict(), "features": self.features.to_dict(), "c_value": self.c_value}


def features_of(cfg: JetConfiguration, eps_gp: float = DEFAULT_EPS_GP) -> FeatureSample:
    """Feature sample of a configuration whose jets are already known."""
    return FeatureSample(cfg, generating_set(cfg, eps_gp), invariantized_jacobian(cfg, eps_gp))


def feature_at(img: GrayImage, pts, eps_gp: float = DEFAULT_EPS_GP) -> FeatureSample:
    return features_of(sobel_jet(img, pts), eps_gp)


def normalizing_matrix(width: int, height: int) -> np.ndarray:
    """Pixel -> normalized coordinates: centre at 0, half the larger side at 1."""
    s = (max(width, height) - 1) / 2.0
    return np.array([[1 / s, 0, -(width - 1) / (2 * s)], [0, 1 / s, -(height - 1) / (2 * s)], [0, 0, 1.0]])


def to_pixel_homography(g: Homography, width: int, height: int) -> Homography:
    """Conjugate a homography of normalized coordinates into pixel coordinates."""
    N = normalizing_matrix(width, height)
    return Homography(np.linalg.solve(N, g.matrix @ N))


def warp_image(img: GrayImage, g: Homography, out_shape: tuple[int, int] | None = None) -> GrayImage:
    """Image of ``img`` under ``g`` (pixel coordinates): ``out(g.x) = img(x)``,
    by inverse mapping with bilinear resampling."""
    h, w = out_shape or img.data.shape
    return GrayImage(kernels.warp(img.data, g.inverse().matrix, h, w, kernels.thread_count()))


@dataclass(frozen=True)
class WarpReport:
    trials: int
    spread: float
    seed: int
    max_rel_dev: float
    per_trial: tuple[float, ...]
    resampled: int

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "spread": self.spread,
            "seed": self.seed,
            "max_rel_dev": self.max_rel_dev,
            "per_trial": list(self.per_trial),
            "resampled": self.resampled,
        }


WARP_COND_EPS = 5e-2
WARP_GRAD_FLOOR = 5e-2


def gradient_scale(img: GrayImage) -> float:
    """99th percentile of the Sobel gradient norm over interior pixels."""
    h, w = img.data.shape
    if h < 3 or w < 3:
        return 0.0
    ys, xs = np.mgrid[1 : h - 1, 1 : w - 1].astype(np.float64)
    p, q = kernels.sobel(img.data, xs.ravel(), ys.ravel())
    return float(np.percentile(np.hypot(p, q), 99))


def warp_robustness(
    img: GrayImage,
    trials: int = 50,
    seed: int = 0,
    spread: float = 0.05,
    *,
    n: int = 4,
    margin: float | None = None,
    cond_eps: float = WARP_COND_EPS,
    grad_floor: float = WARP_GRAD_FLOOR,
) -> WarpReport:
    """Largest per-feature relative gap between ``feature_at(img, pts)`` and
    ``feature_at(g.img, g.pts)`` over random near-identity ``g``.

    ``g`` is drawn in normalized coordinates and conjugated to pixels.
    Points are uniform in the image shrunk by ``margin`` (default: an
    eighth of the smaller side per edge).  Draws are resampled (and
    counted) when they leave the image, when ``bracket_conditioning`` is
    below ``cond_eps``, or when some point's gradient is below
    ``grad_floor * gradient_scale(img)``: near a critical point of the
    intensity the Sobel estimate has no accurate direction.
    """
    h, w = img.data.shape
    g_min = grad_floor * gradient_scale(img)
    margin = min(w, h) / 8 if margin is None else margin
    worst: list[float] = []
    resampled = 0
    for t in range(trials):
        for attempt in range(1000):
            rng = stream(seed, "warp", n, t, attempt)
            g = to_pixel_homography(sample_homography(rng, spread), w, h)
            pts = np.column_stack(
                [rng.uniform(margin, w - 1 - margin, n), rng.uniform(margin, h - 1 - margin, n)]
            )
            try:
                a = feature_at(img, pts)
                weak = np.hypot(a.cfg.gradients[:, 0], a.cfg.gradients[:, 1]).min() < g_min
                if weak or bracket_conditioning(a.cfg) < cond_eps:
                    raise SamplingExhausted("ill-conditioned draw")
                moved = np.array([act_point(g, pt) for pt in pts])
                b = feature_at(warp_image(img, g), moved)
                break
            except ProjInvError:
                resampled += 1
        else:
            raise SamplingExhausted("no admissible warp trial after 1000 draws")
        fa, fb = a.features.as_array(), b.features.as_array()
        worst.append(float(np.max(np.abs(fb - fa) / np.abs(fa))))
    return WarpReport(trials, spread, seed, max(worst, default=0.0), tuple(worst), resampled)


def mc_weight_integrand(cfg: JetConfiguration, u_values, eps_gp: float = DEFAULT_EPS_GP) -> float:
    """``C(cfg) * prod(u)``; a relative invariant of weight -1 when the
    intensities travel with the points."""
    u = np.asarray(u_values, dtype=np.float64)
    if u.shape != (cfg.n,):
        raise ValueError(f"need {cfg.n} intensity values, got shape {u.shape}")
    return invariantized_jacobian(cfg, eps_gp) * float(np.prod(u))


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    stderr: float
    samples: int
    skipped: int
    n: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "samples": self.samples,
            "skipped": self.skipped,
            "used": self.samples - self.skipped,
            "n": self.n,
            "seed": self.seed,
            "backend": kernels.BACKEND,
        }


MC_CHUNK = 4096


def _mc_chunk(img: np.ndarray, n: int, count: int, seed: int, index: int, eps_gp: float):
    h, w = img.shape
    rng = stream(seed, "mc", n, index)
    xs = rng.uniform(1.0, w - 2.0, size=(count, n))
    ys = rng.uniform(1.0, h - 2.0, size=(count, n))
    u = kernels.bilinear(img, xs, ys)
    p, q = kernels.sobel(img, xs, ys)
    prod = np.prod(u, axis=1)
    live = prod != 0.0
    cfgs = np.stack([xs, ys, p, q], axis=-1)[live]
    C, ok = kernels.frame_jacobian_batch(cfgs, eps_gp)
    ok &= np.isfinite(C)
    values = np.zeros(count)
    values[np.flatnonzero(live)[ok]] = C[ok] * prod[live][ok]
    keep = ~live
    keep[np.flatnonzero(live)[ok]] = True
    return values[keep], int(count - keep.sum())


def mc_descriptor(
    img: GrayImage,
    n: int,
    samples: int,
    seed: int = 0,
    eps_gp: float = DEFAULT_EPS_GP,
) -> MonteCarloResult:
    """Monte Carlo mean of ``C * prod(u)`` over uniform interior configurations.

    Experimental: the integrand is exact pointwise but nothing guarantees
    the integral converges.  Samples with a zero intensity product score 0
    without needing the frame; the rest are skipped when general position
    fails at ``eps_gp``.  Chunks of ``MC_CHUNK`` samples have their own
    random streams, so the result does not depend on ``PROJINV_THREADS``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if n < 3:
        raise ValueError("n must be at least 3")
    if img.width < 3 or img.height < 3:
        raise OutOfBounds("image must be at least 3x3")
    sizes = [min(MC_CHUNK, samples - s) for s in range(0, samples, MC_CHUNK)]
    args = [(img.data, n, c, seed, i, eps_gp) for i, c in enumerate(sizes)]
    threads = min(kernels.thread_count(), len(args))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda a: _mc_chunk(*a), args))
    else:
        parts = [_mc_chunk(*a) for a in args]
    values = np.concatenate([v for v, _ in parts])
    skipped = sum(s for _, s in parts)
    used = values.size
    estimate = math.fsum(values) / used if used else 0.0
    stderr = float(values.std(ddof=1) / math.sqrt(used)) if used > 1 else 0.0
    return MonteCarloResult(float(estimate), stderr, samples, skipped, n, seed)
