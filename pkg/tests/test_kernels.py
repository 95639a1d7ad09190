"""The compiled kernels and the numpy fallback must agree."""

import subprocess
import sys

import numpy as np
import pytest

from projinv import _pykernels as py
from projinv.sampling import sample_configuration

ck = pytest.importorskip("projinv._ckernels")


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(0)
    img = rng.random((37, 53))
    xs, ys = rng.uniform(-3, 56, 2000), rng.uniform(-3, 40, 2000)
    return img, xs, ys


def test_bilinear(data):
    img, xs, ys = data
    assert np.array_equal(py.bilinear(img, xs, ys), ck.bilinear(img, xs, ys))


def test_bilinear_integer_points_are_pixels(data):
    img = data[0]
    ys, xs = np.mgrid[0:37, 0:53]
    assert np.array_equal(ck.bilinear(img, xs.astype(float), ys.astype(float)), img)


def test_bilinear_shapes(data):
    img = data[0]
    out = ck.bilinear(img, np.ones((3, 4)), np.ones((3, 4)))
    assert out.shape == (3, 4)


def test_sobel(data):
    img, xs, ys = data
    for a, b in zip(py.sobel(img, xs, ys), ck.sobel(img, xs, ys)):
        assert np.array_equal(a, b)


@pytest.mark.parametrize("threads", [1, 4])
def test_warp(data, threads):
    img = data[0]
    H = np.array([[1.01, 0.02, -1.0], [0.01, 0.99, 2.0], [1e-3, -2e-3, 1.0]])
    assert np.array_equal(py.warp(img, H, 30, 60), ck.warp(img, H, 30, 60, threads))


@pytest.mark.parametrize("n", [3, 4, 6])
def test_frame_jacobian(n):
    cfgs = np.stack([sample_configuration(s, n).data for s in range(300)])
    cfgs[0, :, :2] = cfgs[0, 0, :2]  # coincident points
    cfgs[1, :, 2:] = 0.0  # zero gradients
    cfgs[2, 2] = 2 * cfgs[2, 1] - cfgs[2, 0]  # collinear X1, X2, X3
    a, oka = py.frame_jacobian_batch(cfgs, 1e-8)
    b, okb = ck.frame_jacobian_batch(cfgs, 1e-8, 4)
    assert np.array_equal(oka, okb)
    assert not oka[:3].any() and oka[3:].all()
    assert np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)) < 1e-10
    assert np.all(b[~okb] == 0.0)


def test_frame_jacobian_matches_library():
    from projinv.relative_invariants import invariantized_jacobian

    cfgs = [sample_configuration(s, 5) for s in range(50)]
    c, ok = ck.frame_jacobian_batch(np.stack([c.data for c in cfgs]), 1e-8)
    ref = np.array([invariantized_jacobian(cfg) for cfg in cfgs])
    assert ok.all() and np.max(np.abs(c - ref) / np.abs(ref)) < 1e-10


def test_pure_python_switch():
    code = "from projinv import kernels; print(kernels.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env={"PROJINV_PURE_PYTHON": "1", "PATH": ""}
    )
    assert out.stdout.strip() == "python"
