"""Acceptance criteria 1-9, each at its stated tolerance and time budget.

Every test prints one line ``CRITERION k: PASS|FAIL  <details>``.
"""

from __future__ import annotations

import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from imaging import exact_jets, exact_warped_jets, smooth_image, sobel_relative_error
from projinv.image import features_of, to_pixel_homography, warp_robustness, write_pgm
from projinv.invariant_field import basis_n3, generating_array, iota_coordinates, tau_prime
from projinv.projective_action import sample_homography
from projinv.relative_invariants import check_relative, gcd3, invariantized_jacobian, primitive_element
from projinv.rng import stream
from projinv.sampling import sample_configuration
from projinv.suites import SuiteParams, closed_form_suite, cochain_suite, frame_suite, relative_suite
from projinv.verification import independence_rank, invariance_trials

pytestmark = pytest.mark.acceptance

SEED = 2024


@pytest.fixture
def report(capsys):
    def emit(k: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'}  {detail}")

    return emit


def _fmt(x: float) -> str:
    return f"{x:.2e}"


def test_criterion_1_frame(report):
    t0 = time.perf_counter()
    res = frame_suite(SuiteParams(seed=SEED, trials=1000, spread=0.2, ns=(3, 4, 5, 6)))
    dt = time.perf_counter() - t0
    ok = (
        res["trials"] == 1000
        and res["failures"] == 0
        and res["max_frame_residual"] <= 1e-9
        and res["max_equivariance_dev"] <= 1e-8
        and dt <= 5.0
    )
    report(
        1,
        ok,
        f"residual {_fmt(res['max_frame_residual'])} (<=1e-9), equivariance "
        f"{_fmt(res['max_equivariance_dev'])} (<=1e-8), {res['trials']} configs, {dt:.2f}s (<=5s)",
    )
    assert ok


def test_criterion_2_invariance(report):
    t0 = time.perf_counter()
    worst = {}
    for n in (3, 4, 5, 6):
        rep = invariance_trials(generating_array, 1000, SEED, 0.2, n=n, tolerance=1e-8)
        assert rep.failures == 0
        worst[n] = rep.max_rel_residual
    dt = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-8 and dt <= 10.0
    report(2, ok, f"max rel residual {_fmt(max(worst.values()))} (<=1e-8) over 4x1000 trials, {dt:.2f}s (<=10s)")
    assert ok


def test_criterion_3_closed_form(report):
    res = closed_form_suite(SuiteParams(seed=SEED, trials=100))
    ok = res["max_rel_dev"] <= 1e-9
    report(3, ok, f"iota vs normalize max rel dev {_fmt(res['max_rel_dev'])} (<=1e-9), 100 configs")
    assert ok


def _rel(a: float, b: float) -> float:
    den = max(abs(a), abs(b))
    return 0.0 if den == 0 else abs(a - b) / den


def test_criterion_4_relations_as_stated(report):
    """The four relations exactly as stated; see the decisions ledger."""
    worst = {"q2q3=z23": 0.0, "p3=z13-q3": 0.0, "p2q3=tau": 0.0, "tau'=tau+zzz/tau": 0.0}
    for t in range(100):
        cfg = sample_configuration(stream(SEED, "criterion4", t), 3)
        z12, z23, z13, tau = basis_n3(cfg)
        io = iota_coordinates(cfg)
        vals = {
            "q2q3=z23": _rel(io.iota_q2 * io.iota_q3, z23),
            "p3=z13-q3": _rel(io.iota_p3, z13 - io.iota_q3),
            "p2q3=tau": _rel(io.iota_p2 * io.iota_q3, tau),
            "tau'=tau+zzz/tau": _rel(tau_prime(cfg), tau + z12 * z13 * z23 / tau),
        }
        for k, v in vals.items():
            worst[k] = max(worst[k], v)
    ok = max(worst.values()) <= 1e-10
    detail = ", ".join(f"{k} {_fmt(v)}" for k, v in worst.items())
    report(4, ok, f"max rel residuals (<=1e-10): {detail}")
    assert ok, worst


def test_criterion_5_rank(report):
    t0 = time.perf_counter()
    reps = {n: independence_rank(n, 10, SEED) for n in (3, 4, 5)}
    dt = time.perf_counter() - t0
    ok = all(r.passes and r.ratio >= 1e-6 for r in reps.values()) and dt <= 10.0
    detail = ", ".join(f"n={n}: rank {r.rank}/{r.expected_rank} ratio {_fmt(r.ratio)}" for n, r in reps.items())
    report(5, ok, f"{detail}, {dt:.2f}s (<=10s)")
    assert ok


def test_criterion_6_relative(report):
    c_rep = check_relative(invariantized_jacobian, -1, 1000, SEED, n=4, spread=0.2, tolerance=1e-8)
    z_reps = {
        n: check_relative(primitive_element, Fraction(1, gcd3(n)), 1000, SEED, n=n, spread=0.2, tolerance=1e-8)
        for n in (3, 4, 6)
    }
    mag = relative_suite(SuiteParams(seed=SEED, trials=1000))["closed_form_abs_C"]["max_rel_dev"]
    ok = c_rep.passes and all(r.passes for r in z_reps.values()) and mag <= 1e-9
    zs = ", ".join(f"n={n} {_fmt(r.max_rel_residual)}" for n, r in z_reps.items())
    report(
        6,
        ok,
        f"C weight -1 {_fmt(c_rep.max_rel_residual)} (<=1e-8), |C| closed form {_fmt(mag)} (<=1e-9), "
        f"z' weight 1/g {zs} (<=1e-8)",
    )
    assert ok


def test_criterion_7_cochain(report):
    t0 = time.perf_counter()
    res = cochain_suite(SuiteParams(seed=SEED, trials=100, spread=0.1))
    dt = time.perf_counter() - t0
    contraction = max(r["max_rel_residual"] for r in res["contraction"].values())
    ok = res["passes"] and dt <= 30.0
    report(
        7,
        ok,
        f"cocycle {_fmt(res['cocycle_J'])} (<=1e-9), dd {_fmt(max(res['dd_degree0'], res['dd_degree1']))} (<=1e-8), "
        f"contraction m=1..3 {_fmt(contraction)} (<=1e-7), reconstruction {_fmt(res['reconstruction_J'])} "
        f"(<=1e-9), {dt:.2f}s (<=30s)",
    )
    assert ok


def test_criterion_8_image(report):
    t0 = time.perf_counter()
    sobel = sobel_relative_error(6)
    warp = warp_robustness(smooth_image(512), trials=50, seed=SEED, spread=0.05)
    exact = 0.0
    for t in range(50):
        rng = stream(SEED, "criterion8-exact", t)
        g = to_pixel_homography(sample_homography(rng, 0.05), 512, 512)
        pts = rng.uniform(64, 448, (4, 2))
        a = features_of(exact_jets(pts)).features.as_array()
        b = features_of(exact_warped_jets(g, pts)).features.as_array()
        exact = max(exact, float(np.max(np.abs(b - a) / np.abs(a))))
    dt = time.perf_counter() - t0
    ok = sobel <= 0.02 and warp.max_rel_dev <= 2e-2 and exact <= 1e-9 and dt <= 60.0
    report(
        8,
        ok,
        f"Sobel sigma=6 {sobel:.4f} (<=0.02), warp robustness {_fmt(warp.max_rel_dev)} over 50 configs "
        f"(<=2e-2), exact-jet warp {_fmt(exact)} (<=1e-9), {dt:.2f}s (<=60s)",
    )
    assert ok


CLI_RUNS = [
    ["frame"],
    ["invariants", "--relations"],
    ["relative"],
    ["relative", "--check", "-1", "--trials", "50"],
    ["verify", "--suite", "all", "--seed", "7"],
    ["rank", "--n", "3"],
    ["rank", "--n", "4"],
    ["rank", "--n", "5"],
    ["cochain-check", "--m", "1", "--trials", "30", "--seed", "5", "--spread", "0.1"],
    ["cochain-check", "--m", "2", "--trials", "30", "--seed", "5", "--spread", "0.1"],
    ["cochain-check", "--m", "3", "--trials", "30", "--seed", "5", "--spread", "0.1"],
    ["descriptor", "{img}", "--n", "4", "--samples", "5000", "--seed", "9"],
    ["warp", "{img}", "--homography", "{hom}", "--out", "{out}"],
]


def test_criterion_9_determinism(report, tmp_path):
    img = tmp_path / "img.pgm"
    write_pgm(smooth_image(128), img)
    hom = tmp_path / "h.json"
    hom.write_text('{"matrix": [[1.02, 0.01, -2.0], [-0.01, 0.99, 1.5], [0.0001, -0.0002, 1.0]]}')
    env = dict(os.environ, PROJINV_THREADS="2")
    mismatches = []
    for argv in CLI_RUNS:
        outputs = []
        for rep in range(2):
            out = tmp_path / f"out{rep}.pgm"
            args = [a.format(img=img, hom=hom, out=out) for a in argv]
            proc = subprocess.run(
                [sys.executable, "-m", "projinv.cli", *args], capture_output=True, env=env, check=False
            )
            payload = proc.stdout.replace(str(out).encode(), b"<out>")
            if argv[0] == "warp":
                payload += out.read_bytes()
            outputs.append((proc.returncode, payload))
        if outputs[0] != outputs[1] or outputs[0][0] != 0:
            mismatches.append(" ".join(argv))
    ok = not mismatches
    report(9, ok, f"{len(CLI_RUNS)} CLI invocations run twice; mismatches: {mismatches or 'none'}")
    assert ok
