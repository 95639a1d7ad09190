"""Command-line interface.

Every subcommand prints one JSON document on stdout.  Exit codes: 0 when
the requested checks pass, 1 when a check fails or the input is
degenerate, 2 for usage errors, 3 for unreadable or malformed input files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from importlib import resources

import numpy as np

from . import image as im
from .cochain import verify_contraction
from .errors import ImageFormatError, ProjInvError
from .invariant_field import (
    generating_array,
    generating_set,
    iota_coordinates,
    relation_residuals,
    stated_relation_residuals,
)
from .jet_config import DEFAULT_EPS_GP, JetConfiguration, load_configuration
from .moving_frame import DEFAULT_EPS_RES, normalize
from .projective_action import Homography, load_homography
from .relative_invariants import check_relative, invariantized_jacobian, primitive_element, relative_invariants
from .suites import SUITES, SuiteParams, run_suites
from .verification import independence_rank

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

RELATIONS_TOL = 1e-10
RELATIVE_TOL = 1e-8
CONTRACTION_TOL = 1e-7


class InputError(Exception):
    """An input file is missing or malformed."""


def _sample_config() -> JetConfiguration:
    text = resources.files("projinv").joinpath("data/sample_config.json").read_text()
    return JetConfiguration.from_json(text)


def _load_config(path: str | None) -> JetConfiguration:
    if path is None:
        return _sample_config()
    try:
        return load_configuration(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_homography(path: str) -> Homography:
    try:
        return load_homography(path)
    except (OSError, ValueError, ProjInvError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_image(path: str) -> im.GrayImage:
    try:
        return im.read_pgm(path)
    except (OSError, ImageFormatError) as exc:
        raise InputError(str(exc)) from exc


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# scalar functions for `relative --check`; C has weight -1, z_prime 1/gcd(n, 3),
# zeta12 and tau 0, and x1 is a raw coordinate (no weight works)
def _builtins(eps_gp: float) -> dict:
    return {
        "C": lambda c: invariantized_jacobian(c, eps_gp),
        "z_prime": lambda c: primitive_element(c, eps_gp),
        "zeta12": lambda c: generating_array(c, eps_gp)[0],
        "tau": lambda c: generating_array(c, eps_gp)[3],
        "x1": lambda c: c.data[0, 0],
    }


def cmd_frame(args) -> tuple[dict, bool]:
    norm = normalize(_load_config(args.config), eps_gp=args.eps_gp, eps_res=args.eps_res)
    return norm.to_dict(), True


def cmd_invariants(args) -> tuple[dict, bool]:
    cfg = _load_config(args.config)
    out = {
        "invariants": generating_set(cfg, args.eps_gp).to_dict(),
        "iota": iota_coordinates(cfg, args.eps_gp).to_dict(),
    }
    ok = True
    if args.relations:
        corrected = relation_residuals(cfg, args.eps_gp)
        ok = max(corrected.values()) <= RELATIONS_TOL
        out["relations"] = {
            "tolerance": RELATIONS_TOL,
            "residuals": corrected,
            "stated_form_residuals": stated_relation_residuals(cfg, args.eps_gp),
            "passes": ok,
        }
    return out, ok


def cmd_relative(args) -> tuple[dict, bool]:
    if args.check is None:
        cfg = _load_config(args.config)
        return relative_invariants(cfg, args.eps_gp).to_dict(), True
    funcs = _builtins(args.eps_gp)
    try:
        weight = Fraction(args.check)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"--check expects a rational weight, got {args.check!r}")
    f = funcs[args.function]
    rep = check_relative(
        f, weight, args.trials or 100, args.seed, n=args.n, spread=args.spread, tolerance=RELATIVE_TOL
    )
    out = {"function": args.function, "weight": str(weight), "n": args.n, "report": rep.to_dict()}
    return out, rep.passes


def cmd_verify(args) -> tuple[dict, bool]:
    cfg = _load_config(args.config)
    params = SuiteParams(
        seed=args.seed, trials=args.trials or 100, spread=args.spread, eps_gp=args.eps_gp, eps_res=args.eps_res, cfg=cfg
    )
    res = run_suites(args.suite, params)
    return res, res["passes"]


def cmd_rank(args) -> tuple[dict, bool]:
    rep = independence_rank(args.n, args.trials or 10, args.seed)
    return rep.to_dict(), rep.passes


def cmd_cochain(args) -> tuple[dict, bool]:
    rep = verify_contraction(
        args.m, args.trials or 100, args.seed, spread=args.spread, tolerance=CONTRACTION_TOL
    )
    return rep.to_dict(), rep.passes


def cmd_descriptor(args) -> tuple[dict, bool]:
    img = _load_image(args.image)
    res = im.mc_descriptor(img, args.n, args.samples, args.seed, args.eps_gp)
    return res.to_dict(), True


def cmd_warp(args) -> tuple[dict, bool]:
    img = _load_image(args.image)
    g = _load_homography(args.homography)
    if args.normalized:
        g = im.to_pixel_homography(g, img.width, img.height)
    out = im.warp_image(img, g)
    try:
        im.write_pgm(out, args.out, bits=args.bits)
    except OSError as exc:
        raise InputError(f"{args.out}: {exc}") from exc
    return {"out": str(args.out), "width": out.width, "height": out.height, "homography": g.to_dict()}, True


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _pos_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg_float(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_nonneg_int, default=0)
    common.add_argument("--trials", type=_pos_int, default=None, help="trial count (per-command default)")
    common.add_argument("--spread", type=_nonneg_float, default=0.2, help="homography sampling spread")
    common.add_argument("--eps-gp", type=_pos_float, default=DEFAULT_EPS_GP, help="general-position threshold")
    common.add_argument("--eps-res", type=_pos_float, default=DEFAULT_EPS_RES, help="frame residual tolerance")
    common.add_argument("--json-indent", type=_nonneg_int, default=2)

    parser = argparse.ArgumentParser(
        prog="projinv", description="Projective differential invariants of jet configurations."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    cfg_help = "configuration JSON (default: bundled sample)"
    sp = add("frame", cmd_frame, "moving frame and normalized configuration")
    sp.add_argument("config", nargs="?", help=cfg_help)

    sp = add("invariants", cmd_invariants, "generating set and iota coordinates")
    sp.add_argument("config", nargs="?", help=cfg_help)
    sp.add_argument("--relations", action="store_true", help="also report relation residuals")

    sp = add("relative", cmd_relative, "relative invariants, or a weight check")
    sp.add_argument("config", nargs="?", help=cfg_help)
    sp.add_argument("--check", metavar="WEIGHT", help="check the weight law with this weight (e.g. -1, 1/3)")
    sp.add_argument("--function", choices=sorted(_builtins(DEFAULT_EPS_GP)), default="C")
    sp.add_argument("--n", type=int, default=4, help="points per configuration for --check")

    sp = add("verify", cmd_verify, "run verification suites")
    sp.add_argument("config", nargs="?", help=cfg_help)
    sp.add_argument("--suite", nargs="+", choices=["all", *SUITES], default=["all"])

    sp = add("rank", cmd_rank, "functional independence of the generating set")
    sp.add_argument("--n", type=int, required=True)

    sp = add("cochain-check", cmd_cochain, "contracting homotopy identity")
    sp.add_argument("--m", type=int, choices=[1, 2, 3], required=True)

    sp = add("descriptor", cmd_descriptor, "experimental Monte Carlo descriptor of a PGM image")
    sp.add_argument("image")
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--samples", type=_pos_int, default=10000)

    sp = add("warp", cmd_warp, "warp a PGM image by a homography")
    sp.add_argument("image")
    sp.add_argument("--homography", required=True, help='JSON file {"matrix": [[...], [...], [...]]}')
    sp.add_argument("--out", required=True)
    sp.add_argument("--normalized", action="store_true", help="homography acts on normalized, not pixel, coordinates")
    sp.add_argument("--bits", type=int, choices=[8, 16], default=16)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "n", 3) < 3:
        parser.print_usage(sys.stderr)
        print("projinv: error: --n must be at least 3", file=sys.stderr)
        return EXIT_USAGE
    try:
        out, ok = args.func(args)
    except InputError as exc:
        print(f"projinv: {exc}", file=sys.stderr)
        return EXIT_IO
    except argparse.ArgumentTypeError as exc:
        print(f"projinv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProjInvError as exc:
        print(f"projinv: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    indent = args.json_indent or None
    sys.stdout.write(json.dumps(_clean(out), indent=indent) + "\n")
    if not ok:
        print(f"projinv: {args.command}: check failed", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
