"""Command-line interface.

Exit codes: 0 on success, 2 on usage errors, 1 on runtime errors.  Text
outputs go to ``--out`` (atomically) or standard output; binary outputs
require ``--out``.
"""
from __future__ import annotations

import argparse
import math
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import formats
from .diffmatrix import MatrixScheme, MatrixTooSmall, build_matrix
from .experiments import (
    MonteCarloConfig,
    ZonePlateConfig,
    monte_carlo_recovery,
    noise_free_recovery,
    nrmse,
    stitch_recover,
    synth_tiles,
)
from .kernels import InvalidSpec, KernelSpec, Scheme, design_kernel
from .recover import GradientField, RecoverySettings, recover_surface
from .response import default_omegas, eval_response
from .spectral import spectral_report

__all__ = ["main", "run"]


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    """``p/q``, an integer or a decimal literal, read exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def integer(text: str) -> int:
    q = rational(text)
    if q.denominator != 1:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(q)


def angle(text: str) -> float:
    """Radians; a trailing ``pi`` multiplies by pi (``1.6pi``)."""
    m = re.fullmatch(r"\s*(.*?)\s*\*?\s*pi\s*", text)
    if m:
        coeff = m.group(1)
        return float(rational(coeff) if coeff else 1) * math.pi
    return float(rational(text))


def _list(conv):
    def parse(text: str):
        items = [s for s in text.split(",") if s.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return tuple(conv(s) for s in items)
    return parse


def layout(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*[xX,]\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"layout must look like 1x2, got {text!r}")
    return int(m.group(1)), int(m.group(2))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _kernel_flags(p):
    p.add_argument("--scheme", choices=[s.value for s in Scheme], required=True)
    p.add_argument("--n", type=integer, required=True)
    p.add_argument("--l", type=integer, required=True)
    p.add_argument("--shift", type=integer, default=0)
    p.add_argument("--P", type=integer, default=None)


def _matrix_flags(p):
    p.add_argument("--scheme", choices=[s.value for s in MatrixScheme], required=True)
    p.add_argument("--n", type=integer, required=True)
    p.add_argument("--l", type=integer, required=True)
    p.add_argument("--N", type=integer, required=True)
    p.add_argument("--P", type=integer, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="maxpol", description="MaxPol derivative kernels and matrices")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("kernel", help="kernel coefficients as CSV")
    _kernel_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("response", help="frequency response as CSV")
    _kernel_flags(p)
    p.add_argument("--samples", type=integer, default=1024)
    p.add_argument("--out")

    p = sub.add_parser("matrix", help="derivative matrix as triplet CSV")
    _matrix_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("eig", help="spectral report as JSON")
    _matrix_flags(p)
    p.add_argument("--method", choices=["lapack", "exact"], default="lapack")
    p.add_argument("--out")

    p = sub.add_parser("recover", help="surface from MXG1 gradient grids")
    p.add_argument("--gx", required=True)
    p.add_argument("--gy", required=True)
    p.add_argument("--scheme", choices=["centralized", "staggered"], default="staggered")
    p.add_argument("--l", type=integer, default=5)
    p.add_argument("--P", type=integer, default=None)
    p.add_argument("--anchor", type=rational, default=Fraction(0))
    p.add_argument("--out", required=True)

    p = sub.add_parser("zoneplate", help="noise-free zone-plate recovery errors as CSV")
    p.add_argument("--size", type=integer, default=128)
    p.add_argument("--omega", type=angle, default=1.6 * math.pi)
    p.add_argument("--schemes", type=_list(str), default=("staggered", "centralized"))
    p.add_argument("--ls", type=_list(integer), default=(1, 2, 3, 4, 5))
    p.add_argument("--out")

    p = sub.add_parser("montecarlo", help="noisy zone-plate recovery errors as CSV")
    p.add_argument("--size", type=integer, default=128)
    p.add_argument("--sigmas", type=_list(float), default=MonteCarloConfig().sigmas)
    p.add_argument("--harmonics", type=_list(angle), default=MonteCarloConfig().harmonics)
    p.add_argument("--trials", type=integer, default=100)
    p.add_argument("--seed", type=integer, default=0)
    p.add_argument("--schemes", type=_list(str), default=("staggered", "centralized"))
    p.add_argument("--ls", type=_list(integer), default=(1, 5))
    p.add_argument("--out")

    p = sub.add_parser("stitch", help="gradient-domain stitching of synthetic tiles")
    p.add_argument("--truth", required=True, help="MXG1 ground-truth canvas")
    p.add_argument("--layout", type=layout, default=(1, 2))
    p.add_argument("--biases", type=_list(rational), default=None)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--seed", type=integer, default=0)
    p.add_argument("--l-forward", type=integer, default=5)
    p.add_argument("--P-forward", type=integer, default=None)
    p.add_argument("--l", type=integer, default=5)
    p.add_argument("--out", required=True)
    p.add_argument("--preview", help="PGM path (default: OUT with .pgm suffix)")
    return ap


def _emit(text: str, out) -> None:
    if out:
        formats.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _kernel(args):
    return design_kernel(KernelSpec(Scheme(args.scheme), args.n, args.l, args.shift, args.P))


def _check_schemes(schemes):
    bad = [s for s in schemes if s not in ("staggered", "centralized")]
    if bad:
        raise UsageError(f"unknown recovery scheme(s): {', '.join(bad)}")


def _settings(schemes, ls):
    return [RecoverySettings(s, l) for s in schemes for l in ls]


def _dispatch(args) -> None:
    cmd = args.command
    if cmd == "kernel":
        _emit(formats.kernel_csv(_kernel(args)), args.out)
    elif cmd == "response":
        if args.samples < 2:
            raise UsageError("--samples must be at least 2")
        resp = eval_response(_kernel(args), default_omegas(args.samples))
        _emit(formats.response_csv(resp), args.out)
    elif cmd == "matrix":
        D = build_matrix(args.scheme, args.n, args.l, args.N, args.P)
        _emit(formats.matrix_csv(D), args.out)
    elif cmd == "eig":
        D = build_matrix(args.scheme, args.n, args.l, args.N, args.P)
        _emit(formats.spectral_json(spectral_report(D, method=args.method)), args.out)
    elif cmd == "recover":
        field = GradientField(formats.read_mxg1(args.gx), formats.read_mxg1(args.gy))
        st = RecoverySettings(args.scheme, args.l, args.P, anchor_mean=float(args.anchor))
        formats.write_mxg1(args.out, recover_surface(field, st))
    elif cmd == "zoneplate":
        _check_schemes(args.schemes)
        cfg = ZonePlateConfig(args.size, args.omega, args.omega)
        rows = []
        for st in _settings(args.schemes, args.ls):
            e_in, e_b = noise_free_recovery(cfg, st)
            P = st.P if st.P is not None else (2 * st.l if st.scheme == "centralized" else 2 * st.l - 1)
            rows.append({"harmonic": args.omega, "sigma": 0.0, "scheme": st.scheme, "l": st.l,
                         "P": P, "interior_nrmse": e_in, "boundary_nrmse": e_b, "trials": 1})
        _emit(formats.results_csv(rows), args.out)
    elif cmd == "montecarlo":
        _check_schemes(args.schemes)
        mc = MonteCarloConfig(args.sigmas, args.trials, args.seed, args.harmonics)
        rows = monte_carlo_recovery(ZonePlateConfig(args.size), mc,
                                    _settings(args.schemes, args.ls))
        _emit(formats.results_csv(rows), args.out)
    elif cmd == "stitch":
        truth = formats.read_mxg1(args.truth)
        tiles = synth_tiles(truth, args.layout, args.biases, args.sigma, args.seed)
        phi = stitch_recover(tiles, args.l_forward, args.P_forward,
                             RecoverySettings("staggered", args.l), reference=truth)
        formats.write_mxg1(args.out, phi)
        preview = args.preview or str(Path(args.out).with_suffix(".pgm"))
        formats.atomic_write(preview, formats.pgm_bytes(phi))
        sys.stderr.write(f"nrmse vs truth: {nrmse(phi, truth):.6e}\n")


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _dispatch(args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 2
    except (InvalidSpec, MatrixTooSmall) as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"maxpol: error: {exc}\n")
        return 2
    except SystemExit as exc:
        # --help exits 0 through argparse
        return int(exc.code or 0)
    except Exception as exc:
        sys.stderr.write(f"maxpol: {type(exc).__name__}: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())
