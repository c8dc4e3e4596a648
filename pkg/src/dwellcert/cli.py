"""Command line interface.

Exit codes: 0 success, 1 usage or input error, 2 verification failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys as _sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    CertificateMismatch,
    DimensionNotTwo,
    DwellCertError,
    NumericalError,
    ParseError,
    ValidationError,
    VerificationFailed,
)
from .io import (
    RunConfig,
    emit_certificate,
    export_polytopes_2d,
    format_rows,
    load_and_verify,
    parse_system_file,
    run_sweep,
    write_system_file,
)
from .cycles import cycle_notation
from .system import validate_system

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(_sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--beam", type=int, help="beam width of the cycle search (even)")
    p.add_argument("--depth", type=int, help="depth of the cycle search")
    p.add_argument("--enum-length", type=int, help="exhaustive enumeration length (0 disables)")
    p.add_argument("--max-iterations", type=int, help="polytope iteration budget")
    p.add_argument("--max-vertices", type=int, help="vertex budget per mode")
    pm = p.add_mutually_exclusive_group()
    pm.add_argument("--positive-mode", dest="positive_mode", action="store_true", default=None)
    pm.add_argument("--no-positive-mode", dest="positive_mode", action="store_false")


def _merge(cfg: RunConfig, args) -> RunConfig:
    kw = {}
    for key in ("beam", "depth", "enum_length", "max_iterations", "max_vertices", "positive_mode"):
        val = getattr(args, key, None)
        if val is not None:
            kw[key] = val
    if getattr(args, "steps", None):
        kw["steps"] = tuple(args.steps)
    if getattr(args, "format", None):
        kw["output"] = args.format
    return replace(cfg, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dwellcert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", help="sweep over discretisation steps and print certified bounds")
    p.add_argument("system", type=Path)
    p.add_argument("--steps", type=float, nargs="*", help="discretisation steps (override the file)")
    p.add_argument("--format", choices=("text", "csv", "json"))
    p.add_argument("-o", "--output", type=Path, help="write the table here instead of stdout")
    p.add_argument("--certificates", type=Path, help="directory for one certificate per step")
    _add_run_flags(p)

    p = sub.add_parser("jsr", help="leading cycle and rho_hat at one step")
    p.add_argument("system", type=Path)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--certificate", type=Path, help="write the certificate here")
    _add_run_flags(p)

    p = sub.add_parser("verify", help="audit a certificate against a system file")
    p.add_argument("certificate", type=Path)
    p.add_argument("system", type=Path)

    p = sub.add_parser("plot2d", help="export the polytopes of a planar system as SVG + JSON")
    p.add_argument("system", type=Path)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("-o", "--output", type=Path, required=True)
    _add_run_flags(p)

    p = sub.add_parser("generate", help="write a random system file")
    p.add_argument("--family", choices=("gaussian", "metzler"), default="gaussian")
    p.add_argument("--modes", type=int, default=2)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--dwell-time", type=float, help="default: uniform in (0, 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=float, nargs="*", default=[])
    p.add_argument("-o", "--output", type=Path, required=True)
    return parser


def random_family(family: str, n: int, d: int, rng: np.random.Generator) -> list:
    """Random regimes normalised to unit 2-norm."""
    mats = []
    for _ in range(n):
        if family == "gaussian":
            A = rng.standard_normal((d, d))
        elif family == "metzler":
            A = rng.integers(-9, 10, size=(d, d)).astype(float)
            off = ~np.eye(d, dtype=bool)
            A[off] = np.abs(A[off])
        else:
            raise ValueError(f"unknown family {family!r}")
        s = np.linalg.norm(A, 2)
        mats.append(A / s if s > 0 else A)
    return mats


def _single(args):
    sys, cfg = parse_system_file(args.system)
    cfg = _merge(cfg, args)
    rows = run_sweep(sys, replace(cfg, steps=(args.h,)), threads=1)
    row = rows[0]
    if row.error is not None:
        raise row.error
    return sys, row


def _cmd_bounds(args) -> int:
    sys, cfg = parse_system_file(args.system)
    cfg = _merge(cfg, args)
    rows = run_sweep(sys, cfg)
    text = format_rows(rows, cfg.output)
    if args.output:
        args.output.write_text(text)
    else:
        _sys.stdout.write(text)
    if args.certificates:
        args.certificates.mkdir(parents=True, exist_ok=True)
        for row in rows:
            if row.certificate is not None:
                emit_certificate(row.certificate, sys, args.certificates / f"certificate_h{row.h!r}.json")
    failures = [row.error for row in rows if row.error is not None]
    if any(isinstance(e, NumericalError) for e in failures):
        return EXIT_NUMERIC
    if failures:
        return EXIT_INPUT
    return EXIT_OK


def _cmd_jsr(args) -> int:
    sys, row = _single(args)
    cert = row.certificate
    notation = cycle_notation(cert.leading_cycle, row.graph)
    print(f"h            {row.h!r}")
    print(f"rho_hat      {cert.rho_hat!r}")
    print(f"sigma_h      {cert.sigma_minus!r}")
    print(f"cycle        {notation}  [{notation.describe(sys.labels)}]")
    print(f"cycle edges  {cert.leading_cycle.length}")
    print(f"status       {cert.status.value} (epsilon {cert.epsilon!r}, {cert.iterations_used} iterations)")
    print(f"vertices     {', '.join(str(k) for k in cert.vertex_counts)}")
    if args.certificate:
        emit_certificate(cert, sys, args.certificate)
        print(f"certificate  {args.certificate}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    result = load_and_verify(args.certificate, args.system)
    if not result:
        raise VerificationFailed(result.violations[0])
    print(f"certificate verified (max excess {result.max_excess:.3g})")
    return EXIT_OK


def _cmd_plot2d(args) -> int:
    sys, row = _single(args)
    export_polytopes_2d(row.certificate, row.graph, args.output, sys.labels)
    print(f"wrote {args.output} and {args.output.with_suffix('.json')}")
    return EXIT_OK


def _cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    mats = random_family(args.family, args.modes, args.dim, rng)
    m = args.dwell_time if args.dwell_time is not None else float(rng.uniform(0.05, 1.0))
    sys = validate_system(mats, m)
    write_system_file(sys, args.output, RunConfig(steps=tuple(args.steps)))
    return EXIT_OK


_COMMANDS = {
    "bounds": _cmd_bounds,
    "jsr": _cmd_jsr,
    "verify": _cmd_verify,
    "plot2d": _cmd_plot2d,
    "generate": _cmd_generate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (VerificationFailed, CertificateMismatch) as exc:
        print(f"verification failed: {exc}", file=_sys.stderr)
        return EXIT_VERIFY
    except (ParseError, ValidationError, DimensionNotTwo, OSError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=_sys.stderr)
        return EXIT_NUMERIC
    except DwellCertError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    _sys.exit(main())
