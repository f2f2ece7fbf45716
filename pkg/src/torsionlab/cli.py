"""Command-line front end.

Seven commands cover the library surface: ``torsion``, ``hodge``,
``glue-check``, ``ses-check``, ``lueck``, ``duality-check`` and ``product``.
Each reads job inputs in the JSON grammar of :mod:`torsionlab.formats`,
runs the computation, and writes either a human-readable listing or (with
``--json``) a canonical machine-readable report whose bytes are a pure
function of the job.

Exit codes: 0 on success, 2 when the input fails validation (the message
names the offending location), 1 when a computation fails numerically.
The environment variable ``TORSIONLAB_THREADS`` caps the linear-algebra
thread pools; it is honored at package import time.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def _validate_thread_cap() -> None:
    raw = os.environ.get("TORSIONLAB_THREADS")
    if raw is None:
        return
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap < 1:
        from .errors import DataValidationError
        raise DataValidationError(
            f"TORSIONLAB_THREADS must be a positive integer, got {raw!r}",
            location="environment")
    for var in _THREAD_VARS:
        os.environ.setdefault(var, str(cap))


@dataclass(frozen=True)
class JobSpec:
    """One CLI invocation: a command, its inputs, and its knobs."""

    command: str
    inputs: tuple[str, ...]
    tol: float | None = None
    rank_tol: float | None = None
    json_output: bool = False
    seed: int | None = None
    levels: tuple[int, ...] | None = None
    degree: int | None = None
    op: str | None = None

    def echo(self) -> dict:
        out: dict = {"command": self.command, "inputs": list(self.inputs)}
        for key in ("tol", "rank_tol", "seed", "degree", "op"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.levels is not None:
            out["levels"] = list(self.levels)
        if self.seed is not None:
            out["seed"] = self.seed
        return out


def parse_levels(text: str) -> tuple[int, ...]:
    """Level lists: "2..4096" doubles from the start; "2,4,12" is literal."""
    from .errors import DataValidationError
    text = text.strip()
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if lo < 1 or hi < lo:
                raise ValueError
            levels = []
            m = lo
            while m <= hi:
                levels.append(m)
                m *= 2
            return tuple(levels)
        levels = tuple(int(piece) for piece in text.split(","))
        if not levels or any(m < 1 for m in levels):
            raise ValueError
        return levels
    except ValueError:
        raise DataValidationError(
            f"cannot parse levels {text!r}: use 'lo..hi' or 'm1,m2,...'",
            location="--levels") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torsionlab",
        description="Torsion invariants of twisted cochain complexes.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--tol", type=float, default=None,
                       help="decision tolerance for the pass/fail verdict")
        p.add_argument("--rank-tol", type=float, default=None,
                       help="rank cutoff forwarded to the linear algebra")
        p.add_argument("--json", action="store_true",
                       help="emit the canonical JSON report")
        p.add_argument("--seed", type=int, default=None,
                       help="seed echoed into the report for reproducibility")

    p = sub.add_parser("torsion", help="torsion of a complex or cell complex")
    p.add_argument("input")
    common(p)

    p = sub.add_parser("hodge", help="harmonic dimensions and Laplacian data")
    p.add_argument("input")
    p.add_argument("--degree", type=int, default=None,
                   help="restrict the report to one degree")
    common(p)

    p = sub.add_parser("glue-check", help="gluing formula residual")
    p.add_argument("input")
    common(p)

    p = sub.add_parser("ses-check", help="torsion additivity for a short exact sequence")
    p.add_argument("input")
    common(p)

    p = sub.add_parser("lueck", help="finite-quotient tower and circle oracle")
    p.add_argument("input", nargs="?", default=None,
                   help="laurent-kind input file (alternative to --op)")
    p.add_argument("--op", default=None,
                   help='operator expression, e.g. "2 - t - t^-1"')
    p.add_argument("--levels", default=None,
                   help="tower levels: 'lo..hi' (doubling) or comma list")
    common(p)

    p = sub.add_parser("duality-check", help="Poincare duality residual")
    p.add_argument("input")
    common(p)

    p = sub.add_parser("product", help="product formula for two complexes")
    p.add_argument("inputs", nargs=2)
    common(p)

    return parser


def _job_from_args(args: argparse.Namespace) -> JobSpec:
    if args.command == "product":
        inputs = tuple(args.inputs)
    elif getattr(args, "input", None) is not None:
        inputs = (args.input,)
    else:
        inputs = ()
    return JobSpec(
        command=args.command,
        inputs=inputs,
        tol=args.tol,
        rank_tol=args.rank_tol,
        json_output=args.json,
        seed=args.seed,
        levels=parse_levels(args.levels)
        if getattr(args, "levels", None) else None,
        degree=getattr(args, "degree", None),
        op=getattr(args, "op", None),
    )


def _load_complex(path: str):
    from . import formats
    from .cells import build_complex
    data = formats.load_input(path)
    if data["kind"] == "complex":
        return formats.parse_complex(data, path)
    if data["kind"] == "cw":
        return build_complex(formats.parse_cw(data, path))
    from .errors import DataValidationError
    raise DataValidationError(
        f"expected a complex or cw input, got kind {data['kind']!r}",
        location=path)


def _run_torsion(job: JobSpec) -> dict:
    from .complexes import torsion, torsion_via_laplacians
    c = _load_complex(job.inputs[0])
    value = torsion(c, job.rank_tol)
    via = torsion_via_laplacians(c, job.rank_tol)
    tol = job.tol if job.tol is not None else 1e-8
    residual = abs(value - via)
    return {
        "job": job.echo(),
        "torsion": value,
        "torsion_via_laplacians": via,
        "route_residual": residual,
        "euler_characteristic": c.euler_characteristic(),
        "degrees": [c.offset, c.top_degree],
        "vn_dims": [c.module(q).vn_dim for q in c.degrees()],
        "passed": bool(residual <= tol * (1.0 + abs(value))),
    }


def _run_hodge(job: JobSpec) -> dict:
    from .complexes import hodge, laplacian, log_det_prime
    from .errors import DataValidationError
    c = _load_complex(job.inputs[0])
    data = hodge(c, job.rank_tol)
    degrees = list(c.degrees())
    if job.degree is not None:
        if job.degree not in degrees:
            raise DataValidationError(
                f"degree {job.degree} outside the window "
                f"[{c.offset}, {c.top_degree}]", location="--degree")
        degrees = [job.degree]
    kappa = c.modules[0].context.kappa
    rows = []
    for q in degrees:
        rows.append({
            "degree": q,
            "vn_dim": c.module(q).vn_dim,
            "harmonic_vn_dim": kappa * data.harmonic_dim(q),
            "laplacian_log_det_prime":
                log_det_prime(laplacian(c, q), job.rank_tol),
        })
    return {
        "job": job.echo(),
        "degrees": rows,
        "is_acyclic": data.is_acyclic(),
        "warnings": list(data.warnings),
    }


def _run_glue_check(job: JobSpec) -> dict:
    from . import formats
    from .cells import glue_check
    data = formats.load_input(job.inputs[0])
    if data["kind"] != "gluing":
        from .errors import DataValidationError
        raise DataValidationError(
            f"glue-check expects kind 'gluing', got {data['kind']!r}",
            location=job.inputs[0])
    spec = formats.parse_gluing(data, job.inputs[0])
    report = glue_check(spec, rank_tol=job.rank_tol)
    tol = job.tol if job.tol is not None else 1e-9
    report = dict(report)
    report["job"] = job.echo()
    report["passed"] = bool(report["residual"] <= tol)
    return report


def _run_ses_check(job: JobSpec) -> dict:
    from . import formats
    from .exact import milnor_check
    data = formats.load_input(job.inputs[0])
    if data["kind"] != "ses":
        from .errors import DataValidationError
        raise DataValidationError(
            f"ses-check expects kind 'ses', got {data['kind']!r}",
            location=job.inputs[0])
    ses = formats.parse_ses(data, job.inputs[0])
    report = milnor_check(ses, job.rank_tol)
    tol = job.tol if job.tol is not None else 1e-7
    bound = tol * (1.0 + abs(report.t2))
    return {
        "job": job.echo(),
        "torsion_sub": report.t1,
        "torsion_middle": report.t2,
        "torsion_quotient": report.t3,
        "torsion_long_sequence": report.t_h,
        "degreewise": [[q, report.degreewise[q]]
                       for q in sorted(report.degreewise)],
        "lhs": report.lhs,
        "rhs": report.rhs,
        "residual": report.residual,
        "passed": bool(report.residual <= bound),
    }


def _run_lueck(job: JobSpec) -> dict:
    from . import formats
    from .errors import DataValidationError
    from .towers import approx_tower, fourier_log_det, parse_laurent
    if (job.op is None) == (not job.inputs):
        raise DataValidationError(
            "lueck needs exactly one operator: a laurent input file or --op")
    if job.op is not None:
        operator = parse_laurent(job.op)
    else:
        data = formats.load_input(job.inputs[0])
        if data["kind"] != "laurent":
            raise DataValidationError(
                f"lueck expects kind 'laurent', got {data['kind']!r}",
                location=job.inputs[0])
        operator = formats.parse_laurent_matrix(data, job.inputs[0])
    from .towers import DEFAULT_LEVELS, QUAD_TOL
    levels = job.levels if job.levels is not None else DEFAULT_LEVELS
    tower = approx_tower(operator, levels)
    quad_tol = job.tol if job.tol is not None else QUAD_TOL
    oracle = fourier_log_det(operator, tol=quad_tol)
    return {
        "job": job.echo(),
        "norm_bound": tower.norm_bound,
        "levels": [{"m": m, "log_det": value}
                   for m, value in tower.level_values()],
        "fourier_log_det": oracle,
    }


def _run_duality_check(job: JobSpec) -> dict:
    from . import formats
    from .cells import dual_complex, t_comb
    data = formats.load_input(job.inputs[0])
    if data["kind"] != "cw":
        from .errors import DataValidationError
        raise DataValidationError(
            f"duality-check expects kind 'cw', got {data['kind']!r}",
            location=job.inputs[0])
    cw = formats.parse_cw(data, job.inputs[0])
    value = t_comb(cw, job.rank_tol)
    dual_value = t_comb(dual_complex(cw), job.rank_tol)
    sign = (-1.0) ** (cw.top_degree + 1)
    residual = abs(value - sign * dual_value)
    tol = job.tol if job.tol is not None else 1e-9
    return {
        "job": job.echo(),
        "torsion": value,
        "dual_torsion": dual_value,
        "sign": sign,
        "residual": residual,
        "passed": bool(residual <= tol),
    }


def _run_product(job: JobSpec) -> dict:
    from .complexes import tensor_product, torsion
    a = _load_complex(job.inputs[0])
    b = _load_complex(job.inputs[1])
    product = tensor_product(a, b)
    t_a, t_b = torsion(a, job.rank_tol), torsion(b, job.rank_tol)
    t_ab = torsion(product, job.rank_tol)
    chi_a, chi_b = a.euler_characteristic(), b.euler_characteristic()
    rhs = chi_b * t_a + chi_a * t_b
    residual = abs(t_ab - rhs)
    tol = job.tol if job.tol is not None else 1e-8
    return {
        "job": job.echo(),
        "torsion_product": t_ab,
        "torsion_factors": [t_a, t_b],
        "euler_characteristics": [chi_a, chi_b],
        "formula_rhs": rhs,
        "residual": residual,
        "passed": bool(residual <= tol * (1.0 + abs(t_ab))),
    }


_HANDLERS = {
    "torsion": _run_torsion,
    "hodge": _run_hodge,
    "glue-check": _run_glue_check,
    "ses-check": _run_ses_check,
    "lueck": _run_lueck,
    "duality-check": _run_duality_check,
    "product": _run_product,
}


def run(job: JobSpec) -> dict:
    """Execute one job and return its report (exceptions signal failure)."""
    return _HANDLERS[job.command](job)


def main(argv=None) -> int:
    from .errors import DataValidationError, NumericalError, QuadratureError
    try:
        _validate_thread_cap()
        args = build_parser().parse_args(argv)
        job = _job_from_args(args)
        report = run(job)
    except DataValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    from . import formats
    if job.json_output:
        sys.stdout.write(formats.canonical_json(report))
    else:
        sys.stdout.write(formats.report_text(report))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
