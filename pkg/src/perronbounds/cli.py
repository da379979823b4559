"""Command-line interface.

Exit codes: 0 success, 1 I/O or input errors, 2 hypothesis violations
(negative base kernel, non-positive test-kernel row sums, unstable source),
3 convergence or root-finding failures. Every error prints a single
machine-parsable line to stderr. JSON output is byte-deterministic: stable
key order and shortest round-trip float formatting.
"""

import argparse
import json
import sys

from .bounds import perron_bounds, matrix_power_rescaled, refine_bounds
from .counterexample import verify_counterexample
from .decay import ModulatedSource, decay_rate_bounds, effective_decay_rate
from .errors import (
    HypothesisViolationError,
    NoConvergenceError,
    NoRootError,
    PerronBoundsError,
)
from .kernels import (
    DensityKernel,
    MatrixKernel,
    absolute_product_mass,
    density_from_spec,
    load_kernel_file,
)
from .grids import make_uniform_grid
from .nystrom import convergence_study, discretize, study_to_csv
from .oracle import left_power_iteration, power_iteration

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_HYPOTHESIS = 2
EXIT_NO_CONVERGENCE = 3


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _format_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _format_table(obj, title: str) -> str:
    lines = [title]
    if isinstance(obj, list):
        rows = obj
    else:
        rows = [obj]
    for row in rows:
        for key, value in row.items():
            if isinstance(value, list) and len(value) > 8:
                value = f"[{len(value)} values]"
            lines.append(f"  {key:<22} {value}")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def _parse_sizes(text: str) -> list:
    return [int(part) for part in text.split(",") if part.strip()]


def _materialize(kernel, grid_n: int, rule: str):
    """Turn a loaded kernel into a matrix-like object bounds can consume."""
    if isinstance(kernel, MatrixKernel):
        return kernel
    grid = make_uniform_grid(kernel.domain, grid_n, rule)
    return discretize(kernel, grid)


def _resolve_test_kernel(spec: str, K, grid_n: int, rule: str):
    if spec == "identity":
        return MatrixKernel.identity(K.n), 0
    if spec.startswith("power:"):
        m = int(spec.split(":", 1)[1])
        return matrix_power_rescaled(K, m), m
    if spec.startswith("file:"):
        loaded = load_kernel_file(spec.split(":", 1)[1])
        return _materialize(loaded, grid_n, rule), 0
    raise ValueError(f"unknown test kernel spec {spec!r}; use identity, power:m or file:PATH")


def _cmd_bounds(args) -> int:
    kernel = load_kernel_file(args.kernel)
    K = _materialize(kernel, args.grid_n, args.rule)
    L, m = _resolve_test_kernel(args.test_kernel, K, args.grid_n, args.rule)
    diag = diag_coarse = None
    if args.fubini_check:
        if not isinstance(kernel, DensityKernel) or not args.test_kernel.startswith("file:"):
            raise ValueError("--fubini-check needs density kernels for both --kernel and --test-kernel file:PATH")
        test_density = load_kernel_file(args.test_kernel.split(":", 1)[1])
        if not isinstance(test_density, DensityKernel):
            raise ValueError("--fubini-check needs a density test kernel")
        coarse_grid = make_uniform_grid(kernel.domain, args.grid_n, args.rule)
        fine_grid = make_uniform_grid(kernel.domain, 10 * args.grid_n, args.rule)
        diag_coarse = absolute_product_mass(kernel, test_density, coarse_grid)
        diag = absolute_product_mass(kernel, test_density, fine_grid)
    report = perron_bounds(
        K, L, m=m,
        fubini_diagnostic=diag,
        fubini_diagnostic_coarse=diag_coarse,
        allow_signed_density=args.allow_signed,
    )
    obj = report.to_dict()
    _emit(_format_json(obj) if args.format == "json" else _format_table(obj, "bounds"), args.out)
    return EXIT_OK


def _cmd_refine(args) -> int:
    K = _materialize(load_kernel_file(args.kernel), args.grid_n, args.rule)
    reports = refine_bounds(K, args.m_max, args.tol)
    objs = [r.to_dict() for r in reports]
    _emit(_format_json(objs) if args.format == "json" else _format_table(objs, "refine"), args.out)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    K = _materialize(load_kernel_file(args.kernel), args.grid_n, args.rule)
    run = left_power_iteration if args.left else power_iteration
    pair = run(K, tol=args.tol, max_iter=args.max_iter)
    obj = pair.to_dict()
    _emit(_format_json(obj) if args.format == "json" else _format_table(obj, "oracle"), args.out)
    return EXIT_OK


def _cmd_discretize(args) -> int:
    kernel = load_kernel_file(args.kernel)
    if not isinstance(kernel, DensityKernel):
        raise ValueError("discretize expects a density kernel description")
    if args.sizes:
        rows = convergence_study(kernel, _parse_sizes(args.sizes), quantity=args.quantity, rule=args.rule)
        _emit(study_to_csv(rows), args.out)
        return EXIT_OK
    disc = discretize(kernel, make_uniform_grid(kernel.domain, args.grid_n, args.rule))
    matrix = MatrixKernel(disc.entries)
    if args.format == "json":
        _emit(_format_json(matrix.to_json_obj()), args.out)
    else:
        _emit(matrix.to_csv(), args.out)
    return EXIT_OK


def _cmd_counterexample(args) -> int:
    report = verify_counterexample(_parse_sizes(args.sizes))
    obj = report.to_dict()
    if args.format == "table":
        summary = {k: v for k, v in obj.items() if not k.endswith("_numeric")}
        _emit(_format_table(summary, "counterexample"), args.out)
    else:
        _emit(_format_json(obj), args.out)
    return EXIT_OK


def _cmd_decay_rate(args) -> int:
    with open(args.source) as fh:
        src = ModulatedSource.from_json_obj(json.load(fh))
    if args.at_theta is not None:
        report = decay_rate_bounds(src, args.at_theta, m=args.m)
        obj = report.to_dict()
    else:
        result = effective_decay_rate(src, tol=args.tol, theta_max=args.theta_max, bound_power=args.m)
        obj = result.to_dict()
    _emit(_format_json(obj) if args.format == "json" else _format_table(obj, "decay-rate"), args.out)
    return EXIT_OK


def _cmd_check_fubini(args) -> int:
    F = load_kernel_file(args.kernel_f)
    G = load_kernel_file(args.kernel_g)
    if not isinstance(F, DensityKernel) or not isinstance(G, DensityKernel):
        raise ValueError("check-fubini expects density kernel descriptions")
    sizes = _parse_sizes(args.sizes)
    estimates = []
    for size in sizes:
        grid = make_uniform_grid(F.domain, size, args.rule)
        estimates.append(absolute_product_mass(F, G, grid, aggregate=args.aggregate))
    growth = [b / a for a, b in zip(estimates, estimates[1:])]
    diverging = bool(growth) and all(g > 1.0 for g in growth) and estimates[-1] > 1.5 * estimates[0]
    obj = {
        "sizes": sizes,
        "estimates": [float(e) for e in estimates],
        "growth_factors": [float(g) for g in growth],
        "diverging": diverging,
        "note": (
            "estimates keep growing under refinement; consistent with a divergent "
            "absolute product mass" if diverging else
            "no divergence signature at these sizes"
        ),
    }
    _emit(_format_json(obj) if args.format == "json" else _format_table(obj, "check-fubini"), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perronbounds",
        description="Certified spectral-radius bounds for non-negative kernels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "table"), default_format="json"):
        p.add_argument("--out", default=None, help="write the report to this path instead of stdout")
        p.add_argument("--format", choices=formats, default=default_format)
        p.add_argument("--grid-n", type=int, default=200, help="grid size for density kernels")
        p.add_argument("--rule", choices=("midpoint", "trapezoid"), default="midpoint")

    p = sub.add_parser("bounds", help="sandwich bounds for one kernel")
    common(p)
    p.add_argument("--kernel", required=True, help="matrix CSV/JSON or density spec JSON")
    p.add_argument("--test-kernel", default="identity", help="identity | power:m | file:PATH")
    p.add_argument("--fubini-check", action="store_true",
                   help="estimate the absolute product mass at the grid size and its 10x refinement")
    p.add_argument("--allow-signed", action="store_true",
                   help="accept a test kernel discretized from a signed density")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("refine", help="tighten bounds with powers of the kernel")
    common(p)
    p.add_argument("--kernel", required=True)
    p.add_argument("--m-max", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_refine)

    p = sub.add_parser("oracle", help="power-iteration eigenpair")
    common(p)
    p.add_argument("--kernel", required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--left", action="store_true", help="iterate the transpose for the left eigenvector")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("discretize", help="matrix image of a density kernel")
    common(p, formats=("csv", "json"), default_format="csv")
    p.add_argument("--kernel", required=True)
    p.add_argument("--sizes", default=None, help="run a convergence study over these sizes instead")
    p.add_argument("--quantity", choices=("rho", "bounds"), default="rho")
    p.set_defaults(func=_cmd_discretize)

    p = sub.add_parser("counterexample", help="reproduce the sandwich failure for the signed kernel")
    common(p)
    p.add_argument("--sizes", default="100,1000,10000")
    p.set_defaults(func=_cmd_counterexample)

    p = sub.add_parser("decay-rate", help="effective decay rate of a modulated source")
    common(p)
    p.add_argument("--source", required=True, help="JSON file with fields P and s")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--theta-max", type=float, default=None)
    p.add_argument("--m", type=int, default=8, help="test-kernel power for certification")
    p.add_argument("--at-theta", type=float, default=None,
                   help="report certified bounds at this tilt instead of solving for the rate")
    p.set_defaults(func=_cmd_decay_rate)

    p = sub.add_parser("check-fubini", help="absolute product mass across refining grids")
    common(p)
    p.add_argument("--kernel-f", required=True)
    p.add_argument("--kernel-g", required=True)
    p.add_argument("--sizes", default="100,1000,10000")
    p.add_argument("--aggregate", choices=("sup", "integral"), default="sup")
    p.set_defaults(func=_cmd_check_fubini)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except HypothesisViolationError as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (NoConvergenceError, NoRootError) as exc:
        label = "no convergence" if isinstance(exc, NoConvergenceError) else "no root"
        print(f"{label}: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except OverflowError as exc:
        print(f"range error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PerronBoundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
