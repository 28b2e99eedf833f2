"""Command-line interface.

Exit codes: 0 when every check passes, 1 when a check or numerical
verification fails, 2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import bayeslab, cstates, distfam, matrixcs, roi, seqcore, specs
from .errors import (
    CSDualityError,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidInterval,
    NonPositiveTerm,
    OutOfDomain,
    OutOfRange,
    ParseError,
    SizeLimit,
    UnknownFamily,
)
from .report import RunReport, dumps

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

INPUT_ERRORS = (
    ParseError,
    UnknownFamily,
    NonPositiveTerm,
    OutOfDomain,
    OutOfRange,
    IndexOutOfRange,
    InvalidInterval,
    DimensionMismatch,
    SizeLimit,
)

SUITES = ("moments", "gram", "roi", "duality")


class UsageError(Exception):
    pass


def _floats(text: Optional[str]):
    if text is None:
        return None
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def _params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects key=value, got {item!r}")
        out[key] = value
    return out


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


# ---------------------------------------------------------------------------
# family
# ---------------------------------------------------------------------------


def cmd_family(args, report: RunReport):
    spec = specs.load(args.spec, _params(args.param))
    fam = spec.family
    report.inputs["spec"] = spec.document
    if args.eval is not None:
        n = int(args.eval[0])
        lam = float(args.eval[1])
        value = float(fam.pmf(n, lam))
        report.data = {"family": fam.name, "n": n, "lambda": lam, "pmf": value}
        return format(value, ".8g")
    lams = _floats(args.lambdas)
    if lams is None:
        a, b = fam.interval
        lams = list(np.linspace(a, b if math.isfinite(b) else a + 5.0, 6))
    rows = min(fam.n_count, args.rows)
    table = fam.pmf_table(lams)[:, :rows].T
    report.data = {"family": fam.name, "lambdas": lams, "pmf": table.tolist()}
    lines = ["n\t" + "\t".join(_fmt(l) for l in lams)]
    lines += [f"{n}\t" + "\t".join(_fmt(v) for v in row) for n, row in enumerate(table)]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _run_suites(spec: specs.ResolvedSpec, suites, size: int, tol: Optional[float], report: RunReport):
    fam = spec.duality_family
    prior = spec.duality_prior
    prefix = spec.name
    finite = fam.finite
    size = min(size, fam.n_count)
    c = None
    if "duality" in suites or "gram" in suites or "roi" in suites:
        cert = distfam.certify(fam, prior, spec.lambda_grid)
        c = cert.c
    if "duality" in suites:
        report.add(
            f"{prefix}/duality/convergence",
            float(np.max(cert.tail_bounds)),
            tol if tol is not None else seqcore.DEFAULT_TAIL_TOL,
            c=cert.c[:size].tolist(),
            status=cert.status,
        )
        if fam.canonical_c is not None:
            closed = np.array([fam.canonical_c(n) for n in range(cert.c.size)])
            rel = float(np.max(np.abs(cert.c - closed) / closed))
            report.add(f"{prefix}/duality/c_closed_form", rel, tol if tol is not None else 1e-9)
    if "moments" in suites:
        if spec.seq is None or spec.measure is None:
            report.data.setdefault("skipped", []).append(f"{prefix}/moments")
        else:
            k_max = min(20, spec.seq.n_max)
            rep = roi.moment_check(spec.seq, spec.measure, k_max)
            report.add(
                f"{prefix}/moments",
                rep.max_residual,
                tol if tol is not None else 1e-9,
                residuals=rep.residuals.tolist(),
            )
    G = None
    if "gram" in suites or "roi" in suites:
        G = roi.gram_matrix(fam, prior, size, c=c)
    if "gram" in suites:
        default = 1e-10 if finite else 1e-8
        report.add(f"{prefix}/gram", roi.gram_residual(G), tol if tol is not None else default, size=size)
    if "roi" in suites:
        res = roi.roi_check_direct(fam, prior, size, c=c)
        report.add(f"{prefix}/roi", res.residual, tol if tol is not None else 1e-6, size=size)
        report.add(f"{prefix}/roi_vs_gram", float(np.max(np.abs(res.matrix - G))), 1e-6)


def cmd_verify(args, report: RunReport):
    suites = SUITES if args.suite == "all" else (args.suite,)
    if args.size < 1:
        raise UsageError("--size must be >= 1")
    names = [args.spec] if args.spec else list(specs.BUILTIN_FAMILIES)
    docs = []
    for name in names:
        spec = specs.load(name, _params(args.param))
        docs.append(spec.document)
        _run_suites(spec, suites, args.size, args.tol, report)
    report.inputs.update({"specs": docs, "suite": args.suite, "size": args.size, "tol": args.tol})
    return _summary(report)


def _summary(report: RunReport) -> str:
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {_fmt(c.value)} (tol {_fmt(c.tol)})" for c in report.checks]
    lines.append("overall: " + ("pass" if report.passed else "fail"))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# posterior
# ---------------------------------------------------------------------------


def cmd_posterior(args, report: RunReport):
    if not 0.0 < args.mass < 1.0:
        raise UsageError("--mass must lie strictly between 0 and 1")
    spec = specs.load(args.spec, _params(args.param))
    summary = bayeslab.posterior_summary(spec.family, spec.prior, args.obs, args.mass)
    report.inputs.update({"spec": spec.document, "obs": args.obs, "mass": args.mass})
    report.data = summary.to_dict()
    report.add("posterior/grid_mass", abs(summary.grid_mass - 1.0), 1e-4)
    report.add("posterior/interval_mass", abs(bayeslab.interval_mass(summary) - args.mass), 1e-4)
    csv_path = args.csv
    if csv_path is None and args.out is not None:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        csv_path = str(Path(args.out) / "posterior.csv")
    if csv_path is not None:
        bayeslab.write_csv(summary, csv_path)
    lo, hi, mass = summary.credible_interval
    return "\n".join(
        [
            f"family {spec.family.name}, observed {args.obs}",
            f"mean {_fmt(summary.point_estimate)}  mode {_fmt(summary.mode)}",
            f"{mass:.0%} central interval [{_fmt(lo)}, {_fmt(hi)}]",
        ]
    )


# ---------------------------------------------------------------------------
# vcs and tensor
# ---------------------------------------------------------------------------


def _sequence_for(name: str, params: dict) -> seqcore.FactorialSequence:
    if name in ("poisson",):
        return seqcore.poisson_sequence()
    if name in ("su2", "binomial"):
        return seqcore.su2_sequence(int(params.get("N", 4)))
    if name in ("su11", "negbinomial"):
        return seqcore.su11_sequence(int(params.get("m", 2)))
    raise UnknownFamily(f"unknown sequence family {name!r}; use poisson, su2 or su11")


def _labels(rng, M: int, seq, lambdas, thetas):
    L = seqcore.radius_of_convergence(seq).value
    if lambdas is None:
        hi = min(3.0, 0.8 * L)
        lambdas = list(rng.uniform(0.1, hi, M))
    if thetas is None:
        thetas = list(rng.uniform(0.0, 2.0 * math.pi, M))
    if len(lambdas) != M or len(thetas) != M:
        raise UsageError(f"need exactly {M} lambdas and thetas")
    return lambdas, thetas


def cmd_vcs(args, report: RunReport):
    M = args.dim
    if M < 1:
        raise UsageError("--dim must be >= 1")
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    params = _params(args.param)
    seq = _sequence_for(args.family, params)
    measure = roi.measure_for(seq)
    rng = np.random.default_rng(args.seed)
    lambdas, thetas = _labels(rng, M, seq, _floats(args.lambdas), _floats(args.thetas))
    U = matrixcs.haar_unitary(M, rng)
    label = matrixcs.NormalMatrixLabel.from_params(U, lambdas, thetas)
    report.inputs.update({"dim": M, "family": args.family, "params": params, "samples": args.samples})
    report.data["lambdas"] = [float(x) for x in lambdas]
    report.data["thetas"] = [float(x) for x in thetas]

    report.add("vcs/normalization", abs(matrixcs.vcs_total_norm(label, seq) - 1.0), 1e-10)
    n_top = min(3, seq.n_max)
    trace_err, det_err = 0.0, 0.0
    for n in range(n_top + 1):
        P = matrixcs.partial_trace_prob(label, n, seq)
        p = np.array([abs(cstates.cs_nonlinear(seq, l).coeffs[n]) ** 2 for l in label.scalar_labels()])
        trace_err = max(trace_err, abs(np.trace(P).real - p.mean()))
        prod = float(np.prod(p))
        if prod > 0:
            det_err = max(det_err, abs(np.linalg.det(M * P).real - prod) / prod)
    report.add("vcs/trace_identity", trace_err, 1e-12)
    report.add("vcs/determinant_identity", det_err, 1e-10)

    table = []
    for m in range(n_top + 1):
        for n in range(n_top + 1):
            res = matrixcs.matrix_orthogonality_mc(m, n, seq, measure, M, args.samples, [args.seed or 0, m, n])
            dev = float(np.max(np.abs(res.estimate - res.exact)))
            table.append({"m": m, "n": n, "max_dev": dev, "max_se": res.max_se, "within": res.within()})
    worst = max(
        (row["max_dev"] / max(3.0 * row["max_se"], 1e-12) for row in table),
        default=0.0,
    )
    report.add("vcs/orthogonality_mc", worst, 1.0)
    report.data["orthogonality"] = table
    return _summary(report)


def cmd_tensor(args, report: RunReport):
    params = _params(args.param)
    seq = _sequence_for(args.family, params)
    lambdas = _floats(args.lambdas)
    if not lambdas:
        raise UsageError("--lambdas is required")
    thetas = _floats(args.thetas)
    labels = matrixcs.TensorCSLabel.from_params(lambdas, thetas)
    state = matrixcs.tensor_cs(labels, seq)
    report.inputs.update({"family": args.family, "params": params, "lambdas": lambdas, "thetas": thetas})
    report.add("tensor/norm", abs(state.norm() - 1.0), 1e-10)
    rng = np.random.default_rng(args.seed)
    width = min(min(state.shape) - 1, matrixcs.TENSOR_MAX_NMAX)
    worst = 0.0
    for _ in range(100):
        ns = tuple(int(k) for k in rng.integers(0, width + 1, state.M))
        joint = abs(state.entry(ns)) ** 2
        worst = max(worst, abs(joint - float(np.prod(matrixcs.marginal_probs(state, ns)))))
    report.add("tensor/factorization", worst, 1e-12)
    if state.M <= matrixcs.TENSOR_MAX_M:
        mass = float(np.sum(np.abs(state.materialize(width)) ** 2))
        report.add("tensor/truncated_mass", abs(mass - 1.0), 1e-8, n_max=width)
    if args.eval:
        ns = [int(t) for t in args.eval.split(",")]
        report.data["joint_prob"] = {"ns": ns, "value": matrixcs.joint_prob(labels, ns, seq)}
    return _summary(report)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _global_flags(p: argparse.ArgumentParser, top: bool):
    default = None if top else argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=default, help="root seed for random draws")
    p.add_argument("--json", action="store_true", default=False if top else argparse.SUPPRESS,
                   help="print the JSON report instead of a text summary")
    p.add_argument("--out", metavar="DIR", default=default, help="also write report.json (and CSV output) here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csduality", description=__doc__.splitlines()[0])
    _global_flags(parser, True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("family", help="evaluate or tabulate a family")
    p.add_argument("spec", help="built-in name or path to a JSON spec")
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--eval", nargs=2, metavar=("N", "LAMBDA"))
    g.add_argument("--table", action="store_true")
    p.add_argument("--lambdas", help="comma-separated parameter grid for --table")
    p.add_argument("--rows", type=int, default=11)
    _global_flags(p, False)

    p = sub.add_parser("verify", help="run moment, Gram, ROI and duality checks")
    p.add_argument("spec", nargs="?", help="built-in name or JSON spec (default: all built-ins)")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--size", type=int, default=8)
    p.add_argument("--tol", type=float)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    _global_flags(p, False)

    p = sub.add_parser("posterior", help="posterior density and credible interval")
    p.add_argument("spec")
    p.add_argument("--obs", type=int, required=True)
    p.add_argument("--mass", type=float, default=0.95)
    p.add_argument("--csv", help="write the tabulated posterior to this CSV file")
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    _global_flags(p, False)

    p = sub.add_parser("vcs", help="vector coherent states over normal matrices")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--family", default="poisson")
    p.add_argument("--lambdas")
    p.add_argument("--thetas")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    _global_flags(p, False)

    p = sub.add_parser("tensor", help="tensor-product coherent states")
    p.add_argument("--family", default="poisson")
    p.add_argument("--lambdas", required=True)
    p.add_argument("--thetas")
    p.add_argument("--eval", metavar="N1,N2,...")
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    _global_flags(p, False)
    return parser


COMMANDS = {
    "family": cmd_family,
    "verify": cmd_verify,
    "posterior": cmd_posterior,
    "vcs": cmd_vcs,
    "tensor": cmd_tensor,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    report = RunReport(command=argv, inputs={"command": args.command}, seed=args.seed)
    try:
        text = COMMANDS[args.command](args, report)
    except (UsageError, *INPUT_ERRORS) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CSDualityError as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    payload = report.to_json()
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(payload)
    sys.stdout.write(payload if args.json else text + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
