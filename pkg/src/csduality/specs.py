"""JSON family documents and built-in presets.

A spec document looks like::

    {"family": "binomial", "N": 10, "param": "p",
     "prior": {"kind": "uniform"}}

or, for a user sequence::

    {"family": "nonlinear",
     "sequence": {"kind": "explicit", "values": [1, 2, 3, 4]},
     "measure": {"kind": "density-expr", "expr": "exp(-lam) / (2*pi)",
                 "support": [0, "inf"]}}

Prior kinds are ``uniform`` (optional ``scale`` and ``support``),
``density-expr`` (an arithmetic expression in ``lam``) and ``table``
(``lambda`` and ``density`` arrays, linearly interpolated).
"""

from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import distfam, roi, seqcore
from .distfam import ContinuousFamily, DiscreteFamily, PriorMeasure
from .errors import ParseError, UnknownFamily
from .roi import RadialMeasure
from .seqcore import FactorialSequence

BUILTIN_FAMILIES = ("poisson", "binomial", "negbinomial")


@dataclass(eq=False)
class ResolvedSpec:
    """Everything the CLI needs about one family.

    ``family``/``prior`` drive the Bayesian side; ``duality_family`` and
    ``duality_prior`` are the parametrization used by the verification
    suites (the lambda form for the binomial).
    """

    name: str
    params: dict
    family: DiscreteFamily
    prior: PriorMeasure
    duality_family: DiscreteFamily
    duality_prior: PriorMeasure
    lambda_grid: np.ndarray
    seq: Optional[FactorialSequence] = None
    measure: Optional[RadialMeasure] = None
    dual: Optional[ContinuousFamily] = None
    document: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# safe arithmetic expressions
# ---------------------------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {
    "exp": np.exp,
    "log": np.log,
    "log1p": np.log1p,
    "expm1": np.expm1,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
_CONSTS = {"pi": math.pi, "e": math.e}


def compile_expr(expr: str, params: Optional[dict] = None):
    """Turn an arithmetic expression in ``lam`` into a vectorized function.

    Only numbers, the names ``lam``, ``pi``, ``e`` and spec parameters,
    + - * / **, and a few elementwise functions are accepted.
    """
    params = dict(params or {})
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"bad expression {expr!r}: {exc.msg}", 1, exc.offset) from exc

    def check(node):
        if isinstance(node, ast.Expression):
            return check(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return
        if isinstance(node, ast.Name):
            if node.id == "lam" or node.id in _CONSTS or node.id in params:
                return
            raise ParseError(f"unknown name {node.id!r} in expression", 1, node.col_offset + 1)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            check(node.left)
            check(node.right)
            return
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            check(node.operand)
            return
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            check(node.args[0])
            return
        raise ParseError(
            f"unsupported syntax {type(node).__name__} in expression", 1, getattr(node, "col_offset", 0) + 1
        )

    check(tree)

    def ev(node, lam):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id == "lam":
                return lam
            return float(_CONSTS[node.id] if node.id in _CONSTS else params[node.id])
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](ev(node.left, lam), ev(node.right, lam))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](ev(node.operand, lam))
        return _FUNCS[node.func.id](ev(node.args[0], lam))

    body = tree.body

    def f(lam):
        lam = np.asarray(lam, dtype=np.float64)
        with np.errstate(all="ignore"):
            return np.broadcast_to(ev(body, lam), lam.shape).astype(np.float64)

    return f


# ---------------------------------------------------------------------------
# documents
# ---------------------------------------------------------------------------


def _number(v, what):
    if isinstance(v, str) and v.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{what} must be a number, got {v!r}")
    return float(v)


def _int_param(doc, key, default):
    v = doc.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ParseError(f"parameter {key!r} must be an integer, got {v!r}")
    return int(v)


def _support(raw, default):
    if raw is None:
        return default
    if not isinstance(raw, list) or len(raw) != 2:
        raise ParseError("support must be a two-element list")
    return (_number(raw[0], "support"), _number(raw[1], "support"))


def parse_prior(doc: Optional[dict], default: PriorMeasure, params: Optional[dict] = None) -> PriorMeasure:
    if doc is None:
        return default
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ParseError("prior must be an object with a 'kind' field")
    kind = doc["kind"]
    support = _support(doc.get("support"), default.support)
    if kind == "uniform":
        return distfam.uniform_prior(support, _number(doc.get("scale", 1.0), "scale"))
    if kind == "density-expr":
        if not isinstance(doc.get("expr"), str):
            raise ParseError("density-expr prior needs a string 'expr'")
        return PriorMeasure(compile_expr(doc["expr"], params), support, f"expr:{doc['expr']}")
    if kind == "table":
        xs = np.asarray(doc.get("lambda", []), dtype=np.float64)
        ys = np.asarray(doc.get("density", []), dtype=np.float64)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ParseError("table prior needs equal-length 'lambda' and 'density' arrays (>= 2 points)")
        if np.any(np.diff(xs) <= 0) or np.any(ys < 0):
            raise ParseError("table prior needs increasing lambda and nonnegative density")
        return PriorMeasure(
            lambda lam: np.interp(lam, xs, ys, left=0.0, right=0.0),
            (float(xs[0]), float(xs[-1])),
            "table",
        )
    raise ParseError(f"unknown prior kind {kind!r}")


def parse_sequence(doc) -> FactorialSequence:
    if isinstance(doc, str):
        doc = {"kind": doc}
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ParseError("sequence must be a name or an object with a 'kind' field")
    kind = doc["kind"]
    n_max = doc.get("n_max")
    if n_max is not None:
        n_max = _int_param(doc, "n_max", None)
    if kind == "poisson":
        return seqcore.poisson_sequence(n_max)
    if kind == "su2":
        return seqcore.su2_sequence(_int_param(doc, "N", 4))
    if kind == "su11":
        return seqcore.su11_sequence(_int_param(doc, "m", 2), n_max)
    if kind == "constant":
        return seqcore.constant_sequence(_number(doc.get("c", 1.0), "c"), n_max)
    if kind == "explicit":
        vals = doc.get("values")
        if not isinstance(vals, list) or not vals:
            raise ParseError("explicit sequence needs a non-empty 'values' list")
        nums = [_number(v, "sequence value") for v in vals]
        return FactorialSequence(np.array(nums), infinite=bool(doc.get("infinite", False)), name="explicit")
    raise UnknownFamily(f"unknown sequence kind {kind!r}")


def parse_measure(doc, seq: FactorialSequence) -> Optional[RadialMeasure]:
    if doc is None:
        try:
            return roi.measure_for(seq)
        except KeyError:
            return None
    if not isinstance(doc, dict) or doc.get("kind") != "density-expr" or not isinstance(doc.get("expr"), str):
        raise ParseError("measure must be {'kind': 'density-expr', 'expr': ..., 'support': [a, b]}")
    support = _support(doc.get("support"), (0.0, math.inf))
    hint = doc.get("hint", "legendre" if math.isfinite(support[1]) else "mapped")
    return RadialMeasure(compile_expr(doc["expr"]), support, f"expr:{doc['expr']}", hint)


def _default_grid(a: float, b: float) -> np.ndarray:
    hi = b if math.isfinite(b) else a + 10.0
    return np.linspace(a, hi, 12)[1:-1]


def resolve(doc: dict) -> ResolvedSpec:
    if not isinstance(doc, dict):
        raise ParseError("spec document must be a JSON object")
    name = doc.get("family")
    if not isinstance(name, str):
        raise ParseError("spec needs a string 'family' field")
    prior_doc = doc.get("prior")

    if name == "poisson":
        fam = distfam.poisson_family()
        prior = parse_prior(prior_doc, fam.canonical_prior, {})
        return ResolvedSpec(
            name, {}, fam, prior, fam, prior, np.linspace(0.5, 10.0, 10),
            fam.seq, roi.poisson_measure(), distfam.gamma_family(), doc,
        )

    if name == "binomial":
        N = _int_param(doc, "N", 10)
        if N < 0:
            raise ParseError("N must be >= 0")
        param = doc.get("param", "p")
        lam_fam = distfam.binomial_family(N)
        if param == "p":
            fam = distfam.binomial_p_family(N)
            prior = parse_prior(prior_doc, distfam.uniform_prior((0.0, 1.0)), {"N": N})
        elif param == "lambda":
            fam = lam_fam
            prior = parse_prior(prior_doc, lam_fam.canonical_prior, {"N": N})
        else:
            raise ParseError(f"binomial 'param' must be 'p' or 'lambda', got {param!r}")
        return ResolvedSpec(
            name, {"N": N, "param": param}, fam, prior, lam_fam, lam_fam.canonical_prior,
            np.linspace(0.1, 10.0, 10), lam_fam.seq, roi.su2_measure(N),
            distfam.beta_first_kind_family(N), doc,
        )

    if name == "negbinomial":
        m = _int_param(doc, "m", 2)
        if m < 1:
            raise ParseError("m must be >= 1")
        fam = distfam.negbinomial_family(m)
        prior = parse_prior(prior_doc, fam.canonical_prior, {"m": m})
        return ResolvedSpec(
            name, {"m": m}, fam, prior, fam, fam.canonical_prior, np.linspace(0.25, 0.9, 10),
            seqcore.su11_sequence(m), roi.su11_measure(m), distfam.beta_family(m), doc,
        )

    if name == "nonlinear":
        if "sequence" not in doc:
            raise ParseError("nonlinear family needs a 'sequence'")
        seq = parse_sequence(doc["sequence"])
        fam = distfam.from_nonlinear(seq)
        measure = parse_measure(doc.get("measure"), seq)
        if measure is not None:
            default_prior = distfam.nonlinear_prior(seq, measure)
            dual = distfam.from_measure(seq, measure)
        else:
            default_prior = distfam.uniform_prior(fam.interval)
            dual = None
        prior = parse_prior(prior_doc, default_prior, {})
        a, b = fam.interval
        return ResolvedSpec(
            f"nonlinear:{seq.name}", {}, fam, prior, fam, default_prior,
            _default_grid(a, b), seq, measure, dual, doc,
        )

    raise UnknownFamily(f"unknown family {name!r}; built-ins are {', '.join(BUILTIN_FAMILIES)} and 'nonlinear'")


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def load(spec: str, overrides: Optional[dict] = None) -> ResolvedSpec:
    """Resolve a built-in name or a path to a JSON spec, then apply ``key=value`` overrides."""
    if spec in BUILTIN_FAMILIES:
        doc = {"family": spec}
    else:
        path = Path(spec)
        if not path.is_file():
            raise UnknownFamily(f"{spec!r} is neither a built-in family nor a readable file")
        doc = loads(path.read_text())
        if not isinstance(doc, dict):
            raise ParseError("spec document must be a JSON object")
    for k, v in (overrides or {}).items():
        doc[k] = _coerce(v) if isinstance(v, str) else v
    return resolve(doc)
