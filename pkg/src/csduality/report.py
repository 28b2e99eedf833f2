"""Deterministic JSON reports.

Floats are written with 17 significant digits (enough to round-trip a
double); non-finite values become the strings "inf", "-inf" and "nan".
Nothing time- or host-dependent is recorded, so the same command and seed
give byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

REPORT_VERSION = 1


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if all(ch not in s for ch in ".eEn"):
        s += ".0"
    return s


def _emit(obj, indent: int, level: int, out: list):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, complex):
        _emit([obj.real, obj.imag], indent, level, out)
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(k))}: ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        # short numeric rows stay on one line
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            parts = []
            for v in obj:
                sub: list = []
                _emit(v, indent, level + 1, sub)
                parts.append("".join(sub))
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    out: list = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"


def digest(obj) -> str:
    """sha256 of the canonical rendering of ``obj``."""
    return hashlib.sha256(dumps(obj).encode()).hexdigest()


@dataclass
class Check:
    name: str
    value: float
    tol: float
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.value) and self.value <= self.tol)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "pass": self.passed, **self.detail}


@dataclass
class RunReport:
    command: list
    inputs: dict
    seed: object = None
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, name: str, value: float, tol: float, **detail) -> Check:
        c = Check(name, float(value), float(tol), detail)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        from . import __version__

        return {
            "report_version": REPORT_VERSION,
            "command": list(self.command),
            "inputs_digest": digest(self.inputs),
            "inputs": self.inputs,
            "seed": self.seed,
            "versions": {"csduality": __version__, "numpy": np.__version__},
            "results": [c.to_dict() for c in self.checks],
            "data": self.data,
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())
