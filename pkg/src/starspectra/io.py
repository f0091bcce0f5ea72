"""Problem configs (YAML) and delimited-text exports.

Config schema::

    label: optional name
    edges:                      # exactly three, edge 1 carries the jump
      - h: 0.5
        potential:
          kind: zero | constant | piecewise-polynomial | sampled-table
          params: {...}         # see below
      - ...
    jump: {a: 2.0, b: 0.0, d: 1.0}
    run: {k_max: 20, A: 1, T: 300, dk: 0.025, rtol: 1e-10, lambda_min: -4}   # all optional

Potential params by kind: ``constant`` takes ``c``; ``piecewise-polynomial``
takes ``breakpoints`` (ascending, 0 ... pi) and ``coeffs`` (one row of
ascending local-power coefficients per piece); ``sampled-table`` takes
``abscissae`` and ``values``.  The strings ``pi`` and ``pi/2`` are accepted
wherever a number is expected.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .model import (CharTrace, Diagnostic, EdgeSpec, JumpSpec, PotentialSpec, Spectrum,
                    SpectrumEntry, StarProblem, validate)

RUN_KEYS = {"k_max", "A", "T", "dk", "rtol", "lambda_min", "n_pairs"}
_LAST_SEGMENT = r"(\.[^.\[]+|\[\d+\])$"
_CONSTANTS = {"pi": math.pi, "pi/2": math.pi / 2, "-pi": -math.pi, "2pi": 2 * math.pi}


class ConfigError(ValueError):
    def __init__(self, field: str, message: str, line: int | None = None):
        where = f" (line {line})" if line else ""
        super().__init__(f"{field}: {message}{where}")
        self.field, self.line = field, line


@dataclass
class LoadedConfig:
    problem: StarProblem
    run: dict
    text: str
    diagnostics: list[Diagnostic]

    @property
    def digest(self) -> str:
        return config_hash(self.text)


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def problem_hash(problem: StarProblem) -> str:
    return hashlib.sha256(repr(problem).encode("utf-8")).hexdigest()[:16]


def _line_map(text: str) -> dict:
    """Map field paths like ``edges[1].h`` to 1-based source lines."""
    out = {}

    def walk(node, path):
        out[path or "<root>"] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                walk(v, f"{path}.{k.value}" if path else str(k.value))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, f"{path}[{i + 1}]")

    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return out
    if root is not None:
        walk(root, "")
    return out


class _Reader:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, field, message):
        # report the line of the field, or of its nearest present ancestor
        probe = field
        while probe not in self.lines and re.search(_LAST_SEGMENT, probe):
            probe = re.sub(_LAST_SEGMENT, "", probe)
        raise ConfigError(field, message, self.lines.get(probe))

    def number(self, value, field):
        if isinstance(value, str) and value.strip() in _CONSTANTS:
            return _CONSTANTS[value.strip()]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(field, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            self.fail(field, "must be finite")
        return float(value)

    def numbers(self, value, field):
        if not isinstance(value, list) or not value:
            self.fail(field, "expected a non-empty list of numbers")
        return [self.number(v, f"{field}[{i + 1}]") for i, v in enumerate(value)]

    def require(self, mapping, key, field):
        if not isinstance(mapping, dict):
            self.fail(field, "expected a mapping")
        if key not in mapping:
            self.fail(f"{field}.{key}" if field else key, "missing required field")
        return mapping[key]


def _potential(r: _Reader, spec, field) -> PotentialSpec:
    if spec is None:
        return PotentialSpec.zero()
    kind = r.require(spec, "kind", field)
    params = spec.get("params") or {}
    pf = f"{field}.params"
    try:
        if kind == "zero":
            return PotentialSpec.zero()
        if kind == "constant":
            return PotentialSpec.constant(r.number(r.require(params, "c", pf), f"{pf}.c"))
        if kind == "piecewise-polynomial":
            bp = r.numbers(r.require(params, "breakpoints", pf), f"{pf}.breakpoints")
            rows = r.require(params, "coeffs", pf)
            if not isinstance(rows, list):
                r.fail(f"{pf}.coeffs", "expected a list of coefficient rows")
            rows = [r.numbers(row, f"{pf}.coeffs[{i + 1}]") for i, row in enumerate(rows)]
            return PotentialSpec.piecewise(bp, rows)
        if kind == "sampled-table":
            xs = r.numbers(r.require(params, "abscissae", pf), f"{pf}.abscissae")
            vs = r.numbers(r.require(params, "values", pf), f"{pf}.values")
            return PotentialSpec.sampled(xs, vs)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        r.fail(pf, str(exc))
    r.fail(f"{field}.kind", f"unknown potential kind {kind!r}")


def parse_problem(data, r: _Reader) -> StarProblem:
    if not isinstance(data, dict):
        r.fail("<root>", "config must be a mapping")
    edges = r.require(data, "edges", "")
    if not isinstance(edges, list) or len(edges) != 3:
        r.fail("edges", "need exactly three edges")
    parsed = []
    for i, e in enumerate(edges, start=1):
        f = f"edges[{i}]"
        h = r.number(r.require(e, "h", f), f"{f}.h")
        parsed.append(EdgeSpec(_potential(r, e.get("potential"), f"{f}.potential"), h))
    jump = r.require(data, "jump", "")
    a = r.number(r.require(jump, "a", "jump"), "jump.a")
    b = r.number(r.require(jump, "b", "jump"), "jump.b")
    d = r.number(r.require(jump, "d", "jump"), "jump.d")
    try:
        js = JumpSpec(a, b, d)
    except ValueError as exc:
        r.fail("jump", str(exc))
    return StarProblem(tuple(parsed), js, str(data.get("label", "")))


def loads_config(text: str) -> LoadedConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError("<syntax>", str(getattr(exc, "problem", exc)),
                          mark.line + 1 if mark else None) from None
    r = _Reader(_line_map(text))
    problem = parse_problem(data, r)
    run = data.get("run") or {}
    if not isinstance(run, dict):
        r.fail("run", "expected a mapping")
    for key in run:
        if key not in RUN_KEYS:
            r.fail(f"run.{key}", f"unknown run option (allowed: {sorted(RUN_KEYS)})")
    run = {k: r.number(v, f"run.{k}") for k, v in run.items()}
    diags = validate(problem)
    errors = [dg for dg in diags if dg.severity == "error"]
    if errors:
        r.fail(errors[0].field, errors[0].message)
    return LoadedConfig(problem, run, text, diags)


def load_config(path) -> LoadedConfig:
    return loads_config(Path(path).read_text(encoding="utf-8"))


def dump_problem(problem: StarProblem) -> dict:
    """Config mapping for a problem (inverse of parse_problem)."""
    edges = []
    for e in problem.edges:
        q = e.q
        if q.kind == "zero":
            pot = {"kind": "zero"}
        elif q.kind == "constant" and len(q.coeffs) == 1:
            pot = {"kind": "constant", "params": {"c": q.coeffs[0][0]}}
        else:
            pot = {"kind": "piecewise-polynomial",
                   "params": {"breakpoints": list(q.breakpoints), "coeffs": [list(r) for r in q.coeffs]}}
        edges.append({"h": e.h, "potential": pot})
    j = problem.jump
    return {"label": problem.label, "edges": edges, "jump": {"a": j.a, "b": j.b, "d": j.d}}


# -- exports ------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v, sort_keys=True, default=str)
    return str(v)


def header(meta: dict) -> str:
    return "".join(f"# {k}: {_fmt(v)}\n" for k, v in meta.items())


def write_table(path, columns: list[str], rows, meta: dict) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(header(meta))
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(float(v)) if isinstance(v, (np.floating, float)) else str(v)
                               for v in row) + "\n")
    return path


def write_trace(path, trace: CharTrace, meta: dict) -> Path:
    meta = dict(meta, provenance=trace.provenance, **{f"trace.{k}": v for k, v in trace.meta.items()})
    return write_table(path, ["k", "omega"], zip(trace.k.tolist(), trace.values.tolist()), meta)


def read_header(path) -> tuple[dict, list[str], list[list[str]]]:
    meta, cols, rows = {}, None, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = val
        elif cols is None:
            cols = line.split("\t")
        elif line:
            rows.append(line.split("\t"))
    return meta, cols or [], rows


def read_trace(path) -> CharTrace:
    meta, cols, rows = read_header(path)
    arr = np.array(rows, dtype=float)
    return CharTrace(arr[:, 0], arr[:, 1], meta.get("provenance", "forward-solve"), {})


def write_spectrum(path, spectrum: Spectrum, residuals: dict, meta: dict) -> Path:
    """Rows: index, lambda, sqrt_lambda, multiplicity, class, residual.

    ``residuals`` maps an entry index to the residual of its first label.
    """
    rows = []
    for i, e in enumerate(spectrum.entries):
        cls = ",".join(f"{n}{c}" for n, c in e.labels) or "-"
        rows.append((i, e.lam, e.sqrt_lambda, e.multiplicity, cls + ("?" if e.ambiguous else ""),
                     residuals.get(i, float("nan"))))
    meta = dict(meta, truncation=spectrum.truncation, k_max=spectrum.k_max,
                lambda_min=spectrum.lambda_min, tolerances=spectrum.tolerances)
    return write_table(path, ["index", "lambda", "sqrt_lambda", "multiplicity", "class", "residual"],
                       rows, meta)


def read_spectrum(path) -> tuple[Spectrum, dict]:
    meta, cols, rows = read_header(path)
    entries = []
    for row in rows:
        rec = dict(zip(cols, row))
        cls = rec["class"]
        amb = cls.endswith("?")
        labels = ()
        if cls.rstrip("?") != "-":
            labels = tuple((int(t[:-2]), t[-2:]) for t in cls.rstrip("?").split(","))
        entries.append(SpectrumEntry(float(rec["lambda"]), int(rec["multiplicity"]), labels, amb))
    spec = Spectrum(tuple(entries), int(meta.get("truncation", 0)), float(meta.get("k_max", 0.0)),
                    float(meta.get("lambda_min", 0.0)))
    return spec, meta


def write_json(path, payload: dict, meta: dict) -> Path:
    path = Path(path)
    body = {"meta": meta, **payload}
    path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_json_default) + "\n",
                    encoding="utf-8")
    return path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)
