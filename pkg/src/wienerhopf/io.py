"""Reading and writing kernel-spec documents (YAML or JSON).

A document looks like::

    level: K1
    pos_terms: [{c: 1, k: 0, a: 1}]
    neg_terms: [{c: -1, k: 0, a: 1}]

or, for sampled kernels::

    level: K0
    tabulated: {t: [-2, -1, 1, 2], v: [0.07, 0.18, 0.18, 0.07]}

Coefficients and samples may be real numbers, ``"re+imi"`` strings or
``[re, im]`` pairs.  Validation errors name the offending field and, when
the document came from text, its line.
"""
from __future__ import annotations

import math
import warnings
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import NonIntegrableKernel, SchemaError
from .kernel import KernelSpec, Level, Term
from .spaces import format_complex, parse_complex

SPEC_KEYS = {"level", "pos_terms", "neg_terms", "tabulated", "name", "description"}
TERM_KEYS = {"c", "k", "a"}


class _Lines:
    """Maps field paths to 1-based line numbers of a composed YAML tree."""

    def __init__(self, root):
        self.root = root

    def __call__(self, path):
        node = self.root
        for key in path:
            if isinstance(node, yaml.MappingNode):
                nxt = [v for k, v in node.value if k.value == key]
                if not nxt:
                    break
                node = nxt[0]
            elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
                node = node.value[key]
            else:
                break
        return None if node is None else node.start_mark.line + 1


def _fail(msg, path, lines):
    field = ".".join(str(p) for p in path) if path else None
    raise SchemaError(msg, field=field, line=lines(path) if lines else None)


def _number(x, path, lines, what="number") -> complex:
    if isinstance(x, bool):
        _fail(f"expected a {what}, got a boolean", path, lines)
    if isinstance(x, (int, float)):
        z = complex(x)
    elif isinstance(x, str):
        try:
            z = parse_complex(x)
        except ValueError:
            _fail(f"cannot read {x!r} as a {what}", path, lines)
    elif isinstance(x, (list, tuple)) and len(x) == 2 and all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in x
    ):
        z = complex(x[0], x[1])
    else:
        _fail(f"expected a {what}, got {x!r}", path, lines)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        _fail(f"{what} must be finite", path, lines)
    return z


def _real(x, path, lines) -> float:
    z = _number(x, path, lines, "real number")
    if z.imag != 0:
        _fail("expected a real number", path, lines)
    return z.real


def _terms(raw, key, lines):
    if raw is None:
        return []
    if not isinstance(raw, list):
        _fail("expected a list of terms", [key], lines)
    out = []
    for i, item in enumerate(raw):
        path = [key, i]
        if not isinstance(item, dict):
            _fail("a term is a mapping with keys c, k, a", path, lines)
        extra = set(item) - TERM_KEYS
        if extra:
            _fail(f"unknown term keys {sorted(extra)}", path, lines)
        missing = TERM_KEYS - set(item)
        if missing:
            _fail(f"missing term keys {sorted(missing)}", path, lines)
        c = _number(item["c"], path + ["c"], lines)
        k = _real(item["k"], path + ["k"], lines)
        if k != int(k) or k < 0:
            _fail("k must be a nonnegative integer", path + ["k"], lines)
        a = _real(item["a"], path + ["a"], lines)
        if not a > 0:
            _fail("a must be positive (the term must decay)", path + ["a"], lines)
        out.append(Term(c, int(k), a))
    return out


def spec_from_mapping(doc: Any, lines=None) -> KernelSpec:
    """Validate a parsed document and build the kernel."""
    if not isinstance(doc, dict):
        _fail("the document must be a mapping", [], lines)
    extra = set(doc) - SPEC_KEYS
    if extra:
        _fail(f"unknown keys {sorted(extra)}", [sorted(extra)[0]], lines)
    if "level" not in doc:
        _fail("missing required key 'level'", [], lines)
    try:
        level = Level(str(doc["level"]))
    except ValueError:
        _fail(f"level must be one of K, K1, K0, got {doc['level']!r}", ["level"], lines)
    has_terms = "pos_terms" in doc or "neg_terms" in doc
    if "tabulated" in doc:
        if has_terms:
            _fail("closed-form terms and tabulated samples cannot be mixed", ["tabulated"], lines)
        return KernelSpec(level, tabulated=_tabulated(doc["tabulated"], lines))
    pos = _terms(doc.get("pos_terms"), "pos_terms", lines)
    neg = _terms(doc.get("neg_terms"), "neg_terms", lines)
    if not pos and not neg:
        warnings.warn("kernel spec has no terms; using the zero kernel", UserWarning, stacklevel=3)
    try:
        return KernelSpec(level, pos, neg)
    except NonIntegrableKernel as exc:
        _fail(str(exc), [], lines)


def _tabulated(raw, lines):
    if not isinstance(raw, dict) or set(raw) != {"t", "v"}:
        _fail("tabulated needs exactly the keys t and v", ["tabulated"], lines)
    t_raw, v_raw = raw["t"], raw["v"]
    for key, seq in (("t", t_raw), ("v", v_raw)):
        if not isinstance(seq, list) or len(seq) < 4:
            _fail("expected a list of at least 4 samples", ["tabulated", key], lines)
    if len(t_raw) != len(v_raw):
        _fail(f"t has {len(t_raw)} samples but v has {len(v_raw)}", ["tabulated", "v"], lines)
    t = np.array([_real(x, ["tabulated", "t", i], lines) for i, x in enumerate(t_raw)])
    v = np.array([_number(x, ["tabulated", "v", i], lines) for i, x in enumerate(v_raw)])
    bad = np.flatnonzero(np.diff(t) <= 0)
    if bad.size:
        _fail("t must be strictly increasing", ["tabulated", "t", int(bad[0]) + 1], lines)
    if min(np.sum(t < 0), np.sum(t > 0)) < 4:
        _fail("t needs at least 4 negative and 4 positive samples", ["tabulated", "t"], lines)
    if np.all(v.imag == 0):
        v = v.real
    return t, v


def parse_kernel_spec(document: str) -> KernelSpec:
    """Parse YAML (JSON is a subset) text into a :class:`KernelSpec`."""
    try:
        root = yaml.compose(document, Loader=yaml.SafeLoader)
        doc = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SchemaError(f"not valid YAML: {getattr(exc, 'problem', exc)}",
                          line=None if mark is None else mark.line + 1) from exc
    if doc is None:
        raise SchemaError("empty document")
    return spec_from_mapping(doc, _Lines(root))


def load_kernel_spec(path) -> KernelSpec:
    return parse_kernel_spec(Path(path).read_text())


def _coef(z):
    z = complex(z)
    return z.real if z.imag == 0 else format_complex(z)


def spec_to_mapping(spec: KernelSpec) -> dict:
    if spec.is_closed_form:
        return {
            "level": spec.level.value,
            "pos_terms": [{"c": _coef(t.c), "k": t.k, "a": t.a} for t in spec.pos_terms],
            "neg_terms": [{"c": _coef(t.c), "k": t.k, "a": t.a} for t in spec.neg_terms],
        }
    t, v = spec.tabulated
    return {
        "level": spec.level.value,
        "tabulated": {"t": [float(x) for x in t], "v": [_coef(x) for x in v]},
    }


def dump_kernel_spec(spec: KernelSpec) -> str:
    return yaml.safe_dump(spec_to_mapping(spec), sort_keys=False, default_flow_style=None)
