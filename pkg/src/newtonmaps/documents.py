"""JSON documents for function specs, integration paths, curves and maps.

Complex numbers are ``[re, im]`` pairs; coefficient lists run in ascending
degree. Function specs look like::

    {"kind": "poly", "coeffs": [[-1, 0], [0, 0], [1, 0]]}
    {"kind": "poly_exp_poly", "p": [[0, 0], [1, 0]], "q": [[0, 0], [1, 0]]}
    {"kind": "builtin", "name": "z_exp_exp_z"}

Errors raise :class:`DocumentError` naming the file, field and line.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any

import numpy as np

from .fixedpoints import PathSpec
from .functions import Builtin, FunctionSpec, PolyExpPoly, Polynomial, SpecError
from .lefschetz import RationalMap, SampledCurve


class DocumentError(ValueError):
    pass


class _Doc:
    """A parsed document plus its source text for line lookups."""

    def __init__(self, data: Any, text: str = "", source: str = "<document>"):
        self.data, self.text, self.source = data, text, source

    def fail(self, field: str, msg: str):
        m = re.search(r'"%s"\s*:' % re.escape(field), self.text)
        where = f" (line {self.text.count(chr(10), 0, m.start()) + 1})" if m else ""
        raise DocumentError(f"{self.source}: field '{field}'{where}: {msg}")

    def get(self, field: str, default: Any = ...):
        if not isinstance(self.data, dict):
            raise DocumentError(f"{self.source}: expected a JSON object at top level")
        if field not in self.data:
            if default is ...:
                self.fail(field, "missing")
            return default
        return self.data[field]

    def complex(self, field: str, value: Any = ...) -> complex:
        v = self.get(field) if value is ... else value
        try:
            return _to_complex(v)
        except (TypeError, ValueError) as exc:
            self.fail(field, str(exc))

    def complex_list(self, field: str, default: Any = ...) -> list[complex]:
        v = self.get(field, default)
        if not isinstance(v, list):
            self.fail(field, "expected a list of [re, im] pairs")
        out = []
        for k, item in enumerate(v):
            try:
                out.append(_to_complex(item))
            except (TypeError, ValueError) as exc:
                self.fail(field, f"entry {k}: {exc}")
        return out


def _to_complex(v) -> complex:
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    raise ValueError(f"expected [re, im], got {v!r}")


def _pairs(cs) -> list[list[float]]:
    return [[float(c.real), float(c.imag)] for c in np.asarray(cs, dtype=complex)]


def parse(text: str, source: str = "<document>") -> _Doc:
    try:
        return _Doc(json.loads(text), text, source)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def read(path: str | Path) -> _Doc:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DocumentError(f"{path}: {exc.strerror}") from None
    return parse(text, str(path))


# -- function specs -----------------------------------------------------------


def spec_to_dict(spec: FunctionSpec) -> dict:
    if isinstance(spec, Polynomial):
        return {"kind": "poly", "coeffs": _pairs(spec.coeffs)}
    if isinstance(spec, PolyExpPoly):
        return {"kind": "poly_exp_poly", "p": _pairs(spec.p_coeffs), "q": _pairs(spec.q_coeffs)}
    if isinstance(spec, Builtin):
        return {"kind": "builtin", "name": spec.name}
    raise TypeError(f"cannot serialize {spec!r}")


def spec_from_doc(doc: _Doc) -> FunctionSpec:
    kind = doc.get("kind")
    try:
        if kind == "poly":
            return Polynomial(doc.complex_list("coeffs"))
        if kind == "poly_exp_poly":
            return PolyExpPoly(doc.complex_list("p"), doc.complex_list("q", []))
        if kind == "builtin":
            return Builtin(doc.get("name"))
    except SpecError as exc:
        doc.fail({"poly": "coeffs", "poly_exp_poly": "p", "builtin": "name"}[kind], str(exc))
    doc.fail("kind", f"unknown kind {kind!r}; expected poly, poly_exp_poly or builtin")


def spec_from_dict(d: dict) -> FunctionSpec:
    return spec_from_doc(_Doc(d, json.dumps(d, indent=1)))


def load_spec(path: str | Path) -> FunctionSpec:
    return spec_from_doc(read(path))


def dump_spec(spec: FunctionSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2)


# -- paths, curves, maps ------------------------------------------------------


def path_from_doc(doc: _Doc) -> tuple[PathSpec, list[complex]]:
    """Path document: anchor, optional waypoints and samples_per_segment, targets."""
    n = doc.get("samples_per_segment", 4)
    if not isinstance(n, int) or n < 1:
        doc.fail("samples_per_segment", "expected a positive integer")
    path = PathSpec(doc.complex("anchor"), tuple(doc.complex_list("waypoints", [])), n)
    return path, doc.complex_list("targets")


def load_path(path: str | Path) -> tuple[PathSpec, list[complex]]:
    return path_from_doc(read(path))


def curve_from_doc(doc: _Doc) -> SampledCurve:
    """Either {"center", "radius", "samples"} or {"points"}."""
    if "points" in (doc.data if isinstance(doc.data, dict) else {}):
        pts = doc.complex_list("points")
    else:
        r = doc.get("radius")
        if not isinstance(r, (int, float)) or r <= 0:
            doc.fail("radius", "expected a positive number")
        n = doc.get("samples", 512)
        if not isinstance(n, int):
            doc.fail("samples", "expected an integer")
        pts = SampledCurve.circle(doc.complex("center", doc.get("center", 0)), r, n).points
    try:
        return SampledCurve(pts)
    except ValueError as exc:
        doc.fail("points" if "points" in doc.data else "samples", str(exc))


def load_curve(path: str | Path) -> SampledCurve:
    return curve_from_doc(read(path))


def map_from_doc(doc: _Doc) -> RationalMap:
    """A rational map {"kind": "rational", "num", "den"}, or a spec meaning its Newton map."""
    if doc.get("kind") == "rational":
        try:
            return RationalMap(np.array(doc.complex_list("num")), np.array(doc.complex_list("den")))
        except ValueError as exc:
            doc.fail("den", str(exc))
    spec = spec_from_doc(doc)
    if isinstance(spec, Builtin):
        doc.fail("kind", "transcendental Newton maps are not rational")
    return RationalMap.newton(spec)


def load_map(path: str | Path) -> RationalMap:
    return map_from_doc(read(path))
