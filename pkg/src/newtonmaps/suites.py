"""Deterministic experiment suites and their machine-readable reports.

Every suite returns a :class:`VerificationReport`: one record per case with
inputs, computed and expected values, the provenance of the expectation,
the tolerance and a pass flag. Reports serialize to JSON whose body (all
but the wall time) is byte-identical across runs with the same config.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import documents as docs
from . import dynamics as D
from .fixedpoints import classify_all, find_roots, reconstruct_entire_function, residue_at_fixed_point
from .functions import Builtin, FunctionSpec, Polynomial, Window, newton_map
from .lefschetz import ConfigurationError, SampledCurve, verify_fixed_point_count
from .render import ppm_bytes, raster_rgb
from .rng import SplitMix64, generate_random_polynomial

SUITES = ("classify", "reconstruct", "channels", "corollary", "lefschetz", "render",
          "figure1", "figure2-style")
ALIASES = {"verify-corollary": "corollary", "figure2": "figure2-style"}

FIGURE1_WINDOW = Window(-8 - 10j, 12 + 10j)
FIGURE2_WINDOW = Window(-2.5 - 2.5j, 2.5 + 2.5j)
RENDER_WINDOW = Window(-2 - 2j, 2 + 2j)
COROLLARY_CASES = 50
COROLLARY_DEGREE = 5
FIGURE2_DEGREE = 9

DEFAULTS = {"budget": D.DEFAULT_BUDGET, "radius": 10.0, "samples": 4096,
            "width": 256, "height": 256}
FIGURE_SIZE = 800


class ConfigError(ValueError):
    """Bad configuration: exit status 2."""


@dataclass
class ExperimentConfig:
    suite: str
    seed: int = 0
    spec_path: str | None = None
    output_dir: str = "."
    overrides: dict[str, Any] = field(default_factory=dict)
    # suite-specific documents
    path_doc: str | None = None
    curve_doc: str | None = None
    window: Window | None = None

    def __post_init__(self):
        self.suite = ALIASES.get(self.suite, self.suite)
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        unknown = set(self.overrides) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown overrides {sorted(unknown)}")

    def get(self, key: str, default=None):
        v = self.overrides.get(key)
        if v is not None:
            return v
        return DEFAULTS[key] if default is None else default


@dataclass
class CaseRecord:
    name: str
    inputs: dict
    computed: Any
    expected: Any
    provenance: str
    tolerance: float | None
    passed: bool | None  # None means skipped

    def to_json(self, index: int) -> dict:
        return {"index": index, "name": self.name, "inputs": self.inputs,
                "computed": self.computed, "expected": self.expected,
                "provenance": self.provenance, "tolerance": self.tolerance,
                "pass": self.passed, "skipped": self.passed is None}


@dataclass
class VerificationReport:
    suite: str
    seed: int
    cases: list[CaseRecord] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def pass_count(self) -> int:
        return sum(c.passed is True for c in self.cases)

    @property
    def fail_count(self) -> int:
        return sum(c.passed is False for c in self.cases)

    @property
    def skipped(self) -> int:
        return sum(c.passed is None for c in self.cases)

    @property
    def ok(self) -> bool:
        return self.fail_count == 0

    def add(self, name, inputs, computed, expected, provenance, tolerance, passed):
        self.cases.append(CaseRecord(name, _plain(inputs), _plain(computed), _plain(expected),
                                     provenance, tolerance,
                                     None if passed is None else bool(passed)))

    def body(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "summary": {"case_count": len(self.cases), "pass_count": self.pass_count,
                        "fail_count": self.fail_count, "skipped": self.skipped},
            "cases": [c.to_json(i) for i, c in enumerate(self.cases)],
            "artifacts": sorted(self.artifacts),
        }

    def to_json(self) -> str:
        body = self.body()
        digest = hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()
        return json.dumps({**body, "body_sha256": digest, "wall_time": self.wall_time}, indent=2)


def _plain(v):
    """JSON-ready copy: complex -> [re, im], numpy scalars -> Python."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _write(out: Path, name: str, data: str | bytes, report: VerificationReport) -> None:
    p = out / name
    if isinstance(data, bytes):
        p.write_bytes(data)
    else:
        p.write_text(data)
    report.artifacts.append(name)


def _spec(cfg: ExperimentConfig) -> FunctionSpec:
    if not cfg.spec_path:
        raise ConfigError(f"suite {cfg.suite} needs --spec")
    return docs.load_spec(cfg.spec_path)


def _spec_label(spec: FunctionSpec) -> dict:
    return docs.spec_to_dict(spec)


# -- suites -------------------------------------------------------------------


def _classify(cfg, out, rep):
    spec = _spec(cfg)
    records = classify_all(spec)
    _write(out, "classify.json", json.dumps([r.to_json() for r in records], indent=2), rep)
    mult = dict((complex(r), m) for r, m in find_roots(spec))
    for rec in records:
        m = min(mult.items(), key=lambda kv: abs(kv[0] - rec.location))[1]
        want = (m - 1) / m
        rep.add("multiplier", {"root": rec.location, "multiplicity": m}, rec.multiplier, want,
                "PAPER", 1e-8, abs(rec.multiplier - want) <= 1e-8 and rec.kind.value == "AttractingRoot")
        res = residue_at_fixed_point(spec, rec.location)
        rep.add("residue", {"root": rec.location}, res, m, "PAPER", 1e-6, abs(res - m) <= 1e-6)


def _reconstruct(cfg, out, rep):
    spec = _spec(cfg)
    if not cfg.path_doc:
        raise ConfigError("suite reconstruct needs --path")
    path, targets = docs.load_path(cfg.path_doc)
    fixed = [r for r, _ in spec.roots()]
    vals = reconstruct_entire_function(newton_map(spec), path, targets, fixed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re_z", "im_z", "re_f", "im_f"])
    for z, v in zip(targets, vals):
        w.writerow([repr(z.real), repr(z.imag), repr(v.real), repr(v.imag)])
    _write(out, "reconstruct.csv", buf.getvalue(), rep)
    f = spec.f_values(np.array([path.anchor, *targets]))[0]
    for z, v, fz in zip(targets, vals, f[1:]):
        want = fz / f[0]
        ok = bool(np.isfinite(want)) and abs(v - want) <= 1e-5 * max(abs(want), 1e-300)
        rep.add("value_ratio", {"target": z}, v, want if np.isfinite(want) else None,
                "DERIVED", 1e-5, ok if np.isfinite(want) else None)


def _channels(cfg, out, rep):
    spec = _spec(cfg)
    if not isinstance(spec, Polynomial):
        raise ConfigError("suite channels needs a polynomial spec")
    reports = D.channel_reports(spec, cfg.get("radius"), cfg.get("samples"), cfg.get("budget"))
    _write(out, "channels.json", json.dumps([r.to_json() for r in reports], indent=2), rep)
    for r in reports:
        reliable = r.reliable and r.critical_reliable
        rep.add("channels_equal_critical", {"root": r.root, "radius": r.sample_radius},
                r.channel_count, r.critical_count, "PAPER", 0,
                r.counts_agree if reliable else None)


def _corollary(cfg, out, rep):
    if cfg.spec_path:
        specs = [_spec(cfg)]
    else:
        st = SplitMix64(cfg.seed)
        specs = [generate_random_polynomial(st.fork(k), COROLLARY_DEGREE) for k in range(COROLLARY_CASES)]
    results = []
    for k, spec in enumerate(specs):
        r = D.verify_root_between_channels(spec, cfg.get("radius"), cfg.get("samples"),
                                           cfg.get("budget"))
        results.append({"case": k, "spec": _spec_label(spec), **r.to_json()})
        rep.add("root_between_channels", {"spec": _spec_label(spec)},
                r.passed, True, "DERIVED", None, r.passed if r.reliable else None)
    _write(out, "corollary.json", json.dumps(results, indent=2), rep)


def _lefschetz(cfg, out, rep):
    if not cfg.spec_path:
        raise ConfigError("suite lefschetz needs --spec (a rational map or function spec)")
    R = docs.load_map(cfg.spec_path)
    if cfg.curve_doc:
        curve = docs.load_curve(cfg.curve_doc)
    else:
        curve = SampledCurve.circle(0, float(cfg.overrides.get("radius") or 1.0),
                                    int(cfg.overrides.get("samples") or 512))
    try:
        r = verify_fixed_point_count(R, curve)
    except ConfigurationError as exc:
        raise ConfigError(f"configuration violates the Lefschetz-map conditions: {exc}") from None
    body = {"L": r.L, "sum_indices": r.sum_indices, "verdict": r.verdict,
            "components": [{"degree": c.degree, "length": c.length} for c in r.components if c.counted]}
    _write(out, "lefschetz.json", json.dumps(_plain(body), indent=2), rep)
    rep.add("lefschetz_number_equals_index_sum", {"map": R.to_json()}, r.L, r.sum_indices,
            "PAPER", 0, r.verdict)


def _render(cfg, out, rep, spec=None, window=None, name="render.ppm"):
    spec = spec or _spec(cfg)
    window = window or cfg.window or RENDER_WINDOW
    w, h = int(cfg.get("width")), int(cfg.get("height"))
    raster = D.compute_basin_raster(spec, window, w, h, int(cfg.get("budget")))
    _write(out, name, ppm_bytes(raster_rgb(raster)), rep)
    rep.add("raster_size", {"width": w, "height": h}, int(raster.fate.size), w * h,
            "TRIVIAL", 0, raster.fate.size == w * h)
    return raster


def _figure1(cfg, out, rep):
    spec = Builtin("z_exp_exp_z")
    cfg.overrides.setdefault("width", FIGURE_SIZE)
    cfg.overrides.setdefault("height", FIGURE_SIZE)
    _render(cfg, out, rep, spec, FIGURE1_WINDOW, "figure1.ppm")
    for k in range(-2, 3):
        s = D.virtual_basin_strip(spec, k, budget=int(cfg.get("budget")))
        rep.add("strip_escapes", {"k": k, "line": f"({2 * k + 1})*pi*i + [2, 12]"},
                int(np.sum(s.fates == D.Fate.ESCAPED)), int(s.starts.size), "PAPER", 0,
                s.passed)


def figure2_polynomial(seed: int) -> Polynomial:
    return generate_random_polynomial(SplitMix64(seed).fork(0), FIGURE2_DEGREE)


def _figure2(cfg, out, rep):
    spec = figure2_polynomial(cfg.seed)
    _write(out, "figure2_spec.json", docs.dump_spec(spec), rep)
    cfg.overrides.setdefault("width", FIGURE_SIZE)
    cfg.overrides.setdefault("height", FIGURE_SIZE)
    _render(cfg, out, rep, spec, FIGURE2_WINDOW, "figure2.ppm")
    for r in D.channel_reports(spec, cfg.get("radius"), cfg.get("samples"), cfg.get("budget")):
        rep.add("root_has_channel", {"root": r.root}, r.channel_count, ">= 1", "DERIVED", None,
                r.channel_count >= 1 if r.reliable else None)


RUNNERS: dict[str, Callable] = {
    "classify": _classify, "reconstruct": _reconstruct, "channels": _channels,
    "corollary": _corollary, "lefschetz": _lefschetz, "render": _render,
    "figure1": _figure1, "figure2-style": _figure2,
}


def run_suite(cfg: ExperimentConfig) -> VerificationReport:
    """Run one suite, writing ``report.json`` and its artifacts to ``cfg.output_dir``."""
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc.strerror}") from None
    rep = VerificationReport(cfg.suite, cfg.seed)
    t0 = time.perf_counter()
    try:
        RUNNERS[cfg.suite](cfg, out, rep)
    except docs.DocumentError as exc:
        raise ConfigError(str(exc)) from None
    rep.wall_time = round(time.perf_counter() - t0, 3)
    (out / "report.json").write_text(rep.to_json())
    return rep
