"""System files, sweeps over h, reports, certificates and 2-D geometry export."""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import re
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bounds import BoundsReport
from .cycles import DEFAULT_BEAM, DEFAULT_DEPTH, DEFAULT_ENUM_LENGTH, make_cycle
from .errors import (
    CertificateMismatch,
    DimensionNotTwo,
    DwellCertError,
    NumericalError,
    ParseError,
    StepNonpositive,
    StepTooLarge,
)
from .ipa import IpaConfig, MultinormCertificate, Status, Verification, verify_certificate
from .pipeline import AnalysisConfig, SearchConfig, analyze
from .polytope import Multinorm, PolytopeNorm, Variant
from .system import GraphSystem, SwitchingSystem, build_discretization, is_metzler, validate_system

SCHEMA_VERSION = "1"
CSV_HEADER = ("h", "lb", "ub", "leading_cycle", "epsilon", "verdict")
THREADS_ENV = "DWELLCERT_THREADS"

_SYSTEM_KEYS = {"schema_version", "matrices", "dwell_time", "labels", "normalize_2norm", "run"}
_RUN_KEYS = {"steps", "beam", "depth", "enum_length", "max_iterations", "max_vertices", "positive_mode", "output"}
_FORMATS = ("text", "csv", "json")


@dataclass(frozen=True)
class RunConfig:
    steps: tuple = ()
    beam: int = DEFAULT_BEAM
    depth: int = DEFAULT_DEPTH
    enum_length: int = DEFAULT_ENUM_LENGTH
    max_iterations: int = 200
    max_vertices: int = 20000
    positive_mode: bool | None = None  # None: decide from the system
    output: str = "text"

    def analysis_config(self, positive: bool) -> AnalysisConfig:
        return AnalysisConfig(
            SearchConfig(self.beam, self.depth, self.enum_length),
            IpaConfig(self.max_iterations, self.max_vertices, positive_mode=positive),
        )


# -- system files ---------------------------------------------------------------

def _fail(where: str, msg: str):
    raise ParseError(f"{where}: {msg}")


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(where, f"expected a number, got {type(v).__name__}")
    return float(v)


def _integer(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(where, f"expected an integer, got {v!r}")
    return v


def _parse_run(obj, where: str = "run") -> RunConfig:
    if not isinstance(obj, dict):
        _fail(where, "expected an object")
    unknown = sorted(set(obj) - _RUN_KEYS)
    if unknown:
        _fail(f"{where}.{unknown[0]}", "unknown field")
    kw = {}
    if "steps" in obj:
        if not isinstance(obj["steps"], list):
            _fail(f"{where}.steps", "expected a list of numbers")
        kw["steps"] = tuple(_number(v, f"{where}.steps[{i}]") for i, v in enumerate(obj["steps"]))
    for key in ("beam", "depth", "enum_length", "max_iterations", "max_vertices"):
        if key in obj:
            kw[key] = _integer(obj[key], f"{where}.{key}")
    if "positive_mode" in obj:
        pm = obj["positive_mode"]
        if pm is not None and not isinstance(pm, bool):
            _fail(f"{where}.positive_mode", "expected true, false or null")
        kw["positive_mode"] = pm
    if "output" in obj:
        if obj["output"] not in _FORMATS:
            _fail(f"{where}.output", f"expected one of {', '.join(_FORMATS)}")
        kw["output"] = obj["output"]
    return RunConfig(**kw)


def parse_system_dict(doc) -> tuple[SwitchingSystem, RunConfig]:
    if not isinstance(doc, dict):
        _fail("document", "expected a JSON object")
    unknown = sorted(set(doc) - _SYSTEM_KEYS)
    if unknown:
        _fail(unknown[0], "unknown field")
    for key in ("schema_version", "matrices", "dwell_time"):
        if key not in doc:
            _fail(key, "missing required field")
    if doc["schema_version"] != SCHEMA_VERSION:
        _fail("schema_version", f"unsupported version {doc['schema_version']!r}")
    mats = doc["matrices"]
    if not isinstance(mats, list):
        _fail("matrices", "expected a list of matrices")
    arrays = []
    for i, M in enumerate(mats):
        if not isinstance(M, list) or not all(isinstance(row, list) for row in M):
            _fail(f"matrices[{i}]", "expected a list of rows")
        arrays.append([[_number(v, f"matrices[{i}][{r}][{c}]") for c, v in enumerate(row)] for r, row in enumerate(M)])
    m = _number(doc["dwell_time"], "dwell_time")
    labels = doc.get("labels")
    if labels is not None and (not isinstance(labels, list) or not all(isinstance(s, str) for s in labels)):
        _fail("labels", "expected a list of strings")
    normalize = doc.get("normalize_2norm", False)
    if not isinstance(normalize, bool):
        _fail("normalize_2norm", "expected a boolean")
    sys = validate_system(arrays, m, labels)
    if normalize:
        scaled = []
        for A in sys.matrices:
            s = np.linalg.norm(A, 2)
            scaled.append(A / s if s > 0 else A)
        sys = validate_system(scaled, m, labels)
    cfg = _parse_run(doc.get("run", {}))
    for h in cfg.steps:
        if not h > 0:
            raise StepNonpositive(f"step must be positive, got {h}")
        if h > m:
            raise StepTooLarge(f"step {h} exceeds the dwell time {m}")
    return sys, cfg


def parse_system_file(path) -> tuple[SwitchingSystem, RunConfig]:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_system_dict(doc)


def system_to_dict(sys: SwitchingSystem, cfg: RunConfig | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "matrices": [A.tolist() for A in sys.matrices],
        "dwell_time": sys.dwell_time,
    }
    if sys.labels:
        doc["labels"] = list(sys.labels)
    if cfg is not None:
        run = {"steps": list(cfg.steps)}
        defaults = RunConfig()
        for key in ("beam", "depth", "enum_length", "max_iterations", "max_vertices", "positive_mode", "output"):
            if getattr(cfg, key) != getattr(defaults, key):
                run[key] = getattr(cfg, key)
        doc["run"] = run
    return doc


def _atomic_write(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


_NUMBER_LIST = re.compile(r"\[\s*([-+0-9.eE,\s]*?)\s*\]")


def _pretty(doc) -> str:
    """Indented JSON with every list of plain numbers kept on one line."""
    text = json.dumps(doc, indent=2)
    return _NUMBER_LIST.sub(lambda mt: "[" + ", ".join(x.strip() for x in mt.group(1).split(",") if x.strip()) + "]", text)


def write_system_file(sys: SwitchingSystem, path, cfg: RunConfig | None = None):
    _atomic_write(path, _pretty(system_to_dict(sys, cfg)) + "\n")


# -- sweeps -------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SweepRow:
    h: float
    report: BoundsReport | None = None
    certificate: MultinormCertificate | None = None
    graph: GraphSystem | None = None
    error: DwellCertError | None = None

    @property
    def ok(self) -> bool:
        return self.report is not None


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_sweep(sys: SwitchingSystem, cfg: RunConfig, threads: int | None = None) -> list[SweepRow]:
    """Analyse every step independently; rows come back ordered by h descending."""
    positive = is_metzler(sys) if cfg.positive_mode is None else cfg.positive_mode
    acfg = cfg.analysis_config(positive)

    def one(h: float) -> SweepRow:
        try:
            a = analyze(sys, h, acfg)
        except DwellCertError as exc:
            return SweepRow(h, error=exc)
        return SweepRow(h, a.report, a.certificate, a.graph)

    steps = sorted({float(h) for h in cfg.steps}, reverse=True)
    workers = min(threads or thread_count(), max(len(steps), 1))
    if workers <= 1:
        return [one(h) for h in steps]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(one, steps))


def _num(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def _cycle_cell(r: BoundsReport) -> str:
    return str(r.leading_cycle) if r.leading_cycle is not None else "uncertified"


def report_rows(rows: Sequence[SweepRow]) -> list[dict]:
    out = []
    for row in rows:
        if row.report is None:
            out.append({"h": row.h, "error": type(row.error).__name__, "message": str(row.error)})
            continue
        r = row.report
        out.append({
            "h": r.h,
            "lb": r.sigma_lower,
            "ub": r.sigma_upper if math.isfinite(r.sigma_upper) else None,
            "leading_cycle": _cycle_cell(r),
            "epsilon": r.epsilon,
            "verdict": r.verdict.value,
            "curvature": r.curvature,
        })
    return out


def format_rows(rows: Sequence[SweepRow], fmt: str = "text") -> str:
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "rows": report_rows(rows)}
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in rows:
            if row.report is None:
                w.writerow([_num(row.h), "", "", "", "", f"error:{type(row.error).__name__}"])
                continue
            r = row.report
            w.writerow([_num(r.h), _num(r.sigma_lower), _num(r.sigma_upper), _cycle_cell(r), _num(r.epsilon), r.verdict.value])
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"{'h':>8}  {'lb':>10}  {'ub':>10}  {'verdict':<12}  leading cycle"]
    for row in rows:
        if row.report is None:
            lines.append(f"{row.h:8.3f}  failed: {type(row.error).__name__}: {row.error}")
            continue
        r = row.report
        ub = f"{r.sigma_upper:10.4f}" if math.isfinite(r.sigma_upper) else f"{'n/a':>10}"
        note = ""
        if not math.isfinite(r.sigma_upper):
            note = f"  [upper bound unavailable: C = {r.curvature:.4g}, try a smaller h]"
        elif r.leading_cycle is None:
            note = f"  [eps = {r.epsilon:.3g}; candidate cycle possibly not leading]"
        lines.append(f"{r.h:8.3f}  {r.sigma_lower:10.4f}  {ub}  {r.verdict.value:<12}  {_cycle_cell(r)}{note}")
    return "\n".join(lines) + "\n"


# -- certificates -------------------------------------------------------------------

def certificate_to_dict(cert: MultinormCertificate, sys: SwitchingSystem) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "system": system_to_dict(sys),
        "h": cert.step,
        "dwell_time": cert.dwell_time,
        "rho_hat": cert.rho_hat,
        "epsilon": cert.epsilon,
        "status": cert.status.value,
        "iterations_used": cert.iterations_used,
        "variant": cert.multinorm.variant.value,
        "cycle_edges": list(cert.leading_cycle.edges),
        "components": [P.vertices.tolist() for P in cert.multinorm],
    }


def emit_certificate(cert: MultinormCertificate, sys: SwitchingSystem, path):
    _atomic_write(path, json.dumps(certificate_to_dict(cert, sys)) + "\n")


@dataclass(frozen=True)
class _StoredCycle:
    edges: tuple


def certificate_from_dict(doc: dict, g: GraphSystem) -> MultinormCertificate:
    try:
        if doc["schema_version"] != SCHEMA_VERSION:
            raise ParseError(f"unsupported certificate version {doc['schema_version']!r}")
        variant = Variant(doc["variant"])
        d = g.dim
        comps = []
        for V in doc["components"]:
            arr = np.array(V, dtype=float).reshape(-1, d)
            comps.append(PolytopeNorm(arr, variant))
        edges = tuple(int(e) for e in doc["cycle_edges"])
        try:
            cycle = make_cycle(g, edges)
        except (NumericalError, ValueError, IndexError):
            cycle = _StoredCycle(edges)
        return MultinormCertificate(
            rho_hat=float(doc["rho_hat"]),
            multinorm=Multinorm(tuple(comps)),
            epsilon=float(doc["epsilon"]),
            leading_cycle=cycle,
            iterations_used=int(doc["iterations_used"]),
            status=Status(doc["status"]),
            step=float(doc["h"]),
            dwell_time=float(doc["dwell_time"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed certificate: {exc}") from None


def load_certificate(path, system_file) -> tuple[MultinormCertificate, GraphSystem, SwitchingSystem]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or "system" not in doc:
        raise ParseError(f"{path}: not a certificate")
    sys, _ = parse_system_file(system_file)
    stored, _ = parse_system_dict(doc["system"])
    if not sys.same_as(stored):
        raise CertificateMismatch("certificate was issued for a different system")
    g = build_discretization(sys, float(doc["h"]))
    return certificate_from_dict(doc, g), g, sys


def load_and_verify(path, system_file) -> Verification:
    """Standalone audit: rebuild the graph from the system file and recheck."""
    cert, g, _ = load_certificate(path, system_file)
    return verify_certificate(g, cert)


# -- 2-D geometry -------------------------------------------------------------------

def convex_hull_2d(points) -> np.ndarray:
    """Counter-clockwise hull by the monotone chain; collinear points dropped."""
    pts = sorted({(float(x), float(y)) for x, y in np.asarray(points, dtype=float).reshape(-1, 2)})
    if len(pts) <= 2:
        return np.array(pts).reshape(-1, 2)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def unit_ball_polygon(P: PolytopeNorm) -> np.ndarray:
    V = P.vertices
    if P.positive:
        pts = [np.zeros(2)]
        for v in V:
            pts += [v, np.array([v[0], 0.0]), np.array([0.0, v[1]])]
        return convex_hull_2d(pts)
    return convex_hull_2d(np.vstack([V, -V]))


_COLORS = ("#1f4e9c", "#c0392b", "#1e8449", "#8e44ad", "#d68910", "#17a589")


def _svg(layers: list, size: int = 480) -> str:
    pts = np.vstack([poly for _, poly, _ in layers if len(poly)] or [np.zeros((1, 2))])
    r = float(np.abs(pts).max()) or 1.0
    scale = (size / 2 - 10) / r
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<line x1="0" y1="{size / 2}" x2="{size}" y2="{size / 2}" stroke="#bbb" stroke-width="0.5"/>',
        f'<line x1="{size / 2}" y1="0" x2="{size / 2}" y2="{size}" stroke="#bbb" stroke-width="0.5"/>',
    ]
    for name, poly, style in layers:
        coords = " ".join(f"{size / 2 + scale * x:.3f},{size / 2 - scale * y:.3f}" for x, y in poly)
        out.append(f'<g id="{name}"><polygon points="{coords}" fill="none" {style}/></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_polytopes_2d(cert: MultinormCertificate, g: GraphSystem, path, labels=None) -> dict:
    """Write component polygons and their edge images as SVG plus a JSON sidecar.

    Images use the operators rescaled by the certified growth, so each image
    lies inside its target polygon.  Returns the sidecar document.
    """
    if g.dim != 2:
        raise DimensionNotTwo(f"geometry export needs d = 2, got d = {g.dim}")
    path = Path(path)
    growth = (1.0 + cert.epsilon) * cert.rho_hat
    name = (lambda j: labels[j]) if labels else (lambda j: f"A{j + 1}")
    comps, images, layers = [], [], []
    for j, P in enumerate(cert.multinorm):
        poly = unit_ball_polygon(P)
        comps.append({"mode": j, "label": name(j), "vertices": P.vertices.tolist(), "polygon": poly.tolist()})
        color = _COLORS[j % len(_COLORS)]
        layers.append((f"P{j + 1}", poly, f'stroke="{color}" stroke-width="2.5" stroke-dasharray="8,4"'))
    for idx, e in enumerate(g.edges):
        P = cert.multinorm[e.source]
        if P.vertices.shape[0] == 0:
            continue
        scaled = e.operator / growth ** e.duration
        poly = unit_ball_polygon(PolytopeNorm(P.vertices @ scaled.T, P.variant))
        images.append({"edge": idx, "source": e.source, "target": e.target, "polygon": poly.tolist()})
        color = _COLORS[e.target % len(_COLORS)]
        layers.append((f"E{idx}", poly, f'stroke="{color}" stroke-width="1"'))
    doc = {
        "schema_version": SCHEMA_VERSION,
        "h": cert.step,
        "rho_hat": cert.rho_hat,
        "variant": cert.multinorm.variant.value,
        "components": comps,
        "images": images,
    }
    _atomic_write(path, _svg(layers))
    _atomic_write(path.with_suffix(".json"), json.dumps(doc, indent=2) + "\n")
    return doc
