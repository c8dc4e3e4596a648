"""End-to-end analysis at one discretisation step."""

from __future__ import annotations

from dataclasses import dataclass, field

from .bounds import BoundsReport, lyapunov_bounds
from .cycles import (
    DEFAULT_BEAM,
    DEFAULT_DEPTH,
    DEFAULT_ENUM_CAP,
    DEFAULT_ENUM_LENGTH,
    WIDE_BEAM,
    WIDE_DEPTH,
    find_leading_cycle,
)
from .ipa import IpaConfig, MultinormCertificate, run_ipa
from .system import GraphSystem, SwitchingSystem, build_discretization


@dataclass(frozen=True)
class SearchConfig:
    beam: int = DEFAULT_BEAM
    depth: int = DEFAULT_DEPTH
    enum_length: int = DEFAULT_ENUM_LENGTH
    enum_cap: int = DEFAULT_ENUM_CAP
    wide_beam: int = WIDE_BEAM
    wide_depth: int = WIDE_DEPTH


@dataclass(frozen=True, eq=False)
class Analysis:
    graph: GraphSystem
    certificate: MultinormCertificate
    report: BoundsReport


@dataclass(frozen=True)
class AnalysisConfig:
    search: SearchConfig = field(default_factory=SearchConfig)
    ipa: IpaConfig = field(default_factory=IpaConfig)


def analyze(sys: SwitchingSystem, h: float, config: AnalysisConfig | None = None) -> Analysis:
    cfg = config or AnalysisConfig()
    g = build_discretization(sys, h)
    s = cfg.search
    cycle = find_leading_cycle(g, s.enum_length, s.beam, s.depth, s.enum_cap, s.wide_beam, s.wide_depth)
    cert = run_ipa(g, cycle, cfg.ipa)
    return Analysis(g, cert, lyapunov_bounds(cert, sys, h))
