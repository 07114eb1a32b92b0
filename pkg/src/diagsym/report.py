"""CSV ingestion, analysis orchestration and report rendering."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from . import divergence as dv
from .errors import ConfigError, ParseError, TableError
from .fit import FittedModel, ModelId, fit, fit_dps
from .inference import (
    PartitionReport,
    StatKind,
    TestResult,
    build_design_matrices,
    g2,
    partition,
    wald,
)
from .table import SquareTable, new_table

__all__ = [
    "SCHEMA_VERSION",
    "AnalysisConfig",
    "ModelReport",
    "AnalysisResult",
    "parse_csv",
    "read_csv",
    "run_analysis",
    "render",
    "result_to_dict",
    "result_from_dict",
    "result_from_json",
]

SCHEMA_VERSION = 1

MODEL_ORDER = (ModelId.S, ModelId.DPS, ModelId.DGS, ModelId.CS, ModelId.GS)
FAMILY_ORDER = ("kl", "rkl", "pearson", "power")
WALD_MODELS = (ModelId.S, ModelId.DPS, ModelId.DGS)
STATISTICS = ("g2", "wald", "both")
FORMATS = ("text", "json")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _number(text: str, row: int, col: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"row {row}, column {col}: {text!r} is not a number") from None
    if not math.isfinite(value):
        raise ParseError(f"row {row}, column {col}: {text!r} is not a finite number")
    if value < 0:
        raise ParseError(f"row {row}, column {col}: negative count {text}")
    return value


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def parse_csv(stream: TextIO | str) -> SquareTable:
    """Read a square table from CSV text.

    Two layouts are accepted: ``r`` rows of ``r`` numbers, or a header
    row of column labels (optionally preceded by an empty corner cell)
    followed by ``r`` rows that each start with a row label.  Column
    labels become the table labels.  Blank lines are skipped.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    rows = [
        (lineno, [cell.strip() for cell in fields])
        for lineno, fields in enumerate(csv.reader(stream), start=1)
        if any(cell.strip() for cell in fields)
    ]
    if not rows:
        raise ParseError("input contains no data rows")

    first_line, first = rows[0]
    labels = None
    if not all(_is_number(c) for c in first):
        if len(rows) < 2:
            raise ParseError(f"row {first_line}: header row is not followed by data")
        width = len(rows[1][1])
        r = width - 1
        if len(first) == r + 1:
            first = first[1:]
        if len(first) != r or r < 1:
            raise ParseError(
                f"row {first_line}: header has {len(first)} labels but row "
                f"{rows[1][0]} has {width} fields"
            )
        labels = first
        rows = rows[1:]
        skip = 1
    else:
        r = len(first)
        skip = 0

    data = []
    for lineno, fields in rows:
        if len(fields) != r + skip:
            raise ParseError(
                f"row {lineno}: expected {r + skip} fields, found {len(fields)}"
            )
        data.append(
            [_number(c, lineno, col) for col, c in enumerate(fields[skip:], start=skip + 1)]
        )
    if len(data) != r:
        raise ParseError(f"expected {r} data rows for a {r}x{r} table, found {len(data)}")
    try:
        return new_table(np.array(data, dtype=float), labels)
    except TableError as exc:
        raise ParseError(str(exc)) from exc


def read_csv(path: str) -> SquareTable:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_csv(fh)


# ---------------------------------------------------------------------------
# Configuration and results
# ---------------------------------------------------------------------------


def _parse_models(models) -> tuple[ModelId, ...]:
    if isinstance(models, str):
        models = [m for m in models.split(",") if m.strip()]
    wanted = set()
    for m in models:
        m = str(m).strip().upper()
        if m == "ALL":
            wanted.update(MODEL_ORDER)
            continue
        try:
            wanted.add(ModelId(m))
        except ValueError:
            raise ConfigError(f"unknown model {m!r}") from None
    return tuple(m for m in MODEL_ORDER if m in wanted)


def _parse_families(families) -> tuple[str, ...]:
    if isinstance(families, str):
        families = [f for f in families.split(",") if f.strip()]
    wanted = {str(f).strip().lower() for f in families}
    unknown = wanted - set(FAMILY_ORDER)
    if unknown:
        raise ConfigError(f"unknown divergence families {sorted(unknown)}")
    return tuple(f for f in FAMILY_ORDER if f in wanted)


@dataclass(frozen=True)
class AnalysisConfig:
    models: tuple[ModelId, ...] = MODEL_ORDER
    statistic: str = "both"
    families: tuple[str, ...] = ("kl",)
    lam: float | None = None
    smoothing: float | None = None
    output_format: str = "text"
    tolerance: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "models", _parse_models(self.models))
        object.__setattr__(self, "families", _parse_families(self.families))
        if self.statistic not in STATISTICS:
            raise ConfigError(f"statistic must be one of {STATISTICS}, got {self.statistic!r}")
        if self.output_format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.output_format!r}")
        if ("power" in self.families) != (self.lam is not None):
            raise ConfigError("lambda is required exactly when the power family is selected")
        if self.lam is not None:
            if not math.isfinite(self.lam) or self.lam in (0.0, -1.0):
                raise ConfigError(f"lambda must be finite and not 0 or -1, got {self.lam!r}")
        if self.smoothing is not None and not self.smoothing > 0:
            raise ConfigError(f"smoothing constant must be positive, got {self.smoothing!r}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance!r}")

    @property
    def kinds(self) -> tuple[StatKind, ...]:
        return {
            "g2": (StatKind.G2,),
            "wald": (StatKind.WALD,),
            "both": (StatKind.G2, StatKind.WALD),
        }[self.statistic]

    def divergence_families(self) -> tuple[dv.DivergenceFamily, ...]:
        return tuple(
            dv.DivergenceFamily(f, self.lam if f == "power" else None) for f in self.families
        )


@dataclass(frozen=True, eq=False)
class ModelReport:
    fit: FittedModel
    tests: tuple[TestResult, ...]


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    table: SquareTable
    config: AnalysisConfig
    models: tuple[ModelReport, ...]
    partitions: dict[StatKind, PartitionReport] = field(default_factory=dict)
    parameters: tuple[dv.DivergenceParameters, ...] = ()
    warnings: tuple[str, ...] = ()

    def model(self, model: ModelId | str) -> ModelReport:
        model = ModelId(model)
        for m in self.models:
            if m.fit.model is model:
                return m
        raise KeyError(str(model))

    def test(self, model: ModelId | str, kind: StatKind | str) -> TestResult:
        kind = StatKind(kind)
        for t in self.model(model).tests:
            if t.kind is kind:
                return t
        raise KeyError(f"{model}/{kind}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AnalysisResult):
            return NotImplemented
        return result_to_dict(self) == result_to_dict(other)


def run_analysis(table: SquareTable, config: AnalysisConfig | None = None) -> AnalysisResult:
    """Fit the requested models and compute the requested statistics.

    Smoothing, when configured, is added to every cell before anything
    else.  The partition report is produced for each statistic whenever
    S, DPS and DGS are all requested.
    """
    config = config or AnalysisConfig()
    if config.smoothing is not None:
        table = new_table(table.counts + config.smoothing, table.labels)
    notes: list[str] = []
    design = None
    if StatKind.WALD in config.kinds and any(m in WALD_MODELS for m in config.models):
        design = build_design_matrices(table.r)

    reports = []
    for model in config.models:
        fitted = fit(table, model)
        notes.extend(fitted.warnings)
        tests = []
        for kind in config.kinds:
            if kind is StatKind.G2:
                tests.append(g2(table, fitted))
            elif model in WALD_MODELS:
                tests.append(wald(table, model, design))
        reports.append(ModelReport(fitted, tuple(tests)))

    skipped = [str(m) for m in config.models if m not in WALD_MODELS]
    if StatKind.WALD in config.kinds and skipped:
        notes.append(f"Wald statistic is not defined for {', '.join(skipped)}; skipped")

    partitions = {}
    if all(m in config.models for m in WALD_MODELS):
        for kind in config.kinds:
            partitions[kind] = partition(table, kind, design)

    parameters = ()
    if ModelId.DPS in config.models:
        odds = next(r.fit for r in reports if r.fit.model is ModelId.DPS).dps_odds
        parameters = tuple(dv.dps_parameters(odds, fam) for fam in config.divergence_families())

    return AnalysisResult(
        table=table,
        config=config,
        models=tuple(reports),
        partitions=partitions,
        parameters=parameters,
        warnings=tuple(notes),
    )


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _enc(x: float):
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _dec(x) -> float:
    if x is None:
        return math.nan
    return float(x)


def _enc_array(a: np.ndarray):
    a = np.asarray(a)
    if a.ndim == 1:
        return [_enc(v) for v in a]
    return [_enc_array(row) for row in a]


def _dec_array(a) -> np.ndarray:
    def walk(v):
        return [walk(x) for x in v] if isinstance(v, list) else _dec(v)

    arr = np.array(walk(a), dtype=float)
    arr.setflags(write=False)
    return arr


def _test_to_dict(t: TestResult) -> dict:
    return {
        "model": str(t.model),
        "kind": str(t.kind),
        "value": _enc(t.value),
        "df": t.df,
        "p_value": _enc(t.p_value),
    }


def _test_from_dict(d: dict) -> TestResult:
    return TestResult(
        ModelId(d["model"]), StatKind(d["kind"]), _dec(d["value"]), int(d["df"]), _dec(d["p_value"])
    )


def result_to_dict(result: AnalysisResult) -> dict:
    cfg = result.config
    return {
        "schema_version": SCHEMA_VERSION,
        "table": {
            "r": result.table.r,
            "n": _enc(result.table.n),
            "labels": list(result.table.labels),
            "counts": _enc_array(result.table.counts),
        },
        "config": {
            "models": [str(m) for m in cfg.models],
            "statistic": cfg.statistic,
            "families": list(cfg.families),
            "lambda": cfg.lam,
            "smoothing": cfg.smoothing,
            "format": cfg.output_format,
            "tolerance": cfg.tolerance,
        },
        "models": [
            {
                "model": str(m.fit.model),
                "df": m.fit.df,
                "fitted": _enc_array(m.fit.fitted),
                "dps_odds": None if m.fit.dps_odds is None else _enc_array(m.fit.dps_odds),
                "warnings": list(m.fit.warnings),
                "tests": [_test_to_dict(t) for t in m.tests],
            }
            for m in result.models
        ],
        "partitions": [
            {
                "kind": str(kind),
                "s": _test_to_dict(p.s),
                "dps": _test_to_dict(p.dps),
                "dgs": _test_to_dict(p.dgs),
                "residual": _enc(p.residual),
                "df_check": p.df_check,
                "additive": p.additive(cfg.tolerance),
            }
            for kind, p in result.partitions.items()
        ],
        "parameters": [
            {"family": p.family.tag, "lambda": p.family.lam, "values": _enc_array(p.values)}
            for p in result.parameters
        ],
        "warnings": list(result.warnings),
    }


def result_from_dict(d: dict) -> AnalysisResult:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {d.get('schema_version')!r}")
    tab = d["table"]
    counts = _dec_array(tab["counts"])
    table = SquareTable(counts, tuple(tab["labels"]))
    c = d["config"]
    config = AnalysisConfig(
        models=tuple(c["models"]),
        statistic=c["statistic"],
        families=tuple(c["families"]),
        lam=c["lambda"],
        smoothing=c["smoothing"],
        output_format=c["format"],
        tolerance=c["tolerance"],
    )
    models = []
    for m in d["models"]:
        fitted = FittedModel(
            model=ModelId(m["model"]),
            fitted=_dec_array(m["fitted"]),
            df=int(m["df"]),
            dps_odds=None if m["dps_odds"] is None else _dec_array(m["dps_odds"]),
            warnings=tuple(m["warnings"]),
        )
        models.append(ModelReport(fitted, tuple(_test_from_dict(t) for t in m["tests"])))
    partitions = {
        StatKind(p["kind"]): PartitionReport(
            _test_from_dict(p["s"]),
            _test_from_dict(p["dps"]),
            _test_from_dict(p["dgs"]),
            _dec(p["residual"]),
            bool(p["df_check"]),
        )
        for p in d["partitions"]
    }
    parameters = tuple(
        dv.DivergenceParameters(dv.DivergenceFamily(p["family"], p["lambda"]), _dec_array(p["values"]))
        for p in d["parameters"]
    )
    return AnalysisResult(table, config, tuple(models), partitions, parameters, tuple(d["warnings"]))


def result_from_json(text: str) -> AnalysisResult:
    return result_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Text
# ---------------------------------------------------------------------------


def format_p(p: float) -> str:
    if math.isnan(p):
        return "NA"
    if p < 1e-4:
        return "<0.0001"
    return f"{p:.4f}"


def _num(x: float, spec: str = ".2f") -> str:
    if math.isnan(x):
        return "NA"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, spec)


def _count(x: float) -> str:
    return f"{x:g}" if float(x).is_integer() else f"{x:.2f}"


def _stat_table(result: AnalysisResult, kind: StatKind) -> list[str]:
    rows = [
        (str(m.fit.model), t)
        for m in result.models
        for t in m.tests
        if t.kind is kind
    ]
    if not rows:
        return []
    label = "G2" if kind is StatKind.G2 else "W"
    lines = [f"Goodness of fit ({kind})", f"{'Model':<6}{'df':>4}{label:>10}{'p-value':>10}"]
    for name, t in rows:
        lines.append(f"{name:<6}{t.df:>4}{_num(t.value):>10}{format_p(t.p_value):>10}")
    return lines + [""]


def _partition_lines(result: AnalysisResult) -> list[str]:
    lines = []
    for kind, p in result.partitions.items():
        ok = "additive" if p.additive(result.config.tolerance) else "NOT additive"
        lines.append(
            f"Partition ({kind}): S = DPS + DGS: "
            f"{_num(p.s.value)} = {_num(p.dps.value)} + {_num(p.dgs.value)}, "
            f"residual {p.residual:.3g} [{ok}]; "
            f"df {p.s.df} = {p.dps.df} + {p.dgs.df} [{'ok' if p.df_check else 'mismatch'}]"
        )
    return lines + [""] if lines else []


def _fitted_lines(result: AnalysisResult) -> list[str]:
    if not result.models:
        return []
    labels = result.table.labels
    counts = result.table.counts
    width = max(10, max(len(s) for s in labels) + 2)
    head = " " * width + "".join(f"{s:>{width}}" for s in labels)
    lines = ["Observed counts with fitted values in parentheses", head]
    for i, name in enumerate(labels):
        lines.append(f"{name:<{width}}" + "".join(f"{_count(v):>{width}}" for v in counts[i]))
        for m in result.models:
            cells = "".join(f"{'(' + _num(v) + ')':>{width}}" for v in m.fit.fitted[i])
            lines.append(" " * width + cells + f"  {m.fit.model}")
    return lines + [""]


def _parameter_lines(result: AnalysisResult) -> list[str]:
    if not result.parameters:
        return []
    r = result.table.r
    head = f"{'family':<12}" + "".join(f"{'k=' + str(k):>10}" for k in range(1, r))
    lines = ["Diagonal parameters under DPS", head]
    for p in result.parameters:
        lines.append(f"{p.family.name:<12}" + "".join(f"{_num(v):>10}" for v in p.values))
    odds = result.model(ModelId.DPS).fit.dps_odds
    if np.all(odds < 1):
        lines.append("All d_k < 1: the row variable is stochastically higher than the column variable.")
    elif np.all(odds > 1):
        lines.append("All d_k > 1: the column variable is stochastically higher than the row variable.")
    return lines + [""]


def render(result: AnalysisResult, fmt: str | None = None) -> str:
    """Render as ``text`` (fixed-width tables, 2/4 decimals) or ``json`` (full precision)."""
    fmt = fmt or result.config.output_format
    if fmt == "json":
        return json.dumps(result_to_dict(result), indent=2) + "\n"
    if fmt != "text":
        raise ConfigError(f"unknown format {fmt!r}")
    t = result.table
    lines = [f"Square table: r = {t.r}, n = {_count(t.n)}"]
    if result.config.smoothing is not None:
        lines.append(f"Smoothing: {result.config.smoothing:g} added to every cell")
    lines.append("")
    for kind in result.config.kinds:
        lines += _stat_table(result, kind)
    lines += _partition_lines(result)
    lines += _fitted_lines(result)
    lines += _parameter_lines(result)
    if result.warnings:
        lines.append("Notes")
        lines += [f"  - {w}" for w in result.warnings]
        lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"
