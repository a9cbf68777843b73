"""Manifest-driven batch analysis and report assembly.

For every interaction pair, condition, and expression the driver:

1. parses both OpenFace CSVs and synchronizes them by tracker confidence
   (frames below the cutoff are dropped for both sides; the surviving runs
   act as hard boundaries for all windowed computation);
2. mines relevant intervals per member AU across the shift grid, median
   filters and extends each AU's selection, and intersects across AUs;
3. standardizes the expression signals over the kept frames and runs the
   Granger tests twice: once on the selected segments, once over the full
   kept span, so both columns of the report come from identical data;
4. counts the four-way outcomes into per-condition tables and runs the
   occurrence comparison (Wilcoxon + Benjamini-Hochberg) across conditions.

Cells that fail (degenerate fits, not enough samples) are recorded and
excluded from the table counts instead of aborting the batch; cells where no
correlated interval exists count as "none" (no co-activity means no causal
evidence).
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .au_features import (
    AURecording,
    AUBaseline,
    CONDITIONS,
    EXPRESSIONS,
    EXPRESSIONS_BY_NAME,
    ROLES,
    SyncedPair,
    au_activation,
    baseline_stats,
    confidence_sync,
    count_activations,
    expression_activation,
    parse_au_csv,
)
from .config import AnalysisConfig
from .errors import (
    ConfigError,
    EmptyOverlap,
    FormatError,
    InsufficientData,
    SingularDesign,
)
from .granger import Direction, GCTestResult, average_gc, gc_test, select_order
from .intervals import (
    Interval,
    IntervalSet,
    intersect_sets,
    longest_set,
    mine_shifted,
    postprocess,
)
from .stats import ComparisonRow, condition_comparison
from .timeseries import TimeSeries

log = logging.getLogger(__name__)

OUTCOME_KEYS = ("s_gc_r", "r_gc_s", "bidirectional", "none")

_OUTCOME_OF = {
    Direction.SENDER_CAUSES_RECEIVER: "s_gc_r",
    Direction.RECEIVER_CAUSES_SENDER: "r_gc_s",
    Direction.BIDIRECTIONAL: "bidirectional",
    Direction.NONE: "none",
}


@dataclass(frozen=True)
class ManifestRow:
    pair_id: str
    role: str
    condition: str
    path: Path


@dataclass(frozen=True)
class Manifest:
    """Index of recording files: one row per (pair, role, condition)."""

    rows: tuple[ManifestRow, ...]

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            if row.role not in ROLES:
                raise FormatError(f"manifest: unknown role {row.role!r}")
            if row.condition not in CONDITIONS:
                raise FormatError(f"manifest: unknown condition {row.condition!r}")
            key = (row.pair_id, row.role, row.condition)
            if key in seen:
                raise FormatError(f"manifest: duplicate entry {key}")
            seen.add(key)
        for pair_id, condition in {(r.pair_id, r.condition) for r in self.rows}:
            present = {r.role for r in self.rows if (r.pair_id, r.condition) == (pair_id, condition)}
            if present != set(ROLES):
                raise FormatError(
                    f"manifest: pair {pair_id!r} condition {condition!r} needs both roles"
                )

    @classmethod
    def load(cls, path) -> "Manifest":
        path = Path(path)
        rows = []
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"pair_id", "role", "condition", "path"}
            if reader.fieldnames is None or not required <= set(reader.fieldnames):
                raise FormatError(f"{path}: manifest needs columns {sorted(required)}")
            for rec in reader:
                csv_path = Path(rec["path"])
                if not csv_path.is_absolute():
                    csv_path = path.parent / csv_path
                rows.append(
                    ManifestRow(
                        rec["pair_id"].strip(),
                        rec["role"].strip(),
                        rec["condition"].strip(),
                        csv_path,
                    )
                )
        return cls(tuple(rows))

    def pair_ids(self) -> list[str]:
        return sorted({r.pair_id for r in self.rows})

    def conditions_of(self, pair_id: str) -> list[str]:
        return sorted({r.condition for r in self.rows if r.pair_id == pair_id})

    def lookup(self, pair_id: str, role: str, condition: str) -> ManifestRow | None:
        for r in self.rows:
            if (r.pair_id, r.role, r.condition) == (pair_id, role, condition):
                return r
        return None


@dataclass(frozen=True)
class MethodCounts:
    """Pair counts per outcome for one analysis method."""

    s_gc_r: int = 0
    r_gc_s: int = 0
    bidirectional: int = 0
    none: int = 0

    def total(self) -> int:
        return self.s_gc_r + self.r_gc_s + self.bidirectional + self.none

    def dominant(self) -> str:
        """Which unidirectional count leads; empty string on a tie."""
        if self.s_gc_r > self.r_gc_s:
            return "s_gc_r"
        if self.r_gc_s > self.s_gc_r:
            return "r_gc_s"
        return ""


@dataclass(frozen=True)
class ExpressionRow:
    expression: str
    full_span: MethodCounts
    interval_selected: MethodCounts


@dataclass(frozen=True)
class ConditionReport:
    """Per-expression outcome counts for one condition, both methods side by side."""

    condition: str
    rows: tuple[ExpressionRow, ...]

    def averages(self) -> dict[str, dict[str, float]]:
        """Average count per outcome across expressions, per method."""
        out: dict[str, dict[str, float]] = {}
        n = max(len(self.rows), 1)
        for method in ("full_span", "interval_selected"):
            agg = {k: 0 for k in OUTCOME_KEYS}
            for row in self.rows:
                counts = getattr(row, method)
                for k in OUTCOME_KEYS:
                    agg[k] += getattr(counts, k)
            out[method] = {k: agg[k] / n for k in OUTCOME_KEYS}
        return out


@dataclass(frozen=True)
class CellRecord:
    """Everything computed for one (pair, condition, expression) cell."""

    pair_id: str
    condition: str
    expression: str
    full_status: str  # ok | degenerate | insufficient | skipped
    sel_status: str  # ok | no_intervals | degenerate | insufficient | skipped
    full_result: GCTestResult | None
    sel_result: GCTestResult | None
    intervals: IntervalSet
    selected_frames: int
    kept_frames: int
    note: str = ""


@dataclass(frozen=True)
class PipelineResult:
    reports: tuple[ConditionReport, ...]
    cells: tuple[CellRecord, ...]
    occurrence: tuple[ComparisonRow, ...]
    config: AnalysisConfig


# ---------------------------------------------------------------------------
# per-cell analysis


def _kept_run_signals(pair: SyncedPair, expr, mode: str, au_id: int | None):
    """Standardized sender/receiver signal per kept run.

    Standardization uses the mean/std over all kept samples (population
    convention), then the series is cut at the confidence gaps, so every run
    is a contiguous TimeSeries in absolute frame coordinates.
    """
    if mode == "per_au":
        s_vals = pair.sender.intensities[au_id]
        r_vals = pair.receiver.intensities[au_id]
    else:
        s_vals = np.vstack(
            [pair.sender.intensities[a] for a in sorted(expr.au_ids)]
        ).mean(axis=0)
        r_vals = np.vstack(
            [pair.receiver.intensities[a] for a in sorted(expr.au_ids)]
        ).mean(axis=0)

    def norm(vals):
        std = float(np.std(vals))
        return (vals - float(np.mean(vals))) / (std if std > 1e-12 else 1.0)

    s_vals = norm(s_vals)
    r_vals = norm(r_vals)
    frames = pair.sender.frame_indices
    runs = []
    for iv in pair.kept_frames:
        sel = (frames >= iv.start) & (frames <= iv.end)
        runs.append(
            (
                TimeSeries(s_vals[sel], iv.start),
                TimeSeries(r_vals[sel], iv.start),
            )
        )
    return runs


def _mine_expression(
    runs_per_au: dict[int, list], params, span: tuple[int, int]
) -> tuple[dict[int, IntervalSet], IntervalSet]:
    """Per-AU mining over kept runs, postprocess per AU, intersect across AUs."""
    start, end = span
    per_au: dict[int, IntervalSet] = {}
    for au_id in sorted(runs_per_au):
        candidates: list[Interval] = []
        for xs, ys in runs_per_au[au_id]:
            if len(xs) < params.l_min:
                continue
            for iv in mine_shifted(xs, ys, params):
                candidates.append(iv)
        mined = longest_set(candidates)  # runs are disjoint; this just re-sorts
        per_au[au_id] = postprocess(mined, params, end - start + 1, start)
    if not per_au:
        return per_au, IntervalSet()
    return per_au, intersect_sets(list(per_au.values()))


def _segments_for(runs, selection: IntervalSet):
    """Aligned (x, y) value arrays for every selection interval, split at run gaps."""
    segs_x, segs_y, lengths = [], [], []
    for xs, ys in runs:
        run_iv = Interval(xs.start_frame, xs.end_frame)
        for iv in selection:
            lo, hi = max(iv.start, run_iv.start), min(iv.end, run_iv.end)
            if lo > hi:
                continue
            a = lo - xs.start_frame
            b = hi - xs.start_frame + 1
            segs_x.append(xs.values[a:b])
            segs_y.append(ys.values[a:b])
            lengths.append(b - a)
    return segs_x, segs_y, lengths


def _run_gc(segs_x, segs_y, lengths, config: AnalysisConfig) -> tuple[str, GCTestResult | None]:
    """One Granger analysis over the given segments; returns (status, result).

    Each segment is demeaned first: the autoregressions carry no intercept,
    and a selected interval sits on an elevated activation level, so leaving
    the segment mean in would let cross-lags soak up the constant and fake
    bidirectional causality.
    """
    segs_x = [s - s.mean() for s in map(np.asarray, segs_x)]
    segs_y = [s - s.mean() for s in map(np.asarray, segs_y)]
    if sum(max(n - 1, 0) for n in lengths) < 4:
        return "insufficient", None
    # largest order the data can support, capped by the configured maximum
    m_max = config.m_max
    while m_max > 1 and sum(max(n - m_max, 0) for n in lengths) <= 2 * m_max + 1:
        m_max -= 1
    if sum(max(n - m_max, 0) for n in lengths) <= 2 * m_max + 1:
        return "insufficient", None
    try:
        order = select_order(segs_x, segs_y, m_max, config.order_criterion)
        if config.gc_mode == "averaged":
            per, weights = [], []
            for sx, sy, ln in zip(segs_x, segs_y, lengths):
                if ln - order <= 2 * order + 1:
                    continue  # segment too short for its own F test
                try:
                    per.append(gc_test([sx], [sy], order, config.alpha))
                    weights.append(ln)
                except (SingularDesign, InsufficientData):
                    continue
            if not per:
                return "insufficient", None
            return "ok", average_gc(per, weights)
        return "ok", gc_test(segs_x, segs_y, order, config.alpha)
    except SingularDesign as exc:
        log.debug("degenerate fit: %s", exc)
        return "degenerate", None
    except InsufficientData as exc:
        log.debug("insufficient data: %s", exc)
        return "insufficient", None


def analyze_pair_condition(
    sender: AURecording,
    receiver: AURecording,
    config: AnalysisConfig,
    precomputed: dict[str, IntervalSet] | None = None,
) -> list[CellRecord]:
    """All expression cells for one pair in one condition.

    ``precomputed`` maps expression name to an already-selected interval set
    (for example from a previous ``intervals`` run); mining is skipped for
    those expressions.
    """
    pair_id = sender.participant_id.rsplit("-", 1)[0] or sender.participant_id
    condition = sender.condition
    params = config.interval_params()
    try:
        pair = confidence_sync(sender, receiver, config.confidence)
    except EmptyOverlap as exc:
        return [
            CellRecord(
                pair_id, condition, name, "skipped", "skipped", None, None,
                IntervalSet(), 0, 0, note=str(exc),
            )
            for name in config.expressions
        ]
    kept = pair.kept_frames.total_length()
    span = (int(pair.sender.frame_indices[0]), int(pair.sender.frame_indices[-1]))

    cells = []
    for name in config.expressions:
        expr = EXPRESSIONS_BY_NAME.get(name)
        if expr is None:
            raise ConfigError(f"unknown expression {name!r}")
        if not expr.available_in(sender.au_ids) or not expr.available_in(receiver.au_ids):
            cells.append(
                CellRecord(
                    pair_id, condition, name, "skipped", "skipped", None, None,
                    IntervalSet(), 0, kept, note="member AUs not present in recording",
                )
            )
            continue

        # interval mining always runs per AU pair
        runs_per_au = {
            au: _kept_run_signals(pair, expr, "per_au", au) for au in sorted(expr.au_ids)
        }
        if precomputed is not None and name in precomputed:
            selection = precomputed[name]
            per_au_sets = {au: selection for au in sorted(expr.au_ids)}
        else:
            per_au_sets, selection = _mine_expression(runs_per_au, params, span)

        if config.signal_mode == "per_au":
            cells.append(
                _per_au_cell(pair, expr, runs_per_au, per_au_sets, selection, config, pair_id, kept)
            )
            continue

        runs = _kept_run_signals(pair, expr, "expression_mean", None)
        full_status, full_result = _run_gc(
            [x.values for x, _ in runs],
            [y.values for _, y in runs],
            [len(x) for x, _ in runs],
            config,
        )
        if len(selection) == 0:
            sel_status, sel_result = "no_intervals", None
        else:
            sel_status, sel_result = _run_gc(*_segments_for(runs, selection), config)
        cells.append(
            CellRecord(
                pair_id,
                condition,
                name,
                full_status,
                sel_status,
                full_result,
                sel_result,
                selection,
                sum(iv.length for iv in selection),
                kept,
            )
        )
    return cells


def _majority(outcomes: list[Direction]) -> Direction:
    counts = {d: 0 for d in Direction}
    for o in outcomes:
        counts[o] += 1
    best = max(counts.values())
    leaders = [d for d in Direction if counts[d] == best]
    return leaders[0] if len(leaders) == 1 else Direction.NONE


def _per_au_cell(
    pair, expr, runs_per_au, per_au_sets, selection, config, pair_id, kept
) -> CellRecord:
    """Per-AU mode: test each member AU pair on its own intervals, majority vote."""
    full_out, sel_out = [], []
    any_full = any_sel = False
    for au in sorted(expr.au_ids):
        runs = runs_per_au[au]
        f_status, f_result = _run_gc(
            [x.values for x, _ in runs],
            [y.values for _, y in runs],
            [len(x) for x, _ in runs],
            config,
        )
        au_sel = per_au_sets[au]
        if len(au_sel) == 0:
            s_status, s_result = "no_intervals", None
        else:
            s_status, s_result = _run_gc(*_segments_for(runs, au_sel), config)
        if f_status == "ok":
            any_full = True
            full_out.append(f_result.outcome)
        if s_status == "ok":
            any_sel = True
            sel_out.append(s_result.outcome)
        elif s_status == "no_intervals":
            any_sel = True
            sel_out.append(Direction.NONE)
    note = (
        f"per_au majority over {len(full_out)} full / {len(sel_out)} selected AU tests"
    )
    full_status = "ok" if any_full else "degenerate"
    sel_status = "ok" if any_sel else "degenerate"
    mk = lambda outcome: GCTestResult(
        float("nan"), float("nan"), float("nan"), float("nan"),
        config.alpha, 0, 0, outcome,
    )
    return CellRecord(
        pair_id,
        pair.sender.condition,
        expr.name,
        full_status,
        sel_status,
        mk(_majority(full_out)) if any_full else None,
        mk(_majority(sel_out)) if any_sel else None,
        selection,
        sum(iv.length for iv in selection),
        kept,
        note=note,
    )


# ---------------------------------------------------------------------------
# batch driver


def _cell_task(args) -> list[CellRecord]:
    sender, receiver, config, precomputed = args
    return analyze_pair_condition(sender, receiver, config, precomputed)


def run_pipeline(
    manifest: Manifest,
    config: AnalysisConfig,
    precomputed_intervals: dict[tuple[str, str, str], IntervalSet] | None = None,
) -> PipelineResult:
    """Execute the full batch and assemble the report.

    ``precomputed_intervals`` maps (pair_id, condition, expression) to a
    ready-made interval selection, bypassing the mining stage for those cells.
    """
    if not manifest.rows:
        log.warning("empty manifest: nothing to analyze")
        return PipelineResult((), (), (), config)

    recordings: dict[tuple[str, str, str], AURecording] = {}
    for row in manifest.rows:
        recordings[(row.pair_id, row.role, row.condition)] = parse_au_csv(
            row.path, f"{row.pair_id}-{row.role}", row.condition, row.role
        )

    # per-participant baselines across available conditions (for occurrence counts)
    baselines: dict[tuple[str, str], AUBaseline] = {}
    for pair_id in manifest.pair_ids():
        for role in ROLES:
            recs = [
                recordings[(pair_id, role, cond)]
                for cond in manifest.conditions_of(pair_id)
                if (pair_id, role, cond) in recordings
            ]
            if recs:
                base = baseline_stats(recs)
                if not base.complete:
                    log.warning(
                        "%s-%s: baseline pooled over %d condition(s) only",
                        pair_id, role, base.n_conditions,
                    )
                baselines[(pair_id, role)] = base

    occurrence = _occurrence_rows(manifest, recordings, baselines, config)

    tasks = []
    for pair_id in manifest.pair_ids():
        for condition in manifest.conditions_of(pair_id):
            cell_pre = None
            if precomputed_intervals is not None:
                cell_pre = {
                    expr: ivs
                    for (p, c, expr), ivs in precomputed_intervals.items()
                    if (p, c) == (pair_id, condition)
                }
            tasks.append(
                (
                    recordings[(pair_id, "sender", condition)],
                    recordings[(pair_id, "receiver", condition)],
                    config,
                    cell_pre,
                )
            )
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            per_task = list(pool.map(_cell_task, tasks))
    else:
        per_task = [_cell_task(t) for t in tasks]
    cells = tuple(cell for group in per_task for cell in group)

    reports = _assemble_reports(cells)
    return PipelineResult(reports, cells, occurrence, config)


def _occurrence_rows(manifest, recordings, baselines, config) -> tuple[ComparisonRow, ...]:
    """Normalized activation counts per participant, then Wilcoxon + BH."""
    computable = [
        e for e in EXPRESSIONS
        if all(e.available_in(rec.au_ids) for rec in recordings.values())
    ]
    raw: dict[str, dict[str, dict[str, float]]] = {}
    for (pair_id, role, cond), rec in sorted(recordings.items()):
        base = baselines[(pair_id, role)]
        masks = au_activation(rec, base, config.activation_factor)
        participant = f"{pair_id}-{role}"
        for expr in computable:
            mask = expression_activation(masks, expr)
            raw.setdefault(participant, {}).setdefault(cond, {})[expr.name] = (
                count_activations(mask, rec.n_frames)
            )
    # cohort-level normalization by the per-expression maximum
    max_count: dict[str, float] = {}
    for per in raw.values():
        for cond in per.values():
            for name, v in cond.items():
                max_count[name] = max(max_count.get(name, 0.0), v)
    for per in raw.values():
        for cond in per.values():
            for name in cond:
                if max_count[name] > 0:
                    cond[name] = cond[name] / max_count[name]
    if len(raw) < 2:
        return ()
    return tuple(condition_comparison(raw, q=config.fdr_q))


def _assemble_reports(cells) -> tuple[ConditionReport, ...]:
    conditions = sorted({c.condition for c in cells})
    reports = []
    for condition in conditions:
        expressions = sorted({c.expression for c in cells if c.condition == condition})
        rows = []
        for expression in expressions:
            sub = [c for c in cells if (c.condition, c.expression) == (condition, expression)]
            full = {k: 0 for k in OUTCOME_KEYS}
            sel = {k: 0 for k in OUTCOME_KEYS}
            for c in sub:
                if c.full_status == "ok":
                    full[_OUTCOME_OF[c.full_result.outcome]] += 1
                if c.sel_status == "ok":
                    sel[_OUTCOME_OF[c.sel_result.outcome]] += 1
                elif c.sel_status == "no_intervals":
                    sel["none"] += 1
            rows.append(
                ExpressionRow(expression, MethodCounts(**full), MethodCounts(**sel))
            )
        reports.append(ConditionReport(condition, tuple(rows)))
    return tuple(reports)


# ---------------------------------------------------------------------------
# serialization


def _gc_dict(r: GCTestResult | None):
    if r is None:
        return None
    d = asdict(r)
    d["outcome"] = r.outcome.value
    return d


def _gc_from_dict(d) -> GCTestResult | None:
    if d is None:
        return None
    d = dict(d)
    d["outcome"] = Direction(d["outcome"])
    return GCTestResult(**d)


def report_to_dict(result: PipelineResult) -> dict:
    return {
        "config": {
            k: list(v) if isinstance(v, tuple) else v
            for k, v in asdict(result.config).items()
        },
        "conditions": [
            {
                "condition": rep.condition,
                "rows": [
                    {
                        "expression": row.expression,
                        "full_span": asdict(row.full_span),
                        "interval_selected": asdict(row.interval_selected),
                    }
                    for row in rep.rows
                ],
                "average": rep.averages(),
            }
            for rep in result.reports
        ],
        "occurrence": [asdict(r) for r in result.occurrence],
    }


def report_from_dict(data: dict) -> tuple[tuple[ConditionReport, ...], tuple[ComparisonRow, ...]]:
    reports = tuple(
        ConditionReport(
            entry["condition"],
            tuple(
                ExpressionRow(
                    row["expression"],
                    MethodCounts(**row["full_span"]),
                    MethodCounts(**row["interval_selected"]),
                )
                for row in entry["rows"]
            ),
        )
        for entry in data["conditions"]
    )
    occurrence = tuple(ComparisonRow(**r) for r in data["occurrence"])
    return reports, occurrence


def emit_report(result: PipelineResult, out_dir, formats=("csv", "json")) -> list[Path]:
    """Write report files; returns the paths written.

    ``report.json`` round-trips the full report; ``report.csv`` mirrors the
    per-condition tables with a dominant-direction flag per method;
    ``occurrence.csv`` is the Wilcoxon/BH table; ``results.jsonl`` carries one
    record per analyzed cell; ``intervals/`` holds the selected interval sets.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    if "json" in formats:
        path = out_dir / "report.json"
        path.write_text(json.dumps(report_to_dict(result), indent=2, sort_keys=True) + "\n")
        written.append(path)

    if "csv" in formats:
        path = out_dir / "report.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["condition", "expression"]
            for method in ("full_span", "interval_selected"):
                header += [f"{method}_{k}" for k in OUTCOME_KEYS] + [f"{method}_dominant"]
            writer.writerow(header)
            for rep in result.reports:
                for row in rep.rows:
                    record = [rep.condition, row.expression]
                    for counts in (row.full_span, row.interval_selected):
                        record += [getattr(counts, k) for k in OUTCOME_KEYS]
                        record.append(counts.dominant())
                    writer.writerow(record)
                avg = rep.averages()
                record = [rep.condition, "average"]
                for method in ("full_span", "interval_selected"):
                    vals = avg[method]
                    record += [repr(vals[k]) for k in OUTCOME_KEYS]
                    dominant = (
                        "s_gc_r"
                        if vals["s_gc_r"] > vals["r_gc_s"]
                        else "r_gc_s" if vals["r_gc_s"] > vals["s_gc_r"] else ""
                    )
                    record.append(dominant)
                writer.writerow(record)
        written.append(path)

        occ = out_dir / "occurrence.csv"
        with occ.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["expression", "condition_a", "condition_b", "p_value", "w_statistic",
                 "significant_after_bh"]
            )
            for row in result.occurrence:
                writer.writerow(
                    [row.expression, row.condition_a, row.condition_b,
                     repr(row.p_value), repr(row.w_statistic), row.significant_after_bh]
                )
        written.append(occ)

    results_path = out_dir / "results.jsonl"
    with results_path.open("w") as fh:
        for c in result.cells:
            fh.write(
                json.dumps(
                    {
                        "pair_id": c.pair_id,
                        "condition": c.condition,
                        "expression": c.expression,
                        "full_status": c.full_status,
                        "sel_status": c.sel_status,
                        "full_result": _gc_dict(c.full_result),
                        "sel_result": _gc_dict(c.sel_result),
                        "selected_frames": c.selected_frames,
                        "kept_frames": c.kept_frames,
                        "intervals": [[iv.start, iv.end, iv.shift] for iv in c.intervals],
                        "note": c.note,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    written.append(results_path)

    ivdir = out_dir / "intervals"
    ivdir.mkdir(exist_ok=True)
    for c in result.cells:
        p = ivdir / f"{c.pair_id}_{c.condition}_{c.expression}.tsv"
        p.write_text(c.intervals.to_tsv())
        written.append(p)
    return written
