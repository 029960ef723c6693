"""Machine-readable analysis report: metrics, grouped load summaries and
hypothesis tests for a set of session bundles.

Reports are reproducible: the configuration is echoed and hashed into the
output, numbers serialize in shortest round-trip decimal form, group
order is deterministic, and the JSON and CSV encodings carry identical
numeric values.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

from . import metrics as metrics_mod
from . import stats as stats_mod
from .errors import (
    DegenerateInput,
    EmptyInput,
    EmptyTranscription,
    NonPositiveDuration,
    StatsError,
    ZeroVariance,
)
from .model import SessionRecord, validate_session
from .segmentation import LabeledLoadSample, aggregate, label_load_windows
from .spectral import AnalysisConfig, WindowFn, cognitive_load_series

#: Published grand means from the original five-participant study whose
#: methodology this toolkit reimplements. Context only: these numbers are
#: never computed by, nor comparable against, a synthetic run.
REFERENCE_CONTEXT = {
    "note": "published values from the original study; reference context "
            "only, never produced by this tool",
    "wpm_grand_means": {"A": 9.20, "B": 8.60, "C": 9.05},
    "keystrokes_saved_pct_means": {"A": 39.0018, "B": 35.4366, "C": 33.4694},
    "backspace_usage_means": {"A": 2.92, "B": 6.32, "C": 5.00},
    "beta_ratio_means": {"A": 0.0865, "B": 0.0860, "C": 0.0824},
}


@dataclass(frozen=True)
class ReportConfig:
    """Everything that influences the numbers in a report."""

    window_len: int = 1024
    hop: int = 512
    window_fn: WindowFn = WindowFn.HALF_COSINE
    detrend: bool = True
    label_threshold: float = 0.5
    timing_anchor: str = "shown"
    level: str = "sentence"
    include_training: bool = True
    ttest_variant: str = "student"

    def analysis_config(self) -> AnalysisConfig:
        return AnalysisConfig(window_len=self.window_len, hop=self.hop,
                              window_fn=self.window_fn, detrend=self.detrend)

    def to_dict(self) -> dict:
        return {
            "window_len": self.window_len,
            "hop": self.hop,
            "window_fn": self.window_fn.value,
            "detrend": self.detrend,
            "label_threshold": self.label_threshold,
            "timing_anchor": self.timing_anchor,
            "level": self.level,
            "include_training": self.include_training,
            "ttest_variant": self.ttest_variant,
        }

    def hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True,
                           separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _boxplot_dict(values: Sequence[float]) -> dict:
    b = stats_mod.boxplot_summary(values)
    return {
        "n": b.n,
        "mean": b.mean,
        "median": b.median,
        "q1": b.q1,
        "q3": b.q3,
        "whisker_low": b.whisker_low,
        "whisker_high": b.whisker_high,
        "outliers": list(b.outliers),
    }


def _group_section(groups: dict[tuple, list[float]], key_names: Sequence[str],
                   warnings: list[str]) -> list[dict]:
    out = []
    for gkey, values in groups.items():
        entry: dict = {name: key for name, key in zip(key_names, gkey)}
        try:
            entry["boxplot"] = _boxplot_dict(values)
        except EmptyInput:
            warnings.append(f"empty group {dict(zip(key_names, gkey))}")
            continue
        out.append(entry)
    return out


def analyze_session(rec: SessionRecord, config: ReportConfig,
                    ) -> tuple[dict, list[LabeledLoadSample]]:
    """Per-session report entry plus the labeled windows it contributes."""
    validation = rec.validation or validate_session(rec)
    series = cognitive_load_series(rec.eeg, config.analysis_config())
    samples = label_load_windows(series, rec.events, rec.meta,
                                 config.label_threshold)
    metrics_note = None
    try:
        typing = metrics_mod.session_metrics(rec, config.timing_anchor)
    except (EmptyTranscription, NonPositiveDuration) as exc:
        # e.g. a sentence whose keystrokes were all deleted again; the
        # session stays analyzable for load, only its metrics are absent
        typing = None
        metrics_note = str(exc)
    entry = {
        "participant": rec.meta.participant_id,
        "keyboard": rec.meta.keyboard,
        "session_index": rec.meta.session_index,
        "violations": [
            {"code": v.code.value, "message": v.message}
            for v in validation.violations
        ],
        "warnings": list(validation.warnings),
        "load": {
            "n_windows": len(series),
            "dropped_windows": series.dropped,
            "mean": float(series.loads.mean()) if len(series) else None,
            "min": float(series.loads.min()) if len(series) else None,
            "max": float(series.loads.max()) if len(series) else None,
        },
        "metrics": None if typing is None else {
            "mean_wpm": typing.mean_wpm,
            "mean_keystrokes_saved_pct": typing.mean_keystrokes_saved_pct,
            "mean_kspc": typing.mean_kspc,
            "mean_backspace_count": typing.mean_backspace_count,
            "total_backspace_count": typing.total_backspace_count,
            "sentences": [
                {
                    "index": m.index,
                    "transcribed_len": m.transcribed_len,
                    "duration_s": m.duration_s,
                    "wpm": m.wpm,
                    "keystrokes": m.keystrokes,
                    "keystrokes_saved_pct": m.keystrokes_saved_pct,
                    "kspc": m.kspc,
                    "backspace_count": m.backspace_count,
                }
                for m in typing.sentences
            ],
        },
    }
    if metrics_note is not None:
        entry["warnings"].append(f"metrics unavailable: {metrics_note}")
    return entry, samples


def _metric_anova(session_entries: Sequence[dict], metric_key: str,
                  warnings: list[str]) -> Optional[dict]:
    """One-way ANOVA over keyboards on participant-level metric means."""
    per_participant: dict[tuple[str, str], list[float]] = {}
    for entry in session_entries:
        if entry["metrics"] is None:
            continue
        key = (entry["keyboard"], entry["participant"])
        per_participant.setdefault(key, []).append(entry["metrics"][metric_key])
    groups: dict[str, list[float]] = {}
    for (keyboard, _participant), values in sorted(per_participant.items()):
        groups.setdefault(keyboard, []).append(sum(values) / len(values))
    if len(groups) < 2 or any(len(v) < 2 for v in groups.values()):
        warnings.append(f"anova on {metric_key} skipped: not enough groups")
        return None
    try:
        result = stats_mod.anova_oneway([groups[k] for k in sorted(groups)])
    except StatsError as exc:
        warnings.append(f"anova on {metric_key} failed: {exc}")
        return None
    return {"metric": metric_key, "groups": sorted(groups),
            **result.to_dict()}


def build_report(records: Sequence[SessionRecord], config: ReportConfig,
                 threads: int = 1) -> dict:
    """Assemble the full report for a set of sessions.

    Per-session analysis is independent and may run on ``threads``
    workers; entries are merged in (participant, keyboard, session_index)
    order afterwards, so the same inputs always produce the same bytes.
    """
    ordered = sorted(records, key=lambda r: (r.meta.participant_id,
                                             r.meta.keyboard,
                                             r.meta.session_index))
    if threads > 1 and len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            analyzed = list(pool.map(
                lambda r: analyze_session(r, config), ordered))
    else:
        analyzed = [analyze_session(r, config) for r in ordered]

    warnings: list[str] = []
    session_entries: list[dict] = []
    samples: list[LabeledLoadSample] = []
    for rec, (entry, rec_samples) in zip(ordered, analyzed):
        session_entries.append(entry)
        if config.include_training or rec.meta.session_index != 0:
            samples.extend(rec_samples)
        elif rec_samples:
            warnings.append(
                f"training session {rec.meta.participant_id}/"
                f"{rec.meta.keyboard} excluded from load groups")

    level = config.level
    groups_kb = aggregate(samples, level, ("keyboard",))
    groups_mode = aggregate(samples, level, ("keyboard", "mode"))
    groups_phase = aggregate(samples, level, ("keyboard", "phase"))

    tests: list[dict] = []
    for metric_key in ("mean_wpm", "mean_keystrokes_saved_pct",
                       "mean_backspace_count"):
        result = _metric_anova(session_entries, metric_key, warnings)
        if result is not None:
            tests.append(result)
    for kb_a, kb_b in combinations(sorted(k for (k,) in groups_kb), 2):
        a, b = groups_kb[(kb_a,)], groups_kb[(kb_b,)]
        try:
            result = stats_mod.ttest_two_sample(a, b, config.ttest_variant)
        except (DegenerateInput, ZeroVariance) as exc:
            warnings.append(f"t-test {kb_a} vs {kb_b} skipped: {exc}")
            continue
        tests.append({"metric": f"load_{level}", "groups": [kb_a, kb_b],
                      **result.to_dict()})

    return {
        "config": config.to_dict(),
        "config_hash": config.hash(),
        "sessions": session_entries,
        "load_groups": {
            "by_keyboard": _group_section(groups_kb, ("keyboard",), warnings),
            "by_keyboard_mode": _group_section(
                groups_mode, ("keyboard", "mode"), warnings),
            "by_keyboard_phase": _group_section(
                groups_phase, ("keyboard", "phase"), warnings),
        },
        "tests": tests,
        "not_reproduced": REFERENCE_CONTEXT,
        "warnings": warnings,
    }


def report_has_violations(report: dict) -> bool:
    return any(entry["violations"] for entry in report["sessions"])


# --- rendering ----------------------------------------------------------------

def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _flatten(prefix: str, value, rows: list[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], rows)
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _flatten(f"{prefix}[{i}]", item, rows)
    elif isinstance(value, bool) or value is None:
        rows.append((prefix, json.dumps(value)))
    elif isinstance(value, float):
        rows.append((prefix, repr(value)))
    else:
        rows.append((prefix, str(value)))


def render_csv(report: dict) -> str:
    """Flat ``path,value`` encoding carrying the same numbers as the JSON."""
    rows: list[tuple[str, str]] = []
    _flatten("", report, rows)
    buf = io.StringIO()
    buf.write("path,value\n")
    writer = csv.writer(buf, lineterminator="\n")
    for path, value in rows:
        writer.writerow([path, value])
    return buf.getvalue()
