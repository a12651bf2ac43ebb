"""Run reports: a byte-stable JSON document plus a human-readable rendering."""

from __future__ import annotations

import hashlib
import json

from .datapipe.beats import CLASS_NAMES
from .metrics import ConfusionMatrix, f1_per_class, macro_f1_abnormal
from .wakectl import StreamResult, wake_stats


def config_digest(config: dict) -> str:
    """sha256 over the canonical JSON encoding of a config mapping."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _classifier_section(cm: ConfusionMatrix) -> dict:
    per_class = {
        CLASS_NAMES[c]: f1_per_class(cm, c) for c in range(cm.n_classes)
    }
    return {
        "confusion": [[int(v) for v in row] for row in cm.counts],
        "per_class_f1": per_class,
        "macro_f1_abnormal": macro_f1_abnormal(cm),
        "accuracy": cm.accuracy(),
    }


def build_report(stream: StreamResult | None = None, energy_rows: list[dict] | None = None,
                 config: dict | None = None, seeds: dict | None = None) -> dict:
    """Assemble the run report.

    Any missing section marks the report partial instead of failing, so a
    front-end-only run or a pure energy sweep still reports cleanly.
    """
    config = config or {}
    report: dict = {
        "config": config,
        "config_digest": config_digest(config),
        "seeds": seeds or {},
        "partial": stream is None or energy_rows is None,
    }
    if stream is not None:
        stats = wake_stats(stream)
        report["front_end"] = _classifier_section(stream.front_confusion())
        report["system"] = _classifier_section(stream.system_confusion())
        report["wake"] = {
            "p_wake_abnormal": stats.p_wake_abnormal,
            "p_wake_normal": stats.p_wake_normal,
            "reasons_by_class": {
                CLASS_NAMES[c]: stats.reason_fractions[c] for c in stats.reason_fractions
            },
            "counts_by_class": {
                CLASS_NAMES[c]: stats.counts[c] for c in stats.counts
            },
            "backend_errors": stream.backend_errors,
        }
    if energy_rows is not None:
        report["energy"] = energy_rows
    return report


def dump_report(report: dict) -> str:
    """Canonical serialization: alphabetical keys, fixed indentation."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def save_report(path: str, report: dict) -> None:
    with open(path, "w") as fh:
        fh.write(dump_report(report))


def load_report(path: str) -> dict:
    with open(path, "r") as fh:
        return json.load(fh)


def _fmt(x) -> str:
    if x is None:
        return "--"
    return f"{x:.4f}"


def render_report(report: dict) -> str:
    """Small fixed-width table for terminals."""
    lines = []
    lines.append(f"config digest : {report.get('config_digest', '')[:16]}")
    lines.append(f"partial       : {report.get('partial')}")
    for section in ("front_end", "system"):
        if section not in report:
            continue
        sec = report[section]
        lines.append(f"[{section}] accuracy={_fmt(sec.get('accuracy'))} "
                     f"macro_f1_abnormal={_fmt(sec.get('macro_f1_abnormal'))}")
        lines.append("  confusion (rows true, cols pred):")
        for name, row in zip(CLASS_NAMES, sec["confusion"]):
            lines.append("    " + name + " " + " ".join(f"{v:6d}" for v in row))
    if "wake" in report:
        wake = report["wake"]
        lines.append(f"[wake] p(wake|abnormal)={_fmt(wake['p_wake_abnormal'])} "
                     f"p(wake|normal)={_fmt(wake['p_wake_normal'])}")
        for name, reasons in wake["reasons_by_class"].items():
            if reasons is None:
                lines.append(f"    {name}: no beats")
            else:
                mix = " ".join(f"{k}={v:.3f}" for k, v in sorted(reasons.items()))
                lines.append(f"    {name}: {mix}")
    if "energy" in report:
        lines.append("[energy]")
        for row in report["energy"]:
            lines.append("    " + " ".join(f"{k}={v:.6g}" for k, v in sorted(row.items())))
    return "\n".join(lines) + "\n"
