"""Result tables: markdown for humans, CSV for machines.

Markdown prints metrics to two decimals; the CSV mirrors it cell for cell
at full stored precision (repr round-trip), so parsing the CSV back
recovers every metric exactly.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

from .errors import EmptyReportError
from .metrics import EvalReport
from .review import AgreementReport
from .corpus import DistributionReport
from .metrics import DISPLAY_NAMES

# Fixed row order used by the result tables.
_ROW_ORDER = ["IRONY", "NEGATIVE", "NEUTRAL", "POSITIVE", "NOT IRONY"]

CSV_COLUMNS = ("model", "category", "precision", "recall", "f1", "accuracy")


def _ordered_rows(report: EvalReport):
    return sorted(report.per_class, key=lambda r: _ROW_ORDER.index(r.label))


def _table_rows(model: str, report: EvalReport) -> list[dict]:
    rows = []
    for c in _ordered_rows(report):
        rows.append(
            {
                "model": model,
                "category": c.label,
                "precision": c.precision,
                "recall": c.recall,
                "f1": c.f1,
                "accuracy": None,
            }
        )
    rows.append(
        {
            "model": model,
            "category": report.aggregate_row_label,
            "precision": report.aggregate_precision,
            "recall": report.aggregate_recall,
            "f1": report.aggregate_f1,
            "accuracy": report.accuracy,
        }
    )
    return rows


def render_markdown(reports: Sequence[tuple[str, EvalReport]]) -> str:
    """One table block per model: per-class rows, then W. AVG/AVG with
    the accuracy column filled on the aggregate row."""
    if not reports:
        raise EmptyReportError("no reports to render")
    lines = [
        "| Model | Category | Precision | Recall | F1 Score | Accuracy |",
        "|---|---|---|---|---|---|",
    ]
    for model, report in reports:
        for row in _table_rows(model, report):
            acc = "" if row["accuracy"] is None else f"{row['accuracy']:.2f}"
            lines.append(
                f"| {row['model']} | {row['category']} | {row['precision']:.2f} "
                f"| {row['recall']:.2f} | {row['f1']:.2f} | {acc} |"
            )
    return "\n".join(lines) + "\n"


def render_csv(reports: Sequence[tuple[str, EvalReport]]) -> str:
    """Same cells as the markdown table, full float precision."""
    if not reports:
        raise EmptyReportError("no reports to render")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for model, report in reports:
        for row in _table_rows(model, report):
            writer.writerow(
                [
                    row["model"],
                    row["category"],
                    repr(row["precision"]),
                    repr(row["recall"]),
                    repr(row["f1"]),
                    "" if row["accuracy"] is None else repr(row["accuracy"]),
                ]
            )
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    """Read a report CSV back; floats recover their exact stored values."""
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        rows.append(
            {
                "model": raw["model"],
                "category": raw["category"],
                "precision": float(raw["precision"]),
                "recall": float(raw["recall"]),
                "f1": float(raw["f1"]),
                "accuracy": float(raw["accuracy"]) if raw["accuracy"] else None,
            }
        )
    return rows


def write_report_files(
    reports: Sequence[tuple[str, EvalReport]], out_dir: str | Path, basename: str
) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    md = out_dir / f"{basename}.md"
    csv_path = out_dir / f"{basename}.csv"
    md.write_text(render_markdown(reports), encoding="utf-8")
    csv_path.write_text(render_csv(reports), encoding="utf-8")
    return {"markdown": md, "csv": csv_path}


def render_agreement_markdown(report: AgreementReport) -> str:
    """Machine vs human tag percentages; unreadable is human-only."""
    lines = [
        "| Tag | Machine Tag | Human Tag |",
        "|---|---|---|",
    ]
    for tag in report.machine_pct:
        lines.append(
            f"| {DISPLAY_NAMES[tag].title()} | {report.machine_pct[tag]:.1f}% "
            f"| {report.human_pct[tag]:.1f}% |"
        )
    lines.append(f"| Unreadable | - | {report.unreadable_pct:.1f}% |")
    return "\n".join(lines) + "\n"


def render_distribution_markdown(report: DistributionReport) -> str:
    lines = [
        "| Category | Count | Share |",
        "|---|---|---|",
    ]
    for label, count in report.counts.items():
        lines.append(
            f"| {DISPLAY_NAMES[label].title()} | {count} | {report.percentages[label]:.2f}% |"
        )
    lines.append(f"| Total | {report.total} | 100% |")
    return "\n".join(lines) + "\n"
