"""Corpus data model: entries, dataset versions, label encoding and splits.

Datasets are immutable values; every operation here is a pure function that
returns a new Dataset. Canonical storage is JSONL (one entry per line); CSV
is accepted for ingestion only because the newspaper text is full of commas
and quotes.
"""

from __future__ import annotations

import csv
import json
import random
import unicodedata
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import (
    ContractViolation,
    DuplicateIdError,
    EmptyDatasetError,
    EmptyTextError,
    FileError,
    MissingLabelError,
    ModeError,
    RatioError,
    StratifyError,
    UnknownLabelError,
)


class Label(str, Enum):
    IRONIA = "IRONÍA"
    POSITIVO = "POSITIVO"
    NEGATIVO = "NEGATIVO"
    NEUTRO = "NEUTRO"
    NO_IRONIA = "NO_IRONÍA"

    def __str__(self) -> str:
        return self.value


class Mode(str, Enum):
    MULTICLASS = "multiclass"
    BINARY = "binary"


class Provenance(str, Enum):
    HUMAN = "human"
    MACHINE = "machine"
    MACHINE_VERIFIED = "machine_verified"


class VersionTag(str, Enum):
    PRIMARY = "primary"
    ENHANCED = "enhanced"
    AUGMENTED = "augmented"
    CUSTOM = "custom"


# Class order doubles as the integer encoding: index in the tuple is the
# encoded value (multiclass is alphabetical on the Spanish label).
MODE_LABELS: dict[Mode, tuple[Label, ...]] = {
    Mode.MULTICLASS: (Label.IRONIA, Label.NEGATIVO, Label.NEUTRO, Label.POSITIVO),
    Mode.BINARY: (Label.NO_IRONIA, Label.IRONIA),
}

ENCODING: dict[Mode, dict[Label, int]] = {
    mode: {label: i for i, label in enumerate(labels)}
    for mode, labels in MODE_LABELS.items()
}

# Accent-stripped uppercase aliases, Spanish and English.
_LABEL_ALIASES = {
    "IRONIA": Label.IRONIA,
    "IRONY": Label.IRONIA,
    "POSITIVO": Label.POSITIVO,
    "POSITIVE": Label.POSITIVO,
    "NEGATIVO": Label.NEGATIVO,
    "NEGATIVE": Label.NEGATIVO,
    "NEUTRO": Label.NEUTRO,
    "NEUTRAL": Label.NEUTRO,
    "NO_IRONIA": Label.NO_IRONIA,
    "NO_IRONY": Label.NO_IRONIA,
    "NOT_IRONY": Label.NO_IRONIA,
}


def _strip_accents(s: str) -> str:
    return "".join(
        c for c in unicodedata.normalize("NFD", s) if not unicodedata.combining(c)
    )


def normalize_label(raw: str, mode: Mode = Mode.MULTICLASS) -> Label:
    """Map a raw label string to the canonical accented-uppercase Label.

    Accepts any casing, with or without accents, Spanish or English
    ("IRONY" and "ironia" both normalize to IRONÍA). Raises
    UnknownLabelError when the string is not a label of `mode`.
    """
    key = _strip_accents(str(raw).strip()).upper().replace(" ", "_").replace("-", "_")
    label = _LABEL_ALIASES.get(key)
    if label is None or label not in MODE_LABELS[mode]:
        raise UnknownLabelError(f"unknown label {raw!r} for mode {mode.value}")
    return label


@dataclass(frozen=True)
class Entry:
    """One text fragment, possibly labeled, with provenance bookkeeping."""

    id: str
    text: str
    label: Optional[Label] = None
    category_encoded: Optional[int] = None
    provenance: Provenance = Provenance.HUMAN
    version_tag: VersionTag = VersionTag.PRIMARY

    def __post_init__(self) -> None:
        if not self.id:
            raise ContractViolation("entry id must be non-empty")
        if not self.text.strip():
            raise EmptyTextError(f"entry {self.id!r} has empty text")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "label": self.label.value if self.label else None,
            "category_encoded": self.category_encoded,
            "provenance": self.provenance.value,
            "version_tag": self.version_tag.value,
        }

    @classmethod
    def from_dict(cls, raw: dict, mode: Mode = Mode.MULTICLASS) -> "Entry":
        label = raw.get("label")
        encoded = raw.get("category_encoded")
        return cls(
            id=str(raw["id"]),
            text=str(raw["text"]),
            label=normalize_label(label, mode) if label not in (None, "") else None,
            category_encoded=int(encoded) if encoded is not None else None,
            provenance=Provenance(raw.get("provenance", "human")),
            version_tag=VersionTag(raw.get("version_tag", "primary")),
        )


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of entries under one label mode."""

    name: str
    mode: Mode
    entries: tuple[Entry, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        seen: set[str] = set()
        for entry in self.entries:
            if entry.id in seen:
                raise DuplicateIdError(f"duplicate entry id {entry.id!r}")
            seen.add(entry.id)
            if entry.label is not None:
                if entry.label not in MODE_LABELS[self.mode]:
                    raise UnknownLabelError(
                        f"label {entry.label.value!r} not valid in {self.mode.value} mode"
                    )
                if entry.category_encoded is not None:
                    expected = ENCODING[self.mode][entry.label]
                    if entry.category_encoded != expected:
                        raise ContractViolation(
                            f"entry {entry.id!r}: category_encoded "
                            f"{entry.category_encoded} != {expected}"
                        )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def labels(self) -> tuple[Label, ...]:
        """Canonical class order for this dataset's mode."""
        return MODE_LABELS[self.mode]


@dataclass(frozen=True)
class DistributionReport:
    """Per-label counts and percentages over a fully labeled dataset."""

    counts: dict[Label, int]
    percentages: dict[Label, float]
    total: int

    def to_dict(self) -> dict:
        return {
            "counts": {label.value: n for label, n in self.counts.items()},
            "percentages": {label.value: p for label, p in self.percentages.items()},
            "total": self.total,
        }


def round_half_up(numerator: int, denominator: int, places: int = 2) -> float:
    """100*numerator/denominator rounded half-up to `places` decimals."""
    ratio = Decimal(numerator) * 100 / Decimal(denominator)
    exp = Decimal(1).scaleb(-places)
    return float(ratio.quantize(exp, rounding=ROUND_HALF_UP))


def load_dataset(path: str | Path, format: str | None = None, name: str | None = None) -> Dataset:
    """Load a multiclass dataset from a JSONL or CSV file.

    The format is inferred from the suffix unless given explicitly. Rows
    need at least `id` and `text`; the label column is optional and
    accepted case- and accent-insensitively.
    """
    path = Path(path)
    if not path.exists():
        raise FileError(f"dataset file not found: {path}")
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    if fmt not in ("jsonl", "csv"):
        raise FileError(f"unsupported dataset format: {fmt!r}")

    rows: list[dict]
    if fmt == "jsonl":
        rows = []
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise FileError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    else:
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = set(reader.fieldnames or ())
            if not {"id", "text"} <= header:
                raise FileError(f"{path}: CSV header must include id and text")
            rows = [dict(r) for r in reader]

    entries = []
    for i, raw in enumerate(rows, start=1):
        if raw.get("id") in (None, "") or raw.get("text") is None:
            raise FileError(f"{path}: row {i} is missing id or text")
        entries.append(Entry.from_dict(raw, Mode.MULTICLASS))
    return Dataset(name=name or path.stem, mode=Mode.MULTICLASS, entries=tuple(entries))


def save_dataset(ds: Dataset, path: str | Path) -> None:
    """Write a dataset as canonical JSONL (UTF-8, one entry per line)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for entry in ds.entries:
            fh.write(json.dumps(entry.to_dict(), ensure_ascii=False) + "\n")


_BINARY_MERGE = {
    Label.POSITIVO: Label.NO_IRONIA,
    Label.NEGATIVO: Label.NO_IRONIA,
    Label.NEUTRO: Label.NO_IRONIA,
    Label.IRONIA: Label.IRONIA,
}


def merge_to_binary(label: Label) -> Label:
    """The binary counterpart of a multiclass label."""
    return _BINARY_MERGE[label]


def to_binary(ds: Dataset) -> Dataset:
    """Merge POSITIVO/NEGATIVO/NEUTRO into NO_IRONÍA; keep IRONÍA as is.

    Order, ids and texts are unchanged; category_encoded is re-derived
    under the binary map where it was present.
    """
    if ds.mode is Mode.BINARY:
        raise ModeError("dataset is already binary")
    converted = []
    for entry in ds.entries:
        if entry.label is None:
            converted.append(replace(entry, category_encoded=None))
            continue
        label = _BINARY_MERGE[entry.label]
        encoded = (
            ENCODING[Mode.BINARY][label] if entry.category_encoded is not None else None
        )
        converted.append(replace(entry, label=label, category_encoded=encoded))
    return Dataset(name=ds.name, mode=Mode.BINARY, entries=tuple(converted))


def encode_categories(ds: Dataset) -> Dataset:
    """Populate category_encoded from the fixed per-mode map. Idempotent."""
    encoding = ENCODING[ds.mode]
    converted = []
    for entry in ds.entries:
        if entry.label is None:
            raise MissingLabelError(f"entry {entry.id!r} has no label to encode")
        converted.append(replace(entry, category_encoded=encoding[entry.label]))
    return Dataset(name=ds.name, mode=ds.mode, entries=tuple(converted))


def class_distribution(ds: Dataset) -> DistributionReport:
    """Count entries per label and report two-decimal percentages."""
    if len(ds) == 0:
        raise EmptyDatasetError("cannot compute a distribution of nothing")
    counts = {label: 0 for label in ds.labels}
    for entry in ds.entries:
        if entry.label is None:
            raise MissingLabelError(f"entry {entry.id!r} is unlabeled")
        counts[entry.label] += 1
    total = len(ds)
    percentages = {label: round_half_up(n, total) for label, n in counts.items()}
    return DistributionReport(counts=counts, percentages=percentages, total=total)


def split(
    ds: Dataset, ratios: Sequence[float], seed: int = 13
) -> tuple[Dataset, Dataset, Dataset]:
    """Stratified train/val/test split, deterministic under `seed`.

    Within each class the per-part counts are the largest-remainder
    apportionment of the class size, so every part stays within one entry
    of its ideal share. Entries keep their original dataset order inside
    each part.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise RatioError(f"need three positive ratios, got {tuple(ratios)}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise RatioError(f"ratios must sum to 1, got {sum(ratios)!r}")

    by_label: dict[Label, list[int]] = {}
    for idx, entry in enumerate(ds.entries):
        if entry.label is None:
            raise MissingLabelError(f"entry {entry.id!r} is unlabeled")
        by_label.setdefault(entry.label, []).append(idx)
    for label, members in by_label.items():
        if len(members) < 3:
            raise StratifyError(
                f"class {label.value} has only {len(members)} entries; need >= 3"
            )

    rng = random.Random(seed)
    part_indices: tuple[list[int], list[int], list[int]] = ([], [], [])
    for label in ds.labels:
        members = by_label.get(label)
        if not members:
            continue
        members = members[:]
        rng.shuffle(members)
        quotas = _largest_remainder(len(members), ratios)
        cursor = 0
        for part, quota in enumerate(quotas):
            part_indices[part].extend(members[cursor : cursor + quota])
            cursor += quota

    parts = []
    for suffix, indices in zip(("train", "val", "test"), part_indices):
        indices.sort()
        parts.append(
            Dataset(
                name=f"{ds.name}-{suffix}",
                mode=ds.mode,
                entries=tuple(ds.entries[i] for i in indices),
            )
        )
    return parts[0], parts[1], parts[2]


def _largest_remainder(n: int, ratios: Sequence[float]) -> list[int]:
    ideals = [n * r for r in ratios]
    base = [int(x) for x in ideals]
    short = n - sum(base)
    # Hand out the shortfall by descending fractional part, part index as tie-break.
    order = sorted(range(len(ratios)), key=lambda i: (-(ideals[i] - base[i]), i))
    for i in order[:short]:
        base[i] += 1
    return base


def merge_augmented(primary: Dataset, verified: Iterable[Entry]) -> Dataset:
    """Append human-verified machine annotations to the primary corpus.

    Every verified entry must carry a final label and machine_verified
    provenance; unreadable items must have been excluded upstream. All
    entries in the result are re-tagged as the augmented dataset version.
    """
    verified = list(verified)
    for entry in verified:
        if entry.provenance is not Provenance.MACHINE_VERIFIED:
            raise ContractViolation(
                f"entry {entry.id!r} has provenance {entry.provenance.value}, "
                "expected machine_verified"
            )
        if entry.label is None:
            raise ContractViolation(
                f"entry {entry.id!r} has no final label (unreadable items "
                "must not be merged)"
            )
    merged = [
        replace(e, version_tag=VersionTag.AUGMENTED) for e in primary.entries
    ] + [replace(e, version_tag=VersionTag.AUGMENTED) for e in verified]
    return Dataset(name=primary.name, mode=primary.mode, entries=tuple(merged))
