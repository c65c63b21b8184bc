"""Deterministic synthetic corpora for tests, demos and offline runs.

Class balances follow the production corpus this tool targets: a 2,734-entry
primary set that under-represents irony, and a 1,034-entry machine-annotated
batch whose verification yields 1,016 usable entries (18 unreadable), which
rebalances the merged 3,750-entry set. Texts are seeded pseudo-Spanish word
salad; content only needs to be non-empty and varied.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .corpus import Dataset, Entry, Label, Mode, Provenance, VersionTag
from .gateway import format_classification_response

PRIMARY_COUNTS = {
    Label.IRONIA: 292,
    Label.NEGATIVO: 701,
    Label.NEUTRO: 790,
    Label.POSITIVO: 951,
}

# (machine tag, final human tag or None for unreadable) -> count. Accepts,
# overrides and unreadable cases reproduce the verification marginals.
REVIEW_PAIR_COUNTS: dict[tuple[Label, Optional[Label]], int] = {
    (Label.IRONIA, Label.IRONIA): 548,
    (Label.NEGATIVO, Label.NEGATIVO): 40,
    (Label.NEUTRO, Label.NEUTRO): 233,
    (Label.IRONIA, Label.NEGATIVO): 96,
    (Label.IRONIA, Label.NEUTRO): 69,
    (Label.IRONIA, Label.POSITIVO): 30,
    (Label.IRONIA, None): 18,
}

_VOCAB = (
    "gobierno patria honradez ferrocarril tarifa discrecion provincia "
    "ilustre señor don caballero pueblo libertad prensa diario gaceta "
    "entusiasmo progreso porvenir decoro virtud patriotismo ley justicia "
    "impuesto aduana congreso ministro general coronel hacienda camino "
    "vapor telegrafo alumbrado teatro tertulia versos pluma tinta papel "
    "sublime glorioso famoso mentado flamante insigne probo celebre "
    "decia verán sabemos dicen cuentan aseguran prometen juran"
).split()

_TAG_WORDS = {
    Label.IRONIA: "IRONY",
    Label.NEGATIVO: "NEGATIVE",
    Label.NEUTRO: "NEUTRAL",
    Label.POSITIVO: "POSITIVE",
}


def _sentence(rng: random.Random, lo: int = 6, hi: int = 18) -> str:
    words = [rng.choice(_VOCAB) for _ in range(rng.randint(lo, hi))]
    return (" ".join(words)).capitalize() + "."


@dataclass(frozen=True)
class ReviewCase:
    """One machine-annotated entry plus the verdict a reviewer should reach."""

    entry: Entry
    machine_tag: Label
    explanation: str
    final_tag: Optional[Label]  # None marks an unreadable transcription

    @property
    def response(self) -> str:
        return format_classification_response(self.machine_tag, self.explanation)


def synthetic_primary(seed: int = 13, name: str = "primary-synthetic") -> Dataset:
    """A 2,734-entry labeled multiclass dataset with the primary balance."""
    rng = random.Random(seed)
    labels = [label for label, n in PRIMARY_COUNTS.items() for _ in range(n)]
    rng.shuffle(labels)
    entries = tuple(
        Entry(
            id=f"p-{i:04d}",
            text=_sentence(rng),
            label=label,
            provenance=Provenance.HUMAN,
            version_tag=VersionTag.PRIMARY,
        )
        for i, label in enumerate(labels, start=1)
    )
    return Dataset(name=name, mode=Mode.MULTICLASS, entries=entries)


def synthetic_review_batch(seed: int = 13) -> list[ReviewCase]:
    """1,034 unlabeled entries with machine tags and target verdicts."""
    rng = random.Random(seed + 1)
    pairs = [pair for pair, n in REVIEW_PAIR_COUNTS.items() for _ in range(n)]
    rng.shuffle(pairs)
    cases = []
    for i, (machine_tag, final_tag) in enumerate(pairs, start=1):
        entry = Entry(
            id=f"n-{i:04d}",
            text=_sentence(rng),
            provenance=Provenance.HUMAN,
            version_tag=VersionTag.CUSTOM,
        )
        cases.append(
            ReviewCase(
                entry=entry,
                machine_tag=machine_tag,
                explanation=_sentence(rng, 8, 20).rstrip("."),
                final_tag=final_tag,
            )
        )
    return cases


def mock_fixture_rows(cases: list[ReviewCase]) -> list[dict]:
    """JSONL rows for MockLlmClient keyed by entry id."""
    return [{"key": case.entry.id, "response": case.response} for case in cases]


def small_corpus(per_class: int = 10, seed: int = 7, name: str = "small") -> Dataset:
    """A tiny balanced multiclass dataset for fast tests."""
    rng = random.Random(seed)
    entries = []
    i = 0
    for label in PRIMARY_COUNTS:
        for _ in range(per_class):
            i += 1
            entries.append(Entry(id=f"s-{i:03d}", text=_sentence(rng), label=label))
    return Dataset(name=name, mode=Mode.MULTICLASS, entries=tuple(entries))


def write_demo_workspace(out_dir: str | Path, seed: int = 13) -> dict[str, Path]:
    """Write primary.jsonl, new_entries.jsonl and fixtures.jsonl for a demo run."""
    import json

    from .corpus import save_dataset

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    primary = synthetic_primary(seed)
    cases = synthetic_review_batch(seed)

    primary_path = out_dir / "primary.jsonl"
    save_dataset(primary, primary_path)

    new_entries_path = out_dir / "new_entries.jsonl"
    with new_entries_path.open("w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(json.dumps(case.entry.to_dict(), ensure_ascii=False) + "\n")

    # Fixture responses cover both flows: annotation of the new entries and
    # a GPT-style baseline over the primary set (mostly-correct tags, in
    # English to exercise normalization).
    rng = random.Random(seed + 2)
    rows = mock_fixture_rows(cases)
    tags = list(PRIMARY_COUNTS)
    for entry in primary.entries:
        tag = entry.label if rng.random() < 0.7 else rng.choice(tags)
        rows.append(
            {
                "key": entry.id,
                "response": f"'{_TAG_WORDS[tag]}' *{_sentence(rng, 8, 16).rstrip('.')}*",
            }
        )

    fixtures_path = out_dir / "fixtures.jsonl"
    with fixtures_path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    return {
        "primary": primary_path,
        "new_entries": new_entries_path,
        "fixtures": fixtures_path,
    }
