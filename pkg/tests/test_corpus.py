import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_dataset
from ironia import corpus
from ironia.corpus import (
    ENCODING,
    Dataset,
    Entry,
    Label,
    Mode,
    Provenance,
    VersionTag,
    class_distribution,
    encode_categories,
    load_dataset,
    merge_augmented,
    merge_to_binary,
    normalize_label,
    save_dataset,
    split,
    to_binary,
)
from ironia.errors import (
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

MULTI = [Label.IRONIA, Label.NEGATIVO, Label.NEUTRO, Label.POSITIVO]

labels_strategy = st.lists(st.sampled_from(MULTI), min_size=1, max_size=60)


class TestLabelNormalization:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("IRONÍA", Label.IRONIA),
            ("ironia", Label.IRONIA),
            ("Irony", Label.IRONIA),
            ("POSITIVE", Label.POSITIVO),
            ("negativo", Label.NEGATIVO),
            ("NEUTRAL", Label.NEUTRO),
        ],
    )
    def test_aliases(self, raw, expected):
        assert normalize_label(raw) is expected

    def test_binary_aliases(self):
        assert normalize_label("no ironia", Mode.BINARY) is Label.NO_IRONIA
        assert normalize_label("NOT IRONY", Mode.BINARY) is Label.NO_IRONIA

    def test_unknown_label(self):
        with pytest.raises(UnknownLabelError):
            normalize_label("SARCASMO")

    def test_mode_mismatch(self):
        with pytest.raises(UnknownLabelError):
            normalize_label("POSITIVO", Mode.BINARY)


class TestLoading:
    def test_jsonl_roundtrip(self, tmp_path):
        ds = make_dataset(MULTI)
        path = tmp_path / "ds.jsonl"
        save_dataset(ds, path)
        loaded = load_dataset(path)
        assert loaded.entries == ds.entries

    def test_three_row_fixture(self, tmp_path):
        path = tmp_path / "three.jsonl"
        rows = [
            {"id": "a", "text": "uno", "label": "IRONÍA"},
            {"id": "b", "text": "dos", "label": None},
            {"id": "c", "text": "tres", "label": "positive"},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
        ds = load_dataset(path)
        assert len(ds) == 3
        assert ds.mode is Mode.MULTICLASS
        assert ds.entries[1].label is None
        assert ds.entries[2].label is Label.POSITIVO

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "dup.jsonl"
        path.write_text(
            '{"id": "a", "text": "x"}\n{"id": "a", "text": "y"}\n', encoding="utf-8"
        )
        with pytest.raises(DuplicateIdError):
            load_dataset(path)

    def test_empty_text(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text('{"id": "a", "text": "   "}\n', encoding="utf-8")
        with pytest.raises(EmptyTextError):
            load_dataset(path)

    def test_unknown_label_string(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "text": "x", "label": "BOGUS"}\n', encoding="utf-8")
        with pytest.raises(UnknownLabelError):
            load_dataset(path)

    def test_csv_ingestion(self, tmp_path):
        path = tmp_path / "ds.csv"
        path.write_text(
            'id,text,label\na,"texto, con comas",IRONIA\nb,"otro ""texto""",\n',
            encoding="utf-8",
        )
        ds = load_dataset(path)
        assert len(ds) == 2
        assert ds.entries[0].text == "texto, con comas"
        assert ds.entries[0].label is Label.IRONIA
        assert ds.entries[1].label is None

    def test_csv_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,body\na,x\n", encoding="utf-8")
        with pytest.raises(FileError):
            load_dataset(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileError):
            load_dataset(tmp_path / "nope.jsonl")

    def test_full_augmented_file_loads(self, tmp_path, primary_corpus, resolved_queue):
        from ironia.review import export_verified

        merged = merge_augmented(primary_corpus, export_verified(resolved_queue))
        path = tmp_path / "augmented.jsonl"
        save_dataset(merged, path)
        loaded = load_dataset(path)
        assert len(loaded) == 3750
        assert all(e.version_tag is VersionTag.AUGMENTED for e in loaded.entries)


class TestToBinary:
    def test_merges_non_irony(self):
        ds = make_dataset([Label.POSITIVO, Label.IRONIA, Label.NEUTRO, Label.NEGATIVO])
        binary = to_binary(ds)
        assert binary.mode is Mode.BINARY
        assert [e.label for e in binary.entries] == [
            Label.NO_IRONIA,
            Label.IRONIA,
            Label.NO_IRONIA,
            Label.NO_IRONIA,
        ]

    def test_preserves_order_ids_texts(self):
        ds = make_dataset(MULTI * 3)
        binary = to_binary(ds)
        assert [e.id for e in binary.entries] == [e.id for e in ds.entries]
        assert [e.text for e in binary.entries] == [e.text for e in ds.entries]

    def test_already_binary(self):
        ds = make_dataset(MULTI)
        with pytest.raises(ModeError):
            to_binary(to_binary(ds))

    def test_derived_counts(self, primary_corpus):
        # Multiclass counts 292/701/790/951 collapse to 292 irony + 2442 rest.
        binary = to_binary(primary_corpus)
        counts = class_distribution(binary).counts
        assert counts[Label.IRONIA] == 292
        assert counts[Label.NO_IRONIA] == 2442

    @given(labels_strategy)
    @settings(max_examples=60, deadline=None)
    def test_conservation_property(self, labels):
        ds = make_dataset(labels)
        binary = to_binary(ds)
        assert len(binary) == len(ds)
        irony = sum(1 for l in labels if l is Label.IRONIA)
        assert sum(1 for e in binary.entries if e.label is Label.IRONIA) == irony
        assert (
            sum(1 for e in binary.entries if e.label is Label.NO_IRONIA)
            == len(labels) - irony
        )


class TestEncoding:
    def test_multiclass_map(self):
        ds = encode_categories(make_dataset(MULTI))
        assert [e.category_encoded for e in ds.entries] == [0, 1, 2, 3]
        assert ds.entries[0].label is Label.IRONIA  # IRONÍA -> 0
        assert ds.entries[3].label is Label.POSITIVO  # POSITIVO -> 3

    def test_binary_map(self):
        ds = encode_categories(to_binary(make_dataset([Label.IRONIA, Label.NEUTRO])))
        assert ds.entries[0].category_encoded == 1  # IRONÍA -> 1
        assert ds.entries[1].category_encoded == 0  # NO_IRONÍA -> 0

    def test_idempotent(self):
        once = encode_categories(make_dataset(MULTI))
        assert encode_categories(once).entries == once.entries

    def test_injective(self):
        for mode, mapping in ENCODING.items():
            assert len(set(mapping.values())) == len(mapping)

    def test_missing_label(self):
        ds = Dataset("d", Mode.MULTICLASS, (Entry(id="a", text="x"),))
        with pytest.raises(MissingLabelError):
            encode_categories(ds)

    def test_encoded_mismatch_rejected(self):
        with pytest.raises(ContractViolation):
            Dataset(
                "d",
                Mode.MULTICLASS,
                (Entry(id="a", text="x", label=Label.IRONIA, category_encoded=3),),
            )


class TestDistribution:
    def test_augmented_fixture_exact(self):
        labels = (
            [Label.IRONIA] * 840
            + [Label.NEGATIVO] * 837
            + [Label.NEUTRO] * 1092
            + [Label.POSITIVO] * 981
        )
        report = class_distribution(make_dataset(labels))
        assert report.total == 3750
        assert report.percentages == {
            Label.IRONIA: 22.40,
            Label.NEGATIVO: 22.32,
            Label.NEUTRO: 29.12,
            Label.POSITIVO: 26.16,
        }

    def test_primary_fixture_within_tolerance(self, primary_corpus):
        report = class_distribution(primary_corpus)
        published = {
            Label.IRONIA: 10.68,
            Label.NEGATIVO: 25.64,
            Label.NEUTRO: 28.89,  # our rounding gives 28.90; source truncates
            Label.POSITIVO: 34.78,
        }
        for label, expected in published.items():
            assert abs(report.percentages[label] - expected) <= 0.01 + 1e-9

    def test_single_class(self):
        report = class_distribution(make_dataset([Label.NEUTRO] * 7))
        assert report.percentages[Label.NEUTRO] == 100.00

    @given(labels_strategy)
    @settings(max_examples=60, deadline=None)
    def test_sums(self, labels):
        report = class_distribution(make_dataset(labels))
        assert sum(report.counts.values()) == report.total == len(labels)
        assert abs(sum(report.percentages.values()) - 100.0) <= 0.05

    def test_empty_dataset(self):
        with pytest.raises(EmptyDatasetError):
            class_distribution(Dataset("d", Mode.MULTICLASS, ()))

    def test_unlabeled_entry(self):
        ds = Dataset("d", Mode.MULTICLASS, (Entry(id="a", text="x"),))
        with pytest.raises(MissingLabelError):
            class_distribution(ds)


class TestSplit:
    def test_deterministic(self):
        ds = make_dataset(MULTI * 30)
        first = split(ds, (0.7, 0.15, 0.15), seed=13)
        second = split(ds, (0.7, 0.15, 0.15), seed=13)
        for a, b in zip(first, second):
            assert a.entries == b.entries

    def test_seed_changes_partition(self):
        ds = make_dataset(MULTI * 30)
        a = split(ds, (0.7, 0.15, 0.15), seed=1)[0]
        b = split(ds, (0.7, 0.15, 0.15), seed=2)[0]
        assert [e.id for e in a.entries] != [e.id for e in b.entries]

    def test_bad_ratios(self):
        ds = make_dataset(MULTI * 3)
        with pytest.raises(RatioError):
            split(ds, (0.5, 0.5, 0.5))
        with pytest.raises(RatioError):
            split(ds, (0.5, -0.1, 0.6))

    def test_stratify_error(self):
        ds = make_dataset([Label.IRONIA, Label.IRONIA] + [Label.NEUTRO] * 10)
        with pytest.raises(StratifyError):
            split(ds, (0.7, 0.15, 0.15))

    def test_partition_property(self):
        ds = make_dataset(MULTI * 25)
        parts = split(ds, (0.6, 0.2, 0.2), seed=3)
        ids = [e.id for part in parts for e in part.entries]
        assert sorted(ids) == sorted(e.id for e in ds.entries)
        assert len(set(ids)) == len(ids)

    def test_stratified_within_one_of_ideal(self):
        # 1000 balanced entries across 4 classes: 250 each.
        ds = make_dataset(MULTI * 250)
        parts = split(ds, (0.7, 0.15, 0.15), seed=13)
        ideals = (250 * 0.7, 250 * 0.15, 250 * 0.15)
        for part, ideal in zip(parts, ideals):
            counts = class_distribution(part).counts
            for label in MULTI:
                assert abs(counts[label] - ideal) <= 1.0


class TestMergeAugmented:
    @staticmethod
    def verified_entries(n, prefix="v"):
        return [
            Entry(
                id=f"{prefix}-{i}",
                text=f"fragmento verificado {i}",
                label=MULTI[i % 4],
                provenance=Provenance.MACHINE_VERIFIED,
                version_tag=VersionTag.CUSTOM,
            )
            for i in range(n)
        ]

    def test_sizes_add_up(self):
        primary = make_dataset(MULTI * 5)
        merged = merge_augmented(primary, self.verified_entries(7))
        assert len(merged) == len(primary) + 7
        assert all(e.version_tag is VersionTag.AUGMENTED for e in merged.entries)

    def test_empty_verified_retags(self):
        primary = make_dataset(MULTI)
        merged = merge_augmented(primary, [])
        assert len(merged) == len(primary)
        assert [e.id for e in merged.entries] == [e.id for e in primary.entries]
        assert all(e.version_tag is VersionTag.AUGMENTED for e in merged.entries)

    def test_id_collision(self):
        primary = make_dataset(MULTI)
        clash = Entry(
            id=primary.entries[0].id,
            text="duplicado",
            label=Label.IRONIA,
            provenance=Provenance.MACHINE_VERIFIED,
        )
        with pytest.raises(DuplicateIdError):
            merge_augmented(primary, [clash])

    def test_unreadable_rejected(self):
        primary = make_dataset(MULTI)
        unreadable = Entry(
            id="v-1", text="ilegible", provenance=Provenance.MACHINE_VERIFIED
        )
        with pytest.raises(ContractViolation):
            merge_augmented(primary, [unreadable])

    def test_wrong_provenance_rejected(self):
        primary = make_dataset(MULTI)
        human = Entry(id="v-1", text="x", label=Label.IRONIA)
        with pytest.raises(ContractViolation):
            merge_augmented(primary, [human])


def test_merge_to_binary_helper():
    assert merge_to_binary(Label.POSITIVO) is Label.NO_IRONIA
    assert merge_to_binary(Label.IRONIA) is Label.IRONIA
