"""Acceptance suite.

One test per release criterion, runnable offline with the mock LLM client
and the stub encoder. A summary line per criterion is printed at the end of
the run (see pytest_terminal_summary in conftest).
"""

import math
import random
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ironia.classifier import (
    EmbeddedSet,
    StopReason,
    TrainingConfig,
    batch_gradients,
    dataset_loss,
    init_head,
    train,
)
from ironia.corpus import (
    Dataset,
    Entry,
    Label,
    Mode,
    VersionTag,
    class_distribution,
    encode_categories,
    merge_augmented,
    split,
    to_binary,
)
from ironia.encoders import embed
from ironia.gateway import (
    Annotation,
    MockLlmClient,
    annotate_batch,
    format_classification_response,
    parse_classification_response,
)
from ironia.metrics import evaluate, metrics_from_confusion
from ironia.reports import render_csv
from ironia.review import Decision, ReviewQueue, Verdict, export_verified

MULTI = (Label.IRONIA, Label.NEGATIVO, Label.NEUTRO, Label.POSITIVO)


# -- 1. metrics agree with a brute-force tally oracle ------------------------

def _tally_oracle(C, averaging):
    k = len(C)
    total = sum(sum(row) for row in C)
    rows = []
    for i in range(k):
        tp = C[i][i]
        support = sum(C[i])
        predicted = sum(C[j][i] for j in range(k))
        precision = tp / predicted if predicted else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        rows.append((precision, recall, f1, support))
    accuracy = sum(C[i][i] for i in range(k)) / total
    weights = (
        [r[3] / total for r in rows] if averaging == "weighted" else [1.0 / k] * k
    )
    aggregate = tuple(sum(w * r[axis] for w, r in zip(weights, rows)) for axis in range(3))
    return rows, accuracy, aggregate


def test_metrics_match_tally_oracle():
    rng = np.random.default_rng(1234)
    checked = 0
    while checked < 500:
        k = int(rng.choice([2, 4]))
        C = rng.integers(0, 201, size=(k, k)).tolist()
        if sum(sum(row) for row in C) == 0:
            continue
        checked += 1
        for averaging in ("weighted", "macro"):
            report = metrics_from_confusion(C, averaging)
            rows, accuracy, aggregate = _tally_oracle(C, averaging)
            for got, (p, r, f1, support) in zip(report.per_class, rows):
                assert abs(got.precision - p) <= 1e-12
                assert abs(got.recall - r) <= 1e-12
                assert abs(got.f1 - f1) <= 1e-12
                assert got.support == support
            assert abs(report.accuracy - accuracy) <= 1e-12
            assert abs(report.aggregate_precision - aggregate[0]) <= 1e-12
            assert abs(report.aggregate_recall - aggregate[1]) <= 1e-12
            assert abs(report.aggregate_f1 - aggregate[2]) <= 1e-12
    assert checked == 500


# -- 2. augmentation arithmetic ----------------------------------------------

def test_augmentation_arithmetic(primary_corpus, resolved_queue):
    exported = export_verified(resolved_queue)
    assert resolved_queue.counts()["resolved"] == 1034
    assert len(exported) == 1034 - 18
    assert len(exported) == 1016

    merged = merge_augmented(primary_corpus, exported)
    assert len(primary_corpus) == 2734
    assert len(merged) == 2734 + 1016
    assert len(merged) == 3750


# -- 3. distribution report fidelity ------------------------------------------

def test_distribution_report_fidelity(primary_corpus, resolved_queue):
    merged = merge_augmented(primary_corpus, export_verified(resolved_queue))
    augmented = class_distribution(merged)
    assert augmented.percentages == {
        Label.IRONIA: 22.40,
        Label.NEGATIVO: 22.32,
        Label.NEUTRO: 29.12,
        Label.POSITIVO: 26.16,
    }

    primary = class_distribution(primary_corpus)
    published = {
        Label.IRONIA: 10.68,
        Label.NEGATIVO: 25.64,
        Label.NEUTRO: 28.89,  # source truncates where we round half-up
        Label.POSITIVO: 34.78,
    }
    for label, expected in published.items():
        assert abs(primary.percentages[label] - expected) <= 0.01 + 1e-9


# -- 4. accuracy equals support-weighted mean recall ---------------------------

def test_accuracy_equals_weighted_recall():
    rng = np.random.default_rng(77)
    for _ in range(300):
        k = int(rng.choice([2, 4]))
        C = rng.integers(0, 201, size=(k, k))
        if C.sum() == 0:
            continue
        report = metrics_from_confusion(C.tolist(), "weighted")
        weighted_recall = (
            sum(row.support * row.recall for row in report.per_class) / report.total
        )
        assert abs(report.accuracy - weighted_recall) <= 1e-12

    # Binary class shares 10.68%/89.32% with recalls 0.80/0.71 must land on
    # 0.7196 (printed as 0.72).
    C = [[158543, 64757], [5340, 21360]]  # rows gold: NOT IRONY, IRONY
    report = metrics_from_confusion(C, "macro", class_labels=["NOT IRONY", "IRONY"])
    total = report.total
    assert abs(report.per_class[1].support / total - 0.1068) <= 5e-7
    assert report.per_class[1].recall == 0.80
    assert report.per_class[0].recall == 0.71
    assert round(report.accuracy, 4) == 0.7196
    assert round(report.accuracy, 2) == 0.72


# -- 5. binary merge invariants ------------------------------------------------

@given(st.lists(st.sampled_from(MULTI), min_size=1, max_size=120))
@settings(max_examples=200, deadline=None)
def test_binary_merge_invariants(labels):
    entries = tuple(
        Entry(id=f"b-{i}", text=f"texto {i}", label=label)
        for i, label in enumerate(labels)
    )
    ds = Dataset(name="prop", mode=Mode.MULTICLASS, entries=entries)
    binary = to_binary(ds)
    assert len(binary) == len(ds)
    irony = sum(1 for label in labels if label is Label.IRONIA)
    merged = sum(1 for label in labels if label is not Label.IRONIA)
    assert sum(1 for e in binary.entries if e.label is Label.IRONIA) == irony
    assert sum(1 for e in binary.entries if e.label is Label.NO_IRONIA) == merged


# -- 6. parser round trip --------------------------------------------------------

SAMPLE_RESPONSE = (
    "'NEGATIVE' *The text provides a negative critique of the government's "
    "management and the arbitrary transportation fee imposed, but there is no "
    "comedic or mocking intention indicating irony. The contradiction mentioned "
    "constitutes a direct and serious criticism of the political and "
    "administrative situation, without elements of irony.*"
)


def test_parser_round_trip():
    alphabet = (
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 "
        "áéíóúñÁÉÍÓÚÑ¡!¿?.,;:()'\"-\n"
    )
    rng = random.Random(2026)
    cases = 0
    for tag in MULTI:
        for _ in range(250):
            explanation = "".join(
                rng.choice(alphabet) for _ in range(rng.randint(1, 120))
            )
            raw = format_classification_response(tag, explanation)
            parsed_tag, parsed_explanation = parse_classification_response(raw)
            assert parsed_tag is tag
            assert parsed_explanation == explanation
            cases += 1
    assert cases == 1000

    tag, explanation = parse_classification_response(SAMPLE_RESPONSE)
    assert tag is Label.NEGATIVO
    assert explanation == SAMPLE_RESPONSE.split("*")[1]
    assert explanation.startswith("The text provides")


# -- 7. gradient check -------------------------------------------------------------

def test_gradient_check():
    rng = np.random.default_rng(4242)
    step = 1e-5
    for mode in (Mode.MULTICLASS, Mode.BINARY):
        k = 2 if mode is Mode.BINARY else 4
        for _ in range(50):
            head = init_head(k, int(rng.integers(0, 10_000)))
            X = rng.normal(size=(3, 768))
            y = rng.integers(0, k, size=3).astype(np.int64)
            data = EmbeddedSet(x=X, y=y)
            _, gW1, gb1, gW2, gb2 = batch_gradients(head, X, y, mode)
            for tensor, grad in (("W1", gW1), ("b1", gb1), ("W2", gW2), ("b2", gb2)):
                arr = getattr(head, tensor)
                flat_size = grad.size
                picks = rng.choice(flat_size, size=min(4, flat_size), replace=False)
                for pick in picks:
                    index = np.unravel_index(pick, grad.shape)
                    original = arr[index]
                    arr[index] = original + step
                    up = dataset_loss(head, data, mode)
                    arr[index] = original - step
                    down = dataset_loss(head, data, mode)
                    arr[index] = original
                    numeric = (up - down) / (2 * step)
                    analytic = grad[index]
                    rel = abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))
                    assert rel < 1e-5, f"{mode} {tensor}{index}: rel={rel}"


# -- 8. early stopping -----------------------------------------------------------

def _tiny_sets(rng, k):
    data = EmbeddedSet(
        x=rng.normal(size=(4, 768)), y=(np.arange(4) % k).astype(np.int64)
    )
    return data, data


def test_early_stopping_schedules():
    rng = np.random.default_rng(5)
    train_set, val_set = _tiny_sets(rng, 4)

    # Divergence after the best epoch: best at 10, patience 5 -> stop at 15.
    def schedule(epoch):
        return 1.0 / epoch, 1.0 / min(epoch, 10) + (0.5 if epoch > 10 else 0.0)

    config = TrainingConfig(
        max_epochs=200, patience=5, divergence_gap=0.1, mode=Mode.MULTICLASS, seed=1
    )
    _, history = train(init_head(4, 1), train_set, val_set, config, loss_hook=schedule)
    assert history.stop_reason is StopReason.EARLY_DIVERGENCE
    assert len(history) == 15
    assert history.best_epoch == 10

    # Same shape, wider patience -> analytically expected stop at 10 + 8.
    config = TrainingConfig(
        max_epochs=200, patience=8, divergence_gap=0.1, mode=Mode.MULTICLASS, seed=1
    )
    _, history = train(init_head(4, 1), train_set, val_set, config, loss_hook=schedule)
    assert len(history) == 18

    # Gap below delta never stops early even when validation stalls.
    config = TrainingConfig(
        max_epochs=30, patience=3, divergence_gap=0.5, mode=Mode.MULTICLASS, seed=1
    )
    _, history = train(
        init_head(4, 1), train_set, val_set, config,
        loss_hook=lambda epoch: (1.0, 1.2),
    )
    assert history.stop_reason is StopReason.MAX_EPOCHS
    assert len(history) == 30

    # Infinite patience always runs to the epoch cap, despite a huge gap.
    config = TrainingConfig(
        max_epochs=1500, patience=math.inf, divergence_gap=0.1,
        mode=Mode.MULTICLASS, seed=1,
    )
    _, history = train(
        init_head(4, 1), train_set, val_set, config,
        loss_hook=lambda epoch: (0.1, 10.0),
    )
    assert history.stop_reason is StopReason.MAX_EPOCHS
    assert len(history) == 1500

    # The default configuration caps training at 1500 epochs.
    assert TrainingConfig().max_epochs == 1500
    assert len(history) <= 1500


# -- 9. end-to-end smoke, deterministic CSV ---------------------------------------

def _smoke_pipeline() -> bytes:
    rng = random.Random(606)
    primary_entries = []
    for i in range(80):
        primary_entries.append(
            Entry(
                id=f"sp-{i:03d}",
                text=f"fragmento primario {i} " + " ".join(
                    rng.choice(["gaceta", "señor", "patria", "vapor", "teatro"])
                    for _ in range(6)
                ),
                label=MULTI[i % 4],
            )
        )
    primary = Dataset(name="smoke-primary", mode=Mode.MULTICLASS, entries=tuple(primary_entries))

    plan = []  # (machine tag, final tag or None)
    for i in range(40):
        machine = MULTI[i % 4]
        if i % 10 == 9:
            plan.append((machine, None))  # unreadable
        elif i % 5 == 4:
            plan.append((machine, MULTI[(i + 1) % 4]))  # override
        else:
            plan.append((machine, machine))  # accept
    new_entries = [
        Entry(id=f"sn-{i:03d}", text=f"fragmento nuevo {i} con posible ironia fina", version_tag=VersionTag.CUSTOM)
        for i in range(40)
    ]
    fixtures = {
        entry.id: format_classification_response(machine, f"explicacion {i}")
        for i, (entry, (machine, _)) in enumerate(zip(new_entries, plan))
    }

    annotations, failures = annotate_batch(
        new_entries, MockLlmClient(fixtures), now=lambda: 0.0
    )
    assert not failures

    queue = ReviewQueue()
    queue.enqueue(zip(new_entries, annotations))
    final_by_id = {e.id: final for e, (_, final) in zip(new_entries, plan)}
    for _ in new_entries:
        item = queue.next_pending("rev")
        final = final_by_id[item.entry.id]
        if final is None:
            verdict = Verdict(Decision.UNREADABLE, "rev", 0.0)
        elif final is item.annotation.tag:
            verdict = Verdict(Decision.ACCEPT, "rev", 0.0)
        else:
            verdict = Verdict(Decision.OVERRIDE, "rev", 0.0, override_tag=final)
        queue.submit_verdict(item.entry.id, verdict)

    verified = export_verified(queue)
    assert len(verified) == 36
    merged = encode_categories(merge_augmented(primary, verified))
    assert len(merged) == 116

    train_ds, val_ds, test_ds = split(merged, (0.7, 0.15, 0.15), seed=13)

    def embed_part(part):
        return EmbeddedSet(
            x=embed([e.text for e in part.entries], "stub"),
            y=np.array([e.category_encoded for e in part.entries], dtype=np.int64),
        )

    config = TrainingConfig(max_epochs=60, patience=50, batch_size=16, seed=13, mode=Mode.MULTICLASS)
    head, history = train(init_head(4, 13), embed_part(train_ds), embed_part(val_ds), config)
    assert len(history) <= 100
    report = evaluate(head, embed_part(test_ds))
    return render_csv([("stub smoke", report)]).encode("utf-8")


def test_end_to_end_smoke_deterministic():
    first = _smoke_pipeline()
    second = _smoke_pipeline()
    assert first == second
    assert first.startswith(b"model,category,")


# -- 10. review queue safety under concurrency --------------------------------------

def test_review_queue_concurrency_safety():
    total = 500
    queue = ReviewQueue(lease_seconds=3600)
    entries = [Entry(id=f"c-{i:03d}", text=f"texto {i}") for i in range(total)]
    queue.enqueue(
        (
            e,
            Annotation(
                entry_id=e.id, tag=MULTI[i % 4], explanation="motivo",
                raw_response="'IRONÍA' *motivo*", model_id="mock", created_at=0.0,
            ),
        )
        for i, e in enumerate(entries)
    )

    held = set()
    held_lock = threading.Lock()
    served: list[str] = []
    violations: list[str] = []

    def check_conservation():
        counts = queue.counts()
        if counts["pending"] + counts["assigned"] + counts["resolved"] != counts["total"]:
            violations.append(f"conservation broken: {counts}")

    def reviewer(name):
        while True:
            item = queue.next_pending(name)
            check_conservation()
            if item is None:
                if queue.counts()["resolved"] == total:
                    return
                continue
            with held_lock:
                if item.entry.id in held:
                    violations.append(f"double assignment of {item.entry.id}")
                held.add(item.entry.id)
                served.append(item.entry.id)
            queue.submit_verdict(item.entry.id, Verdict(Decision.ACCEPT, name, 0.0))
            with held_lock:
                held.discard(item.entry.id)
            check_conservation()

    threads = [threading.Thread(target=reviewer, args=(f"rev-{i}",)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=60)
        assert not t.is_alive(), "reviewer thread deadlocked"

    assert not violations, violations
    assert len(served) == total
    assert len(set(served)) == total  # each item assigned exactly once
    counts = queue.counts()
    assert counts == {"pending": 0, "assigned": 0, "resolved": total, "total": total}
