import numpy as np
import pytest

from ironia.corpus import Dataset, Entry, Mode
from ironia.review import Decision, ReviewQueue, Verdict
from ironia.synthetic import synthetic_primary, synthetic_review_batch


class FakeClock:
    """Manually advanced clock for lease-expiry tests."""

    def __init__(self, start: float = 1000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += seconds


def make_entries(labels, prefix="e"):
    return tuple(
        Entry(id=f"{prefix}-{i}", text=f"texto de prueba numero {i}", label=label)
        for i, label in enumerate(labels, start=1)
    )


def make_dataset(labels, mode=Mode.MULTICLASS, name="fixture"):
    return Dataset(name=name, mode=mode, entries=make_entries(labels))


def resolve_case(queue: ReviewQueue, case, reviewer="rev-1"):
    """Submit the verdict a ReviewCase prescribes for its entry."""
    if case.final_tag is None:
        verdict = Verdict(Decision.UNREADABLE, reviewer, queue.clock())
    elif case.final_tag == case.machine_tag:
        verdict = Verdict(Decision.ACCEPT, reviewer, queue.clock())
    else:
        verdict = Verdict(
            Decision.OVERRIDE, reviewer, queue.clock(), override_tag=case.final_tag
        )
    queue.submit_verdict(case.entry.id, verdict)


def resolved_queue_from_cases(cases, clock=None) -> ReviewQueue:
    from ironia.gateway import Annotation

    queue = ReviewQueue(clock=clock) if clock else ReviewQueue()
    queue.enqueue(
        (
            case.entry,
            Annotation(
                entry_id=case.entry.id,
                tag=case.machine_tag,
                explanation=case.explanation,
                raw_response=case.response,
                model_id="mock",
                created_at=0.0,
            ),
        )
        for case in cases
    )
    by_id = {case.entry.id: case for case in cases}
    for _ in cases:
        item = queue.next_pending("rev-1")
        assert item is not None
        resolve_case(queue, by_id[item.entry.id])
    return queue


@pytest.fixture(scope="session")
def primary_corpus():
    return synthetic_primary()


@pytest.fixture(scope="session")
def review_cases():
    return synthetic_review_batch()


@pytest.fixture(scope="session")
def resolved_queue(review_cases):
    return resolved_queue_from_cases(review_cases)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(report, "when", "call") == "call":
                rows.append((nodeid.split("::")[-1], outcome == "passed"))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, ok in rows:
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}")
