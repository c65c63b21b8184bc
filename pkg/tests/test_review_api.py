import pytest
from fastapi.testclient import TestClient

from conftest import FakeClock
from ironia.corpus import Entry, Label
from ironia.gateway import Annotation
from ironia.review import ReviewQueue
from ironia.review_api import create_app


def annotation_for(entry, tag=Label.IRONIA):
    return Annotation(
        entry_id=entry.id,
        tag=tag,
        explanation=f"motivo {entry.id}",
        raw_response=f"'{tag.value}' *motivo {entry.id}*",
        model_id="mock",
        created_at=0.0,
    )


@pytest.fixture
def service():
    clock = FakeClock()
    queue = ReviewQueue(clock=clock)
    entries = [Entry(id=f"w-{i}", text=f"texto {i}") for i in range(3)]
    queue.enqueue((e, annotation_for(e)) for e in entries)
    return TestClient(create_app(queue)), queue, clock


class TestQueueNext:
    def test_serves_items_then_204(self, service):
        client, queue, _ = service
        seen = set()
        for _ in range(3):
            response = client.get("/api/queue/next", params={"reviewer": "ana"})
            assert response.status_code == 200
            payload = response.json()
            assert "server_now" in payload
            assert payload["pending"] == 2 - len(seen)
            item = payload["item"]
            assert item["status"] == "assigned"
            assert item["annotation"]["explanation"]
            seen.add(item["entry"]["id"])
        assert len(seen) == 3
        assert client.get("/api/queue/next", params={"reviewer": "ana"}).status_code == 204


class TestVerdicts:
    def take(self, client, reviewer="ana"):
        return client.get("/api/queue/next", params={"reviewer": reviewer}).json()["item"]

    def test_accept_flow(self, service):
        client, queue, _ = service
        item = self.take(client)
        response = client.post(
            "/api/verdicts",
            json={"entry_id": item["entry"]["id"], "decision": "accept", "reviewer_id": "ana"},
        )
        assert response.status_code == 200
        assert response.json()["final_tag"] == "IRONÍA"

    def test_override_flow(self, service):
        client, _, _ = service
        item = self.take(client)
        response = client.post(
            "/api/verdicts",
            json={
                "entry_id": item["entry"]["id"],
                "decision": "override",
                "override_tag": "NEGATIVO",
                "reviewer_id": "ana",
            },
        )
        assert response.status_code == 200
        assert response.json()["final_tag"] == "NEGATIVO"

    def test_unknown_entry_404(self, service):
        client, _, _ = service
        response = client.post(
            "/api/verdicts",
            json={"entry_id": "missing", "decision": "accept", "reviewer_id": "ana"},
        )
        assert response.status_code == 404

    def test_double_resolution_409(self, service):
        client, _, _ = service
        item = self.take(client)
        body = {"entry_id": item["entry"]["id"], "decision": "accept", "reviewer_id": "ana"}
        assert client.post("/api/verdicts", json=body).status_code == 200
        assert client.post("/api/verdicts", json=body).status_code == 409

    def test_override_same_as_machine_tag_4xx(self, service):
        client, _, _ = service
        item = self.take(client)
        response = client.post(
            "/api/verdicts",
            json={
                "entry_id": item["entry"]["id"],
                "decision": "override",
                "override_tag": item["annotation"]["tag"],
                "reviewer_id": "ana",
            },
        )
        assert response.status_code == 400

    def test_override_without_tag_4xx(self, service):
        client, _, _ = service
        item = self.take(client)
        response = client.post(
            "/api/verdicts",
            json={
                "entry_id": item["entry"]["id"],
                "decision": "override",
                "reviewer_id": "ana",
            },
        )
        assert response.status_code == 400

    def test_unknown_decision_4xx(self, service):
        client, _, _ = service
        item = self.take(client)
        response = client.post(
            "/api/verdicts",
            json={"entry_id": item["entry"]["id"], "decision": "maybe", "reviewer_id": "ana"},
        )
        assert response.status_code == 400

    def test_stale_reviewer_409(self, service):
        client, _, _ = service
        item = self.take(client, reviewer="ana")
        response = client.post(
            "/api/verdicts",
            json={"entry_id": item["entry"]["id"], "decision": "accept", "reviewer_id": "beto"},
        )
        assert response.status_code == 409


class TestStatsAndEntries:
    def test_stats_shape_and_progress(self, service):
        client, _, _ = service
        item = client.get("/api/queue/next", params={"reviewer": "ana"}).json()["item"]
        client.post(
            "/api/verdicts",
            json={"entry_id": item["entry"]["id"], "decision": "accept", "reviewer_id": "ana"},
        )
        stats = client.get("/api/stats").json()

        agreement = stats["agreement"]
        # Unreadable appears as its own human-only field, never as a machine tag.
        assert "unreadable_pct" in agreement
        assert "unreadable" not in {k.lower() for k in agreement["machine_pct"]}
        assert agreement["total"] == 1
        assert agreement["machine_pct"]["IRONÍA"] == 100.0

        progress = stats["progress"]
        assert (
            progress["pending"] + progress["assigned"] + progress["resolved"]
            == progress["total"]
        )
        assert stats["distribution"]["total"] == 1

    def test_stats_empty_queue(self):
        client = TestClient(create_app(ReviewQueue()))
        stats = client.get("/api/stats").json()
        assert stats["agreement"]["total"] == 0
        assert stats["distribution"] is None

    def test_get_entry(self, service):
        client, _, _ = service
        response = client.get("/api/entries/w-0")
        assert response.status_code == 200
        assert response.json()["entry"]["id"] == "w-0"
        assert client.get("/api/entries/nope").status_code == 404
