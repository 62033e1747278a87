from fastapi.testclient import TestClient
from backend.app import create_app


def test_metrics_endpoint_available():
    app = create_app()
    client = TestClient(app)
    r = client.get("/metrics")
    assert r.status_code == 200
    # basic metric exposed by instrumentator
    assert "http_requests_total" in r.text or "http_server_requests_seconds_count" in r.text


def test_task_counters_exposed():
    app = create_app()
    client = TestClient(app)
    client.post("/api/ground-state", json={"N": 1, "p": 3})
    client.post("/api/evaluate", json={"N": 3, "p": 3, "J": "1 +", "point": [1, 0, 0]})
    text = client.get("/metrics").text
    assert 'spikelab_tasks_total{task="ground-state"}' in text
    assert 'spikelab_task_failures_total{task="evaluate",kind="ExpressionSyntaxError"}' in text
