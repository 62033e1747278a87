import pytest
from fastapi import FastAPI
from fastapi.testclient import TestClient

from backend.app import create_app
from backend.repositories import InMemoryRunRepository
from backend.routers import compute as compute_router
from backend.routers import reports as reports_router
from backend.services import ComputationService


@pytest.fixture()
def app_with_fake_repo():
    app: FastAPI = create_app()
    fake_repo = InMemoryRunRepository()

    async def get_fake_service():
        return ComputationService(fake_repo)

    app.dependency_overrides[compute_router.get_service] = get_fake_service
    app.dependency_overrides[reports_router.get_repo] = lambda: fake_repo
    return app, fake_repo


def test_ground_state_and_run_log(app_with_fake_repo):
    app, repo = app_with_fake_repo
    client = TestClient(app)

    r = client.post("/api/ground-state", json={"N": 1, "p": 3, "radii": [0.0, 1.0]})
    assert r.status_code == 200
    data = r.json()
    assert data["alpha"] == pytest.approx(2.0**0.5, abs=1e-8)
    assert data["values"][1] == pytest.approx(2.0**0.5 / 1.5430806348152437, rel=1e-6)

    r2 = client.get("/reports/runs")
    assert r2.status_code == 200
    runs = r2.json()
    assert runs["total"] == 1
    assert runs["runs"][0]["task"] == "ground-state"
    assert len(runs["runs"][0]["config_sha256"]) == 64


def test_evaluate_on_unit_ball(app_with_fake_repo):
    app, _ = app_with_fake_repo
    client = TestClient(app)
    body = {"N": 3, "p": 3, "V": "1+x1^2", "point": [2.0, 0.0, 0.0], "assumption_samples": 1000}
    r = client.post("/api/evaluate", json=body)
    assert r.status_code == 200
    data = r.json()
    assert data["Q"] == pytest.approx([1.0, 0.0, 0.0])
    assert data["H"] == pytest.approx(1.0)
    assert data["gamma"] == pytest.approx(2.0**0.5)
    assert data["sigma_bar"] is None


def test_constants_with_unit_coefficients(app_with_fake_repo):
    app, _ = app_with_fake_repo
    client = TestClient(app)
    r = client.post("/api/constants", json={"N": 3, "p": 3, "point": [0, 0, 1], "assumption_samples": 1000})
    assert r.status_code == 200
    k = r.json()["constants"]
    assert k["k4"] == pytest.approx(-k["c1"])
    assert r.json()["halfspace_mass"] > 0.0


def test_precondition_errors_map_to_422(app_with_fake_repo):
    app, repo = app_with_fake_repo
    client = TestClient(app)
    # schema: supercritical exponent
    assert client.post("/api/ground-state", json={"N": 3, "p": 6}).status_code == 422
    assert client.post("/api/evaluate", json={"N": 3, "p": 5, "point": [1, 0, 0]}).status_code == 422
    # library: non-positive potential
    r = client.post(
        "/api/evaluate",
        json={"N": 3, "p": 3, "V": "x1", "point": [1, 0, 0], "assumption_samples": 1000},
    )
    assert r.status_code == 422
    assert "not positive" in r.json()["detail"]
    # syntax error carries the offset
    r = client.post("/api/evaluate", json={"N": 3, "p": 3, "J": "1 +", "point": [1, 0, 0]})
    assert r.status_code == 422
    assert "offset 3" in r.json()["detail"]


def test_predict_and_usage(app_with_fake_repo):
    app, _ = app_with_fake_repo
    client = TestClient(app)
    body = {"N": 3, "p": 3, "V": "1+x1^2", "seeds": 40, "assumption_samples": 1000}
    r = client.post("/api/predict", json=body)
    assert r.status_code == 200
    data = r.json()
    assert data["function"] == "GAMMA"
    counted = [c for c in data["reports"] if c["counted"]]
    assert len(counted) == 2
    assert all(c["classification"] == "MAX" for c in counted)

    client.post("/api/ground-state", json={"N": 1, "p": 3})
    usage = client.get("/reports/usage").json()
    assert usage["total"] == 2
    assert {c["task"]: c["count"] for c in usage["counts"]} == {"predict": 1, "ground-state": 1}


def test_profile_cache_evicts_least_recently_used(monkeypatch):
    from backend import services

    solved = []

    def fake_solve(dimension, exponent, tol):
        solved.append((dimension, exponent))
        return object()

    monkeypatch.setattr(services, "solve_ground_state", fake_solve)
    monkeypatch.setattr(services, "_profiles", services.OrderedDict())
    monkeypatch.setenv("SPIKELAB_PROFILE_CACHE_SIZE", "3")

    first = services.cached_profile(1, 2.0, 1e-10)
    for p in (3.0, 4.0, 5.0, 6.0):
        services.cached_profile(1, p, 1e-10)
        services.cached_profile(1, 2.0, 1e-10)
        assert len(services._profiles) <= 3

    assert services.cached_profile(1, 2.0, 1e-10) is first
    assert solved.count((1, 2.0)) == 1
    services.cached_profile(1, 3.0, 1e-10)
    assert solved.count((1, 3.0)) == 2
    assert len(services._profiles) == 3
