import pytest
from fastapi.testclient import TestClient

from webnavkit.datagen import MockLLMClient, StoredCaptioner, generate_records, sample_paths
from webnavkit.harness import make_agent, run_eval
from webnavkit.metrics import compute_report, load_report
from webnavkit.service import ServiceConfig, create_app
from webnavkit.simulator import (
    Trajectory,
    read_trajectory_log,
    run_episode,
    write_records,
)
from webnavkit.taxonomy import toy_taxonomy


@pytest.fixture(scope="session")
def fixture_records(fixture_graph, fixture_site_dir):
    paths = sample_paths(fixture_graph, 12, seed=11)
    records, _ = generate_records(
        fixture_graph, paths,
        MockLLMClient(fixture_site_dir / "mock_llm"),
        StoredCaptioner(),
        seed=11,
    )
    write_records(records, fixture_site_dir / "dataset.jsonl")
    return records


# --- offline harness -------------------------------------------------------

def test_oracle_agent_upper_bound(fixture_graph, fixture_records):
    result = run_eval(make_agent("oracle"), fixture_records, fixture_graph)
    assert result.report.sr == 1.0
    assert result.report.osr == 1.0
    assert result.report.spl == 1.0
    assert result.report.wups00 == 1.0
    assert result.report.wups09 == 1.0
    assert result.report.failures == 0


def test_random_agent_near_zero(fixture_graph, fixture_records):
    result = run_eval(make_agent("random", seed=3), fixture_records, fixture_graph)
    assert result.report.sr < 0.3
    assert result.report.osr >= result.report.sr
    assert 3.0 <= result.report.tl <= 8.0


def test_run_eval_split_filter_and_outputs(tmp_path, fixture_graph, fixture_records):
    result = run_eval(
        make_agent("oracle"), fixture_records, fixture_graph,
        split="train", out_dir=tmp_path / "run1", label="oracle",
    )
    n_train = sum(1 for r in fixture_records if r.split == "train")
    assert result.report.n == n_train
    logged = read_trajectory_log(tmp_path / "run1" / "trajectories.jsonl")
    assert len(logged) == n_train
    saved = load_report(tmp_path / "run1" / "report.json")
    assert saved == result.report
    assert "SR" in (tmp_path / "run1" / "report.txt").read_text()


def test_report_recomputable_from_log(tmp_path, fixture_graph, fixture_records):
    # Reports are pure functions of the trajectory log.
    result = run_eval(
        make_agent("random", seed=5), fixture_records, fixture_graph,
        out_dir=tmp_path / "run2",
    )
    logged = read_trajectory_log(tmp_path / "run2" / "trajectories.jsonl")
    recomputed = compute_report(
        logged, {r.record_id: r for r in fixture_records}, fixture_graph, toy_taxonomy()
    )
    assert recomputed == result.report


def test_failing_agent_does_not_abort(fixture_graph, fixture_records):
    class BadAgent:
        def begin_episode(self, record, graph):
            pass

        def decide(self, obs):
            from webnavkit.agents import AgentDecision

            return AgentDecision(action_index=999)

        def forced_answer(self, page_id):
            return ""

    result = run_eval(BadAgent(), fixture_records[:3], fixture_graph)
    assert len(result.errors) == 3
    assert result.report.failures == 3
    assert result.report.n == 0


# --- HTTP service ------------------------------------------------------------

@pytest.fixture()
def client(tmp_path, fixture_site_dir, fixture_records):
    config = ServiceConfig(
        site_dir=fixture_site_dir,
        dataset_path=fixture_site_dir / "dataset.jsonl",
        runs_dir=tmp_path / "runs",
        default_split="",
        seed=1,
    )
    return TestClient(create_app(config))


def gold_action_indices(graph, record):
    indices = []
    for here, there in zip(record.path, record.path[1:]):
        page = graph.page(here)
        indices.append(next(i for i, b in enumerate(page.buttons)
                            if b.target_page_id == there))
    indices.append(len(graph.page(record.path[-1]).buttons))  # stop
    return indices


def test_session_happy_path(client, fixture_graph, fixture_records):
    record = fixture_records[0]
    created = client.post("/sessions", json={"record_id": record.record_id})
    assert created.status_code == 200
    payload = created.json()
    assert payload["question"] == record.question
    sid = payload["session_id"]

    obs = client.get(f"/sessions/{sid}/observation").json()
    assert obs["page_id"] == "home"
    assert obs["candidates"][-1]["kind"] == "stop"
    assert obs["screenshot_url"].startswith("/static/screenshots/")

    for index in gold_action_indices(fixture_graph, record):
        obs = client.post(f"/sessions/{sid}/action", json={"index": index}).json()
    assert obs["done"] is True

    answered = client.post(f"/sessions/{sid}/answer", json={"text": record.answer})
    assert answered.status_code == 200
    scores = answered.json()["scores"]
    assert scores["sr"] == 1.0
    assert scores["spl"] == 1.0
    assert scores["wups00"] == 1.0


def test_session_error_codes(client, fixture_records):
    record = fixture_records[0]
    sid = client.post("/sessions", json={"record_id": record.record_id}).json()["session_id"]

    bad = client.post(f"/sessions/{sid}/action", json={"index": 999})
    assert bad.status_code == 400
    assert "candidates" in bad.json()["detail"]

    early = client.post(f"/sessions/{sid}/answer", json={"text": "nope"})
    assert early.status_code == 409

    assert client.get("/sessions/nope/observation").status_code == 404
    assert client.post("/sessions", json={"record_id": "ghost"}).status_code == 404

    obs = client.get(f"/sessions/{sid}/observation").json()
    stop_index = obs["candidates"][-1]["index"]
    client.post(f"/sessions/{sid}/action", json={"index": stop_index})
    after = client.post(f"/sessions/{sid}/action", json={"index": 0})
    assert after.status_code == 409  # action on a finished episode


def test_static_screenshot_served(client):
    response = client.get("/static/screenshots/home.png")
    assert response.status_code == 200
    assert response.headers["content-type"] == "image/png"


def test_report_endpoint(client, tmp_path, fixture_graph, fixture_records):
    # tmp_path is shared with the client fixture, so this lands in the
    # service's runs dir.
    run_eval(
        make_agent("oracle"), fixture_records, fixture_graph,
        out_dir=tmp_path / "runs" / "oracle-run",
    )
    got = client.get("/reports/oracle-run")
    assert got.status_code == 200
    assert got.json()["sr"] == 1.0
    assert client.get("/reports/missing").status_code == 404


def test_api_replay_equals_offline(client, fixture_graph, fixture_records):
    """A logged interactive session replayed offline yields the same trajectory."""
    record = fixture_records[1]
    sid = client.post("/sessions", json={"record_id": record.record_id}).json()["session_id"]
    actions = gold_action_indices(fixture_graph, record)
    for index in actions:
        client.post(f"/sessions/{sid}/action", json={"index": index})
    online = client.post(f"/sessions/{sid}/answer", json={"text": "hello"}).json()
    offline = run_episode(fixture_graph, record, actions, answer="hello")
    assert Trajectory.from_json(online["trajectory"]) == offline


def test_auth_token_guard(tmp_path, fixture_site_dir, fixture_records):
    config = ServiceConfig(
        site_dir=fixture_site_dir,
        dataset_path=fixture_site_dir / "dataset.jsonl",
        runs_dir=tmp_path / "runs",
        auth_token="sekret",
        default_split="",
    )
    client = TestClient(create_app(config))
    denied = client.post("/sessions", json={})
    assert denied.status_code == 401
    allowed = client.post("/sessions", json={}, headers={"X-Auth-Token": "sekret"})
    assert allowed.status_code == 200
