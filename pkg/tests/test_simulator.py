import pytest

from webnavkit.errors import (
    EpisodeFinished,
    EpisodeNotFinished,
    InvalidActionIndex,
    RecordGraphMismatch,
)
from webnavkit.fixtures import graph_from_adjacency
from webnavkit.simulator import (
    EpisodeRecord,
    finish_with_answer,
    observe,
    read_trajectory_log,
    reset,
    run_episode,
    step,
    write_trajectory_log,
)


def record_for(graph, path, record_id="r1"):
    return EpisodeRecord(
        record_id=record_id,
        site_id=graph.site_id,
        question="what is it",
        description="",
        answer="it",
        path=tuple(path),
    )


@pytest.fixture()
def sim_graph():
    return graph_from_adjacency(
        {"home": ["a", "b"], "a": ["t"], "b": ["t", "home"], "t": []},
        homepage_id="home",
    )


def test_reset_starts_at_homepage(sim_graph):
    state = reset(sim_graph, record_for(sim_graph, ["home", "a", "t"]))
    assert state.current_page_id == "home"
    assert state.t == 0
    assert not state.done
    assert state.history == []


def test_reset_rejects_disconnected_path(sim_graph):
    bad = record_for(sim_graph, ["home", "t", "a"])  # home->t has no button
    with pytest.raises(RecordGraphMismatch):
        reset(sim_graph, bad)


def test_reset_rejects_short_path(sim_graph):
    with pytest.raises(RecordGraphMismatch):
        reset(sim_graph, record_for(sim_graph, ["home", "a"]))


def test_reset_is_deterministic(sim_graph):
    record = record_for(sim_graph, ["home", "a", "t"])
    assert reset(sim_graph, record) == reset(sim_graph, record)


def test_observe_candidates_order_and_stop(sim_graph):
    state = reset(sim_graph, record_for(sim_graph, ["home", "a", "t"]))
    obs = observe(state, sim_graph)
    assert obs.page_id == "home"
    assert len(obs.candidates) == 3  # two buttons + stop
    assert [c.kind for c in obs.candidates] == ["click", "click", "stop"]
    assert obs.candidates[0].button.target_page_id == "a"


def test_observe_zero_button_page(sim_graph):
    state = reset(sim_graph, record_for(sim_graph, ["home", "a", "t"]))
    step(state, 0, sim_graph)  # -> a
    step(state, 0, sim_graph)  # -> t
    obs = observe(state, sim_graph)
    assert len(obs.candidates) == 1
    assert obs.candidates[0].is_stop


def test_observe_is_pure(sim_graph):
    state = reset(sim_graph, record_for(sim_graph, ["home", "a", "t"]))
    assert observe(state, sim_graph) == observe(state, sim_graph)


def test_step_click_and_stop(sim_graph):
    state = reset(sim_graph, record_for(sim_graph, ["home", "a", "t"]))
    step(state, 0, sim_graph)
    assert state.current_page_id == "a"
    assert state.t == 1
    step(state, 0, sim_graph)  # -> t
    step(state, 0, sim_graph)  # stop (only candidate)
    assert state.done
    assert state.stopped_page_id == "t"
    assert not state.forced_stop


def test_step_invalid_index(sim_graph):
    state = reset(sim_graph, record_for(sim_graph, ["home", "a", "t"]))
    with pytest.raises(InvalidActionIndex):
        step(state, 5, sim_graph)


def test_step_after_done_raises(sim_graph):
    state = reset(sim_graph, record_for(sim_graph, ["home", "a", "t"]))
    step(state, 2, sim_graph)  # immediate stop at home
    with pytest.raises(EpisodeFinished):
        step(state, 0, sim_graph)
    with pytest.raises(EpisodeFinished):
        observe(state, sim_graph)


def test_forced_stop_at_max_steps(cycle_graph):
    # Oracle: simulate a 10-click loop on the 2-page cycle.
    record = record_for(cycle_graph, ["home", "a", "b"])
    state = reset(cycle_graph, record, max_steps=10)
    clicks = 0
    while not state.done:
        step(state, 0, cycle_graph)
        clicks += 1
    assert clicks == 10
    assert state.forced_stop
    trajectory = finish_with_answer(state, "")
    assert trajectory.forced_stop
    assert trajectory.transitions == 10
    assert len(trajectory.action_indices) == 10  # no explicit stop action


def test_finish_requires_done(sim_graph):
    state = reset(sim_graph, record_for(sim_graph, ["home", "a", "t"]))
    with pytest.raises(EpisodeNotFinished):
        finish_with_answer(state, "answer")


def test_finish_attaches_answer_and_counts(sim_graph):
    state = reset(sim_graph, record_for(sim_graph, ["home", "a", "t"]))
    step(state, 0, sim_graph)
    step(state, 0, sim_graph)
    step(state, 0, sim_graph)  # stop at t
    trajectory = finish_with_answer(state, "the price is $12")
    assert trajectory.answer == "the price is $12"
    assert trajectory.visited == ("home", "a", "t")
    assert trajectory.stopped_page_id == "t"
    # explicit stop: one action more than transitions
    assert len(trajectory.action_indices) == trajectory.transitions + 1


def test_finish_accepts_empty_answer(sim_graph):
    state = reset(sim_graph, record_for(sim_graph, ["home", "a", "t"]))
    step(state, 2, sim_graph)
    trajectory = finish_with_answer(state, "")
    assert trajectory.answer == ""


def test_visited_pairs_are_graph_edges(sim_graph):
    record = record_for(sim_graph, ["home", "a", "t"])
    trajectory = run_episode(sim_graph, record, [1, 1, 0, 0, 0])  # home->b->home->a->t, stop
    for u, v in zip(trajectory.visited, trajectory.visited[1:]):
        assert any(b.target_page_id == v for b in sim_graph.page(u).buttons)


def test_replay_roundtrip(sim_graph, tmp_path):
    record = record_for(sim_graph, ["home", "a", "t"])
    first = run_episode(sim_graph, record, [1, 0, 0, 0], answer="x")
    replayed = run_episode(sim_graph, record, first.action_indices, answer="x")
    assert replayed == first
    log = tmp_path / "log.jsonl"
    write_trajectory_log([first], log)
    assert read_trajectory_log(log) == [first]
