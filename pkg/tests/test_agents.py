from pathlib import Path

import pytest

from webnavkit.agents import (
    GreedyAgent,
    LLMAgent,
    OracleAgent,
    RandomAgent,
    format_observation,
    parse_agent_reply,
)
from webnavkit.harness import run_agent_episode, run_eval
from webnavkit.sitegraph import Button, WebPage, build_graph
from webnavkit.simulator import Action, EpisodeRecord, Observation

GOLDEN = Path(__file__).parent / "golden" / "observation_golden.txt"


def obs_with(buttons, page_id="p"):
    candidates = tuple(Action.click(b) for b in buttons) + (Action.stop(),)
    return Observation(page_id=page_id, screenshot_ref="", candidates=candidates)


def page(page_id, buttons, words=(), raw_text=""):
    return WebPage(
        page_id=page_id,
        source_path="",
        screenshot_ref="",
        buttons=tuple(buttons),
        word_list=tuple(words),
        captions=(),
        raw_text=raw_text,
    )


# --- random agent ---------------------------------------------------------

def test_random_agent_clicks_single_button():
    agent = RandomAgent(seed=0)
    record = EpisodeRecord("r", "s", "q", "", "a", ("home", "a", "b"))
    agent.begin_episode(record, graph=None)
    obs = obs_with([Button("b", "only", "", "x")])
    decision = agent.decide(obs)
    assert decision.action_index == 0  # the only button


def test_random_agent_stops_at_drawn_step():
    agent = RandomAgent(seed=1)
    record = EpisodeRecord("r", "s", "q", "", "a", ("home", "a", "b"))
    agent.begin_episode(record, None)
    stop_len = agent.stop_len
    assert 3 <= stop_len <= 8
    obs = obs_with([Button("b", "x", "", "x"), Button("c", "y", "", "y")])
    clicks = 0
    while True:
        decision = agent.decide(obs)
        if decision.action_index == obs.stop_index:
            break
        clicks += 1
    assert clicks == stop_len
    assert decision.answer == ""


def test_random_agent_forced_stop_on_dead_end():
    agent = RandomAgent(seed=2)
    agent.begin_episode(EpisodeRecord("r", "s", "q", "", "a", ("h", "a", "b")), None)
    obs = obs_with([])  # zero buttons
    decision = agent.decide(obs)
    assert decision.action_index == obs.stop_index


def test_random_agent_reproducible_trajectories(fixture_graph):
    record = EpisodeRecord(
        "r", fixture_graph.site_id, "q", "", "a", ("home", "cat0", "product00")
    )
    one = run_agent_episode(RandomAgent(seed=7), fixture_graph, record)
    two = run_agent_episode(RandomAgent(seed=7), fixture_graph, record)
    assert one == two


# --- greedy agent ------------------------------------------------------------

@pytest.fixture()
def greedy_world():
    pages = [
        page("home", [Button("h0", "Socks category", "", "cat")], ("welcome", "shop")),
        page(
            "cat",
            [
                Button("c0", "Crimson Wool Socks", "", "prod"),
                Button("c1", "Blue Hat", "", "hat"),
            ],
            ("socks", "category"),
        ),
        page(
            "prod",
            [Button("p0", "Back Home", "", "home")],
            ("crimson", "wool", "socks", "price", "$12"),
            raw_text="Crimson Wool Socks. Price is $12.",
        ),
        page("hat", [], ("blue", "hat")),
    ]
    graph = build_graph(pages, "home")
    record = EpisodeRecord(
        "g", "s", "what is the price of the crimson wool socks", "", "$12",
        ("home", "cat", "prod"),
    )
    return graph, record


def test_greedy_picks_matching_button(greedy_world):
    graph, record = greedy_world
    agent = GreedyAgent()
    agent.begin_episode(record, graph)
    obs = obs_with(graph.page("cat").buttons, page_id="cat")
    assert agent.decide(obs).action_index == 0


def test_greedy_zero_overlap_first_candidate(greedy_world):
    graph, _ = greedy_world
    record = EpisodeRecord("g2", "s", "zz yy xx", "", "a", ("home", "cat", "prod"))
    agent = GreedyAgent()
    agent.begin_episode(record, graph)
    obs = obs_with(graph.page("cat").buttons, page_id="cat")
    assert agent.decide(obs).action_index == 0


def test_greedy_reaches_target_in_two_steps(greedy_world):
    # Hand-traced: home(->cat by overlap 1) -> cat(->prod by overlap 3) -> stop.
    graph, record = greedy_world
    trajectory = run_agent_episode(GreedyAgent(), graph, record)
    assert trajectory.visited == ("home", "cat", "prod")
    assert trajectory.stopped_page_id == "prod"
    assert trajectory.answer == "Crimson Wool Socks"
    result = run_eval(GreedyAgent(), [record], graph)
    assert result.report.sr == 1.0


# --- observation formatting -----------------------------------------------------

def test_format_observation_golden():
    obs = obs_with(
        [
            Button("b0", "Crimson Wool Socks", "assets/product00.png", "product00"),
            Button("b1", "", "assets/product05.png", "product05"),
        ],
        page_id="cat1",
    )
    text = format_observation(obs, history=["home", "cat1"])
    assert text.encode() == GOLDEN.read_bytes()


def test_format_observation_counts():
    obs = obs_with([Button("a", "A", "", "x"), Button("b", "B", "", "y")])
    text = format_observation(obs, history=[])
    assert text.count("\n[") == 3  # two buttons + stop entry
    assert "[2] [stop]" in text
    assert "History: (start)" in text


# --- LLM agent ---------------------------------------------------------------------

class ScriptedClient:
    def __init__(self, replies):
        self.replies = list(replies)
        self.prompts = []

    def complete(self, prompt, *, context_id=""):
        self.prompts.append(prompt)
        return self.replies.pop(0)


def test_parse_agent_reply():
    assert parse_agent_reply("[2]", 4) == (2, None)
    assert parse_agent_reply("I pick [ 1 ] because", 4) == (1, None)
    assert parse_agent_reply("[stop] $12", 4) == (3, "$12")
    assert parse_agent_reply("[9]", 4) is None
    assert parse_agent_reply("no brackets", 4) is None


def test_llm_agent_click_and_stop(greedy_world):
    graph, record = greedy_world
    client = ScriptedClient(["[0]", "[0]", "[stop] $12"])
    agent = LLMAgent(client)
    trajectory = run_agent_episode(agent, graph, record)
    assert trajectory.visited == ("home", "cat", "prod")
    assert trajectory.answer == "$12"
    assert "Question: what is the price of the crimson wool socks" in client.prompts[0]
    assert "Candidates:" in client.prompts[0]


def test_llm_agent_gibberish_falls_back_to_stop(greedy_world):
    graph, record = greedy_world
    client = ScriptedClient(["???", "still nothing"])
    agent = LLMAgent(client)
    agent.begin_episode(record, graph)
    obs = obs_with(graph.page("home").buttons, page_id="home")
    decision = agent.decide(obs)
    assert decision.action_index == obs.stop_index
    assert decision.fallback
    assert decision.answer == "still nothing"
    assert len(client.prompts) == 2  # one retry


# --- oracle ---------------------------------------------------------------------------

def test_oracle_agent_perfect(fixture_graph):
    record = EpisodeRecord(
        "r", fixture_graph.site_id, "q", "", "the answer",
        ("home", "cat0", "product00"),
    )
    trajectory = run_agent_episode(OracleAgent(), fixture_graph, record)
    assert trajectory.visited == record.path
    assert trajectory.stopped_page_id == "product00"
    assert trajectory.answer == "the answer"
