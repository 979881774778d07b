from pathlib import Path

import pytest

from webnavkit.datagen import (
    MockLLMClient,
    StoredCaptioner,
    assign_splits,
    build_prompt,
    default_rules,
    eligible_targets,
    generate_records,
    parse_qa_response,
    quality_sample,
    sample_paths,
)
from webnavkit.errors import NotEnoughTargets, UnparsableResponse
from webnavkit.fixtures import graph_from_adjacency
from webnavkit.simulator import validate_record
from webnavkit.sitegraph import shortest_path

GOLDEN = Path(__file__).parent / "golden" / "prompt_golden.txt"


# --- sample_paths ------------------------------------------------------------

def test_sample_paths_excludes_near_targets():
    graph = graph_from_adjacency(
        {"home": ["a"], "a": ["b"], "b": ["c"], "c": []}, homepage_id="home"
    )
    sampled = sample_paths(graph, 2, seed=1)
    targets = {target for _, target in sampled}
    assert targets <= {"b", "c"}  # "a" is one transition away
    for path, target in sampled:
        assert path == shortest_path(graph, "home", target)
        assert len(path) - 1 >= 2


def test_sample_paths_not_enough_targets():
    graph = graph_from_adjacency({"home": ["a"], "a": []}, homepage_id="home")
    with pytest.raises(NotEnoughTargets):
        sample_paths(graph, 1, seed=0)


def test_sample_paths_deterministic(fixture_graph):
    assert sample_paths(fixture_graph, 5, seed=9) == sample_paths(fixture_graph, 5, seed=9)
    assert sample_paths(fixture_graph, 24, seed=1) != sample_paths(fixture_graph, 24, seed=2)


def test_fixture_eligible_targets_are_products(fixture_graph):
    targets = eligible_targets(fixture_graph)
    assert len(targets) == 24
    assert all(t.startswith("product") for t in targets)


# --- build_prompt --------------------------------------------------------------

def test_prompt_contains_literals_in_order():
    prompt = build_prompt("a pair of grey socks", ["socks", "$12"], default_rules())
    first = prompt.index("There is a picture of the product with the caption of")
    second = prompt.index("After that, here are all the words that appear on the website:")
    third = prompt.index(
        "Lastly, I will give the following instructions, "
        "and you will be strictly following the instructions:"
    )
    assert first < second < third
    assert "a pair of grey socks" in prompt
    assert "socks $12" in prompt


def test_prompt_empty_caption_keeps_template():
    prompt = build_prompt("", ["x"], ["rule one"])
    assert "There is a picture of the product with the caption of\n\n" in prompt


def test_prompt_is_byte_deterministic():
    args = ("cap", ["w1", "w2"], default_rules())
    assert build_prompt(*args) == build_prompt(*args)


def test_prompt_matches_golden_file():
    prompt = build_prompt("a pair of grey socks", ["socks", "$12"], default_rules())
    assert prompt.encode() == GOLDEN.read_bytes()


def test_default_rules_shape():
    rules = default_rules()
    assert len(rules) == 7
    assert rules[0].startswith("Provide 3 questions")
    assert any('"sign in"' in r for r in rules)


# --- parse_qa_response -----------------------------------------------------------

def test_parse_single_inline_pair():
    pairs = parse_qa_response("Q1: What is the price? A1: $12")
    assert len(pairs) == 1
    assert pairs[0].question == "What is the price?"
    assert pairs[0].answer == "$12"


def test_parse_three_pairs_from_mock_fixture(fixture_site_dir):
    client = MockLLMClient(fixture_site_dir / "mock_llm")
    reply = client.complete("ignored", context_id="product00")
    pairs = parse_qa_response(reply, source_page_id="product00")
    assert len(pairs) == 3
    assert pairs[0].question == "What is the price of the Crimson Wool Socks?"
    assert pairs[0].answer == "$9.00"
    assert pairs[1].question == "What sizes are available for the Crimson Wool Socks?"
    assert pairs[1].answer == "S, M, L"
    assert pairs[2].question == "What material is the Crimson Wool Socks made of?"
    assert pairs[2].answer == "wool"
    assert all(p.source_page_id == "product00" for p in pairs)


def test_parse_numbered_and_quoted_styles():
    reply = '1. Q: "How much?"\n   A: "$5"\n2. Question 2: What color?\nAnswer 2: red'
    pairs = parse_qa_response(reply)
    assert [(p.question, p.answer) for p in pairs] == [
        ("How much?", "$5"),
        ("What color?", "red"),
    ]


def test_parse_prose_raises():
    with pytest.raises(UnparsableResponse):
        parse_qa_response("The socks are nice and warm. You should buy them.")


# --- generate_records -----------------------------------------------------------

class StubLLM:
    def __init__(self, replies):
        self.replies = replies

    def complete(self, prompt, *, context_id=""):
        return self.replies[context_id]


class StubCaptioner:
    def caption(self, page):
        return f"caption of {page.page_id}"


def hub_graph(n_targets):
    adjacency = {"home": ["hub"], "hub": [f"t{i}" for i in range(n_targets)]}
    for i in range(n_targets):
        adjacency[f"t{i}"] = []
    return graph_from_adjacency(adjacency, homepage_id="home")


def test_generate_three_records_per_target(fixture_graph, fixture_site_dir):
    paths = sample_paths(fixture_graph, 1, seed=3)
    records, report = generate_records(
        fixture_graph,
        paths,
        MockLLMClient(fixture_site_dir / "mock_llm"),
        StoredCaptioner(),
    )
    assert report.generated == 3
    assert len({r.path for r in records}) == 1
    for record in records:
        validate_record(fixture_graph, record)


def test_generate_fills_description_on_duplicate_questions():
    graph = hub_graph(3)
    replies = {
        "t0": "Q: What is the price? A: $1",
        "t1": "Q: What is the price? A: $2",
        "t2": "Q: What color is it? A: red",
    }
    paths = [(shortest_path(graph, "home", t), t) for t in ["t0", "t1", "t2"]]
    records, _ = generate_records(graph, paths, StubLLM(replies), StubCaptioner())
    by_target = {r.path[-1]: r for r in records}
    assert by_target["t0"].description == "caption of t0"
    assert by_target["t1"].description == "caption of t1"
    assert by_target["t2"].description == ""


def test_generate_skips_failing_targets():
    graph = hub_graph(2)
    replies = {"t0": "Q: ok? A: yes", "t1": "no markers at all"}
    paths = [(shortest_path(graph, "home", t), t) for t in ["t0", "t1"]]
    records, report = generate_records(graph, paths, StubLLM(replies), StubCaptioner())
    assert len(records) == 1
    assert report.skipped and report.skipped[0][0] == "t1"


def test_split_counts_and_disjoint_paths_over_100_records():
    graph = hub_graph(34)
    replies = {}
    for i in range(33):
        replies[f"t{i}"] = (
            f"Q1: q-price-{i}? A1: ${i}\n"
            f"Q2: q-size-{i}? A2: M\n"
            f"Q3: q-material-{i}? A3: wool"
        )
    replies["t33"] = "Q1: q-last? A1: one"
    paths = [(shortest_path(graph, "home", t), t) for t in sorted(replies)]
    records, _ = generate_records(graph, paths, StubLLM(replies), StubCaptioner(), seed=5)
    assert len(records) == 100
    counts = {"train": 0, "val": 0, "test": 0}
    split_paths = {"train": set(), "val": set(), "test": set()}
    for record in records:
        counts[record.split] += 1
        split_paths[record.split].add(record.path)
    assert abs(counts["train"] - 60) <= 1
    assert abs(counts["val"] - 10) <= 1
    assert abs(counts["test"] - 30) <= 1
    assert sum(counts.values()) == 100
    assert not (split_paths["train"] & split_paths["val"])
    assert not (split_paths["train"] & split_paths["test"])
    assert not (split_paths["val"] & split_paths["test"])


def test_assign_splits_deterministic():
    groups = [(f"g{i}", 3) for i in range(20)]
    assert assign_splits(groups, seed=1) == assign_splits(groups, seed=1)
    assert assign_splits(groups, seed=1) != assign_splits(groups, seed=2)


def test_quality_sample_per_site():
    graph = hub_graph(3)
    replies = {f"t{i}": f"Q: q{i}? A: a{i}" for i in range(3)}
    paths = [(shortest_path(graph, "home", t), t) for t in sorted(replies)]
    records, _ = generate_records(graph, paths, StubLLM(replies), StubCaptioner())
    sample = quality_sample(records, k=2, seed=0)
    assert len(sample) == 2
    assert quality_sample(records, k=2, seed=0) == sample
