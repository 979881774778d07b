import pytest

from webnavkit.fixtures import (
    graph_from_adjacency,
    make_fixture_site,
    make_mock_llm_responses,
)
from webnavkit.sitegraph import load_site


@pytest.fixture(scope="session")
def fixture_site_dir(tmp_path_factory):
    site_dir = tmp_path_factory.mktemp("site")
    make_fixture_site(site_dir, n_products=24, seed=0)
    make_mock_llm_responses(site_dir, n_products=24, pairs_per_product=3)
    return site_dir


@pytest.fixture(scope="session")
def fixture_graph(fixture_site_dir):
    return load_site(fixture_site_dir)


@pytest.fixture()
def chain_graph():
    # home -> a -> b -> c
    return graph_from_adjacency(
        {"home": ["a"], "a": ["b"], "b": ["c"], "c": []}, homepage_id="home"
    )


@pytest.fixture()
def diamond_graph():
    # home -> {a, b} -> t, with a listed before b on home
    return graph_from_adjacency(
        {"home": ["a", "b"], "a": ["t"], "b": ["t"], "t": []}, homepage_id="home"
    )


@pytest.fixture()
def cycle_graph():
    # two-page cycle reachable from home
    return graph_from_adjacency(
        {"home": ["a"], "a": ["b"], "b": ["a"]}, homepage_id="home"
    )
