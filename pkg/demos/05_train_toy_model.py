"""Train the toy navigation-and-answering model on a few records.

Runs a short imitation-learning loop (teacher forcing on the gold paths),
then decodes an answer and verifies gradients with central differences.
A serious overfitting run lives in the acceptance tests; this demo keeps
iteration counts small.
"""

from pathlib import Path

from webnavkit.datagen import MockLLMClient, StoredCaptioner, generate_records, sample_paths
from webnavkit.fixtures import graph_from_adjacency, make_fixture_site, make_mock_llm_responses
from webnavkit.model import (
    ModelConfig,
    SiteAssets,
    decode_answer,
    init_params,
    init_state,
    nav_step,
    page_button_tokens,
    screenshot_tokens_from_patches,
    vocab_from_dataset,
)
from webnavkit.simulator import EpisodeRecord
from webnavkit.sitegraph import load_site
from webnavkit.train import TrainConfig, grad_check, train

workdir = Path("demo_output/site")
if not (workdir / "site.json").exists():
    make_fixture_site(workdir, n_products=24, seed=0)
    make_mock_llm_responses(workdir, n_products=24)
graph = load_site(workdir)
paths = sample_paths(graph, 5, seed=1)
records, _ = generate_records(
    graph, paths, MockLLMClient(workdir / "mock_llm"), StoredCaptioner(), seed=1
)
records = records[:5]

config = ModelConfig(dim=32, heads=4)
vocab = vocab_from_dataset(records, graph)
params = init_params(config, len(vocab), seed=0)
assets = SiteAssets(workdir, config)
print(f"{len(records)} records, vocab {len(vocab)}, dim {config.dim}")

history = train(
    records, graph, params,
    vocab=vocab, model_config=config,
    config=TrainConfig(learning_rate=2e-3, iterations=150, batch_size=4, seed=0),
    assets=assets,
)
print(f"loss: {history[0].loss:.3f} -> {history[-1].loss:.3f} over {len(history)} steps")

record = records[0]
state, language = init_state(record.question, record.description, params, vocab, config)
for page_id in record.path:
    page = graph.page(page_id)
    shot = screenshot_tokens_from_patches(assets.screenshot_patches(page), params)
    buttons = page_button_tokens(page, params, vocab, config, assets)
    state, probs = nav_step(state, language, shot, buttons, params, config)
print(f"\nQ: {record.question}")
print(f"gold answer:    {record.answer!r}")
print(f"decoded answer: {decode_answer(state, params, vocab, config)!r}")

print("\ngradient check on a dim-16 model (central differences, long double):")
small = ModelConfig(dim=16, heads=2, ffn_mult=2, max_text_len=16, max_answer_len=8)
toy_graph = graph_from_adjacency({"home": ["a"], "a": ["t"], "t": []}, "home")
toy_record = EpisodeRecord("gc", "toy", "find t", "", "t page", ("home", "a", "t"))
toy_vocab = vocab_from_dataset([toy_record], toy_graph)
err = grad_check(
    init_params(small, len(toy_vocab), seed=0), toy_record, toy_graph,
    vocab=toy_vocab, model_config=small, n_coords=100,
)
print(f"max relative error over 100+ coordinates: {err:.2e}")
