"""Evaluate baseline agents on a generated dataset and print the report table.

The oracle follows gold paths (the score ceiling), the random agent clicks
blindly with a stop length drawn from 3..8, and the greedy agent follows
text overlap with the question.
"""

from pathlib import Path

from webnavkit.datagen import MockLLMClient, StoredCaptioner, generate_records, sample_paths
from webnavkit.fixtures import make_fixture_site, make_mock_llm_responses
from webnavkit.harness import make_agent, run_eval
from webnavkit.metrics import format_report_table
from webnavkit.sitegraph import load_site

workdir = Path("demo_output/site")
if not (workdir / "site.json").exists():
    make_fixture_site(workdir, n_products=24, seed=0)
    make_mock_llm_responses(workdir, n_products=24)
graph = load_site(workdir)
paths = sample_paths(graph, 15, seed=3)
records, _ = generate_records(
    graph, paths, MockLLMClient(workdir / "mock_llm"), StoredCaptioner(), seed=3
)
print(f"evaluating on {len(records)} records\n")

for kind in ("oracle", "greedy", "random"):
    agent = make_agent(kind, seed=0)
    result = run_eval(agent, records, graph, out_dir=Path("demo_output/runs") / kind,
                      label=kind)
    print(format_report_table(result.report, label=kind))
    print()

print("trajectory logs and reports written under demo_output/runs/<agent>/")
