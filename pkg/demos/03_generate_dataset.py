"""Generate a benchmark dataset offline: paths -> prompts -> QA -> records.

The LLM is mocked with canned responses so the pipeline runs without
network access; swap in HttpLLMClient (LLM_ENDPOINT / LLM_API_KEY) for a
real model.
"""

from collections import Counter
from pathlib import Path

from webnavkit.datagen import (
    MockLLMClient,
    StoredCaptioner,
    build_prompt,
    default_rules,
    generate_records,
    sample_paths,
)
from webnavkit.fixtures import make_fixture_site, make_mock_llm_responses
from webnavkit.simulator import write_records
from webnavkit.sitegraph import load_site

workdir = Path("demo_output/site")
if not (workdir / "site.json").exists():
    make_fixture_site(workdir, n_products=24, seed=0)
make_mock_llm_responses(workdir, n_products=24, pairs_per_product=3)
graph = load_site(workdir)

paths = sample_paths(graph, n=12, seed=7)
print(f"sampled {len(paths)} ground-truth paths "
      f"(every target is at least 2 transitions from the homepage)")

page = graph.page(paths[0][1])
prompt = build_prompt(page.captions[0] if page.captions else "",
                      list(page.word_list), default_rules())
print("\nthe assembled QA-generation prompt for the first target:")
print("-" * 72)
print(prompt[:400] + " ...")
print("-" * 72)

records, report = generate_records(
    graph, paths,
    MockLLMClient(workdir / "mock_llm"),
    StoredCaptioner(),
    seed=7,
)
print(f"\ngenerated {report.generated} records "
      f"({len(report.skipped)} targets skipped)")

splits = Counter(r.split for r in records)
print(f"split sizes (60/10/30 by records, disjoint paths): {dict(splits)}")

print("\nfirst record:")
r = records[0]
print(f"  Q: {r.question}")
print(f"  A: {r.answer}")
print(f"  D: {r.description!r}")
print(f"  path: {' -> '.join(r.path)}  split={r.split}")

out = workdir / "dataset.jsonl"
write_records(records, out)
print(f"\nwrote {out}")
