"""Drive the HTTP session service end to end, as the human UI would.

Starts the FastAPI app in-process, creates a session, walks the gold path,
stops, submits an answer, and prints the per-episode score panel.
"""

import threading
import time
from pathlib import Path

import requests
import uvicorn

from webnavkit.datagen import MockLLMClient, StoredCaptioner, generate_records, sample_paths
from webnavkit.fixtures import make_fixture_site, make_mock_llm_responses
from webnavkit.service import ServiceConfig, create_app
from webnavkit.simulator import write_records
from webnavkit.sitegraph import load_site

workdir = Path("demo_output/site")
if not (workdir / "site.json").exists():
    make_fixture_site(workdir, n_products=24, seed=0)
    make_mock_llm_responses(workdir, n_products=24)
graph = load_site(workdir)
records, _ = generate_records(
    graph, sample_paths(graph, 10, seed=5),
    MockLLMClient(workdir / "mock_llm"), StoredCaptioner(), seed=5,
)
dataset = workdir / "dataset.jsonl"
write_records(records, dataset)

config = ServiceConfig(site_dir=workdir, dataset_path=dataset,
                       runs_dir=Path("demo_output/runs"), default_split="")
server = uvicorn.Server(uvicorn.Config(create_app(config), host="127.0.0.1",
                                       port=8765, log_level="warning"))
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.05)
base = "http://127.0.0.1:8765"
print(f"service up at {base}")

record = records[0]
session = requests.post(f"{base}/sessions", json={"record_id": record.record_id}).json()
sid = session["session_id"]
print(f"\nsession {sid}")
print(f"Q: {session['question']}")

obs = requests.get(f"{base}/sessions/{sid}/observation").json()
while not obs["done"]:
    print(f"  page {obs['page_id']} ({len(obs['candidates'])} candidates, "
          f"screenshot {obs['screenshot_url']})")
    position = obs["step"]
    if position < len(record.path) - 1:
        target = record.path[position + 1]
        page = graph.page(obs["page_id"])
        index = next(i for i, b in enumerate(page.buttons) if b.target_page_id == target)
    else:
        index = obs["candidates"][-1]["index"]  # stop
    obs = requests.post(f"{base}/sessions/{sid}/action", json={"index": index}).json()

result = requests.post(f"{base}/sessions/{sid}/answer", json={"text": record.answer}).json()
print("\nper-episode score panel:")
for key, value in result["scores"].items():
    print(f"  {key:8s} {value:.3f}")

server.should_exit = True
thread.join(timeout=5)
print("\nservice stopped")
