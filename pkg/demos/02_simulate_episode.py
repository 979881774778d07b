"""Drive one episode by hand through the simulator state machine.

Shows the observation/action loop: candidates are always the current
page's buttons plus the stop action, and the trajectory records everything
the metrics need.
"""

from pathlib import Path

from webnavkit.fixtures import make_fixture_site
from webnavkit.simulator import EpisodeRecord, finish_with_answer, observe, reset, step
from webnavkit.sitegraph import load_site

workdir = Path("demo_output/site")
if not (workdir / "site.json").exists():
    make_fixture_site(workdir, n_products=24, seed=0)
graph = load_site(workdir)

record = EpisodeRecord(
    record_id="demo-episode",
    site_id=graph.site_id,
    question="What is the price of the Ivory Linen Scarves?",
    description="a product photo of a ivory linen scarves item",
    answer="$30.39",
    path=("home", "cat3", "product03"),
)

state = reset(graph, record)
print(f"Q: {record.question}")
print(f"start at {state.current_page_id!r}\n")

while not state.done:
    obs = observe(state, graph)
    print(f"t={state.t} page={obs.page_id}")
    for i, candidate in enumerate(obs.candidates):
        label = "[stop]" if candidate.is_stop else candidate.button.description
        print(f"    [{i}] {label}")
    # follow the gold path while it lasts, then stop
    position = state.t
    if position < len(record.path) - 1:
        target = record.path[position + 1]
        choice = next(
            i for i, c in enumerate(obs.candidates[:-1])
            if c.button.target_page_id == target
        )
    else:
        choice = obs.stop_index
    print(f"    -> choosing [{choice}]\n")
    step(state, choice, graph)

trajectory = finish_with_answer(state, record.answer)
print("trajectory:")
print(f"  visited      = {' -> '.join(trajectory.visited)}")
print(f"  stopped on   = {trajectory.stopped_page_id}")
print(f"  transitions  = {trajectory.transitions}")
print(f"  answer       = {trajectory.answer!r}")
