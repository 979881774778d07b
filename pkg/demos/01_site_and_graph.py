"""Build a synthetic website snapshot and parse it into a navigation graph.

Walks through: generating a fixture shopping site on disk, loading it into
an immutable page graph, inspecting buttons, computing shortest paths, and
exporting graph.json.
"""

from pathlib import Path

from webnavkit.fixtures import make_fixture_site
from webnavkit.sitegraph import load_site, save_graph, shortest_path

workdir = Path("demo_output/site")
make_fixture_site(workdir, n_products=24, seed=0)
print(f"wrote snapshot to {workdir}/ (pages/, assets/, screenshots/, site.json)")

graph = load_site(workdir)
print(f"\nparsed graph: {len(graph.pages)} pages, {graph.edge_count} edges, "
      f"homepage = {graph.homepage_id!r}")

home = graph.page("home")
print("\nhomepage buttons (document order):")
for i, button in enumerate(home.buttons):
    print(f"  [{i}] {button.description!r} -> {button.target_page_id}")

product = graph.page("product07")
print(f"\nproduct07 cleaned words: {' '.join(product.word_list[:12])} ...")
print(f"product07 captions: {product.captions}")

path = shortest_path(graph, "home", "product07")
print(f"\nshortest path home -> product07: {' -> '.join(path)}")
print("(ties break toward the earliest button on the page, so reruns are identical)")

out = workdir / "graph.json"
save_graph(graph, out)
print(f"\nexported {out} ({out.stat().st_size} bytes)")
