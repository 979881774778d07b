"""Tour of the metric suite: Wu-Palmer, WUPS thresholds, BLEU, ROUGE-L, and
the navigation scores (SR / OSR / SPL / TL)."""

from webnavkit.fixtures import graph_from_adjacency
from webnavkit.metrics import bleu, nav_metrics, rouge_l, wups_score
from webnavkit.simulator import EpisodeRecord, Trajectory
from webnavkit.taxonomy import toy_taxonomy, wup

tax = toy_taxonomy()
print("toy taxonomy: root -> animal -> {dog, cat}")
print(f"  wup(dog, dog)  = {wup(tax, 'dog', 'dog'):.4f}")
print(f"  wup(dog, cat)  = {wup(tax, 'dog', 'cat'):.4f}   (= 2*2/(3+3))")
print(f"  wup(dog, root) = {wup(tax, 'dog', 'root'):.4f}")

print("\nWUPS thresholding (scores below the threshold are scaled by 0.1):")
print(f"  'dog' vs 'cat' @0.0 = {wups_score('dog', 'cat', tax, 0.0):.4f}")
print(f"  'dog' vs 'cat' @0.9 = {wups_score('dog', 'cat', tax, 0.9):.4f}")
print(f"  '$12' vs '$12' @0.9 = {wups_score('$12', '$12', tax, 0.9):.4f}")

print("\nNLG scores:")
cand, ref = "the price is twelve", "the price is twelve dollars"
print(f"  BLEU-1({cand!r}, {ref!r}) = {bleu(cand, ref, 1):.4f}  (pure brevity penalty)")
print(f"  BLEU-4(identical)          = {bleu(ref, ref, 4):.4f}")
print(f"  ROUGE-L('the cat sat', 'the cat ran') = {rouge_l('the cat sat', 'the cat ran'):.4f}")

print("\nnavigation metrics on three hand-made trajectories:")
graph = graph_from_adjacency(
    {"home": ["a", "b"], "a": ["t"], "b": ["a"], "t": []}, homepage_id="home"
)
records = {
    f"r{i}": EpisodeRecord(f"r{i}", "demo", "q", "", "a", ("home", "a", "t"))
    for i in range(3)
}
trajectories = [
    Trajectory("r0", ("home", "a", "t"), (0, 0, 0), "t", "a"),       # perfect: SPL 1
    Trajectory("r1", ("home", "b", "a", "t"), (1, 0, 0, 0), "t", "a"),  # detour: SPL 2/3
    Trajectory("r2", ("home", "a"), (0, 0), "a", ""),                 # stopped short: SR 0
]
scores = nav_metrics(trajectories, records, graph)
print(f"  SR={scores.sr:.3f} OSR={scores.osr:.3f} SPL={scores.spl:.3f} TL={scores.tl:.2f}")
print("  (r2 stopped one page early, so it only counts toward OSR if it saw the target)")
