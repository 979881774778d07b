"""Hypernym taxonomy loading and Wu-Palmer similarity.

Two input formats are supported:

* the standard lexical-database plain-text noun files (``data.noun``,
  optionally ``index.noun``), where hypernym pointers use the ``@`` and
  ``@i`` symbols, and
* a compact JSON schema::

      {"dog": {"parents": ["animal"], "lemmas": ["dog", "hound"]},
       "animal": {"parent": "root"},
       "root": {}}

  ``parent`` is shorthand for a single-element ``parents`` list; ``lemmas``
  defaults to the synset id itself.

Depths use the longest hypernym path with the root at depth 1, so a
synset is always at least as deep as each of its subsumers (this keeps
similarity scores in (0, 1] on multi-parent DAGs).  When a file defines
several roots, a synthetic virtual root is inserted so that depths stay
well-defined (shifting all depths by one).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import CycleDetected, TaxonomyParseError, UnknownSynset

VIRTUAL_ROOT = "virtual-root"


@dataclass(frozen=True)
class Taxonomy:
    """Acyclic hypernym DAG: synset -> parents, plus the lemma index."""

    parents: dict[str, tuple[str, ...]]
    lemmas: dict[str, tuple[str, ...]]          # synset -> lemmas
    synsets_of: dict[str, tuple[str, ...]]      # lemma -> synsets
    roots: frozenset[str]
    depths: dict[str, int]

    def __contains__(self, synset_id: str) -> bool:
        return synset_id in self.parents

    def depth(self, synset_id: str) -> int:
        try:
            return self.depths[synset_id]
        except KeyError:
            raise UnknownSynset(synset_id) from None

    def ancestors(self, synset_id: str) -> set[str]:
        """The synset itself plus everything reachable via parents."""
        if synset_id not in self.parents:
            raise UnknownSynset(synset_id)
        seen: set[str] = set()
        stack = [synset_id]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(self.parents[node])
        return seen


def _check_acyclic(parents: Mapping[str, list[str]]) -> None:
    """Iterative DFS over the parent relation; raises CycleDetected."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {s: WHITE for s in parents}
    for start in parents:
        if color[start] != WHITE:
            continue
        stack: list[tuple[str, int]] = [(start, 0)]
        color[start] = GRAY
        while stack:
            node, i = stack[-1]
            plist = parents[node]
            if i < len(plist):
                stack[-1] = (node, i + 1)
                parent = plist[i]
                if color[parent] == GRAY:
                    raise CycleDetected(f"parent cycle through {parent!r}")
                if color[parent] == WHITE:
                    color[parent] = GRAY
                    stack.append((parent, 0))
            else:
                color[node] = BLACK
                stack.pop()


def _finalize(parents: dict[str, list[str]], lemmas: dict[str, list[str]]) -> Taxonomy:
    """Validate, add a virtual root if needed, compute depths."""
    for synset, plist in parents.items():
        for parent in plist:
            if parent not in parents:
                raise TaxonomyParseError(f"synset {synset!r} has unknown parent {parent!r}")
    _check_acyclic(parents)

    roots = {s for s, p in parents.items() if not p}
    if not roots:
        raise CycleDetected("no root synset: every node has a parent")
    if len(roots) > 1:
        parents = dict(parents)
        parents[VIRTUAL_ROOT] = []
        for root in sorted(roots):
            parents[root] = [VIRTUAL_ROOT]
        lemmas = dict(lemmas)
        lemmas[VIRTUAL_ROOT] = [VIRTUAL_ROOT]
        roots = {VIRTUAL_ROOT}

    # Depths in topological order; longest hypernym path, root = 1.
    children: dict[str, list[str]] = {s: [] for s in parents}
    for synset, plist in parents.items():
        for parent in plist:
            children[parent].append(synset)
    pending = {s: len(p) for s, p in parents.items()}
    depths: dict[str, int] = {}
    frontier = sorted(roots)
    for root in frontier:
        depths[root] = 1
    while frontier:
        nxt = []
        for node in frontier:
            for child in children[node]:
                depths[child] = max(depths.get(child, 0), depths[node] + 1)
                pending[child] -= 1
                if pending[child] == 0:
                    nxt.append(child)
        frontier = nxt
    if len(depths) != len(parents):
        stranded = sorted(set(parents) - set(depths))
        raise CycleDetected(f"unreachable from a root (parent cycle): {stranded[:5]}")

    synsets_of: dict[str, list[str]] = {}
    for synset in sorted(parents):
        for lemma in lemmas.get(synset, [synset]):
            synsets_of.setdefault(lemma.lower(), []).append(synset)

    return Taxonomy(
        parents={s: tuple(p) for s, p in parents.items()},
        lemmas={s: tuple(lemmas.get(s, [s])) for s in parents},
        synsets_of={w: tuple(s) for w, s in synsets_of.items()},
        roots=frozenset(roots),
        depths=depths,
    )


def taxonomy_from_dict(spec: Mapping[str, Mapping]) -> Taxonomy:
    """Build from the compact JSON schema (see module docstring)."""
    parents: dict[str, list[str]] = {}
    lemmas: dict[str, list[str]] = {}
    for synset, raw in spec.items():
        plist = list(raw.get("parents", []))
        if "parent" in raw:
            plist.append(raw["parent"])
        parents[synset] = plist
        lemmas[synset] = list(raw.get("lemmas", [synset]))
    return _finalize(parents, lemmas)


def _parse_wordnet_data(path: Path) -> tuple[dict[str, list[str]], dict[str, list[str]]]:
    parents: dict[str, list[str]] = {}
    lemmas: dict[str, list[str]] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip() or line.startswith("  "):  # license header block
            continue
        fields = line.split()
        try:
            offset = fields[0]
            w_cnt = int(fields[3], 16)
            words = [fields[4 + 2 * i] for i in range(w_cnt)]
            p_cnt_pos = 4 + 2 * w_cnt
            p_cnt = int(fields[p_cnt_pos])
            hypernyms = []
            for i in range(p_cnt):
                base = p_cnt_pos + 1 + 4 * i
                symbol, target, pos = fields[base], fields[base + 1], fields[base + 2]
                if symbol in ("@", "@i") and pos == "n":
                    hypernyms.append(target)
        except (IndexError, ValueError) as exc:
            raise TaxonomyParseError(str(exc), line=lineno) from exc
        parents[offset] = hypernyms
        lemmas[offset] = [w.replace("_", " ") for w in words]
    if not parents:
        raise TaxonomyParseError(f"{path}: no synsets found")
    return parents, lemmas


def load_taxonomy(path: Path | str) -> Taxonomy:
    """Load a taxonomy from a JSON file or a ``data.noun``-format file.

    A directory is accepted too and must contain ``data.noun``.
    """
    path = Path(path)
    if path.is_dir():
        path = path / "data.noun"
    if path.suffix == ".json":
        return taxonomy_from_dict(json.loads(path.read_text()))
    parents, lemmas = _parse_wordnet_data(path)
    return _finalize(parents, lemmas)


def lcs_depth(tax: Taxonomy, a: str, b: str) -> int:
    """Depth of the deepest common subsumer of a and b."""
    common = tax.ancestors(a) & tax.ancestors(b)
    return max(tax.depths[s] for s in common)


def wup(tax: Taxonomy, a: str, b: str) -> float:
    """Wu-Palmer similarity: 2*depth(lcs) / (depth(a) + depth(b)).

    The lcs is the common subsumer of maximal depth; depth counts the
    longest hypernym path with the root at 1.
    """
    if a not in tax:
        raise UnknownSynset(a)
    if b not in tax:
        raise UnknownSynset(b)
    return 2.0 * lcs_depth(tax, a, b) / (tax.depth(a) + tax.depth(b))


def word_similarity(tax: Taxonomy, word_a: str, word_b: str) -> float:
    """Best Wu-Palmer score over the words' synsets.

    Words absent from the taxonomy match only themselves (1 if equal,
    else 0).
    """
    word_a = word_a.lower()
    word_b = word_b.lower()
    if word_a == word_b:
        return 1.0
    synsets_a = tax.synsets_of.get(word_a, ())
    synsets_b = tax.synsets_of.get(word_b, ())
    if not synsets_a or not synsets_b:
        return 0.0
    return max(wup(tax, sa, sb) for sa in synsets_a for sb in synsets_b)


TOY_TAXONOMY_SPEC = {
    "root": {},
    "animal": {"parent": "root"},
    "dog": {"parent": "animal"},
    "cat": {"parent": "animal"},
}


def toy_taxonomy() -> Taxonomy:
    """The documented 4-node taxonomy used in tests and docs."""
    return taxonomy_from_dict(TOY_TAXONOMY_SPEC)
