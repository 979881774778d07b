"""Scoring of trajectories and answers.

Navigation: success rate (stopped on the target), oracle success rate
(target visited at any step), success weighted by path length, and mean
trajectory length in page transitions.

Answers: Wu-Palmer-similarity based scores at thresholds 0.9 and 0.0
(word-pair scores below the threshold are scaled by 0.1), plus BLEU and
ROUGE-L for free-form generation quality.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import UnknownRecord
from .sitegraph import NavGraph, tokenize, transitions_from
from .simulator import EpisodeRecord, Trajectory
from .taxonomy import Taxonomy, word_similarity

WUPS_SCALE_FACTOR = 0.1


@dataclass(frozen=True)
class NavScores:
    sr: float
    osr: float
    spl: float
    tl: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MetricsReport:
    sr: float
    osr: float
    spl: float
    tl: float
    wups09: float
    wups00: float
    bleu1: float
    bleu4: float
    rouge_l: float
    n: int
    failures: int = 0

    def as_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(raw: Mapping) -> "MetricsReport":
        return MetricsReport(**{k: raw[k] for k in MetricsReport.__dataclass_fields__})


# --- navigation ----------------------------------------------------------

def nav_metrics(
    trajectories: Sequence[Trajectory],
    records: Mapping[str, EpisodeRecord],
    graph: NavGraph,
) -> NavScores:
    """SR / OSR / SPL / TL over a trajectory set.

    SPL per episode is success * d_opt / max(d_opt, d_traj) with d_opt the
    shortest transition count homepage -> target and d_traj the realized
    transition count; episodes with d_opt == 0 score their success value.
    """
    if not trajectories:
        return NavScores(sr=0.0, osr=0.0, spl=0.0, tl=0.0)
    optimal = transitions_from(graph, graph.homepage_id)
    sr_sum = osr_sum = spl_sum = tl_sum = 0.0
    for trajectory in trajectories:
        record = records.get(trajectory.record_id)
        if record is None:
            raise UnknownRecord(trajectory.record_id)
        target = record.target_page_id
        success = trajectory.stopped_page_id == target
        d_traj = trajectory.transitions
        d_opt = optimal.get(target)
        if d_opt is None:
            raise UnknownRecord(f"{trajectory.record_id}: target {target!r} unreachable")
        sr_sum += success
        osr_sum += target in trajectory.visited
        if d_opt == 0:
            spl_sum += float(success)
        elif success:
            spl_sum += d_opt / max(d_opt, d_traj)
        tl_sum += d_traj
    n = len(trajectories)
    return NavScores(sr=sr_sum / n, osr=osr_sum / n, spl=spl_sum / n, tl=tl_sum / n)


# --- WUPS ----------------------------------------------------------------

def wups_score(
    candidate: str,
    reference: str,
    tax: Taxonomy,
    threshold: float,
) -> float:
    """Set-based answer similarity from word-level Wu-Palmer scores.

    Each word pair scores the best Wu-Palmer similarity over its synsets
    (out-of-taxonomy words match only themselves); pair scores below the
    threshold are scaled by 0.1.  The two directed products (candidate over
    reference and vice versa) are combined with min.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0

    def pair_score(a: str, b: str) -> float:
        score = word_similarity(tax, a, b)
        if score < threshold:
            score *= WUPS_SCALE_FACTOR
        return score

    forward = 1.0
    for a in cand:
        forward *= max(pair_score(a, t) for t in ref)
    backward = 1.0
    for t in ref:
        backward *= max(pair_score(a, t) for a in cand)
    return min(forward, backward)


# --- BLEU / ROUGE-L ------------------------------------------------------

def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(
    pairs: Sequence[tuple[str, str]],
    max_n: int = 4,
) -> float:
    """Corpus-level BLEU with brevity penalty and uniform n-gram weights.

    No smoothing: a zero clipped-match count at any order gives 0.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    matches = [0] * max_n
    totals = [0] * max_n
    cand_len = ref_len = 0
    for candidate, reference in pairs:
        cand = tokenize(candidate)
        ref = tokenize(reference)
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            cand_counts = _ngrams(cand, n)
            ref_counts = _ngrams(ref, n)
            matches[n - 1] += sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
            totals[n - 1] += max(len(cand) - n + 1, 0)
    if cand_len == 0 or any(t == 0 for t in totals) or any(m == 0 for m in matches):
        return 0.0
    log_precision = sum(math.log(m / t) for m, t in zip(matches, totals)) / max_n
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_precision)


def bleu(candidate: str, reference: str, max_n: int = 4) -> float:
    """Sentence-pair BLEU (a corpus of one)."""
    return corpus_bleu([(candidate, reference)], max_n=max_n)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for token_a in a:
        cur = [0]
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[-1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    """ROUGE-L F1 via longest common subsequence."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2 * precision * recall / (precision + recall)


# --- full report ---------------------------------------------------------

def compute_report(
    trajectories: Sequence[Trajectory],
    records: Mapping[str, EpisodeRecord],
    graph: NavGraph,
    tax: Taxonomy,
    failures: int = 0,
) -> MetricsReport:
    nav = nav_metrics(trajectories, records, graph)
    pairs = [(t.answer, records[t.record_id].answer) for t in trajectories]
    n = len(trajectories)
    wups09 = sum(wups_score(c, r, tax, 0.9) for c, r in pairs) / n if n else 0.0
    wups00 = sum(wups_score(c, r, tax, 0.0) for c, r in pairs) / n if n else 0.0
    return MetricsReport(
        sr=nav.sr,
        osr=nav.osr,
        spl=nav.spl,
        tl=nav.tl,
        wups09=wups09,
        wups00=wups00,
        bleu1=corpus_bleu(pairs, max_n=1) if n else 0.0,
        bleu4=corpus_bleu(pairs, max_n=4) if n else 0.0,
        rouge_l=sum(rouge_l(c, r) for c, r in pairs) / n if n else 0.0,
        n=n,
        failures=failures,
    )


def format_report_table(report: MetricsReport, label: str = "run") -> str:
    """Aligned plain-text table; ratio columns as fractions, TL in transitions."""
    headers = ["", "SR", "OSR", "SPL", "TL", "WUPS0.9", "WUPS0.0", "BLEU@1", "BLEU@4", "ROUGE-L"]
    values = [
        label,
        f"{report.sr:.4f}",
        f"{report.osr:.4f}",
        f"{report.spl:.4f}",
        f"{report.tl:.2f}",
        f"{report.wups09:.4f}",
        f"{report.wups00:.4f}",
        f"{report.bleu1:.4f}",
        f"{report.bleu4:.4f}",
        f"{report.rouge_l:.4f}",
    ]
    widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
    head = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
    row = "  ".join(v.rjust(w) for v, w in zip(values, widths))
    return head + "\n" + row


def save_report(report: MetricsReport, path: Path | str) -> None:
    Path(path).write_text(json.dumps(report.as_dict(), indent=2))


def load_report(path: Path | str) -> MetricsReport:
    return MetricsReport.from_dict(json.loads(Path(path).read_text()))
