"""Benchmark data generation.

Pipeline: sample shortest ground-truth paths to target pages, assemble the
QA-generation prompt (caption + cleaned page words + instruction rules),
query an LLM client, parse the returned question/answer pairs, and emit
episode records with train/val/test split labels (60/10/30, path-disjoint).
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

import requests

from .errors import ClientError, NotEnoughTargets, UnparsableResponse
from .sitegraph import NavGraph, WebPage, shortest_path, transitions_from
from .simulator import MIN_TRANSITIONS, EpisodeRecord, validate_record

logger = logging.getLogger(__name__)

PROMPT_CAPTION_INTRO = "There is a picture of the product with the caption of"
PROMPT_WORDS_INTRO = "After that, here are all the words that appear on the website:"
PROMPT_RULES_INTRO = (
    "Lastly, I will give the following instructions, "
    "and you will be strictly following the instructions:"
)

SPLIT_FRACTIONS = {"train": 0.6, "val": 0.1, "test": 0.3}


def default_rules() -> list[str]:
    """The packaged instruction rules handed to the LLM (one per line)."""
    text = resources.files("webnavkit.data").joinpath("qa_rules.txt").read_text()
    return [line for line in text.splitlines() if line.strip()]


@dataclass(frozen=True)
class QAPair:
    question: str
    answer: str
    source_page_id: str = ""


@dataclass(frozen=True)
class PromptBundle:
    caption: str
    word_list: tuple[str, ...]
    rules: tuple[str, ...]

    @property
    def assembled(self) -> str:
        return build_prompt(self.caption, list(self.word_list), list(self.rules))


# --- path sampling -------------------------------------------------------

def eligible_targets(graph: NavGraph) -> list[str]:
    """Pages reachable from the homepage in at least MIN_TRANSITIONS clicks."""
    dist = transitions_from(graph, graph.homepage_id)
    return sorted(pid for pid, d in dist.items() if d >= MIN_TRANSITIONS)


def sample_paths(graph: NavGraph, n: int, seed: int) -> list[tuple[list[str], str]]:
    """n distinct targets sampled uniformly, each with its shortest path."""
    if n < 1:
        raise ValueError("n must be >= 1")
    candidates = eligible_targets(graph)
    if len(candidates) < n:
        raise NotEnoughTargets(f"requested {n}, only {len(candidates)} eligible targets")
    rng = random.Random(seed)
    targets = rng.sample(candidates, n)
    out = []
    for target in targets:
        path = shortest_path(graph, graph.homepage_id, target)
        assert path is not None  # eligible targets are reachable
        out.append((path, target))
    return out


# --- prompt --------------------------------------------------------------

def build_prompt(caption: str, words: Sequence[str], rules: Sequence[str]) -> str:
    """Concatenate the three prompt segments; newline between segments."""
    if not rules:
        raise ValueError("rules must be nonempty")
    return "\n".join(
        [
            PROMPT_CAPTION_INTRO,
            caption,
            PROMPT_WORDS_INTRO,
            " ".join(words),
            PROMPT_RULES_INTRO,
            "\n".join(rules),
        ]
    )


# --- LLM / captioner clients ----------------------------------------------

class LLMClient(Protocol):
    def complete(self, prompt: str, *, context_id: str = "") -> str: ...


class CaptionerClient(Protocol):
    def caption(self, page: WebPage) -> str: ...


@dataclass
class HttpLLMClient:
    """POST {model, prompt} to an endpoint returning {text}.

    Endpoint / model / token default to the LLM_ENDPOINT, LLM_MODEL and
    LLM_API_KEY environment variables.
    """

    endpoint: str
    model: str = "gpt-3.5-turbo"
    api_key: str = ""
    timeout: float = 60.0

    @staticmethod
    def from_env() -> "HttpLLMClient":
        import os

        endpoint = os.environ.get("LLM_ENDPOINT", "")
        if not endpoint:
            raise ClientError("LLM_ENDPOINT is not set")
        return HttpLLMClient(
            endpoint=endpoint,
            model=os.environ.get("LLM_MODEL", "gpt-3.5-turbo"),
            api_key=os.environ.get("LLM_API_KEY", ""),
        )

    def complete(self, prompt: str, *, context_id: str = "") -> str:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = requests.post(
                self.endpoint,
                json={"model": self.model, "prompt": prompt},
                headers=headers,
                timeout=self.timeout,
            )
            response.raise_for_status()
            return response.json()["text"]
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise ClientError(f"LLM request failed: {exc}") from exc


@dataclass
class MockLLMClient:
    """Offline client reading canned responses from a directory.

    Looks up ``<dir>/<context_id>.txt`` and falls back to
    ``<dir>/default.txt``.
    """

    directory: Path

    def complete(self, prompt: str, *, context_id: str = "") -> str:
        directory = Path(self.directory)
        for name in (f"{context_id}.txt", "default.txt"):
            candidate = directory / name
            if name != ".txt" and candidate.exists():
                return candidate.read_text()
        raise ClientError(f"no canned response for {context_id!r} in {directory}")


@dataclass
class StoredCaptioner:
    """Captions read from the page's sidecar captions (no model involved)."""

    def caption(self, page: WebPage) -> str:
        return page.captions[0] if page.captions else ""


@dataclass
class HttpCaptioner:
    """POST {image} (base64) to an external captioning service returning {caption}."""

    endpoint: str
    site_dir: Path
    api_key: str = ""
    timeout: float = 60.0

    def caption(self, page: WebPage) -> str:
        import base64

        image_ref = ""
        for button in page.buttons:
            if button.image_ref:
                image_ref = button.image_ref
                break
        source = Path(self.site_dir) / (image_ref or page.screenshot_ref)
        if not source.exists():
            return ""
        payload = base64.b64encode(source.read_bytes()).decode("ascii")
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = requests.post(
                self.endpoint, json={"image": payload}, headers=headers, timeout=self.timeout
            )
            response.raise_for_status()
            return response.json()["caption"]
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise ClientError(f"captioner request failed: {exc}") from exc


# --- QA parsing ------------------------------------------------------------

_Q_MARK = r"(?:\d+\s*[.)]\s*)?Q(?:uestion)?\s*\d*\s*[:.)-]"
_A_MARK = r"(?:\d+\s*[.)]\s*)?A(?:nswer)?\s*\d*\s*[:.)-]"
_QA_PATTERN = re.compile(
    rf"(?:^|\n)\s*{_Q_MARK}\s*(?P<q>.+?)\s*{_A_MARK}\s*(?P<a>.+?)\s*(?=\n\s*{_Q_MARK}|\Z)",
    re.IGNORECASE | re.DOTALL,
)


def _strip_quotes(text: str) -> str:
    return text.strip().strip("\"'").strip()


def parse_qa_response(llm_output: str, source_page_id: str = "") -> list[QAPair]:
    """Extract question/answer pairs from a numbered Q:/A: style reply."""
    pairs = []
    for match in _QA_PATTERN.finditer(llm_output):
        question = _strip_quotes(" ".join(match.group("q").split()))
        answer = _strip_quotes(" ".join(match.group("a").split()))
        if question and answer:
            pairs.append(QAPair(question=question, answer=answer, source_page_id=source_page_id))
    if not pairs:
        raise UnparsableResponse(llm_output[:200])
    return pairs


# --- record assembly -------------------------------------------------------

@dataclass
class GenerationReport:
    generated: int = 0
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (target, reason)


def assign_splits(
    groups: Sequence[tuple[str, int]],
    seed: int,
    fractions: dict[str, float] = SPLIT_FRACTIONS,
) -> dict[str, str]:
    """Assign path groups (key, record count) to splits.

    The split is by path: all records of one path land in one split, and
    record counts track the 60/10/30 targets.  Groups are placed largest
    first into the split with the largest remaining record deficit.
    """
    total = sum(count for _, count in groups)
    names = list(fractions)
    deficits = {name: fractions[name] * total for name in names}
    rng = random.Random(seed)
    shuffled = list(groups)
    rng.shuffle(shuffled)
    shuffled.sort(key=lambda g: -g[1])  # stable: random order within equal sizes
    assignment: dict[str, str] = {}
    for key, count in shuffled:
        chosen = max(names, key=lambda name: deficits[name])
        assignment[key] = chosen
        deficits[chosen] -= count
    return assignment


def generate_records(
    graph: NavGraph,
    paths: Sequence[tuple[list[str], str]],
    llm_client: LLMClient,
    captioner_client: CaptionerClient,
    rules: Sequence[str] | None = None,
    seed: int = 0,
) -> tuple[list[EpisodeRecord], GenerationReport]:
    """Create episode records for each sampled path.

    Per target page: caption the product, build the prompt from the page's
    cleaned words, query the LLM, and turn each parsed QA pair into one
    record sharing the path.  The auxiliary description stays empty unless
    the same question text shows up for different targets, in which case
    both records get the caption as description.  Split labels are assigned
    per path at 60/10/30.
    """
    rules = list(rules) if rules is not None else default_rules()
    report = GenerationReport()
    drafts: list[dict] = []
    for path, target in paths:
        page = graph.page(target)
        try:
            caption = captioner_client.caption(page)
            prompt = build_prompt(caption, list(page.word_list), rules)
            reply = llm_client.complete(prompt, context_id=target)
            pairs = parse_qa_response(reply, source_page_id=target)
        except (ClientError, UnparsableResponse) as exc:
            logger.warning("skipping target %s: %s", target, exc)
            report.skipped.append((target, str(exc)))
            continue
        for k, pair in enumerate(pairs):
            drafts.append(
                {
                    "record_id": f"{graph.site_id}-{target}-q{k}",
                    "target": target,
                    "path": tuple(path),
                    "question": pair.question,
                    "answer": pair.answer,
                    "caption": caption,
                }
            )

    question_targets: dict[str, set[str]] = {}
    for draft in drafts:
        question_targets.setdefault(draft["question"].lower(), set()).add(draft["target"])

    group_counts: dict[str, int] = {}
    for draft in drafts:
        group_counts[draft["target"]] = group_counts.get(draft["target"], 0) + 1
    splits = assign_splits(sorted(group_counts.items()), seed=seed)

    records = []
    for draft in drafts:
        ambiguous = len(question_targets[draft["question"].lower()]) > 1
        record = EpisodeRecord(
            record_id=draft["record_id"],
            site_id=graph.site_id,
            question=draft["question"],
            description=draft["caption"] if ambiguous else "",
            answer=draft["answer"],
            path=draft["path"],
            split=splits[draft["target"]],
        )
        validate_record(graph, record)
        records.append(record)
    report.generated = len(records)
    return records, report


def quality_sample(records: Sequence[EpisodeRecord], k: int, seed: int) -> list[EpisodeRecord]:
    """Per-site random sample of records for manual review."""
    by_site: dict[str, list[EpisodeRecord]] = {}
    for record in records:
        by_site.setdefault(record.site_id, []).append(record)
    rng = random.Random(seed)
    sampled = []
    for site in sorted(by_site):
        pool = by_site[site]
        sampled.extend(rng.sample(pool, min(k, len(pool))))
    return sampled
