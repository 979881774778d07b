"""Agent baselines: random, greedy text-overlap, oracle, the learned model,
and a prompt-driven LLM agent with deterministic observation formatting."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import PurePosixPath
from typing import Optional, Protocol, Sequence

import numpy as np

from .datagen import LLMClient
from .errors import ClientError
from .model import ModelConfig, SiteAssets, Vocab, decode_answer, init_state, nav_step, \
    page_button_tokens, screenshot_tokens_from_patches
from .sitegraph import NavGraph, tokenize
from .simulator import EpisodeRecord, Observation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AgentDecision:
    action_index: int
    answer: Optional[str] = None
    fallback: bool = False


class Agent(Protocol):
    def begin_episode(self, record: EpisodeRecord, graph: NavGraph) -> None: ...
    def decide(self, obs: Observation) -> AgentDecision: ...
    def forced_answer(self, page_id: Optional[str]) -> str: ...


class RandomAgent:
    """Uniform random clicks for a stop length drawn from {3..8} per episode."""

    def __init__(self, seed: int = 0, stop_range: tuple[int, int] = (3, 8)):
        self.rng = np.random.default_rng(seed)
        self.stop_range = stop_range
        self.stop_len = 0
        self.clicks = 0

    def begin_episode(self, record: EpisodeRecord, graph: NavGraph) -> None:
        low, high = self.stop_range
        self.stop_len = int(self.rng.integers(low, high + 1))
        self.clicks = 0

    def decide(self, obs: Observation) -> AgentDecision:
        n_buttons = len(obs.candidates) - 1
        if self.clicks >= self.stop_len or n_buttons == 0:
            return AgentDecision(action_index=obs.stop_index, answer="")
        self.clicks += 1
        return AgentDecision(action_index=int(self.rng.integers(n_buttons)))

    def forced_answer(self, page_id: Optional[str]) -> str:
        return ""


def _norm_tokens(text_or_tokens) -> set[str]:
    """Tokens with edge punctuation stripped, for overlap comparisons."""
    tokens = (
        tokenize(text_or_tokens) if isinstance(text_or_tokens, str) else text_or_tokens
    )
    out = set()
    for token in tokens:
        token = token.strip("\"'`.,;:!?()[]{}").lower()
        if token:
            out.add(token)
    return out


def _overlap(tokens_a, goal: set[str]) -> int:
    return len(_norm_tokens(tokens_a) & goal)


_FUNCTION_WORDS = frozenset(
    "a an and are at by does do for how i in is it its much of on or "
    "that the this to was what where which who you your".split()
)


class GreedyAgent:
    """Clicks the button with the largest token overlap with question+description.

    Overlap counts content words only.  Stops when the current page's words
    overlap the goal strictly more than every candidate does; the answer is
    the page sentence with the highest overlap.
    """

    def __init__(self):
        self.goal: set[str] = set()
        self.graph: Optional[NavGraph] = None

    def begin_episode(self, record: EpisodeRecord, graph: NavGraph) -> None:
        self.goal = _norm_tokens(record.question + " " + record.description) - _FUNCTION_WORDS
        self.graph = graph

    def _best_sentence(self, page) -> str:
        sentences = [s.strip() for s in re.split(r"[.!?\n]", page.raw_text) if s.strip()]
        if not sentences:
            return ""
        return max(sentences, key=lambda s: (_overlap(tokenize(s), self.goal), -len(s)))

    def decide(self, obs: Observation) -> AgentDecision:
        page = self.graph.page(obs.page_id)
        button_overlaps = [
            _overlap(tokenize(c.button.description), self.goal)
            for c in obs.candidates[:-1]
        ]
        page_overlap = _overlap(page.word_list, self.goal)
        if not button_overlaps or page_overlap > max(button_overlaps):
            return AgentDecision(action_index=obs.stop_index, answer=self._best_sentence(page))
        best = int(np.argmax(button_overlaps))  # first maximum wins
        return AgentDecision(action_index=best)

    def forced_answer(self, page_id: Optional[str]) -> str:
        if page_id is None or self.graph is None:
            return ""
        return self._best_sentence(self.graph.page(page_id))


class OracleAgent:
    """Follows the ground-truth path and answers the gold text."""

    def __init__(self):
        self.record: Optional[EpisodeRecord] = None
        self.position = 0

    def begin_episode(self, record: EpisodeRecord, graph: NavGraph) -> None:
        self.record = record
        self.position = 0

    def decide(self, obs: Observation) -> AgentDecision:
        path = self.record.path
        if self.position >= len(path) - 1:
            return AgentDecision(action_index=obs.stop_index, answer=self.record.answer)
        nxt = path[self.position + 1]
        self.position += 1
        for i, candidate in enumerate(obs.candidates[:-1]):
            if candidate.button.target_page_id == nxt:
                return AgentDecision(action_index=i)
        raise ClientError(f"oracle: no button from {obs.page_id} to {nxt}")

    def forced_answer(self, page_id: Optional[str]) -> str:
        return self.record.answer if self.record else ""


class LearnedAgent:
    """Greedy rollout of the trained navigation-and-answering model."""

    def __init__(
        self,
        params: dict,
        vocab: Vocab,
        model_config: ModelConfig,
        assets: SiteAssets,
    ):
        self.params = params
        self.vocab = vocab
        self.config = model_config
        self.assets = assets
        self.graph: Optional[NavGraph] = None
        self.state = None

    def begin_episode(self, record: EpisodeRecord, graph: NavGraph) -> None:
        self.graph = graph
        self.state, self.language = init_state(
            record.question, record.description, self.params, self.vocab, self.config
        )

    def decide(self, obs: Observation) -> AgentDecision:
        page = self.graph.page(obs.page_id)
        shot = screenshot_tokens_from_patches(
            self.assets.screenshot_patches(page), self.params
        )
        buttons = page_button_tokens(page, self.params, self.vocab, self.config, self.assets)
        self.state, probs = nav_step(
            self.state, self.language, shot, buttons, self.params, self.config
        )
        choice = int(np.argmax(probs.data))
        if choice == obs.stop_index:
            return AgentDecision(action_index=choice, answer=self._decode())
        return AgentDecision(action_index=choice)

    def _decode(self) -> str:
        return decode_answer(self.state, self.params, self.vocab, self.config)

    def forced_answer(self, page_id: Optional[str]) -> str:
        return self._decode() if self.state is not None else ""


# --- LLM agent ---------------------------------------------------------------

IMG_PREFIX = "IMG:"
STOP_LABEL = "[stop]"

TASK_PREAMBLE = (
    "You are browsing a website to answer a question. At each step you see "
    "the current page and a numbered list of clickable candidates. Reply "
    "with the number of the candidate to click, in square brackets (for "
    f"example [1]). When the current page answers the question, reply "
    f"{STOP_LABEL} followed by the answer."
)


def format_observation(obs: Observation, history: Sequence[str]) -> str:
    """Deterministic text rendering of an observation for text-only agents."""
    lines = [f"Page: {obs.page_id}", "Candidates:"]
    for index, candidate in enumerate(obs.candidates):
        if candidate.is_stop:
            lines.append(f"[{index}] {STOP_LABEL}")
        elif candidate.button.description:
            lines.append(f"[{index}] {candidate.button.description}")
        else:
            stem = PurePosixPath(candidate.button.image_ref).stem
            lines.append(f"[{index}] {IMG_PREFIX}{stem}")
    trail = " -> ".join(history) if history else "(start)"
    lines.append(f"History: {trail}")
    return "\n".join(lines)


_BRACKET = re.compile(r"\[\s*(\d+|stop)\s*\]", re.IGNORECASE)


def parse_agent_reply(reply: str, n_candidates: int) -> Optional[tuple[int, Optional[str]]]:
    """First bracketed token decides: an index, or [stop] plus the answer."""
    match = _BRACKET.search(reply)
    if not match:
        return None
    token = match.group(1).lower()
    if token == "stop":
        answer = reply[match.end():].strip()
        return n_candidates - 1, answer
    index = int(token)
    if 0 <= index < n_candidates - 1:
        return index, None
    return None


class LLMAgent:
    """Prompts an external chat model with the formatted observation."""

    def __init__(self, client: LLMClient, retries: int = 1):
        self.client = client
        self.retries = retries
        self.record: Optional[EpisodeRecord] = None
        self.history: list[str] = []

    def begin_episode(self, record: EpisodeRecord, graph: NavGraph) -> None:
        self.record = record
        self.history = []

    def _prompt(self, obs: Observation) -> str:
        parts = [
            TASK_PREAMBLE,
            f"Question: {self.record.question}",
        ]
        if self.record.description:
            parts.append(f"Description: {self.record.description}")
        parts.append(format_observation(obs, self.history))
        return "\n".join(parts)

    def decide(self, obs: Observation) -> AgentDecision:
        reply = ""
        for _ in range(self.retries + 1):
            reply = self.client.complete(self._prompt(obs), context_id=obs.page_id)
            parsed = parse_agent_reply(reply, len(obs.candidates))
            if parsed is not None:
                index, answer = parsed
                self.history.append(obs.page_id)
                return AgentDecision(action_index=index, answer=answer)
        logger.warning("unparsable agent reply on %s; forcing stop", obs.page_id)
        self.history.append(obs.page_id)
        return AgentDecision(action_index=obs.stop_index, answer=reply.strip(), fallback=True)

    def forced_answer(self, page_id: Optional[str]) -> str:
        return ""
