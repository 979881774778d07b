"""Episode state machine over a navigation graph.

An episode starts on the homepage with a question and optional description,
serves observations whose candidate actions are the current page's buttons
plus the stop action at the end, applies chosen actions, and records the
realized trajectory with the free-form answer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import (
    EpisodeFinished,
    EpisodeNotFinished,
    InvalidActionIndex,
    RecordGraphMismatch,
)
from .sitegraph import Button, NavGraph

STOP_TOKEN = "[EOA]"
DEFAULT_MAX_STEPS = 10
MIN_TRANSITIONS = 2


@dataclass(frozen=True)
class EpisodeRecord:
    """One benchmark sample: question, description, answer, gold path."""

    record_id: str
    site_id: str
    question: str
    description: str
    answer: str
    path: tuple[str, ...]
    split: str = ""

    @property
    def target_page_id(self) -> str:
        return self.path[-1]

    @property
    def transitions(self) -> int:
        return len(self.path) - 1

    def to_json(self) -> dict:
        return {
            "record_id": self.record_id,
            "site_id": self.site_id,
            "question": self.question,
            "description": self.description,
            "answer": self.answer,
            "path": list(self.path),
            "split": self.split,
        }

    @staticmethod
    def from_json(raw: dict) -> "EpisodeRecord":
        return EpisodeRecord(
            record_id=raw["record_id"],
            site_id=raw.get("site_id", ""),
            question=raw["question"],
            description=raw.get("description", ""),
            answer=raw["answer"],
            path=tuple(raw["path"]),
            split=raw.get("split", ""),
        )


@dataclass(frozen=True)
class Action:
    """Either a click on a button or the stop action."""

    kind: str  # "click" | "stop"
    button: Optional[Button] = None

    @staticmethod
    def click(button: Button) -> "Action":
        return Action(kind="click", button=button)

    @staticmethod
    def stop() -> "Action":
        return Action(kind="stop")

    @property
    def is_stop(self) -> bool:
        return self.kind == "stop"


@dataclass(frozen=True)
class Observation:
    """What an agent sees at one step: page + candidate actions.

    Candidates are the current page's buttons in document order, then the
    stop action, always exactly once and always last.
    """

    page_id: str
    screenshot_ref: str
    candidates: tuple[Action, ...]

    @property
    def stop_index(self) -> int:
        return len(self.candidates) - 1


@dataclass
class EpisodeState:
    record: EpisodeRecord
    current_page_id: str
    t: int = 0
    done: bool = False
    forced_stop: bool = False
    max_steps: int = DEFAULT_MAX_STEPS
    # (page the action was taken on, chosen candidate index, the action)
    history: list[tuple[str, int, Action]] = field(default_factory=list)
    stopped_page_id: Optional[str] = None

    @property
    def visited(self) -> list[str]:
        pages = [page_id for page_id, _, action in self.history if not action.is_stop]
        pages.append(self.current_page_id)
        return pages


@dataclass(frozen=True)
class Trajectory:
    """Realized episode: visited pages, actions, answer. Input to all metrics."""

    record_id: str
    visited: tuple[str, ...]
    action_indices: tuple[int, ...]
    stopped_page_id: str
    answer: str
    forced_stop: bool = False

    @property
    def transitions(self) -> int:
        return len(self.visited) - 1

    def to_json(self) -> dict:
        return {
            "record_id": self.record_id,
            "visited": list(self.visited),
            "action_indices": list(self.action_indices),
            "stopped_page_id": self.stopped_page_id,
            "answer": self.answer,
            "forced_stop": self.forced_stop,
        }

    @staticmethod
    def from_json(raw: dict) -> "Trajectory":
        return Trajectory(
            record_id=raw["record_id"],
            visited=tuple(raw["visited"]),
            action_indices=tuple(raw["action_indices"]),
            stopped_page_id=raw["stopped_page_id"],
            answer=raw.get("answer", ""),
            forced_stop=raw.get("forced_stop", False),
        )


def validate_record(graph: NavGraph, record: EpisodeRecord) -> None:
    """Check a record against the graph; raises RecordGraphMismatch."""
    if not record.path:
        raise RecordGraphMismatch(f"{record.record_id}: empty path")
    if record.path[0] != graph.homepage_id:
        raise RecordGraphMismatch(
            f"{record.record_id}: path starts at {record.path[0]!r}, "
            f"homepage is {graph.homepage_id!r}"
        )
    if record.transitions < MIN_TRANSITIONS:
        raise RecordGraphMismatch(
            f"{record.record_id}: only {record.transitions} transitions "
            f"(minimum {MIN_TRANSITIONS})"
        )
    for u, v in zip(record.path, record.path[1:]):
        if u not in graph or v not in graph:
            raise RecordGraphMismatch(f"{record.record_id}: unknown page in path")
        if not any(b.target_page_id == v for b in graph.page(u).buttons):
            raise RecordGraphMismatch(
                f"{record.record_id}: no button connects {u!r} to {v!r}"
            )


def reset(graph: NavGraph, record: EpisodeRecord, max_steps: int = DEFAULT_MAX_STEPS) -> EpisodeState:
    """Fresh episode at the homepage, step 0."""
    validate_record(graph, record)
    return EpisodeState(record=record, current_page_id=graph.homepage_id, max_steps=max_steps)


def observe(state: EpisodeState, graph: NavGraph) -> Observation:
    """Current page + candidate actions (page buttons, then stop)."""
    if state.done:
        raise EpisodeFinished(state.record.record_id)
    page = graph.page(state.current_page_id)
    candidates = tuple(Action.click(b) for b in page.buttons) + (Action.stop(),)
    return Observation(
        page_id=page.page_id,
        screenshot_ref=page.screenshot_ref,
        candidates=candidates,
    )


def step(state: EpisodeState, action_index: int, graph: NavGraph) -> EpisodeState:
    """Apply the chosen candidate; mutates and returns the state.

    Clicking moves to the button's target and advances t; the stop action
    finishes the episode at the current page.  Reaching max_steps forces a
    stop at the current page.
    """
    if state.done:
        raise EpisodeFinished(state.record.record_id)
    obs = observe(state, graph)
    if not 0 <= action_index < len(obs.candidates):
        raise InvalidActionIndex(
            f"index {action_index} out of range for {len(obs.candidates)} candidates"
        )
    action = obs.candidates[action_index]
    state.history.append((state.current_page_id, action_index, action))
    if action.is_stop:
        state.done = True
        state.stopped_page_id = state.current_page_id
        return state
    state.current_page_id = action.button.target_page_id
    state.t += 1
    if state.t >= state.max_steps:
        state.done = True
        state.forced_stop = True
        state.stopped_page_id = state.current_page_id
    return state


def finish_with_answer(state: EpisodeState, answer: str) -> Trajectory:
    """Seal a finished episode into a Trajectory with the given answer."""
    if not state.done:
        raise EpisodeNotFinished(state.record.record_id)
    return Trajectory(
        record_id=state.record.record_id,
        visited=tuple(state.visited),
        action_indices=tuple(index for _, index, _ in state.history),
        stopped_page_id=state.stopped_page_id or state.current_page_id,
        answer=answer,
        forced_stop=state.forced_stop,
    )


def run_episode(
    graph: NavGraph,
    record: EpisodeRecord,
    action_indices: Iterable[int],
    answer: str = "",
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Trajectory:
    """Replay a fixed action sequence from reset; used for log replay."""
    state = reset(graph, record, max_steps=max_steps)
    for index in action_indices:
        step(state, index, graph)
        if state.done:
            break
    if not state.done:
        state.done = True
        state.forced_stop = True
        state.stopped_page_id = state.current_page_id
    return finish_with_answer(state, answer)


def write_trajectory_log(trajectories: Iterable[Trajectory], path: Path | str) -> None:
    with Path(path).open("w") as fh:
        for trajectory in trajectories:
            fh.write(json.dumps(trajectory.to_json()) + "\n")


def read_trajectory_log(path: Path | str) -> list[Trajectory]:
    out = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            out.append(Trajectory.from_json(json.loads(line)))
    return out


def write_records(records: Iterable[EpisodeRecord], path: Path | str) -> None:
    with Path(path).open("w") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json()) + "\n")


def read_records(path: Path | str) -> list[EpisodeRecord]:
    out = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            out.append(EpisodeRecord.from_json(json.loads(line)))
    return out
