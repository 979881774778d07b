"""Offline evaluation: run an agent over a dataset split and score it."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .agents import (
    Agent,
    GreedyAgent,
    LLMAgent,
    LearnedAgent,
    OracleAgent,
    RandomAgent,
)
from .datagen import LLMClient, MockLLMClient
from .errors import WebNavKitError
from .metrics import MetricsReport, compute_report, format_report_table, save_report
from .model import ModelConfig, SiteAssets, Vocab, load_checkpoint
from .sitegraph import NavGraph
from .simulator import (
    DEFAULT_MAX_STEPS,
    EpisodeRecord,
    Trajectory,
    finish_with_answer,
    observe,
    reset,
    step,
    write_trajectory_log,
)
from .taxonomy import Taxonomy, toy_taxonomy

logger = logging.getLogger(__name__)


def run_agent_episode(
    agent: Agent,
    graph: NavGraph,
    record: EpisodeRecord,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Trajectory:
    """One full episode; the harness enforces candidate-index validity."""
    agent.begin_episode(record, graph)
    state = reset(graph, record, max_steps=max_steps)
    answer: Optional[str] = None
    while not state.done:
        obs = observe(state, graph)
        decision = agent.decide(obs)
        if not 0 <= decision.action_index < len(obs.candidates):
            raise WebNavKitError(
                f"agent produced invalid index {decision.action_index} "
                f"for {len(obs.candidates)} candidates"
            )
        step(state, decision.action_index, graph)
        if state.done:
            answer = decision.answer
    if answer is None:  # forced stop, or the agent stopped without answering
        answer = agent.forced_answer(state.stopped_page_id)
    return finish_with_answer(state, answer or "")


def make_agent(
    kind: str,
    *,
    seed: int = 0,
    checkpoint: Optional[Path | str] = None,
    params: Optional[dict] = None,
    vocab: Optional[Vocab] = None,
    model_config: Optional[ModelConfig] = None,
    assets: Optional[SiteAssets] = None,
    llm_client: Optional[LLMClient] = None,
    mock_dir: Optional[Path | str] = None,
) -> Agent:
    if kind == "random":
        return RandomAgent(seed=seed)
    if kind == "greedy":
        return GreedyAgent()
    if kind == "oracle":
        return OracleAgent()
    if kind == "learned":
        if checkpoint is not None:
            params, model_config, vocab = load_checkpoint(checkpoint)
        if params is None or vocab is None or model_config is None:
            raise ValueError("learned agent needs a checkpoint or params/vocab/config")
        return LearnedAgent(params, vocab, model_config,
                            assets or SiteAssets(None, model_config))
    if kind == "llm":
        if llm_client is None:
            if mock_dir is None:
                raise ValueError("llm agent needs a client or a mock transcript dir")
            llm_client = MockLLMClient(Path(mock_dir))
        return LLMAgent(llm_client)
    raise ValueError(f"unknown agent kind {kind!r}")


@dataclass
class EvalResult:
    report: MetricsReport
    trajectories: list[Trajectory]
    errors: list[tuple[str, str]]


def run_eval(
    agent: Agent,
    records: Sequence[EpisodeRecord],
    graph: NavGraph,
    *,
    tax: Optional[Taxonomy] = None,
    split: str = "",
    max_steps: int = DEFAULT_MAX_STEPS,
    out_dir: Optional[Path | str] = None,
    label: str = "run",
) -> EvalResult:
    """Run every record of a split to completion and score the results.

    Per-record failures are collected, never aborting the run.  With
    ``out_dir`` set, writes trajectories.jsonl, report.json and report.txt.
    """
    chosen = [r for r in records if not split or r.split == split]
    trajectories: list[Trajectory] = []
    errors: list[tuple[str, str]] = []
    for record in chosen:
        try:
            trajectories.append(run_agent_episode(agent, graph, record, max_steps=max_steps))
        except WebNavKitError as exc:
            logger.warning("episode %s failed: %s", record.record_id, exc)
            errors.append((record.record_id, str(exc)))
    report = compute_report(
        trajectories,
        {r.record_id: r for r in chosen},
        graph,
        tax if tax is not None else toy_taxonomy(),
        failures=len(errors),
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_trajectory_log(trajectories, out / "trajectories.jsonl")
        save_report(report, out / "report.json")
        (out / "report.txt").write_text(format_report_table(report, label=label) + "\n")
    return EvalResult(report=report, trajectories=trajectories, errors=errors)
