"""Benchmark kit for question-driven website navigation.

A website snapshot becomes a directed page graph; episodes ask a question,
navigate by clicking buttons, stop, and answer.  The kit bundles the
simulator, dataset generation, the metric suite, a trainable toy
navigation-and-answering model, agent baselines, and an HTTP session
service for interactive (human) trajectory collection.
"""

from .sitegraph import (
    Button,
    NavGraph,
    WebPage,
    build_graph,
    clean_text,
    load_site,
    parse_page,
    shortest_path,
)
from .simulator import (
    Action,
    EpisodeRecord,
    EpisodeState,
    Observation,
    Trajectory,
    finish_with_answer,
    observe,
    reset,
    step,
)
from .taxonomy import Taxonomy, load_taxonomy, toy_taxonomy, wup
from .metrics import (
    MetricsReport,
    NavScores,
    bleu,
    compute_report,
    corpus_bleu,
    nav_metrics,
    rouge_l,
    wups_score,
)
from .datagen import (
    MockLLMClient,
    QAPair,
    build_prompt,
    generate_records,
    parse_qa_response,
    sample_paths,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "Button",
    "EpisodeRecord",
    "EpisodeState",
    "MetricsReport",
    "MockLLMClient",
    "NavGraph",
    "NavScores",
    "Observation",
    "QAPair",
    "Taxonomy",
    "Trajectory",
    "WebPage",
    "bleu",
    "build_graph",
    "build_prompt",
    "clean_text",
    "compute_report",
    "corpus_bleu",
    "finish_with_answer",
    "generate_records",
    "load_site",
    "load_taxonomy",
    "nav_metrics",
    "observe",
    "parse_page",
    "parse_qa_response",
    "reset",
    "rouge_l",
    "sample_paths",
    "shortest_path",
    "step",
    "toy_taxonomy",
    "wup",
    "wups_score",
]
