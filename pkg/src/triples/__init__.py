"""Closed-loop harness for LLM-written tabletop policy code: a deterministic
kinematic world, a checked policy language, a retrieval library of
demonstrations, pluggable chat backends, and SR/ESR/Err benchmarking."""

from .bench import (
    Dataset,
    MetricsReport,
    assign_complexity,
    compute_metrics,
    generate,
    load_dataset,
    save_dataset,
    verify_dataset,
)
from .demos import DemoLibrary, Demonstration, HashedBagEmbedder, cosine_sim
from .gateway import BackendSet, oracle_backends, scripted_backends
from .lang import ApiRegistry, format_program, interpret, parse, register_api, static_check
from .pipeline import (
    EpisodeResult,
    PipelineConfig,
    TaskSpec,
    evaluate,
    run_episode,
    run_epoch_loop,
)
from .world import ActionError, GoalState, WorldState, spawn_world

__version__ = "0.1.0"

__all__ = [
    "ActionError",
    "ApiRegistry",
    "BackendSet",
    "Dataset",
    "DemoLibrary",
    "Demonstration",
    "EpisodeResult",
    "GoalState",
    "HashedBagEmbedder",
    "MetricsReport",
    "PipelineConfig",
    "TaskSpec",
    "WorldState",
    "__version__",
    "assign_complexity",
    "compute_metrics",
    "cosine_sim",
    "evaluate",
    "format_program",
    "generate",
    "interpret",
    "load_dataset",
    "oracle_backends",
    "parse",
    "register_api",
    "run_episode",
    "run_epoch_loop",
    "save_dataset",
    "scripted_backends",
    "spawn_world",
    "static_check",
    "verify_dataset",
]
