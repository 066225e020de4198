"""Adversarial generation of continuous-time temporal graphs via walks.

Temporal graphs are decomposed into truncated temporal random walks, a
recurrent generator is trained against a Wasserstein critic to emit
temporally valid walks, and generated walks are assembled back into
graphs whose quality is scored by MMD over a battery of temporal
network measures.
"""

from .graphs import (
    AssemblyReport,
    BudgetEdge,
    Dataset,
    SnapshotSequence,
    TemporalEdge,
    TemporalGraphSample,
    TemporalWalk,
    TruncatedWalk,
    ValidityReport,
    WalkProfile,
    assemble,
    from_budget,
    normalize_sample,
    recover_continuous,
    split_dataset,
    to_budget,
    to_snapshots,
    validate_walk,
)
from .sampler import SamplerConfig, sample_batch, sample_truncated
from .scalefree import SynthConfig, generate_dataset
from .generator import GenConfig, GeneratorParams, generate_graph, unroll
from .adversarial import CriticParams, DiscConfig, TrainConfig, TrainingDiverged, train
from .metrics import evaluate, mmd

__version__ = "0.1.0"

__all__ = [
    "AssemblyReport",
    "BudgetEdge",
    "CriticParams",
    "Dataset",
    "DiscConfig",
    "GenConfig",
    "GeneratorParams",
    "SamplerConfig",
    "SnapshotSequence",
    "SynthConfig",
    "TemporalEdge",
    "TemporalGraphSample",
    "TemporalWalk",
    "TrainConfig",
    "TrainingDiverged",
    "TruncatedWalk",
    "ValidityReport",
    "WalkProfile",
    "assemble",
    "evaluate",
    "from_budget",
    "generate_dataset",
    "generate_graph",
    "mmd",
    "normalize_sample",
    "recover_continuous",
    "sample_batch",
    "sample_truncated",
    "split_dataset",
    "to_budget",
    "to_snapshots",
    "train",
    "unroll",
    "validate_walk",
]
