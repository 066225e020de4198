"""Truncated temporal random walk sampling.

Training walks are drawn from real samples in three stages: a start-edge
distribution biased by remaining-time budgets, an exponential-decay
next-edge distribution over strictly later adjacent edges with a small
uniform teleport mass over later non-adjacent edges, and profile flags
(x, y, t0_bar) describing whether the piece starts or ends a whole walk.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .graphs import BudgetEdge, Dataset, TemporalGraphSample, TruncatedWalk, WalkProfile

__all__ = ["SamplerConfig", "EdgeIndex", "start_probs", "next_probs", "sample_truncated", "sample_batch"]

START_BIASES = ("uniform", "linear", "exponential")


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs of the walk sampler.

    length: maximum edges per truncated walk (1..20).
    start_bias: start-edge weighting over budgets (uniform/linear/exponential).
    jump_epsilon: probability mass teleported to later non-adjacent edges.
    decay_lambda: rate of the exp(-lambda * dt) next-edge decay.
    bias_on_raw_times: weight starts by normalized times instead of budgets,
        which prefers late edges; off by default.
    """

    length: int = 4
    start_bias: str = "exponential"
    jump_epsilon: float = 1e-3
    decay_lambda: float = 1.0
    bias_on_raw_times: bool = False

    def __post_init__(self):
        if not (1 <= self.length <= 20):
            raise ValueError("length must be in 1..20")
        if self.start_bias not in START_BIASES:
            raise ValueError(f"start_bias must be one of {START_BIASES}")
        if not (0.0 <= self.jump_epsilon < 1.0):
            raise ValueError("jump_epsilon must be in [0, 1)")
        if self.decay_lambda < 0:
            raise ValueError("decay_lambda must be non-negative")


class EdgeIndex:
    """Array view of one sample's edges for fast candidate queries.

    Edges are kept in chronological order; ``times``/``budgets``/``src``/
    ``dst`` are parallel arrays over that order.
    """

    def __init__(self, sample: TemporalGraphSample):
        m = sample.n_edges
        self.n_nodes = sample.n_nodes
        self.times = np.array([e.t for e in sample.edges], dtype=float)
        self.budgets = 1.0 - self.times
        self.src = np.array([e.u for e in sample.edges], dtype=np.int64)
        self.dst = np.array([e.v for e in sample.edges], dtype=np.int64)
        self.n_edges = m

    def later_positions(self, j: int) -> np.ndarray:
        """Positions of edges strictly later in time than edge j."""
        first = int(np.searchsorted(self.times, self.times[j], side="right"))
        return np.arange(first, self.n_edges)

    def predecessor_position(self, j: int) -> Union[int, None]:
        """Latest strictly earlier edge ending at edge j's source, if any.

        Such an edge is the one a longer walk would have arrived on, so
        its budget becomes the truncated piece's entering budget.
        """
        last = int(np.searchsorted(self.times, self.times[j], side="left"))
        hits = np.nonzero(self.dst[:last] == self.src[j])[0]
        return int(hits[-1]) if hits.size else None


def start_probs(index: Union[EdgeIndex, TemporalGraphSample], cfg: SamplerConfig) -> np.ndarray:
    """Start-edge distribution over a sample's edges.

    Weights are the remaining-time budgets (or raw times under the
    fidelity flag): uniform, proportional, or exponential.  A linear bias
    with all-zero weights falls back to uniform.
    """
    if isinstance(index, TemporalGraphSample):
        index = EdgeIndex(index)
    m = index.n_edges
    if m == 0:
        raise ValueError("cannot sample a walk from an empty sample")
    w = index.times if cfg.bias_on_raw_times else index.budgets
    if cfg.start_bias == "uniform":
        return np.full(m, 1.0 / m)
    if cfg.start_bias == "linear":
        total = w.sum()
        if total <= 0.0:
            return np.full(m, 1.0 / m)
        return w / total
    e = np.exp(w)
    return e / e.sum()


def next_probs(
    index: EdgeIndex, j: int, cfg: SamplerConfig
) -> Union[tuple[np.ndarray, np.ndarray], None]:
    """Next-edge distribution after edge j, or None when the walk must end.

    Strictly later edges leaving edge j's head carry normalized
    exp(-lambda * dt) weights (unit block mass); strictly later edges
    starting elsewhere share a uniform teleport block of mass
    jump_epsilon; the combined vector is renormalized to sum to 1.  With
    no adjacent continuation the teleport block is all that remains; with
    teleports disabled such a walk ends.
    """
    later = index.later_positions(j)
    if later.size == 0:
        return None
    adj_mask = index.src[later] == index.dst[j]
    adj = later[adj_mask]
    tel = later[~adj_mask]

    eps = cfg.jump_epsilon
    probs_parts = []
    idx_parts = []
    if adj.size:
        w = np.exp(-cfg.decay_lambda * (index.budgets[j] - index.budgets[adj]))
        idx_parts.append(adj)
        probs_parts.append(w / w.sum())
    if tel.size and eps > 0.0:
        idx_parts.append(tel)
        probs_parts.append(np.full(tel.size, eps / tel.size))
    if not idx_parts:
        return None  # teleports disabled and no adjacent continuation
    cand = np.concatenate(idx_parts)
    probs = np.concatenate(probs_parts)
    total = probs.sum()
    if total <= 0.0:
        # subnormal jump_epsilon can underflow a lone teleport block to zero mass
        return cand, np.full(cand.size, 1.0 / cand.size)
    return cand, probs / total


def sample_truncated(
    dataset: Dataset,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    indices: Union[Sequence[EdgeIndex], None] = None,
) -> TruncatedWalk:
    """Draw one truncated walk from a uniformly chosen sample.

    The start profile is x = 1 (full budget) when no earlier edge can
    reach the start edge's source, else x = 0 with t0_bar taken from the
    predecessor edge a longer walk would have arrived on.  y = 1 when no
    strictly later edge exists after the final one.
    """
    if dataset.n_samples == 0:
        raise ValueError("empty dataset")
    s = int(rng.integers(dataset.n_samples))
    index = indices[s] if indices is not None else EdgeIndex(dataset.samples[s])

    p0 = start_probs(index, cfg)
    j = int(rng.choice(index.n_edges, p=p0))

    pred = index.predecessor_position(j)
    if pred is not None:
        x = 0
        t0_bar = float(index.budgets[pred])
    else:
        x = 1
        t0_bar = 1.0

    positions = [j]
    teleports = []
    cur = j
    while len(positions) < cfg.length:
        nxt = next_probs(index, cur, cfg)
        if nxt is None:
            break
        cand, probs = nxt
        prev_head = int(index.dst[cur])
        cur = int(rng.choice(cand, p=probs))
        if int(index.src[cur]) != prev_head:
            teleports.append(len(positions) - 1)
        positions.append(cur)

    y = 1 if index.later_positions(positions[-1]).size == 0 else 0
    edges = tuple(
        BudgetEdge(int(index.src[k]), int(index.dst[k]), float(index.budgets[k]))
        for k in positions
    )
    return TruncatedWalk(
        profile=WalkProfile(x=x, y=y, t0_bar=t0_bar),
        edges=edges,
        teleports=tuple(teleports),
    )


def sample_batch(
    dataset: Dataset,
    cfg: SamplerConfig,
    batch_size: int,
    rng: np.random.Generator,
    indices: Union[Sequence[EdgeIndex], None] = None,
) -> list[TruncatedWalk]:
    """Draw a batch of truncated walks, reusing per-sample edge indexes."""
    if batch_size < 0:
        raise ValueError("batch_size must be non-negative")
    if indices is None:
        indices = [EdgeIndex(s) for s in dataset.samples]
    return [sample_truncated(dataset, cfg, rng, indices) for _ in range(batch_size)]
