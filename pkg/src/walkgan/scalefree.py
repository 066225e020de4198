"""Directed scale-free temporal graph simulator.

Grows a directed graph from a 3-node cycle seed by preferential
attachment, stamping each new edge with a cumulative uniform time
increment, then normalizes times by the configured raw span.  Used to
build synthetic benchmark datasets with heavy-tailed degrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .graphs import Dataset, normalize_sample

__all__ = ["SynthConfig", "GrowthState", "seed_state", "step", "generate_sample", "generate_dataset"]


@dataclass(frozen=True)
class SynthConfig:
    """Growth-event mix and stopping rules.

    alpha adds a new source node wired to an in-degree-biased target,
    beta wires two existing nodes (out-biased source, in-biased target),
    gamma adds a new target node wired from an out-biased source.  The
    three must sum to 1.  Growth stops once the edge count reaches
    n_nodes_target (or max_edges when set) or the cumulative time
    reaches max_time_raw.  Time increments are uniform on (0, tau) with
    tau = max_time_raw / n_nodes_target.

    reuse_event_draw reuses the event-type uniform as the time fraction,
    coupling topology and timing; off by default.
    """

    n_nodes_target: int = 100
    alpha: float = 0.41
    beta: float = 0.54
    gamma: float = 0.05
    delta_in: float = 0.2
    delta_out: float = 0.0
    max_time_raw: float = 100.0
    n_samples: int = 1
    max_edges: Union[int, None] = None
    reuse_event_draw: bool = False

    def __post_init__(self):
        if abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-9:
            raise ValueError("alpha + beta + gamma must sum to 1")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("event probabilities must be non-negative")
        if self.delta_in < 0 or self.delta_out < 0:
            raise ValueError("degree offsets must be non-negative")
        if self.n_nodes_target < 1 or self.max_time_raw <= 0 or self.n_samples < 1:
            raise ValueError("n_nodes_target, max_time_raw and n_samples must be positive")

    @property
    def edge_target(self) -> int:
        return self.n_nodes_target if self.max_edges is None else min(
            self.n_nodes_target, self.max_edges
        )

    @property
    def tau(self) -> float:
        return self.max_time_raw / self.n_nodes_target


@dataclass
class GrowthState:
    """Mutable growth bookkeeping: raw-time edges plus degree counters."""

    n_nodes: int
    edges: list
    in_deg: list
    out_deg: list
    elapsed: float = 0.0
    finished: bool = False


def seed_state() -> GrowthState:
    """3-node directed cycle at time zero."""
    return GrowthState(
        n_nodes=3,
        edges=[(0, 1, 0.0), (1, 2, 0.0), (2, 0, 0.0)],
        in_deg=[1, 1, 1],
        out_deg=[1, 1, 1],
    )


def _choose(deg: list, delta: float, rng: np.random.Generator) -> int:
    # preferential attachment: weight d + delta, renormalized explicitly
    w = np.asarray(deg, dtype=float) + delta
    total = w.sum()
    if total <= 0.0:
        return int(rng.integers(len(deg)))
    return int(rng.choice(len(deg), p=w / total))


def step(state: GrowthState, cfg: SynthConfig, rng: np.random.Generator) -> GrowthState:
    """One growth event: pick an event type, stamp a timed edge, update degrees.

    Sets ``finished`` instead of adding an edge when the time increment
    would push the cumulative time past max_time_raw.
    """
    if state.finished:
        return state
    r_event = float(rng.uniform())
    r_time = r_event if cfg.reuse_event_draw else float(rng.uniform())
    dt = r_time * cfg.tau
    if state.elapsed + dt > cfg.max_time_raw:
        state.finished = True
        return state
    state.elapsed += dt
    t = state.elapsed

    if r_event < cfg.alpha:
        # new source node attached to an in-degree-biased existing target
        w = _choose(state.in_deg, cfg.delta_in, rng)
        u = state.n_nodes
        state.n_nodes += 1
        state.in_deg.append(0)
        state.out_deg.append(0)
        state.edges.append((u, w, t))
    elif r_event < cfg.alpha + cfg.beta:
        u = _choose(state.out_deg, cfg.delta_out, rng)
        w = _choose(state.in_deg, cfg.delta_in, rng)
        state.edges.append((u, w, t))
    else:
        # new target node attached from an out-degree-biased existing source
        u = _choose(state.out_deg, cfg.delta_out, rng)
        w = state.n_nodes
        state.n_nodes += 1
        state.in_deg.append(0)
        state.out_deg.append(0)
        state.edges.append((u, w, t))
    state.out_deg[u] += 1
    state.in_deg[w] += 1
    return state


def grow(cfg: SynthConfig, rng: np.random.Generator) -> GrowthState:
    """Run growth events until an edge/time stopping rule fires."""
    state = seed_state()
    while not state.finished and len(state.edges) < cfg.edge_target:
        step(state, cfg, rng)
    return state


def generate_sample(cfg: SynthConfig, rng: np.random.Generator, n_nodes: Union[int, None] = None):
    """One grown sample with times normalized by max_time_raw."""
    state = grow(cfg, rng)
    universe = state.n_nodes if n_nodes is None else n_nodes
    return normalize_sample(state.edges, n_nodes=universe, t_end_raw=cfg.max_time_raw)


def generate_dataset(cfg: SynthConfig, rng: np.random.Generator) -> Dataset:
    """n_samples independent samples sharing one node universe.

    The universe is the maximum node count grown across samples; node
    ids are stable because every sample grows from the same seed cycle.
    """
    states = [grow(cfg, rng) for _ in range(cfg.n_samples)]
    universe = max(s.n_nodes for s in states)
    samples = tuple(
        normalize_sample(s.edges, n_nodes=universe, t_end_raw=cfg.max_time_raw)
        for s in states
    )
    return Dataset(samples=samples, n_nodes=universe, t_end_raw=cfg.max_time_raw)
