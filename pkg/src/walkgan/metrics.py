"""Distribution comparison between sets of temporal graphs.

Each sample is summarized by fourteen measures, seven on the continuous
timeline (per-node contact rates and instantaneous-group statistics on a
uniform evaluation grid, with contacts alive for a duration delta) and
seven on binned snapshots (static centralities of the aggregated graph,
walk-product broadcast/receive centralities, burstiness and temporal
correlation).  Squared MMD with an RBF kernel (bandwidth from the median
heuristic on the pooled set, biased estimator) compares the per-sample
vectors of two sets measure by measure.

Measures that are undefined on a sample (for example temporal
correlation when consecutive snapshots never share an active node)
propagate as missing values, never as zeros.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import networkx as nx
import numpy as np

from .graphs import SnapshotSequence, TemporalGraphSample, to_snapshots

__all__ = [
    "mmd",
    "median_bandwidth",
    "average_degree",
    "continuous_measures",
    "snapshot_measures",
    "all_measures",
    "evaluate",
    "CONTINUOUS_MEASURES",
    "SNAPSHOT_MEASURES",
]

N_GRID = 200  # evaluation grid points on [0, 1] for instantaneous statistics

CONTINUOUS_MEASURES = (
    "average_degree",
    "mean_average_degree",
    "group_size",
    "average_group_size",
    "mean_group_number",
    "mean_coordination_number",
    "mean_group_duration",
)
SNAPSHOT_MEASURES = (
    "betweenness",
    "closeness",
    "broadcast",
    "receive",
    "burstiness",
    "node_temporal_correlation",
    "temporal_correlation",
)


# --------------------------------------------------------------------------
# MMD


def median_bandwidth(pooled: np.ndarray) -> float:
    """sigma from the median pairwise squared distance of the pooled set.

    sigma^2 = median / 2, so the kernel is exp(-d^2 / median).  Falls
    back to 1 when all points coincide.
    """
    n = pooled.shape[0]
    sq = np.sum(pooled**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * pooled @ pooled.T
    iu = np.triu_indices(n, k=1)
    vals = d2[iu]
    if vals.size == 0:
        return 1.0
    med = float(np.median(vals))
    if med <= 0.0:
        return 1.0
    return math.sqrt(med / 2.0)


def _rbf(a: np.ndarray, b: np.ndarray, sigma: float) -> np.ndarray:
    sa = np.sum(a**2, axis=1)
    sb = np.sum(b**2, axis=1)
    d2 = np.maximum(sa[:, None] + sb[None, :] - 2.0 * a @ b.T, 0.0)
    return np.exp(-d2 / (2.0 * sigma**2))


def mmd(X, Y, sigma: Union[float, None] = None) -> float:
    """Biased squared MMD between two sets of vectors.

    Identical sets give exactly 0; NaN anywhere propagates to NaN.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[0] == 0 or Y.shape[0] == 0:
        raise ValueError("mmd needs non-empty sets")
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if np.isnan(X).any() or np.isnan(Y).any():
        return float("nan")
    # canonical argument order makes symmetry exact, not just up to
    # floating-point summation order
    if (Y.shape[0], Y.tobytes()) < (X.shape[0], X.tobytes()):
        X, Y = Y, X
    if sigma is None:
        sigma = median_bandwidth(np.vstack([X, Y]))
    kxx = float(np.mean(_rbf(X, X, sigma)))
    kyy = float(np.mean(_rbf(Y, Y, sigma)))
    kxy = float(np.mean(_rbf(X, Y, sigma)))
    return max(0.0, kxx + kyy - 2.0 * kxy)


# --------------------------------------------------------------------------
# continuous-time measures


def average_degree(sample: TemporalGraphSample) -> np.ndarray:
    """Per-node incident contact count over the unit span."""
    deg = np.zeros(sample.n_nodes)
    for e in sample.edges:
        deg[e.u] += 1.0
        deg[e.v] += 1.0
    return deg


def _live_pairs(sample: TemporalGraphSample, delta: float, grid: np.ndarray) -> list[list[tuple[int, int]]]:
    """Undirected node pairs alive at each grid point; contact spans [t, t + delta]."""
    live: list[list[tuple[int, int]]] = [[] for _ in grid]
    for e in sample.edges:
        lo = int(np.searchsorted(grid, e.t, side="left"))
        hi = int(np.searchsorted(grid, e.t + delta, side="right"))
        for k in range(lo, hi):
            live[k].append((e.u, e.v))
    return live


def _components(n_nodes: int, pairs: Sequence[tuple[int, int]]) -> list[tuple[int, ...]]:
    parent = list(range(n_nodes))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in pairs:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    groups: dict[int, list[int]] = {}
    for node in range(n_nodes):
        groups.setdefault(find(node), []).append(node)
    return [tuple(sorted(g)) for g in groups.values()]


def continuous_measures(
    sample: TemporalGraphSample, delta: float, n_grid: int = N_GRID
) -> dict[str, np.ndarray]:
    """Contact-rate and instantaneous-group statistics.

    Groups are connected components (singletons included) of the
    undirected contact graph sampled at n_grid uniform points; each grid
    point represents a 1/n_grid slice of the span, so a group identity
    alive for r consecutive points has duration r/n_grid.
    """
    V = sample.n_nodes
    grid = np.linspace(0.0, 1.0, n_grid)
    live = _live_pairs(sample, delta, grid)

    deg = average_degree(sample)
    size_hist = np.zeros(V)
    group_sizes = []
    group_numbers = []
    coordination = []
    durations: list[float] = []
    running: dict[tuple[int, ...], int] = {}

    for pairs in live:
        comps = _components(V, pairs)
        n_comp = len(comps)
        group_numbers.append(n_comp)
        group_sizes.append(V / n_comp)
        for c in comps:
            size_hist[len(c) - 1] += 1.0
        live_deg = np.zeros(V)
        for u, v in pairs:
            live_deg[u] += 1.0
            live_deg[v] += 1.0
        coordination.append(float(live_deg.mean()))

        current = set(comps)
        for ident in list(running):
            if ident not in current:
                durations.append(running.pop(ident) / n_grid)
        for ident in current:
            running[ident] = running.get(ident, 0) + 1
    for count in running.values():
        durations.append(count / n_grid)

    return {
        "average_degree": deg,
        "mean_average_degree": np.array([float(deg.mean())]),
        "group_size": size_hist / n_grid,
        "average_group_size": np.array([float(np.mean(group_sizes))]),
        "mean_group_number": np.array([float(np.mean(group_numbers))]),
        "mean_coordination_number": np.array([float(np.mean(coordination))]),
        "mean_group_duration": np.array([float(np.mean(durations))]),
    }


# --------------------------------------------------------------------------
# snapshot measures


def _aggregated_graph(snaps: SnapshotSequence) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(snaps.n_nodes))
    agg = snaps.mats.any(axis=0)
    us, vs = np.nonzero(agg)
    g.add_edges_from(zip(us.tolist(), vs.tolist()))
    return g


def _walk_product(snaps: SnapshotSequence) -> np.ndarray:
    """Q = prod_t (I - a A_t)^{-1} with a below 1/max spectral radius."""
    V = snaps.n_nodes
    rho = 0.0
    for t in range(snaps.n_bins):
        a_t = snaps.mats[t].astype(float)
        if a_t.any():
            rho = max(rho, float(np.max(np.abs(np.linalg.eigvals(a_t)))))
    # nilpotent snapshots have rho = 0 and the a < 1/rho bound is vacuous
    a = 0.9 / rho if rho > 0 else 0.9
    eye = np.eye(V)
    q = eye.copy()
    for t in range(snaps.n_bins):
        q = q @ np.linalg.inv(eye - a * snaps.mats[t].astype(float))
    return q


def _burstiness(snaps: SnapshotSequence) -> np.ndarray:
    """Per-node (sigma - mu) / (sigma + mu) over gaps between active bins.

    Nodes active in fewer than two bins take the single-event limit -1.
    """
    V = snaps.n_nodes
    active = snaps.mats.any(axis=2) | snaps.mats.any(axis=1)  # (T, V)
    out = np.full(V, -1.0)
    for i in range(V):
        bins = np.nonzero(active[:, i])[0]
        if bins.size < 2:
            continue
        gaps = np.diff(bins).astype(float)
        mu = float(gaps.mean())
        sig = float(gaps.std())
        out[i] = (sig - mu) / (sig + mu)
    return out


def _node_temporal_correlation(snaps: SnapshotSequence) -> np.ndarray:
    """Tang node correlation: mean neighborhood overlap of consecutive bins.

    C_i = (1/(T-1)) * sum_t sum_j A_t(i,j) A_{t+1}(i,j)
          / sqrt(sum_j A_t(i,j) * sum_j A_{t+1}(i,j));
    steps with an empty neighborhood on either side contribute nothing,
    and a node with no contributing step at all is NaN.
    """
    T = snaps.n_bins
    V = snaps.n_nodes
    if T < 2:
        return np.full(V, np.nan)
    mats = snaps.mats.astype(float)
    total = np.zeros(V)
    defined = np.zeros(V, dtype=bool)
    for t in range(T - 1):
        num = np.sum(mats[t] * mats[t + 1], axis=1)
        den = np.sum(mats[t], axis=1) * np.sum(mats[t + 1], axis=1)
        ok = den > 0
        total[ok] += num[ok] / np.sqrt(den[ok])
        defined |= ok
    out = total / (T - 1)
    out[~defined] = np.nan
    return out


def snapshot_measures(snaps: SnapshotSequence) -> dict[str, np.ndarray]:
    """Centralities and activity statistics of a snapshot sequence."""
    V = snaps.n_nodes
    agg = _aggregated_graph(snaps)
    betweenness = np.array([nx.betweenness_centrality(agg)[i] for i in range(V)])
    closeness = np.array([nx.closeness_centrality(agg)[i] for i in range(V)])
    q = _walk_product(snaps)
    node_corr = _node_temporal_correlation(snaps)
    defined = ~np.isnan(node_corr)
    temporal_corr = float(node_corr[defined].mean()) if defined.any() else float("nan")
    return {
        "betweenness": betweenness,
        "closeness": closeness,
        "broadcast": q.sum(axis=1),
        "receive": q.sum(axis=0),
        "burstiness": _burstiness(snaps),
        "node_temporal_correlation": node_corr,
        "temporal_correlation": np.array([temporal_corr]),
    }


def all_measures(
    sample: TemporalGraphSample,
    n_bins: int,
    delta: Union[float, None] = None,
    n_grid: int = N_GRID,
) -> dict[str, np.ndarray]:
    """All fourteen measure vectors for one sample; delta defaults to the bin width."""
    if delta is None:
        delta = 1.0 / n_bins
    out = continuous_measures(sample, delta, n_grid)
    out.update(snapshot_measures(to_snapshots(sample, n_bins)))
    return out


def _stack_measure(per_sample: list[dict[str, np.ndarray]], name: str) -> Union[np.ndarray, None]:
    """Rows of one measure; None when some sample has it fully undefined.

    Partially undefined per-node vectors are imputed with 0 for the
    defined-nodes rows to stay comparable; a vector with no defined entry
    (or an undefined scalar) marks the whole measure missing.
    """
    rows = []
    for m in per_sample:
        vec = m[name]
        bad = np.isnan(vec)
        if bad.all():
            return None
        if bad.any():
            vec = np.where(bad, 0.0, vec)
        rows.append(vec)
    return np.stack(rows)


def evaluate(
    real: Sequence[TemporalGraphSample],
    generated: Sequence[TemporalGraphSample],
    n_bins: int = 10,
    delta: Union[float, None] = None,
    n_grid: int = N_GRID,
    sigma: Union[float, None] = None,
) -> dict[str, Union[float, None]]:
    """Per-measure MMD between two sample sets; missing stays missing.

    sigma=None uses the median heuristic per measure; a fixed positive
    sigma applies to every measure.
    """
    if len(real) == 0 or len(generated) == 0:
        raise ValueError("evaluate needs non-empty sample sets")
    real_ms = [all_measures(s, n_bins, delta, n_grid) for s in real]
    gen_ms = [all_measures(s, n_bins, delta, n_grid) for s in generated]
    report: dict[str, Union[float, None]] = {}
    for name in CONTINUOUS_MEASURES + SNAPSHOT_MEASURES:
        xr = _stack_measure(real_ms, name)
        xg = _stack_measure(gen_ms, name)
        if xr is None or xg is None:
            report[name] = None
            continue
        val = mmd(xr, xg, sigma)
        report[name] = None if math.isnan(val) else val
    return report
