"""Core temporal-graph types and operations.

A temporal graph sample is a set of directed timestamped edges (u, v, t)
over a fixed node universe, with times normalized to [0, 1].  Walks are
expressed in the remaining-time ("budget") coordinate t_bar = 1 - t, so a
chronological walk has non-increasing budgets.  This module owns time
normalization, budget conversion, snapshot binning, walk validation and
walk-to-graph assembly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "TemporalEdge",
    "BudgetEdge",
    "TemporalGraphSample",
    "Dataset",
    "WalkProfile",
    "TruncatedWalk",
    "TemporalWalk",
    "SnapshotSequence",
    "ValidityReport",
    "AssemblyReport",
    "normalize_sample",
    "to_budget",
    "from_budget",
    "to_snapshots",
    "recover_continuous",
    "validate_walk",
    "assemble",
]

# Two generated edges with equal endpoints count as duplicates when their
# times differ by less than this.
DEDUP_TOL = 1e-6


@dataclass(frozen=True)
class TemporalEdge:
    """Directed edge (u, v) stamped with a normalized time t in [0, 1]."""

    u: int
    v: int
    t: float


@dataclass(frozen=True)
class BudgetEdge:
    """Directed edge carrying the remaining-time budget t_bar = 1 - t."""

    u: int
    v: int
    t_bar: float

    def to_temporal(self) -> TemporalEdge:
        return TemporalEdge(self.u, self.v, from_budget(self.t_bar))


@dataclass(frozen=True)
class TemporalGraphSample:
    """One temporal graph: edges sorted by time over n_nodes node ids.

    ``t_end_raw`` records the raw span the normalized times came from, so
    raw timestamps can be recovered as ``t * t_end_raw``.
    """

    n_nodes: int
    edges: tuple[TemporalEdge, ...]
    t_end_raw: float = 1.0

    def __post_init__(self):
        if self.n_nodes <= 0:
            raise ValueError("n_nodes must be positive")
        if self.t_end_raw <= 0:
            raise ValueError("t_end_raw must be positive")
        prev = 0.0
        for e in self.edges:
            if not (0 <= e.u < self.n_nodes and 0 <= e.v < self.n_nodes):
                raise ValueError(f"edge {e} outside node universe [0, {self.n_nodes})")
            if not (0.0 <= e.t <= 1.0):
                raise ValueError(f"edge time {e.t} outside [0, 1]")
            if e.t < prev:
                raise ValueError("edges must be sorted by time")
            prev = e.t

    @property
    def n_edges(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class Dataset:
    """Samples sharing one node universe and one raw time span."""

    samples: tuple[TemporalGraphSample, ...]
    n_nodes: int
    t_end_raw: float

    def __post_init__(self):
        for s in self.samples:
            if s.n_nodes != self.n_nodes:
                raise ValueError("all samples must share the dataset node universe")

    @property
    def n_samples(self) -> int:
        return len(self.samples)


def split_dataset(ds: Dataset, ratio: float, rng: np.random.Generator) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split; the first part gets floor(ratio * n) samples."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie strictly between 0 and 1")
    if ds.n_samples < 2:
        raise ValueError("need at least 2 samples to split")
    order = rng.permutation(ds.n_samples)
    n_first = int(ratio * ds.n_samples)
    n_first = min(max(n_first, 1), ds.n_samples - 1)
    first = tuple(ds.samples[i] for i in order[:n_first])
    second = tuple(ds.samples[i] for i in order[n_first:])
    return (
        Dataset(samples=first, n_nodes=ds.n_nodes, t_end_raw=ds.t_end_raw),
        Dataset(samples=second, n_nodes=ds.n_nodes, t_end_raw=ds.t_end_raw),
    )


@dataclass(frozen=True)
class WalkProfile:
    """Context flags of a truncated walk.

    x marks a walk-initial piece (then the starting budget is the full
    span, t0_bar = 1), y marks a walk-final piece.  t0_bar is the budget
    the first edge must not exceed.
    """

    x: int
    y: int
    t0_bar: float

    def __post_init__(self):
        if self.x not in (0, 1) or self.y not in (0, 1):
            raise ValueError("x and y must be binary flags")
        if not (0.0 <= self.t0_bar <= 1.0):
            raise ValueError(f"t0_bar {self.t0_bar} outside [0, 1]")
        if self.x == 1 and self.t0_bar != 1.0:
            raise ValueError("walk-initial pieces must start with the full budget")


@dataclass(frozen=True)
class TruncatedWalk:
    """A profile plus a bounded run of budget edges.

    Construction does not check temporal validity; generated walks may be
    invalid and are screened by :func:`validate_walk` at assembly time.
    teleports records hop positions k where the step from edges[k] to
    edges[k+1] was a deliberate temporal jump, exempting those hops from
    the connectivity check.
    """

    profile: WalkProfile
    edges: tuple[BudgetEdge, ...]
    teleports: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.edges) == 0:
            raise ValueError("a truncated walk carries at least one edge")
        for k in self.teleports:
            if not 0 <= k < len(self.edges) - 1:
                raise ValueError("teleport positions index hops between edges")


@dataclass(frozen=True)
class TemporalWalk:
    """A complete walk in budget coordinates (implicit full starting budget)."""

    edges: tuple[BudgetEdge, ...]

    def __post_init__(self):
        if len(self.edges) == 0:
            raise ValueError("a walk carries at least one edge")


@dataclass(eq=False)
class SnapshotSequence:
    """Binary adjacency matrices, one per uniform time bin."""

    n_nodes: int
    mats: np.ndarray  # shape (n_bins, n_nodes, n_nodes), values in {0, 1}

    def __post_init__(self):
        self.mats = np.asarray(self.mats)
        if self.mats.ndim != 3 or self.mats.shape[1:] != (self.n_nodes, self.n_nodes):
            raise ValueError("mats must have shape (n_bins, n_nodes, n_nodes)")
        if self.mats.shape[0] < 1:
            raise ValueError("need at least one bin")
        if not np.isin(self.mats, (0, 1)).all():
            raise ValueError("snapshots must be binary")

    @property
    def n_bins(self) -> int:
        return int(self.mats.shape[0])


@dataclass(frozen=True)
class ValidityReport:
    """Per-walk validity flags from :func:`validate_walk`.

    time_valid: budgets non-increasing, within [0, 1] and capped by t0_bar.
    connected: each edge starts where the previous one ended.
    in_range: all budgets (and t0_bar) lie in [0, 1].
    first_violation_index: first edge breaking a time condition, else None.
    """

    time_valid: bool
    connected: bool
    in_range: bool
    first_violation_index: Union[int, None] = None

    @property
    def ok(self) -> bool:
        return self.time_valid and self.connected and self.in_range


@dataclass(frozen=True)
class AssemblyReport:
    """Walk screening statistics from :func:`assemble`."""

    n_walks: int
    n_discarded: int
    n_duplicate_edges: int
    n_capped_edges: int

    @property
    def discard_rate(self) -> float:
        return self.n_discarded / self.n_walks if self.n_walks else 0.0


def normalize_sample(
    edges_raw: Iterable[tuple[int, int, float]],
    n_nodes: int,
    t_end_raw: float,
) -> TemporalGraphSample:
    """Build a sample from raw-time triples, dividing times by t_end_raw.

    Raw times must lie in [0, t_end_raw]; edges are sorted by time.
    """
    if t_end_raw <= 0:
        raise ValueError("t_end_raw must be positive")
    triples = sorted(edges_raw, key=lambda e: e[2])
    edges = []
    for u, v, t_raw in triples:
        if not (0.0 <= t_raw <= t_end_raw):
            raise ValueError(
                f"edge ({u}, {v}): raw time {t_raw} outside [0, {t_end_raw}]"
            )
        edges.append(TemporalEdge(int(u), int(v), float(t_raw) / t_end_raw))
    return TemporalGraphSample(n_nodes=n_nodes, edges=tuple(edges), t_end_raw=float(t_end_raw))


def _check_unit(x, name: str):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} outside [0, 1]")
    return arr


def to_budget(t):
    """Remaining-time budget 1 - t for scalar or array t in [0, 1]."""
    arr = _check_unit(t, "time")
    out = 1.0 - arr
    return float(out) if np.isscalar(t) or getattr(t, "ndim", 1) == 0 else out


def from_budget(t_bar):
    """Normalized time 1 - t_bar for scalar or array t_bar in [0, 1]."""
    arr = _check_unit(t_bar, "budget")
    out = 1.0 - arr
    return float(out) if np.isscalar(t_bar) or getattr(t_bar, "ndim", 1) == 0 else out


def to_snapshots(sample: TemporalGraphSample, n_bins: int) -> SnapshotSequence:
    """Bin edges into n_bins uniform intervals; t = 1 falls in the last bin."""
    if n_bins < 1:
        raise ValueError("n_bins must be at least 1")
    mats = np.zeros((n_bins, sample.n_nodes, sample.n_nodes), dtype=np.uint8)
    for e in sample.edges:
        k = min(int(e.t * n_bins), n_bins - 1)
        mats[k, e.u, e.v] = 1
    return SnapshotSequence(n_nodes=sample.n_nodes, mats=mats)


def recover_continuous(snaps: SnapshotSequence) -> TemporalGraphSample:
    """Lift snapshots back to continuous time at bin midpoints (k + 0.5) / n_bins."""
    n_bins = snaps.n_bins
    edges = []
    for k in range(n_bins):
        us, vs = np.nonzero(snaps.mats[k])
        t = (k + 0.5) / n_bins
        for u, v in zip(us.tolist(), vs.tolist()):
            edges.append(TemporalEdge(u, v, t))
    return TemporalGraphSample(n_nodes=snaps.n_nodes, edges=tuple(edges), t_end_raw=1.0)


def validate_walk(walk: Union[TruncatedWalk, TemporalWalk]) -> ValidityReport:
    """Check temporal ordering, budget range and step connectivity of a walk."""
    if isinstance(walk, TruncatedWalk):
        t0 = walk.profile.t0_bar
    else:
        t0 = 1.0
    budgets = [e.t_bar for e in walk.edges]

    in_range = 0.0 <= t0 <= 1.0 and all(0.0 <= b <= 1.0 for b in budgets)

    first_violation = None
    prev = t0
    for i, b in enumerate(budgets):
        if not (0.0 <= b <= 1.0) or b > prev:
            first_violation = i
            break
        prev = b
    time_valid = first_violation is None and in_range

    exempt = set(getattr(walk, "teleports", ()))
    connected = all(
        walk.edges[i].v == walk.edges[i + 1].u
        for i in range(len(walk.edges) - 1)
        if i not in exempt
    )
    return ValidityReport(
        time_valid=time_valid,
        connected=connected,
        in_range=in_range,
        first_violation_index=first_violation,
    )


def assemble(
    walks: Sequence[Union[TruncatedWalk, TemporalWalk]],
    n_nodes: int,
    target_edges: Union[int, None] = None,
    dedup_tol: float = DEDUP_TOL,
    require_connected: bool = True,
) -> tuple[TemporalGraphSample, AssemblyReport]:
    """Merge validated walks into one temporal graph sample.

    Walks failing :func:`validate_walk` are discarded (connectivity is
    optional via ``require_connected``).  Surviving edges are converted
    from budgets to times in generation order, near-duplicate (u, v)
    edges within ``dedup_tol`` are dropped, and when ``target_edges`` is
    set the earliest-generated edges are kept up to the cap.
    """
    if len(walks) == 0:
        raise ValueError("no walks to assemble")

    n_discarded = 0
    kept_edges: list[TemporalEdge] = []
    seen: dict[tuple[int, int], list[float]] = {}
    n_dup = 0
    for w in walks:
        report = validate_walk(w)
        valid = report.time_valid and report.in_range
        if require_connected:
            valid = valid and report.connected
        if not valid:
            n_discarded += 1
            continue
        for be in w.edges:
            t = from_budget(be.t_bar)
            times = seen.setdefault((be.u, be.v), [])
            if any(abs(t - t2) < dedup_tol for t2 in times):
                n_dup += 1
                continue
            times.append(t)
            kept_edges.append(TemporalEdge(be.u, be.v, t))

    if n_discarded == len(walks):
        raise ValueError(
            f"all {len(walks)} walks were discarded as invalid; nothing to assemble"
        )

    n_capped = 0
    if target_edges is not None and len(kept_edges) > target_edges:
        n_capped = len(kept_edges) - target_edges
        kept_edges = kept_edges[:target_edges]

    edges = tuple(sorted(kept_edges, key=lambda e: e.t))
    sample = TemporalGraphSample(n_nodes=n_nodes, edges=edges, t_end_raw=1.0)
    report = AssemblyReport(
        n_walks=len(walks),
        n_discarded=n_discarded,
        n_duplicate_edges=n_dup,
        n_capped_edges=n_capped,
    )
    return sample, report
