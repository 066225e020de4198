"""Recurrent walk generator.

A latent vector initializes an LSTM memory; the chain then emits, in
grammar order, the initial flag x, the starting budget t0_bar, L edges
as (u, v, t_bar) triples and the final flag y.  Every decoded value is
re-encoded as the next chain input.  Categorical values are sampled with
Gumbel noise and a relaxed soft surrogate kept for gradients; times pass
through a temporally-valid activation so budgets never increase.

Full walks are produced by one initial unroll (x = 1, full budget)
followed by teacher-forced extensions that replay the history and append
one edge at a time until the stop flag fires.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .graphs import BudgetEdge, TemporalWalk, TemporalGraphSample, assemble
from .nn import Adam, Dense, DeconvStack, Embedding, LSTMCell, Param, sigmoid, softmax, softplus

__all__ = [
    "GenConfig",
    "GeneratorParams",
    "SoftWalk",
    "WalkGrads",
    "gumbel_noise",
    "decode_categorical",
    "constrain",
    "minimax_rescale",
    "unroll",
    "unroll_backward",
    "extend_walk",
    "generate_full_walk",
    "generate_graph",
]

TIME_DECODERS = ("gaussian", "deep")
CONSTRAINTS = ("clip", "nested_relu", "minimax")
SOFT_VARIANTS = ("tanh", "softmax")
LATENTS = ("uniform", "normal")

# Equal consecutive budgets are nudged apart by this much.
TIME_SLACK = 1e-6


@dataclass(frozen=True)
class GenConfig:
    """Shapes and sampling knobs of the generator.

    input_dim is the shared encoder output size feeding the LSTM;
    node_embed_dim defaults to half the node count.  tau0/tau_decay
    schedule the Gumbel temperature per epoch.  minimax_shift_only drops
    the epsilon added after the min-shift (leaving the batch minimum at
    zero).  force_connect pins each sampled source to the previous head
    at generation time instead of leaving it to be learned.
    """

    n_nodes: int
    length: int = 4
    latent_dim: int = 16
    hidden: int = 50
    input_dim: int = 32
    flag_embed_dim: int = 16
    time_embed_dim: int = 32
    node_embed_dim: Union[int, None] = None
    time_decoder: str = "gaussian"
    constraint: str = "nested_relu"
    soft_variant: str = "tanh"
    latent_dist: str = "uniform"
    tau0: float = 5.0
    tau_decay: float = 0.995
    n_rows: int = 4
    minimax_eps: float = 1e-3
    minimax_shift_only: bool = False
    max_walk_len: int = 4
    force_connect: bool = False

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError("need at least two nodes")
        if not (1 <= self.length <= 20):
            raise ValueError("length must be in 1..20")
        if self.time_decoder not in TIME_DECODERS:
            raise ValueError(f"time_decoder must be one of {TIME_DECODERS}")
        if self.constraint not in CONSTRAINTS:
            raise ValueError(f"constraint must be one of {CONSTRAINTS}")
        if self.soft_variant not in SOFT_VARIANTS:
            raise ValueError(f"soft_variant must be one of {SOFT_VARIANTS}")
        if self.latent_dist not in LATENTS:
            raise ValueError(f"latent_dist must be one of {LATENTS}")
        if self.tau0 <= 0 or not (0 < self.tau_decay <= 1):
            raise ValueError("tau0 must be positive and tau_decay in (0, 1]")
        if self.max_walk_len < 1 or self.n_rows < 1:
            raise ValueError("max_walk_len and n_rows must be positive")

    @property
    def node_dim(self) -> int:
        return self.node_embed_dim if self.node_embed_dim is not None else max(2, self.n_nodes // 2)


class GeneratorParams:
    """All learnable blocks of the generator, with a flat named-param view."""

    def __init__(self, cfg: GenConfig, rng: np.random.Generator):
        H, A, V = cfg.hidden, cfg.input_dim, cfg.n_nodes
        self.cfg = cfg
        self.h0 = Dense(cfg.latent_dim, 2 * H, rng)
        self.lstm = LSTMCell(A, H, rng)
        self.emb_x = Embedding(2, cfg.flag_embed_dim, rng)
        self.proj_x = Dense(cfg.flag_embed_dim, A, rng)
        self.t_up = Dense(1, cfg.time_embed_dim, rng)
        self.t_proj = Dense(cfg.time_embed_dim, A, rng)
        self.emb_v = Embedding(V, cfg.node_dim, rng)
        self.proj_v = Dense(cfg.node_dim, A, rng)
        self.dec_x = Dense(H, 2, rng)
        self.dec_y = Dense(H, 2, rng)
        self.dec_u = Dense(H, V, rng)
        self.dec_v = Dense(H, V, rng)
        if cfg.time_decoder == "gaussian":
            self.dec_mu = Dense(H, 1, rng)
            self.dec_sigma = Dense(H, 1, rng)
        else:
            self.deconv = DeconvStack(H, rng)
            self.dec_row = Dense(self.deconv.out_hw[1], 1, rng)

        self.params: dict[str, Param] = {}
        for name in self._block_names():
            block = getattr(self, name)
            for k, p in block.params.items():
                self.params[f"{name}.{k}"] = p

    def _block_names(self) -> list[str]:
        names = [
            "h0", "lstm", "emb_x", "proj_x", "t_up", "t_proj", "emb_v", "proj_v",
            "dec_x", "dec_y", "dec_u", "dec_v",
        ]
        if self.cfg.time_decoder == "gaussian":
            names += ["dec_mu", "dec_sigma"]
        else:
            names += ["deconv", "dec_row"]
        return names

    def tensors(self) -> dict[str, np.ndarray]:
        return {k: p.value for k, p in self.params.items()}

    def load_tensors(self, tensors: dict[str, np.ndarray]) -> None:
        missing = set(self.params) - set(tensors)
        if missing:
            raise ValueError(f"checkpoint missing tensors: {sorted(missing)}")
        for k, p in self.params.items():
            arr = np.asarray(tensors[k], dtype=np.float64)
            if arr.shape != p.value.shape:
                raise ValueError(f"tensor {k} has shape {arr.shape}, expected {p.value.shape}")
            p.value[...] = arr

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()


def onehot(i: int, k: int) -> np.ndarray:
    v = np.zeros(k)
    v[i] = 1.0
    return v


def gumbel_noise(rng: np.random.Generator, size: int) -> np.ndarray:
    u = rng.random(size)
    return -np.log(-np.log(u + 1e-20) + 1e-20)


def decode_categorical(dec: Dense, o: np.ndarray, tau: float, rng: np.random.Generator, variant: str):
    """Gumbel-perturbed categorical head: hard argmax plus a soft surrogate.

    The soft surrogate is tanh((q + g) / tau) elementwise by default, or
    a softmax over the same logits under the softmax variant; the hard
    pick is the argmax of q + g either way.
    """
    q, dc = dec.forward(o)
    g = gumbel_noise(rng, q.shape[0])
    s = (q + g) / tau
    soft = np.tanh(s) if variant == "tanh" else softmax(s)
    hard = int(np.argmax(q + g))
    return soft, hard, (dc, soft, tau, variant)


def decode_categorical_backward(dec: Dense, cache, dsoft: np.ndarray) -> np.ndarray:
    dc, soft, tau, variant = cache
    if variant == "tanh":
        dq = dsoft * (1.0 - soft * soft) / tau
    else:
        dq = soft * (dsoft - float(np.dot(dsoft, soft))) / tau
    return dec.backward(dc, dq)


def constrain(t_raw: float, t_prev: float, mode: str):
    """Map a raw decoded time into [0, t_prev].

    clip: hard clamp.  nested_relu: relu(t) - relu(t - t_prev), the same
    clamp expressed with subgradients that pass through at the kinks
    differently.  minimax: identity here; the batch shift/scale is
    applied afterwards over all raw times via :func:`minimax_rescale`.
    """
    if mode == "clip":
        t = min(max(t_raw, 0.0), t_prev)
    elif mode == "nested_relu":
        # float subtraction may overshoot t_prev by an ulp; clamp to keep
        # monotonicity exact (gradient is already zero in that regime)
        t = min(max(max(t_raw, 0.0) - max(t_raw - t_prev, 0.0), 0.0), t_prev)
    elif mode == "minimax":
        t = t_raw
    else:
        raise ValueError(f"unknown constraint mode {mode!r}")
    return t, (t_raw, t_prev, mode)


def constrain_backward(cache, dt: float) -> tuple[float, float]:
    """Returns (d t_raw, d t_prev)."""
    t_raw, t_prev, mode = cache
    if mode == "minimax":
        return dt, 0.0
    if mode == "clip":
        if t_raw <= 0.0:
            return 0.0, 0.0
        if t_raw < t_prev:
            return dt, 0.0
        return 0.0, dt
    # nested_relu
    dr = dt * ((1.0 if t_raw > 0 else 0.0) - (1.0 if t_raw > t_prev else 0.0))
    dp = dt * (1.0 if t_raw > t_prev else 0.0)
    return dr, dp


def minimax_rescale(values: np.ndarray, eps: float = 1e-3, shift_only: bool = False):
    """Batch shift/scale into the unit interval.

    If the minimum is at or below eps, shift so it lands at eps (or at
    zero under shift_only); if the maximum then exceeds 1, divide by it.
    Returns the rescaled array and the (shift, scale) actually applied.
    """
    values = np.asarray(values, dtype=float)
    shift = 0.0
    lo = values.min()
    if lo <= eps:
        shift = -lo + (0.0 if shift_only else eps)
        values = values + shift
    scale = 1.0
    hi = values.max()
    if hi > 1.0:
        scale = hi
        values = values / scale
    return values, (shift, scale)


@dataclass(eq=False)
class SoftWalk:
    """One generated truncated piece with its gradient tape.

    times[0] is t0_bar, times[i] the i-th edge budget.  Soft vectors are
    the relaxed categorical samples fed to the critic during training;
    hard fields are the sampled values actually used downstream.
    """

    x_soft: np.ndarray
    x_hard: int
    times: list
    u_soft: list
    u_hard: list
    v_soft: list
    v_hard: list
    y_soft: np.ndarray
    y_hard: int
    tape: Union[list, None] = None
    h0_cache: object = None

    @property
    def n_edges(self) -> int:
        return len(self.u_hard)

    def budget_edges(self) -> tuple[BudgetEdge, ...]:
        return tuple(
            BudgetEdge(self.u_hard[i], self.v_hard[i], self.times[i + 1])
            for i in range(self.n_edges)
        )


@dataclass
class WalkGrads:
    """Upstream gradients on a SoftWalk's outputs (critic side)."""

    dx_soft: np.ndarray
    dt: np.ndarray  # len(times): t0_bar first
    du: list  # per edge, (n_nodes,)
    dv: list
    dy_soft: np.ndarray

    @classmethod
    def zeros(cls, cfg: GenConfig, n_edges: int, n_times: int) -> "WalkGrads":
        return cls(
            dx_soft=np.zeros(2),
            dt=np.zeros(n_times),
            du=[np.zeros(cfg.n_nodes) for _ in range(n_edges)],
            dv=[np.zeros(cfg.n_nodes) for _ in range(n_edges)],
            dy_soft=np.zeros(2),
        )


def sample_latent(cfg: GenConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.latent_dist == "uniform":
        return rng.uniform(-1.0, 1.0, size=cfg.latent_dim)
    return rng.standard_normal(cfg.latent_dim)


def _encode_cat(emb: Embedding, proj: Dense, vec: np.ndarray):
    e, c1 = emb.forward(vec)
    a, c2 = proj.forward(e)
    return a, (c1, c2)


def _encode_cat_backward(emb: Embedding, proj: Dense, cache, da: np.ndarray) -> np.ndarray:
    c1, c2 = cache
    de = proj.backward(c2, da)
    return emb.backward(c1, de)


def _encode_time(params: GeneratorParams, t: float):
    h1, c1 = params.t_up.forward(np.array([t]))
    z = np.tanh(h1)
    a, c2 = params.t_proj.forward(z)
    return a, (c1, z, c2)


def _encode_time_backward(params: GeneratorParams, cache, da: np.ndarray) -> float:
    c1, z, c2 = cache
    dz = params.t_proj.backward(c2, da)
    dh1 = dz * (1.0 - z * z)
    return float(params.t_up.backward(c1, dh1)[0])


def _decode_time(params: GeneratorParams, cfg: GenConfig, o: np.ndarray, rng: np.random.Generator):
    """Raw (unconstrained) time from the configured decoder."""
    if cfg.time_decoder == "gaussian":
        mu, cm = params.dec_mu.forward(o)
        pre, cs = params.dec_sigma.forward(o)
        n = float(rng.standard_normal())
        r = float(mu[0] + softplus(pre)[0] * n)
        return r, ("gaussian", cm, cs, pre.copy(), n)
    R, dc = params.deconv.forward(o)
    rows = rng.integers(0, R.shape[0], size=cfg.n_rows)
    rbar = R[rows].mean(axis=0)
    val, cr = params.dec_row.forward(rbar)
    return float(val[0]), ("deep", dc, rows, cr, R.shape)


def _decode_time_backward(params: GeneratorParams, cache, dr: float) -> np.ndarray:
    kind = cache[0]
    if kind == "gaussian":
        _, cm, cs, pre, n = cache
        do = params.dec_mu.backward(cm, np.array([dr]))
        do = do + params.dec_sigma.backward(cs, np.array([dr * n * sigmoid(pre)[0]]))
        return do
    _, dc, rows, cr, shape = cache
    drbar = params.dec_row.backward(cr, np.array([dr]))
    dR = np.zeros(shape)
    for i in rows:
        dR[i] += drbar / len(rows)
    return params.deconv.backward(dc, dR)


def _apply_slack(t: float, t_prev: float) -> float:
    # keep consecutive budgets strictly decreasing when room allows
    if t == t_prev and t - TIME_SLACK >= 0.0:
        return t - TIME_SLACK
    return t


def _run_chain(
    params: GeneratorParams,
    cfg: GenConfig,
    rng: np.random.Generator,
    tau: float,
    force_x: Union[int, None],
    force_t0: Union[float, None],
    teacher_edges: tuple,
    n_new_edges: int,
) -> SoftWalk:
    """Shared chain runner behind unroll and extend_walk.

    Teacher edges are encoded as inputs without consuming randomness;
    each chain step's LSTM output decodes the next grammar element and
    the decoded (or given) value is re-encoded as the next input.
    """
    H = cfg.hidden
    m0, h0c = params.h0.forward(sample_latent(cfg, rng))
    h, c = m0[:H].copy(), m0[H:].copy()

    tape = []
    walk = SoftWalk(
        x_soft=np.zeros(2), x_hard=0, times=[], u_soft=[], u_hard=[], v_soft=[],
        v_hard=[], y_soft=np.zeros(2), y_hard=0, tape=tape, h0_cache=h0c,
    )

    def lstm_step(a, in_rec, out_fn):
        nonlocal h, c
        h, c, lc = params.lstm.forward(a, h, c)
        out_rec = out_fn(h)
        tape.append((lc, in_rec, out_rec))

    # x
    def dec_x(o):
        if force_x is not None:
            walk.x_hard = int(force_x)
            walk.x_soft = onehot(walk.x_hard, 2)
            return None
        soft, hard, cache = decode_categorical(params.dec_x, o, tau, rng, cfg.soft_variant)
        walk.x_soft, walk.x_hard = soft, hard
        return ("x", cache)

    lstm_step(np.zeros(cfg.input_dim), None, dec_x)

    # t0_bar
    a, ec = _encode_cat(params.emb_x, params.proj_x, onehot(walk.x_hard, 2))

    def dec_t0(o):
        if force_t0 is not None:
            walk.times.append(float(force_t0))
            return None
        r, dcache = _decode_time(params, cfg, o, rng)
        t0, ccache = constrain(r, 1.0, cfg.constraint)
        if cfg.constraint != "minimax":
            t0 = _apply_slack(t0, 1.0)
        walk.times.append(t0)
        return ("t", 0, dcache, ccache)

    lstm_step(a, ("x", ec), dec_t0)

    def push_edge(u, v, tb, sampled: bool):
        walk.u_hard.append(u)
        walk.v_hard.append(v)
        walk.times.append(tb)
        if not sampled:
            walk.u_soft.append(onehot(u, cfg.n_nodes))
            walk.v_soft.append(onehot(v, cfg.n_nodes))

    # teacher-forced history: encode, decode nothing, draw nothing
    for (u, v, tb) in teacher_edges:
        a, ec = _encode_time(params, walk.times[-1])
        lstm_step(a, ("t", ec, len(walk.times) - 1), lambda o: None)
        push_edge(int(u), int(v), float(tb), sampled=False)
        a, ec = _encode_cat(params.emb_v, params.proj_v, walk.u_soft[-1])
        lstm_step(a, ("u", ec, len(walk.u_hard) - 1), lambda o: None)
        a, ec = _encode_cat(params.emb_v, params.proj_v, walk.v_soft[-1])
        lstm_step(a, ("v", ec, len(walk.v_hard) - 1), lambda o: None)
        # the time input for the next step is encoded at the top of the loop

    # fresh edges
    for _ in range(n_new_edges):
        edge_i = len(walk.u_hard)
        a, ec = _encode_time(params, walk.times[-1])
        in_rec = ("t", ec, len(walk.times) - 1)

        def dec_u(o):
            if cfg.force_connect and (walk.v_hard or teacher_edges):
                prev_head = walk.v_hard[-1]
                walk.u_hard.append(int(prev_head))
                walk.u_soft.append(onehot(int(prev_head), cfg.n_nodes))
                return None
            soft, hard, cache = decode_categorical(params.dec_u, o, tau, rng, cfg.soft_variant)
            walk.u_soft.append(soft)
            walk.u_hard.append(hard)
            return ("u", edge_i, cache)

        lstm_step(a, in_rec, dec_u)

        a, ec = _encode_cat(params.emb_v, params.proj_v, onehot(walk.u_hard[-1], cfg.n_nodes))

        def dec_v(o):
            soft, hard, cache = decode_categorical(params.dec_v, o, tau, rng, cfg.soft_variant)
            walk.v_soft.append(soft)
            walk.v_hard.append(hard)
            return ("v", edge_i, cache)

        lstm_step(a, ("u", ec, edge_i), dec_v)

        a, ec = _encode_cat(params.emb_v, params.proj_v, onehot(walk.v_hard[-1], cfg.n_nodes))

        def dec_t(o):
            t_prev = walk.times[-1]
            r, dcache = _decode_time(params, cfg, o, rng)
            t, ccache = constrain(r, t_prev, cfg.constraint)
            if cfg.constraint != "minimax":
                t = _apply_slack(t, t_prev)
            walk.times.append(t)
            return ("t", len(walk.times) - 1, dcache, ccache)

        lstm_step(a, ("v", ec, edge_i), dec_t)

    # y
    a, ec = _encode_time(params, walk.times[-1])

    def dec_y(o):
        soft, hard, cache = decode_categorical(params.dec_y, o, tau, rng, cfg.soft_variant)
        walk.y_soft, walk.y_hard = soft, hard
        return ("y", cache)

    lstm_step(a, ("t", ec, len(walk.times) - 1), dec_y)
    return walk


def unroll(params: GeneratorParams, cfg: GenConfig, rng: np.random.Generator, tau: float,
           force_x: Union[int, None] = None, force_t0: Union[float, None] = None) -> SoftWalk:
    """Generate one truncated piece of cfg.length edges plus profile flags.

    Training leaves force_x/force_t0 unset so the profile heads are
    learned; generation forces x = 1 with the full budget.
    """
    return _run_chain(params, cfg, rng, tau, force_x, force_t0, (), cfg.length)


def extend_walk(params: GeneratorParams, cfg: GenConfig, rng: np.random.Generator,
                prefix: tuple, tau: float = 1.0) -> tuple[tuple[int, int, float], int]:
    """Append one edge to a walk prefix by teacher-forced replay.

    The chain is re-run with x = 0 and t0_bar equal to the last prefix
    budget, the prefix edges encoded as inputs, and exactly one fresh
    (u, v, t_bar) plus a stop flag sampled at the end.
    """
    if not prefix:
        raise ValueError("extension needs a non-empty prefix")
    budgets = [float(e[2]) for e in prefix]
    if any(b < 0.0 or b > 1.0 for b in budgets) or any(
        b2 > b1 for b1, b2 in zip(budgets, budgets[1:])
    ):
        raise ValueError("prefix budgets must be non-increasing within [0, 1]")
    if any(not (0 <= e[0] < cfg.n_nodes and 0 <= e[1] < cfg.n_nodes) for e in prefix):
        raise ValueError("prefix node ids out of range")
    t0 = float(prefix[-1][2])
    walk = _run_chain(params, cfg, rng, tau, 0, t0, tuple(prefix), 1)
    u, v, tb = walk.u_hard[-1], walk.v_hard[-1], walk.times[-1]
    return (u, v, tb), walk.y_hard


def generate_full_walk(params: GeneratorParams, cfg: GenConfig, rng: np.random.Generator,
                       tau: float = 1.0) -> TemporalWalk:
    """One complete walk: initial piece at full budget, then extensions
    until the stop flag fires or max_walk_len pieces are reached."""
    piece = unroll(params, cfg, rng, tau, force_x=1, force_t0=1.0)
    edges = [(u, v, t) for u, v, t in zip(piece.u_hard, piece.v_hard, piece.times[1:])]
    y = piece.y_hard
    pieces = 1
    while y == 0 and pieces < cfg.max_walk_len:
        edge, y = extend_walk(params, cfg, rng, tuple(edges), tau)
        edges.append(edge)
        pieces += 1
    return TemporalWalk(edges=tuple(BudgetEdge(u, v, tb) for u, v, tb in edges))


def generate_graph(
    params: GeneratorParams,
    cfg: GenConfig,
    rng: np.random.Generator,
    n_walks: int,
    target_edges: Union[int, None] = None,
    tau: float = 1.0,
):
    """Sample n_walks full walks and assemble them into one graph sample.

    Invalid walks are filtered at assembly; returns the sample plus the
    assembly report (discard rate and dedup counts).
    """
    walks = [generate_full_walk(params, cfg, rng, tau) for _ in range(n_walks)]
    if cfg.constraint == "minimax":
        raw = np.concatenate([[e.t_bar for e in w.edges] for w in walks])
        scaled, _ = minimax_rescale(raw, cfg.minimax_eps, cfg.minimax_shift_only)
        pos = 0
        rescaled = []
        for w in walks:
            k = len(w.edges)
            rescaled.append(TemporalWalk(edges=tuple(
                BudgetEdge(e.u, e.v, float(scaled[pos + i])) for i, e in enumerate(w.edges)
            )))
            pos += k
        walks = rescaled
    return assemble(walks, n_nodes=cfg.n_nodes, target_edges=target_edges)


def unroll_backward(params: GeneratorParams, cfg: GenConfig, walk: SoftWalk, grads: WalkGrads) -> None:
    """Backpropagate critic gradients through one unrolled piece.

    Soft categorical outputs receive straight-through gradients (the
    encoders consumed hard one-hots, their input gradients are routed to
    the soft samples); time gradients accumulate across the encoder
    path, the next step's constraint cap, and the critic's direct use.
    """
    if walk.tape is None:
        raise ValueError("walk carries no tape; run unroll with gradients enabled")
    H = cfg.hidden
    dh, dc = np.zeros(H), np.zeros(H)
    dt_pending = np.array(grads.dt, dtype=float).copy()
    dx_acc = grads.dx_soft.copy()
    dy_acc = grads.dy_soft.copy()
    du_acc = [g.copy() for g in grads.du]
    dv_acc = [g.copy() for g in grads.dv]

    for lc, in_rec, out_rec in reversed(walk.tape):
        do = np.zeros(H)
        if out_rec is not None:
            kind = out_rec[0]
            if kind == "x":
                do += decode_categorical_backward(params.dec_x, out_rec[1], dx_acc)
            elif kind == "y":
                do += decode_categorical_backward(params.dec_y, out_rec[1], dy_acc)
            elif kind == "u":
                do += decode_categorical_backward(params.dec_u, out_rec[2], du_acc[out_rec[1]])
            elif kind == "v":
                do += decode_categorical_backward(params.dec_v, out_rec[2], dv_acc[out_rec[1]])
            elif kind == "t":
                _, t_idx, dcache, ccache = out_rec
                dr, dprev = constrain_backward(ccache, float(dt_pending[t_idx]))
                if t_idx > 0:
                    dt_pending[t_idx - 1] += dprev
                do += _decode_time_backward(params, dcache, dr)
        da, dh, dc = params.lstm.backward(lc, dh + do, dc)
        if in_rec is not None:
            kind = in_rec[0]
            if kind == "x":
                dx_acc += _encode_cat_backward(params.emb_x, params.proj_x, in_rec[1], da)
            elif kind == "t":
                dt_pending[in_rec[2]] += _encode_time_backward(params, in_rec[1], da)
            elif kind == "u":
                du_acc[in_rec[2]] += _encode_cat_backward(params.emb_v, params.proj_v, in_rec[1], da)
            elif kind == "v":
                dv_acc[in_rec[2]] += _encode_cat_backward(params.emb_v, params.proj_v, in_rec[1], da)
    params.h0.backward(walk.h0_cache, np.concatenate([dh, dc]))
