"""Adversarial training: sequence critic, gradient-penalty losses, loop.

The critic encodes walk elements (flags, budgets, node picks) with its
own encoders, runs an LSTM over the encoded sequence and scores the
final state.  Real walks enter as one-hots, generated walks as relaxed
soft vectors.  Training follows the Wasserstein objective with a
gradient penalty on interpolates between real and fake encoded
sequences, several critic steps per generator step, and early stopping
on a validation MMD over average-degree vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .generator import (
    GenConfig,
    GeneratorParams,
    SoftWalk,
    WalkGrads,
    generate_graph,
    minimax_rescale,
    onehot,
    unroll,
    unroll_backward,
)
from .graphs import Dataset, TruncatedWalk, split_dataset
from .metrics import average_degree, mmd
from .nn import Adam, Dense, Embedding, LSTMCell, Param, l2_penalty
from .sampler import EdgeIndex, SamplerConfig, sample_batch

__all__ = [
    "DiscConfig",
    "TrainConfig",
    "CriticParams",
    "TrainingDiverged",
    "walk_elements",
    "soft_walk_elements",
    "critic_step",
    "generator_step",
    "train",
    "TrainResult",
]

# finite-difference step for the penalty's parameter gradient (unit direction)
GP_FD_STEP = 1e-6


class TrainingDiverged(RuntimeError):
    """Raised when a loss goes non-finite; carries the epoch and values."""

    def __init__(self, epoch: int, critic_loss: float, gen_loss: float):
        super().__init__(
            f"non-finite loss at epoch {epoch}: critic={critic_loss!r} generator={gen_loss!r}"
        )
        self.epoch = epoch
        self.critic_loss = critic_loss
        self.gen_loss = gen_loss


@dataclass(frozen=True)
class DiscConfig:
    """Critic shapes; encoder interface mirrors the generator's."""

    n_nodes: int
    hidden: int = 40
    input_dim: int = 32
    flag_embed_dim: int = 16
    time_embed_dim: int = 32
    node_embed_dim: Union[int, None] = None

    @property
    def node_dim(self) -> int:
        return self.node_embed_dim if self.node_embed_dim is not None else max(2, self.n_nodes // 2)


@dataclass(frozen=True)
class TrainConfig:
    """Loop hyperparameters.

    Early stopping evaluates MMD over per-node average degree on the
    validation split every eval_every epochs and keeps the best
    generator tensors; patience counts evaluations without improvement.
    """

    max_epochs: int = 200
    batch_size: int = 32
    n_critic: int = 5
    lr: float = 3e-3
    gp_lambda: float = 10.0
    l2_disc: float = 5e-5
    l2_gen: float = 1e-7
    eval_every: int = 10
    patience: int = 5
    n_eval_samples: int = 25
    eval_walks: Union[int, None] = None
    eval_target_edges: Union[int, None] = None
    train_fraction: float = 0.8

    def __post_init__(self):
        if self.max_epochs < 0 or self.batch_size < 1 or self.n_critic < 1:
            raise ValueError("max_epochs must be >= 0, batch_size and n_critic positive")
        if self.eval_every < 1 or self.patience < 1:
            raise ValueError("eval_every and patience must be positive")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")


class CriticParams:
    """Critic blocks plus the two forward modes used by training.

    forward_raw consumes walk elements through the encoders; forward_enc
    consumes a precomputed encoding matrix, which is what the gradient
    penalty interpolates over.
    """

    def __init__(self, cfg: DiscConfig, rng: np.random.Generator):
        A = cfg.input_dim
        self.cfg = cfg
        self.emb_x = Embedding(2, cfg.flag_embed_dim, rng)
        self.proj_x = Dense(cfg.flag_embed_dim, A, rng)
        self.t_up = Dense(1, cfg.time_embed_dim, rng)
        self.t_proj = Dense(cfg.time_embed_dim, A, rng)
        self.emb_v = Embedding(cfg.n_nodes, cfg.node_dim, rng)
        self.proj_v = Dense(cfg.node_dim, A, rng)
        self.lstm = LSTMCell(A, cfg.hidden, rng)
        self.head = Dense(cfg.hidden, 1, rng)

        self.params: dict[str, Param] = {}
        for name in ("emb_x", "proj_x", "t_up", "t_proj", "emb_v", "proj_v", "lstm", "head"):
            for k, p in getattr(self, name).params.items():
                self.params[f"{name}.{k}"] = p

    def tensors(self) -> dict[str, np.ndarray]:
        return {k: p.value for k, p in self.params.items()}

    def load_tensors(self, tensors: dict[str, np.ndarray]) -> None:
        for k, p in self.params.items():
            if k not in tensors:
                raise ValueError(f"checkpoint missing tensor {k}")
            p.value[...] = np.asarray(tensors[k], dtype=np.float64).reshape(p.value.shape)

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    # element encoders -------------------------------------------------
    def _encode(self, kind: str, payload):
        if kind == "x" or kind == "y":
            e, c1 = self.emb_x.forward(payload)
            a, c2 = self.proj_x.forward(e)
            return a, (c1, c2)
        if kind == "t":
            h1, c1 = self.t_up.forward(np.array([float(payload)]))
            z = np.tanh(h1)
            a, c2 = self.t_proj.forward(z)
            return a, (c1, z, c2)
        e, c1 = self.emb_v.forward(payload)
        a, c2 = self.proj_v.forward(e)
        return a, (c1, c2)

    def _encode_backward(self, kind: str, cache, da):
        if kind == "x" or kind == "y":
            c1, c2 = cache
            return self.emb_x.backward(c1, self.proj_x.backward(c2, da))
        if kind == "t":
            c1, z, c2 = cache
            dz = self.t_proj.backward(c2, da)
            return float(self.t_up.backward(c1, dz * (1.0 - z * z))[0])
        c1, c2 = cache
        return self.emb_v.backward(c1, self.proj_v.backward(c2, da))

    def encode_sequence(self, elements: Sequence[tuple]):
        rows, caches = [], []
        for kind, payload in elements:
            a, cache = self._encode(kind, payload)
            rows.append(a)
            caches.append((kind, cache))
        return np.stack(rows), caches

    # scoring ------------------------------------------------------------
    def forward_enc(self, E: np.ndarray):
        h, c = self.lstm.init_state()
        lstm_caches = []
        for row in E:
            h, c, lc = self.lstm.forward(row, h, c)
            lstm_caches.append(lc)
        score, hc = self.head.forward(h)
        return float(score[0]), (lstm_caches, hc, E.shape)

    def backward_enc(self, tape, dscore: float) -> np.ndarray:
        lstm_caches, hc, shape = tape
        dh = self.head.backward(hc, np.array([dscore]))
        dc = np.zeros(self.cfg.hidden)
        dE = np.zeros(shape)
        for k in range(len(lstm_caches) - 1, -1, -1):
            da, dh, dc = self.lstm.backward(lstm_caches[k], dh, dc)
            dE[k] = da
        return dE

    def input_grads_only(self, tape, dscore: float) -> np.ndarray:
        """backward_enc without leaving any trace in the parameter grads."""
        snapshot = {k: p.grad.copy() for k, p in self.params.items()}
        dE = self.backward_enc(tape, dscore)
        for k, p in self.params.items():
            p.grad[...] = snapshot[k]
        return dE

    def forward_raw(self, elements: Sequence[tuple]):
        E, enc_caches = self.encode_sequence(elements)
        score, tape = self.forward_enc(E)
        return score, (enc_caches, tape, E)

    def backward_raw(self, tape_raw, dscore: float) -> list:
        enc_caches, tape, _ = tape_raw
        dE = self.backward_enc(tape, dscore)
        grads = []
        for k, (kind, cache) in enumerate(enc_caches):
            grads.append((kind, self._encode_backward(kind, cache, dE[k])))
        return grads


def walk_elements(walk: TruncatedWalk, n_nodes: int) -> list[tuple]:
    """Element sequence of a real walk: one-hot flags/nodes, scalar budgets."""
    elems = [("x", onehot(walk.profile.x, 2)), ("t", walk.profile.t0_bar)]
    for e in walk.edges:
        elems += [("u", onehot(e.u, n_nodes)), ("v", onehot(e.v, n_nodes)), ("t", e.t_bar)]
    elems.append(("y", onehot(walk.profile.y, 2)))
    return elems


def soft_walk_elements(sw: SoftWalk, times: Union[Sequence[float], None] = None) -> list[tuple]:
    """Element sequence of a generated walk: soft vectors, scalar budgets."""
    ts = list(sw.times) if times is None else list(times)
    elems = [("x", sw.x_soft), ("t", ts[0])]
    for i in range(sw.n_edges):
        elems += [("u", sw.u_soft[i]), ("v", sw.v_soft[i]), ("t", ts[i + 1])]
    elems.append(("y", sw.y_soft))
    return elems


def _element_grads_to_walk(grads: list, sw: SoftWalk, cfg: GenConfig) -> WalkGrads:
    wg = WalkGrads.zeros(cfg, sw.n_edges, len(sw.times))
    t_idx = 0
    edge_u = edge_v = 0
    for kind, g in grads:
        if kind == "x":
            wg.dx_soft += g
        elif kind == "y":
            wg.dy_soft += g
        elif kind == "t":
            wg.dt[t_idx] += g
            t_idx += 1
        elif kind == "u":
            wg.du[edge_u] += g
            edge_u += 1
        else:
            wg.dv[edge_v] += g
            edge_v += 1
    return wg


def _fake_batch(g: GeneratorParams, gcfg: GenConfig, rng, tau: float, n: int):
    """Unroll n soft walks; under minimax, batch-rescale a times copy.

    Returns (walks, critic_times, inv_scale): critic_times[i] is what the
    critic should see for walk i, inv_scale converts critic time grads
    back to raw decoder scale.
    """
    walks = [unroll(g, gcfg, rng, tau) for _ in range(n)]
    if gcfg.constraint != "minimax":
        return walks, [w.times for w in walks], 1.0
    raw = np.concatenate([w.times for w in walks])
    scaled, (_, scale) = minimax_rescale(raw, gcfg.minimax_eps, gcfg.minimax_shift_only)
    out, pos = [], 0
    for w in walks:
        out.append([float(v) for v in scaled[pos : pos + len(w.times)]])
        pos += len(w.times)
    return walks, out, 1.0 / scale


def _gp_pair(critic: CriticParams, E_real: np.ndarray, E_fake: np.ndarray,
             eps_u: float, weight: float) -> float:
    """Gradient penalty on one interpolated encoded sequence.

    The penalty value uses the exact analytic input gradient; its
    parameter gradient is the mixed second derivative, computed as a
    central difference of the analytic first-order backward along the
    outer-gradient direction.  The interpolate is treated as a constant
    input point, so encoder parameters receive no penalty gradient.
    """
    T = min(E_real.shape[0], E_fake.shape[0])
    Ehat = eps_u * E_real[:T] + (1.0 - eps_u) * E_fake[:T]
    _, tape = critic.forward_enc(Ehat)
    g = critic.input_grads_only(tape, 1.0)
    norm = float(np.sqrt(np.sum(g * g)))
    gp = (norm - 1.0) ** 2
    if norm < 1e-12:
        return gp  # flat critic: zero subgradient for the penalty
    U = (2.0 * (norm - 1.0) / norm) * g
    un = float(np.sqrt(np.sum(U * U)))
    if un < 1e-12 or weight == 0.0:
        return gp
    D = U / un
    coef = weight * un / (2.0 * GP_FD_STEP)
    _, t_up = critic.forward_enc(Ehat + GP_FD_STEP * D)
    critic.backward_enc(t_up, coef)
    _, t_dn = critic.forward_enc(Ehat - GP_FD_STEP * D)
    critic.backward_enc(t_dn, -coef)
    return gp


def critic_step(
    critic: CriticParams,
    g: GeneratorParams,
    gcfg: GenConfig,
    real_walks: Sequence[TruncatedWalk],
    t_cfg: TrainConfig,
    opt: Adam,
    rng: np.random.Generator,
    tau: float,
) -> tuple[float, float]:
    """One critic update; returns (critic loss, mean penalty value)."""
    B = len(real_walks)
    fakes, fake_times, _ = _fake_batch(g, gcfg, rng, tau, B)

    mean_real = 0.0
    mean_fake = 0.0
    E_reals = []
    E_fakes = []
    for rw in real_walks:
        elems = walk_elements(rw, gcfg.n_nodes)
        score, tape = critic.forward_raw(elems)
        mean_real += score / B
        critic.backward_raw(tape, -1.0 / B)
        E_reals.append(tape[2])
    for fw, ts in zip(fakes, fake_times):
        elems = soft_walk_elements(fw, ts)
        score, tape = critic.forward_raw(elems)
        mean_fake += score / B
        critic.backward_raw(tape, 1.0 / B)
        E_fakes.append(tape[2])

    gp_mean = 0.0
    for Er, Ef in zip(E_reals, E_fakes):
        eps_u = float(rng.uniform())
        gp_mean += _gp_pair(critic, Er, Ef, eps_u, t_cfg.gp_lambda / B) / B

    l2 = l2_penalty(critic.params, t_cfg.l2_disc)
    loss = mean_fake - mean_real + t_cfg.gp_lambda * gp_mean + l2
    opt.step()
    opt.zero_grad()
    return float(loss), float(gp_mean)


def generator_step(
    critic: CriticParams,
    g: GeneratorParams,
    gcfg: GenConfig,
    t_cfg: TrainConfig,
    opt: Adam,
    rng: np.random.Generator,
    tau: float,
) -> float:
    """One generator update against the frozen critic; returns the loss."""
    B = t_cfg.batch_size
    fakes, fake_times, inv_scale = _fake_batch(g, gcfg, rng, tau, B)
    loss = 0.0
    for fw, ts in zip(fakes, fake_times):
        elems = soft_walk_elements(fw, ts)
        score, tape = critic.forward_raw(elems)
        loss -= score / B
        elem_grads = critic.backward_raw(tape, -1.0 / B)
        wg = _element_grads_to_walk(elem_grads, fw, gcfg)
        if inv_scale != 1.0:
            wg.dt *= inv_scale
        unroll_backward(g, gcfg, fw, wg)
    loss += l2_penalty(g.params, t_cfg.l2_gen)
    opt.step()
    opt.zero_grad()
    critic.zero_grad()  # stray accumulation from backward_raw; the critic does not step here
    return float(loss)


@dataclass
class TrainResult:
    generator: GeneratorParams
    critic: CriticParams
    history: list
    best_epoch: Union[int, None]
    best_mmd: Union[float, None]


def _eval_mmd_avg_degree(
    g: GeneratorParams,
    gcfg: GenConfig,
    val: Dataset,
    n_samples: int,
    n_walks: int,
    target_edges: Union[int, None],
    rng: np.random.Generator,
) -> float:
    """MMD between generated and validation average-degree vectors.

    Returns +inf when every generated walk is filtered out, which counts
    as a non-improving evaluation.
    """
    gen_vecs = []
    for _ in range(n_samples):
        try:
            sample, _ = generate_graph(g, gcfg, rng, n_walks=n_walks, target_edges=target_edges)
        except ValueError:
            return math.inf
        gen_vecs.append(average_degree(sample))
    val_vecs = [average_degree(s) for s in val.samples]
    return mmd(np.stack(gen_vecs), np.stack(val_vecs))


def train(
    dataset: Dataset,
    gen_cfg: GenConfig,
    disc_cfg: DiscConfig,
    sampler_cfg: SamplerConfig,
    t_cfg: TrainConfig,
    rng: np.random.Generator,
    checkpoint_cb=None,
) -> TrainResult:
    """Adversarial loop: n_critic critic updates then one generator update
    per epoch, periodic validation MMD, patience-based early stopping.

    The dataset is split train_fraction / rest (seeded) into the batch
    source and the validation side of the early-stop metric.  The
    returned generator carries the best-evaluation tensors; history has
    one row per epoch.  Raises TrainingDiverged on non-finite loss.
    """
    if dataset.n_samples == 0:
        raise ValueError("empty dataset")
    train_ds, val_ds = split_dataset(dataset, t_cfg.train_fraction, rng)
    g = GeneratorParams(gen_cfg, rng)
    critic = CriticParams(disc_cfg, rng)
    g_opt = Adam(g.params, lr=t_cfg.lr)
    d_opt = Adam(critic.params, lr=t_cfg.lr)
    indices = [EdgeIndex(s) for s in train_ds.samples]

    target_edges = t_cfg.eval_target_edges
    if target_edges is None:
        target_edges = int(round(float(np.mean([s.n_edges for s in train_ds.samples]))))
    n_walks = t_cfg.eval_walks
    if n_walks is None:
        n_walks = max(8, int(np.ceil(2.5 * target_edges / gen_cfg.length)))

    history: list[dict] = []
    best_mmd = math.inf
    best_epoch = None
    best_tensors = None
    stale = 0

    for epoch in range(t_cfg.max_epochs):
        tau = gen_cfg.tau0 * gen_cfg.tau_decay**epoch
        c_loss = gp_val = 0.0
        for _ in range(t_cfg.n_critic):
            real = sample_batch(train_ds, sampler_cfg, t_cfg.batch_size, rng, indices)
            c_loss, gp_val = critic_step(critic, g, gen_cfg, real, t_cfg, d_opt, rng, tau)
        g_loss = generator_step(critic, g, gen_cfg, t_cfg, g_opt, rng, tau)
        if not (math.isfinite(c_loss) and math.isfinite(g_loss)):
            raise TrainingDiverged(epoch, c_loss, g_loss)

        mmd_val = None
        if (epoch + 1) % t_cfg.eval_every == 0:
            mmd_val = _eval_mmd_avg_degree(
                g, gen_cfg, val_ds, t_cfg.n_eval_samples, n_walks, target_edges, rng
            )
            if mmd_val < best_mmd:
                best_mmd = mmd_val
                best_epoch = epoch
                best_tensors = {k: v.copy() for k, v in g.tensors().items()}
                stale = 0
            else:
                stale += 1
            if checkpoint_cb is not None:
                checkpoint_cb(epoch, g, critic)
        history.append(
            {
                "epoch": epoch,
                "critic_loss": c_loss,
                "gen_loss": g_loss,
                "gp": gp_val,
                "mmd_avg_degree": None if mmd_val is None or not math.isfinite(mmd_val) else mmd_val,
                "tau": tau,
            }
        )
        if stale >= t_cfg.patience:
            break

    if best_tensors is not None:
        g.load_tensors(best_tensors)
    return TrainResult(
        generator=g,
        critic=critic,
        history=history,
        best_epoch=best_epoch,
        best_mmd=None if not math.isfinite(best_mmd) else best_mmd,
    )
