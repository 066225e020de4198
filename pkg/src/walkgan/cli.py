"""Command-line operator surface.

Subcommands: simulate (synthetic dataset), sample (truncated walks),
train (adversarial loop), generate (graphs from a checkpoint), evaluate
(MMD report between two datasets), plot (SVG arc diagram).  Options
come from flags layered over an optional TOML config file with one
section per module; every run writes a JSON manifest recording the
resolved config, seed, output hashes and wall-clock duration.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .adversarial import DiscConfig, TrainConfig, train
from .dataio import (
    read_edge_csv,
    save_tensors,
    load_tensors,
    write_edge_csv,
    write_history_csv,
    write_metric_report,
    write_run_manifest,
    write_walk_csv,
)
from .generator import GenConfig, GeneratorParams, generate_graph
from .graphs import Dataset, TemporalGraphSample, split_dataset
from .metrics import evaluate
from .sampler import SamplerConfig, sample_batch
from .scalefree import SynthConfig, generate_dataset
from .svgplot import write_svg

__all__ = ["main", "ingest", "split"]


def ingest(path, t_end_raw=None) -> Dataset:
    """Load an edge-list CSV; see dataio.read_edge_csv for the format."""
    return read_edge_csv(path, t_end_raw)


def split(dataset: Dataset, ratio: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded train/test split; train side gets floor(ratio * n) samples."""
    return split_dataset(dataset, ratio, np.random.default_rng(seed))


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _merge(section: dict, overrides: dict) -> dict:
    out = dict(section)
    out.update({k: v for k, v in overrides.items() if v is not None})
    return out


def _section(cfg_file: dict, name: str, args: argparse.Namespace, fields) -> dict:
    overrides = {f: getattr(args, f, None) for f in fields}
    return _merge(cfg_file.get(name, {}), overrides)


def _asdict(cfg) -> dict:
    return dataclasses.asdict(cfg)


def _resolve_seed(args, cfg_file: dict) -> int:
    if args.seed is not None:
        return args.seed
    return int(cfg_file.get("seed", 0))


def _with_universe(ds: Dataset, n_nodes: int) -> Dataset:
    """Re-home a dataset onto a larger node universe for comparison."""
    if n_nodes == ds.n_nodes:
        return ds
    samples = tuple(
        TemporalGraphSample(edges=s.edges, n_nodes=n_nodes, t_end_raw=s.t_end_raw)
        for s in ds.samples
    )
    return Dataset(samples=samples, n_nodes=n_nodes, t_end_raw=ds.t_end_raw)


SYNTH_FIELDS = [f.name for f in dataclasses.fields(SynthConfig)]
SAMPLER_FIELDS = [f.name for f in dataclasses.fields(SamplerConfig)]
GEN_FIELDS = [f.name for f in dataclasses.fields(GenConfig) if f.name != "n_nodes"]
DISC_FIELDS = [f.name for f in dataclasses.fields(DiscConfig) if f.name != "n_nodes"]
TRAIN_FIELDS = [f.name for f in dataclasses.fields(TrainConfig)]


def _add_dataclass_flags(parser: argparse.ArgumentParser, cls, skip=()):
    for f in dataclasses.fields(cls):
        if f.name in skip:
            continue
        flag = "--" + f.name.replace("_", "-")
        if f.type in ("bool", bool):
            parser.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction, default=None)
        elif f.type in ("int", int):
            parser.add_argument(flag, dest=f.name, type=int, default=None)
        elif f.type in ("float", float):
            parser.add_argument(flag, dest=f.name, type=float, default=None)
        elif f.type in ("Union[int, None]",):
            parser.add_argument(flag, dest=f.name, type=int, default=None)
        elif f.type in ("Union[float, None]",):
            parser.add_argument(flag, dest=f.name, type=float, default=None)
        else:
            parser.add_argument(flag, dest=f.name, type=str, default=None)


def cmd_simulate(args, cfg_file: dict, seed: int) -> list[Path]:
    merged = _section(cfg_file, "simulate", args, SYNTH_FIELDS)
    if args.nodes is not None:
        merged["n_nodes_target"] = args.nodes
    if args.samples is not None:
        merged["n_samples"] = args.samples
    cfg = SynthConfig(**merged)
    ds = generate_dataset(cfg, np.random.default_rng(seed))
    write_edge_csv(args.out, ds)
    args.resolved = {"simulate": _asdict(cfg)}
    return [Path(args.out)]


def cmd_sample(args, cfg_file: dict, seed: int) -> list[Path]:
    merged = _section(cfg_file, "sampler", args, SAMPLER_FIELDS)
    cfg = SamplerConfig(**merged)
    ds = ingest(args.data, args.t_end)
    rng = np.random.default_rng(seed)
    walks = sample_batch(ds, cfg, args.n_walks, rng)
    write_walk_csv(args.out, walks)
    args.resolved = {"sampler": _asdict(cfg), "n_walks": args.n_walks, "data": str(args.data)}
    return [Path(args.out)]


def cmd_train(args, cfg_file: dict, seed: int) -> list[Path]:
    ds = ingest(args.data, args.t_end)
    g_merged = _section(cfg_file, "generator", args, GEN_FIELDS)
    gen_cfg = GenConfig(n_nodes=ds.n_nodes, **g_merged)
    d_merged = dict(cfg_file.get("critic", {}))
    if args.critic_hidden is not None:
        d_merged["hidden"] = args.critic_hidden
    disc_cfg = DiscConfig(n_nodes=ds.n_nodes, **d_merged)
    s_merged = _section(cfg_file, "sampler", args, SAMPLER_FIELDS)
    if "length" not in s_merged or s_merged.get("length") is None:
        s_merged["length"] = gen_cfg.length
    sampler_cfg = SamplerConfig(**s_merged)
    t_merged = _section(cfg_file, "train", args, TRAIN_FIELDS)
    t_cfg = TrainConfig(**t_merged)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "generator": _asdict(gen_cfg),
        "critic": _asdict(disc_cfg),
        "n_nodes": ds.n_nodes,
        "t_end_raw": ds.t_end_raw,
        "seed": seed,
    }

    def checkpoint_cb(epoch, g, critic):
        save_tensors(out_dir / "last.ckpt", g.tensors(), {**meta, "epoch": epoch})

    rng = np.random.default_rng(seed)
    result = train(ds, gen_cfg, disc_cfg, sampler_cfg, t_cfg, rng, checkpoint_cb)
    save_tensors(
        out_dir / "generator.ckpt",
        result.generator.tensors(),
        {**meta, "best_epoch": result.best_epoch, "best_mmd": result.best_mmd},
    )
    save_tensors(out_dir / "critic.ckpt", result.critic.tensors(), meta)
    write_history_csv(out_dir / "history.csv", result.history)
    args.resolved = {
        "generator": _asdict(gen_cfg),
        "critic": _asdict(disc_cfg),
        "sampler": _asdict(sampler_cfg),
        "train": _asdict(t_cfg),
        "data": str(args.data),
        "best_epoch": result.best_epoch,
        "best_mmd": result.best_mmd,
    }
    arts = [out_dir / "generator.ckpt", out_dir / "critic.ckpt", out_dir / "history.csv"]
    if (out_dir / "last.ckpt").exists():
        arts.append(out_dir / "last.ckpt")
    return arts


def cmd_generate(args, cfg_file: dict, seed: int) -> list[Path]:
    tensors, meta = load_tensors(args.ckpt)
    gen_cfg = GenConfig(**meta["generator"])
    if args.force_connect is not None:
        gen_cfg = dataclasses.replace(gen_cfg, force_connect=args.force_connect)
    rng = np.random.default_rng(seed)
    params = GeneratorParams(gen_cfg, rng)
    params.load_tensors(tensors)
    t_end_raw = float(meta.get("t_end_raw", 1.0))
    samples = []
    discards = []
    for _ in range(args.n_samples):
        sample, report = generate_graph(
            params, gen_cfg, rng, n_walks=args.n_walks, target_edges=args.target_edges, tau=args.tau
        )
        samples.append(
            TemporalGraphSample(edges=sample.edges, n_nodes=sample.n_nodes, t_end_raw=t_end_raw)
        )
        discards.append(report.discard_rate)
    ds = Dataset(samples=tuple(samples), n_nodes=gen_cfg.n_nodes, t_end_raw=t_end_raw)
    write_edge_csv(args.out, ds)
    args.resolved = {
        "generator": _asdict(gen_cfg),
        "ckpt": str(args.ckpt),
        "n_samples": args.n_samples,
        "n_walks": args.n_walks,
        "target_edges": args.target_edges,
        "tau": args.tau,
        "discard_rate_mean": float(np.mean(discards)),
        "discard_rates": [float(d) for d in discards],
    }
    return [Path(args.out)]


def cmd_evaluate(args, cfg_file: dict, seed: int) -> list[Path]:
    real = ingest(args.real, args.t_end)
    gen = ingest(args.gen, args.t_end)
    universe = max(real.n_nodes, gen.n_nodes)
    real = _with_universe(real, universe)
    gen = _with_universe(gen, universe)
    sigma = None
    if args.kernel == "fixed":
        if args.sigma is None or args.sigma <= 0:
            raise ValueError("--kernel fixed requires --sigma > 0")
        sigma = args.sigma
    report = evaluate(
        list(real.samples), list(gen.samples), n_bins=args.bins, delta=args.delta, sigma=sigma
    )
    write_metric_report(args.out, report)
    args.resolved = {
        "real": str(args.real),
        "gen": str(args.gen),
        "bins": args.bins,
        "delta": args.delta,
        "kernel": args.kernel,
        "sigma": sigma,
        "measures": {k: v for k, v in report.items()},
    }
    return [Path(args.out)]


def cmd_plot(args, cfg_file: dict, seed: int) -> list[Path]:
    ds = ingest(args.data, args.t_end)
    write_svg(args.out, ds.samples, args.bins)
    args.resolved = {"data": str(args.data), "bins": args.bins}
    return [Path(args.out)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walkgan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default=None):
        p.add_argument("--config", type=Path, default=None, help="TOML config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("-o", "--out", type=Path, default=out_default, required=out_default is None)
        p.add_argument("--manifest", type=Path, default=None)

    p = sub.add_parser("simulate", help="generate a synthetic scale-free temporal dataset")
    common(p)
    p.add_argument("--nodes", type=int, default=None, help="alias for --n-nodes-target")
    p.add_argument("--samples", type=int, default=None, help="alias for --n-samples")
    _add_dataclass_flags(p, SynthConfig)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sample", help="sample truncated temporal walks from a dataset")
    common(p)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("-n", "--n-walks", type=int, default=1000)
    _add_dataclass_flags(p, SamplerConfig)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="train the adversarial generator")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--manifest", type=Path, default=None)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--critic-hidden", type=int, default=None)
    _add_dataclass_flags(p, GenConfig, skip=("n_nodes",))
    _add_dataclass_flags(p, TrainConfig, skip=("length",))
    p.add_argument("--start-bias", dest="start_bias", type=str, default=None)
    p.add_argument("--jump-epsilon", dest="jump_epsilon", type=float, default=None)
    p.add_argument("--decay-lambda", dest="decay_lambda", type=float, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="assemble graph samples from a trained checkpoint")
    common(p)
    p.add_argument("--ckpt", type=Path, required=True)
    p.add_argument("-n", "--n-samples", type=int, default=1)
    p.add_argument("--n-walks", type=int, default=64)
    p.add_argument("--target-edges", type=int, default=None)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--force-connect", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="MMD report between two datasets")
    common(p)
    p.add_argument("--real", type=Path, required=True)
    p.add_argument("--gen", type=Path, required=True)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--kernel", choices=["median", "fixed"], default="median")
    p.add_argument("--sigma", type=float, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plot", help="arc-diagram SVG of a dataset")
    common(p)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--bins", type=int, default=6)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.monotonic()
    try:
        cfg_file = _load_config(args.config)
        seed = _resolve_seed(args, cfg_file)
        artifacts = args.func(args, cfg_file, seed)
        manifest_path = args.manifest
        if manifest_path is None:
            if args.command == "train":
                manifest_path = Path(args.out_dir) / "manifest.json"
            else:
                manifest_path = Path(str(args.out) + ".manifest.json")
        write_run_manifest(
            manifest_path,
            command=args.command,
            config=getattr(args, "resolved", {}),
            seed=seed,
            artifacts=artifacts,
            duration_s=time.monotonic() - start,
        )
    except Exception as exc:  # noqa: BLE001 - single reporting point
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
