"""File formats: edge-list CSV, walk CSV, history CSV, checkpoints, manifests.

All writers are deterministic for fixed inputs: floats are rendered with
shortest round-trip repr, JSON keys are sorted, newlines are '\\n'.
Checkpoints store named float64 tensors as base64 little-endian bytes in
a versioned JSON manifest, so save/load round-trips are bit-exact.
"""

from __future__ import annotations

import base64
import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .graphs import BudgetEdge, Dataset, TemporalGraphSample, TruncatedWalk, WalkProfile, normalize_sample

__all__ = [
    "read_edge_csv",
    "write_edge_csv",
    "write_walk_csv",
    "read_walk_csv",
    "write_history_csv",
    "save_tensors",
    "load_tensors",
    "write_metric_report",
    "write_run_manifest",
    "sha256_file",
]

CHECKPOINT_VERSION = 1
MANIFEST_VERSION = 1
CSV_VERSION = 1
VERSION_COMMENT = f"# format_version={CSV_VERSION}"

EDGE_HEADER = ["sample_id", "u", "v", "t"]


def _fmt(x: float) -> str:
    return repr(float(x))


def _data_lines(fh):
    """Skip comment lines; CSV files carry their version as a # comment."""
    return (line for line in fh if not line.startswith("#"))


def read_edge_csv(path: Union[str, Path], t_end_raw: Union[float, None] = None) -> Dataset:
    """Load a `sample_id,u,v,t` CSV of raw-time edges into a Dataset.

    Times are normalized by ``t_end_raw`` (default: the maximum raw time
    in the file); the node universe is max node id + 1.  Unsorted rows
    within a sample are sorted, malformed rows fail with their line
    number.
    """
    path = Path(path)
    groups: dict[int, list[tuple[int, int, float]]] = {}
    max_node = -1
    max_t = 0.0
    with path.open(newline="") as fh:
        lines = [(i, line) for i, line in enumerate(fh, start=1) if not line.startswith("#")]
        reader = csv.reader(line for _, line in lines)
        linenos = [i for i, _ in lines]
        rows = list(reader)
        if not rows or [h.strip() for h in rows[0]] != EDGE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(EDGE_HEADER)}")
        for lineno, row in zip(linenos[1:], rows[1:]):
            if not row:
                continue
            try:
                sid, u, v = int(row[0]), int(row[1]), int(row[2])
                t = float(row[3])
            except (IndexError, ValueError) as exc:
                raise ValueError(f"{path}: malformed row at line {lineno}: {row}") from exc
            if t < 0:
                raise ValueError(f"{path}: negative time at line {lineno}")
            groups.setdefault(sid, []).append((u, v, t))
            max_node = max(max_node, u, v)
            max_t = max(max_t, t)
    if not groups:
        raise ValueError(f"{path}: no edges")
    if t_end_raw is None:
        t_end_raw = max_t
    if t_end_raw <= 0:
        raise ValueError("raw time span must be positive; pass t_end_raw explicitly")
    n_nodes = max_node + 1
    samples = tuple(
        normalize_sample(groups[sid], n_nodes=n_nodes, t_end_raw=t_end_raw)
        for sid in sorted(groups)
    )
    return Dataset(samples=samples, n_nodes=n_nodes, t_end_raw=t_end_raw)


def write_edge_csv(path: Union[str, Path], dataset: Dataset) -> None:
    """Write a dataset back to `sample_id,u,v,t` rows with raw times."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(VERSION_COMMENT + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EDGE_HEADER)
        for sid, sample in enumerate(dataset.samples):
            for e in sample.edges:
                writer.writerow([sid, e.u, e.v, _fmt(e.t * dataset.t_end_raw)])


def write_walk_csv(path: Union[str, Path], walks: Sequence[TruncatedWalk]) -> None:
    """Write truncated walks as `x,y,t0_bar,u1,v1,t1_bar,...` rows.

    The header covers the longest walk in the batch; shorter rows leave
    trailing fields empty.
    """
    path = Path(path)
    max_len = max(len(w.edges) for w in walks)
    header = ["x", "y", "t0_bar"]
    for i in range(1, max_len + 1):
        header += [f"u{i}", f"v{i}", f"t{i}_bar"]
    with path.open("w", newline="") as fh:
        fh.write(VERSION_COMMENT + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for w in walks:
            row = [w.profile.x, w.profile.y, _fmt(w.profile.t0_bar)]
            for e in w.edges:
                row += [e.u, e.v, _fmt(e.t_bar)]
            row += [""] * (3 * (max_len - len(w.edges)))
            writer.writerow(row)


def read_walk_csv(path: Union[str, Path]) -> list[TruncatedWalk]:
    path = Path(path)
    walks = []
    with path.open(newline="") as fh:
        reader = csv.reader(_data_lines(fh))
        header = next(reader, None)
        if header is None or header[:3] != ["x", "y", "t0_bar"]:
            raise ValueError(f"{path}: expected walk header starting x,y,t0_bar")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                profile = WalkProfile(x=int(row[0]), y=int(row[1]), t0_bar=float(row[2]))
                edges = []
                for k in range(3, len(row), 3):
                    if row[k] == "":
                        break
                    edges.append(
                        BudgetEdge(int(row[k]), int(row[k + 1]), float(row[k + 2]))
                    )
            except (IndexError, ValueError) as exc:
                raise ValueError(f"{path}: malformed row at line {lineno}") from exc
            walks.append(TruncatedWalk(profile=profile, edges=tuple(edges)))
    return walks


HISTORY_HEADER = ["epoch", "critic_loss", "gen_loss", "gp", "mmd_avg_degree", "tau"]


def write_history_csv(path: Union[str, Path], rows: Sequence[dict]) -> None:
    """Write per-epoch training history; mmd is empty between evaluations."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(VERSION_COMMENT + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HISTORY_HEADER)
        for r in rows:
            mmd = r.get("mmd_avg_degree")
            writer.writerow(
                [
                    r["epoch"],
                    _fmt(r["critic_loss"]),
                    _fmt(r["gen_loss"]),
                    _fmt(r["gp"]),
                    "" if mmd is None else _fmt(mmd),
                    _fmt(r["tau"]),
                ]
            )


def save_tensors(path: Union[str, Path], tensors: dict[str, np.ndarray], meta: Union[dict, None] = None) -> None:
    """Write named tensors as a versioned JSON manifest.

    Values are stored as base64 little-endian float64 bytes next to their
    shapes, which round-trips bit-exactly on any platform.
    """
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "meta": meta or {},
        "tensors": {
            name: {
                "shape": list(arr.shape),
                "dtype": "<f8",
                "data": base64.b64encode(
                    np.ascontiguousarray(arr, dtype="<f8").tobytes()
                ).decode("ascii"),
            }
            for name, arr in tensors.items()
        },
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def load_tensors(path: Union[str, Path]) -> tuple[dict[str, np.ndarray], dict]:
    payload = json.loads(Path(path).read_text())
    version = payload.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint format_version {version!r}")
    tensors = {}
    for name, spec in payload["tensors"].items():
        raw = base64.b64decode(spec["data"])
        arr = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(spec["shape"])
        tensors[name] = arr
    return tensors, payload.get("meta", {})


def write_metric_report(path: Union[str, Path], values: dict[str, Union[float, None]]) -> None:
    """Write measure->MMD values as CSV or JSON depending on the suffix.

    Missing measures (undefined on some sample) are written as empty CSV
    cells or JSON nulls, never as zero.
    """
    path = Path(path)
    if path.suffix == ".json":
        out: dict = {"format_version": CSV_VERSION}
        out["measures"] = {
            k: (None if v is None or not np.isfinite(v) else float(v)) for k, v in values.items()
        }
        path.write_text(json.dumps(out, sort_keys=True, indent=1) + "\n")
        return
    with path.open("w", newline="") as fh:
        fh.write(VERSION_COMMENT + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["measure", "mmd"])
        for k in sorted(values):
            v = values[k]
            writer.writerow([k, "" if v is None or not np.isfinite(v) else _fmt(v)])


def sha256_file(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_run_manifest(
    path: Union[str, Path],
    command: str,
    config: dict,
    seed: int,
    artifacts: Sequence[Union[str, Path]],
    duration_s: float,
) -> None:
    """Record what a CLI run produced: config, seed, artifact hashes, duration."""
    payload = {
        "format_version": MANIFEST_VERSION,
        "command": command,
        "config": config,
        "seed": seed,
        "artifacts": {str(Path(p).name): sha256_file(p) for p in artifacts},
        "duration_s": round(duration_s, 3),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
