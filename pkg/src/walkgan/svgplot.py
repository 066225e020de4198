"""Deterministic SVG arc diagrams for sets of temporal graph samples.

The unit time span is split into columns, one per snapshot bin.  Each
column shows the node set on a vertical axis and one arc per directed
edge observed in that bin across the sample set; arc opacity is the
fraction of samples containing the edge in that bin, so structure shared
by the whole set shows up dark and idiosyncratic contacts stay faint.
Arcs bulge right when the edge points down the axis (u < v), left when
it points up, and self-loops are drawn as small side circles.

Output is plain SVG text assembled with fixed number formatting and
sorted iteration, so identical inputs give byte-identical files.
"""

from __future__ import annotations

from typing import Sequence

from .graphs import TemporalGraphSample, to_snapshots

__all__ = ["arc_diagram", "write_svg"]

NODE_GAP = 22.0
COLUMN_WIDTH = 130.0
MARGIN = 34.0
AXIS_X = 30.0


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _bin_fractions(samples: Sequence[TemporalGraphSample], n_bins: int) -> dict[tuple[int, int, int], float]:
    """(bin, u, v) -> fraction of samples with that edge in that bin."""
    counts: dict[tuple[int, int, int], int] = {}
    for s in samples:
        snaps = to_snapshots(s, n_bins)
        for b in range(n_bins):
            us, vs = snaps.mats[b].nonzero()
            for u, v in zip(us.tolist(), vs.tolist()):
                key = (b, u, v)
                counts[key] = counts.get(key, 0) + 1
    n = len(samples)
    return {k: c / n for k, c in counts.items()}


def arc_diagram(samples: Sequence[TemporalGraphSample], n_bins: int) -> str:
    """Render the sample set as one SVG string."""
    if not samples:
        raise ValueError("arc_diagram needs at least one sample")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    n_nodes = max(s.n_nodes for s in samples)
    fractions = _bin_fractions(samples, n_bins)

    height = 2 * MARGIN + NODE_GAP * max(n_nodes - 1, 1)
    width = MARGIN + COLUMN_WIDTH * n_bins

    def node_y(i: int) -> float:
        return MARGIN + NODE_GAP * i

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        "<!-- format_version=1 -->",
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for b in range(n_bins):
        x0 = MARGIN / 2 + COLUMN_WIDTH * b
        parts.append(f'<g transform="translate({_fmt(x0)},0)">')
        parts.append(
            f'<text x="{_fmt(AXIS_X)}" y="{_fmt(MARGIN - 14.0)}" font-size="10" '
            f'font-family="monospace" text-anchor="middle">bin {b}</text>'
        )
        parts.append(
            f'<line x1="{_fmt(AXIS_X)}" y1="{_fmt(node_y(0))}" x2="{_fmt(AXIS_X)}" '
            f'y2="{_fmt(node_y(n_nodes - 1))}" stroke="#ccc" stroke-width="1"/>'
        )
        for i in range(n_nodes):
            parts.append(
                f'<circle cx="{_fmt(AXIS_X)}" cy="{_fmt(node_y(i))}" r="2" fill="#333"/>'
            )
        for (bb, u, v), frac in sorted(fractions.items()):
            if bb != b:
                continue
            op = _fmt(max(frac, 0.05))
            if u == v:
                cy = node_y(u)
                parts.append(
                    f'<circle cx="{_fmt(AXIS_X + 7.0)}" cy="{_fmt(cy)}" r="5" fill="none" '
                    f'stroke="#1f5fa6" stroke-width="1.2" stroke-opacity="{op}"/>'
                )
                continue
            y1, y2 = node_y(u), node_y(v)
            # bulge right for downward edges, left for upward ones
            side = 1.0 if v > u else -1.0
            bulge = side * (6.0 + abs(y2 - y1) * 0.35)
            cx = AXIS_X + bulge
            parts.append(
                f'<path d="M {_fmt(AXIS_X)} {_fmt(y1)} Q {_fmt(cx)} '
                f'{_fmt((y1 + y2) / 2.0)} {_fmt(AXIS_X)} {_fmt(y2)}" fill="none" '
                f'stroke="#1f5fa6" stroke-width="1.2" stroke-opacity="{op}"/>'
            )
        parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path, samples: Sequence[TemporalGraphSample], n_bins: int) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(arc_diagram(samples, n_bins))
