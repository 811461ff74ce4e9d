"""Matplotlib rendering of diagrams and verification reports.

Drawing uses the Agg backend so it works headless, and saved PNG files
omit the Software tag, keeping repeated runs byte-identical for golden
tests. Layout is layered left to right: diagram inputs form the first
column, generators are placed by topological generation, outputs close
the figure. Quantum wires render as double lines, classical wires as
single thin lines, matching the DOT export conventions.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Circle, Rectangle

from .diagram import IN, OUT, Box, Cap, Cup, Diagram, Scalar, Spider, Swap
from .diagram import ONB_FAMILY
from .reports import Report

WIRE_GAP = 0.028


def layer_nodes(diagram: Diagram) -> list[list[int]]:
    """Topological generations of the node graph; nodes caught in a cycle
    are appended in id order so layout never fails."""
    deps: dict[int, set[int]] = {nid: set() for nid in diagram.nodes}
    for w in diagram.wires:
        if w.src.node not in (IN, OUT) and w.dst.node not in (IN, OUT):
            deps[w.dst.node].add(w.src.node)
    layers: list[list[int]] = []
    placed: set[int] = set()
    remaining = set(diagram.nodes)
    while remaining:
        ready = sorted(n for n in remaining if deps[n] <= placed)
        if not ready:
            ready = sorted(remaining)
        layers.append(ready)
        placed |= set(ready)
        remaining -= set(ready)
    return layers


def layout(diagram: Diagram) -> dict:
    """Positions for every node id plus ("in", k) and ("out", k) stubs."""
    layers = layer_nodes(diagram)
    width = len(layers)
    pos: dict = {}

    def spread(count: int) -> list[float]:
        return [(count - 1) / 2.0 - k for k in range(count)]

    for k, y in enumerate(spread(diagram.n_inputs)):
        pos[("in", k)] = (0.0, y)
    for i, layer in enumerate(layers):
        for nid, y in zip(layer, spread(len(layer))):
            pos[nid] = (float(i + 1), y)
    for k, y in enumerate(spread(diagram.n_outputs)):
        pos[("out", k)] = (float(width + 1), y)
    return pos


def _anchor(pos, diagram, port, outgoing: bool):
    if port.node == IN:
        x, y = pos[("in", port.port)]
        return (x + 0.12, y)
    if port.node == OUT:
        x, y = pos[("out", port.port)]
        return (x - 0.12, y)
    x, y = pos[port.node]
    gen = diagram.nodes[port.node]
    ports = len(gen.out_types) if outgoing else len(gen.in_types)
    shift = 0.11 * (((ports - 1) / 2.0) - port.port)
    return (x + (0.16 if outgoing else -0.16), y + shift)


def _draw_wire(ax, a, b, quantum: bool):
    (x1, y1), (x2, y2) = a, b
    if not quantum:
        ax.plot([x1, x2], [y1, y2], color="black", lw=0.9, zorder=1)
        return
    dx, dy = x2 - x1, y2 - y1
    norm = (dx * dx + dy * dy) ** 0.5 or 1.0
    ox, oy = -dy / norm * WIRE_GAP, dx / norm * WIRE_GAP
    for s in (-1, 1):
        ax.plot(
            [x1 + s * ox, x2 + s * ox],
            [y1 + s * oy, y2 + s * oy],
            color="black",
            lw=1.2,
            zorder=1,
        )


def _draw_node(ax, xy, gen):
    x, y = xy
    if isinstance(gen, Spider):
        ax.add_patch(Circle((x, y), 0.13, facecolor="0.4", edgecolor="black", zorder=3))
        tags = []
        if gen.phase is not None:
            tags.append(str(gen.phase))
        if gen.family != ONB_FAMILY:
            tags.append(gen.family + ("†" if gen.adjoint else ""))
        if tags:
            ax.text(x, y - 0.30, " ".join(tags), ha="center", va="top", fontsize=6)
    elif isinstance(gen, Box):
        ax.add_patch(
            Rectangle((x - 0.22, y - 0.16), 0.44, 0.32, facecolor="white", edgecolor="black", zorder=3)
        )
        ax.text(x, y, gen.name, ha="center", va="center", fontsize=7, zorder=4)
    elif isinstance(gen, (Cup, Cap)):
        ax.add_patch(Circle((x, y), 0.07, facecolor="black", edgecolor="black", zorder=3))
    elif isinstance(gen, Swap):
        ax.scatter([x], [y], marker="x", s=60, color="black", zorder=3)
    elif isinstance(gen, Scalar):
        ax.text(
            x,
            y,
            f"{gen.value:.3g}",
            ha="center",
            va="center",
            fontsize=7,
            zorder=4,
            bbox={"boxstyle": "round", "facecolor": "white", "linestyle": "dashed"},
        )


def draw_diagram(diagram: Diagram, path=None, title: str | None = None):
    """Render the diagram to a matplotlib figure; save it when a path is
    given. Returns the figure."""
    pos = layout(diagram)
    n_layers = max(len(layer_nodes(diagram)), 0)
    rows = max(
        [diagram.n_inputs, diagram.n_outputs]
        + [len(layer) for layer in layer_nodes(diagram)]
        + [1]
    )
    fig, ax = plt.subplots(figsize=(max(3.0, 1.25 * (n_layers + 2)), max(2.2, 0.75 * rows)))
    ax.set_aspect("equal")
    ax.axis("off")
    for w in diagram.wires:
        a = _anchor(pos, diagram, w.src, outgoing=True)
        b = _anchor(pos, diagram, w.dst, outgoing=False)
        _draw_wire(ax, a, b, w.wtype.is_quantum)
    for nid, gen in diagram.nodes.items():
        _draw_node(ax, pos[nid], gen)
    for k in range(diagram.n_inputs):
        x, y = pos[("in", k)]
        ax.text(x - 0.1, y, str(k), ha="right", va="center", fontsize=7)
    for k in range(diagram.n_outputs):
        x, y = pos[("out", k)]
        ax.text(x + 0.1, y, str(k), ha="left", va="center", fontsize=7)
    ax.set_xlim(-0.7, n_layers + 1.7)
    ys = [p[1] for p in pos.values()] or [0.0]
    ax.set_ylim(min(ys) - 0.7, max(ys) + 0.7)
    if title:
        ax.set_title(title, fontsize=9)
    if path is not None:
        save_figure(fig, path)
    return fig


def deviation_chart(report: Report, path=None, max_bars: int = 40):
    """Horizontal log-scale bar chart of claim deviations against their
    tolerances; failures render red. Saves to `path` when given."""
    claims = list(report.claims)
    title = report.title
    if len(claims) > max_bars:
        claims = sorted(claims, key=lambda c: c.deviation, reverse=True)[:max_bars]
        title = f"{title} (worst {max_bars} of {len(report.claims)})"
    floor = 1e-18
    names = [c.name for c in claims]
    devs = [max(c.deviation, floor) for c in claims]
    colors = ["tab:green" if c.passed else "tab:red" for c in claims]
    fig, ax = plt.subplots(figsize=(7.0, max(2.0, 0.30 * len(claims) + 1.2)))
    ypos = np.arange(len(claims))[::-1]
    ax.barh(ypos, devs, color=colors)
    ax.set_xscale("log")
    for tol in sorted({c.tolerance for c in claims}):
        ax.axvline(tol, color="black", lw=0.8, linestyle="dashed")
    ax.set_yticks(ypos)
    ax.set_yticklabels(names, fontsize=6)
    ax.set_xlim(left=floor)
    ax.set_xlabel("max deviation")
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    if path is not None:
        save_figure(fig, path)
    return fig


def save_figure(fig, path):
    """Save stripping volatile metadata so output bytes are stable."""
    path = Path(path)
    metadata = {
        ".png": {"Software": None},
        ".svg": {"Date": None},
        ".pdf": {"CreationDate": None},
    }.get(path.suffix.lower())
    if metadata is None:
        fig.savefig(path, dpi=150)
    else:
        fig.savefig(path, dpi=150, metadata=metadata)
