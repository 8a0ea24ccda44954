"""Figure emission for the pipeline, SVG plus the underlying data.

Every figure writer returns the list of files it wrote: one SVG and one
delimited-text file with the plotted numbers, so plots stay regenerable
and diffable.  SVG output is forced deterministic (fixed hash salt, no
creation date) so identical runs emit identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Polygon  # noqa: E402

from .ioutil import write_delimited  # noqa: E402

CLASS_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _save(fig, path) -> None:
    with plt.rc_context({"svg.hashsalt": "spellsom"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _class_color(label: int) -> str:
    return CLASS_COLORS[(label - 1) % len(CLASS_COLORS)]


def codevector_profile_figure(profile, title, svg_path, data_path,
                              delimiter=","):
    """Line profile of one code vector over the feature order."""
    names = [name for name, _ in profile]
    values = [v for _, v in profile]
    write_delimited(data_path, list(profile), delimiter,
                    header=["variable", "value"])
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.axhline(0.0, color="0.8", lw=0.8)
    ax.plot(range(len(values)), values, marker="o", color=CLASS_COLORS[0])
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=45, ha="right")
    ax.set_ylabel("standardized value")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, svg_path)
    return [svg_path, data_path]


def grid_classes_figure(som, partition, svg_path, data_path, delimiter=","):
    """All code-vector profiles on the lattice, colored by broad class."""
    topo = som.topology
    rows = []
    for unit in range(som.units):
        r, c = topo.coords(unit)
        rows.append([r, c, unit, int(partition.labels[unit])]
                    + [float(v) for v in som.codebook[unit]])
    write_delimited(data_path, rows, delimiter,
                    header=["row", "col", "unit", "broad_class"]
                    + [f"v{i}" for i in range(som.dim)])
    fig, axes = plt.subplots(topo.rows, topo.cols,
                             figsize=(1.1 * topo.cols, 0.9 * topo.rows),
                             squeeze=False)
    lo = float(np.min(som.codebook))
    hi = float(np.max(som.codebook))
    for unit in range(som.units):
        r, c = topo.coords(unit)
        ax = axes[r][c]
        color = _class_color(int(partition.labels[unit]))
        ax.plot(som.codebook[unit], color=color, lw=1.0)
        ax.set_ylim(lo, hi)
        ax.set_xticks([])
        ax.set_yticks([])
        for spine in ax.spines.values():
            spine.set_color(color)
    fig.suptitle("Unit profiles and broad classes")
    _save(fig, svg_path)
    return [svg_path, data_path]


def distance_map_figure(field, som, partition, svg_path, data_path,
                        delimiter=","):
    """Polygon distance map: each unit shrinks toward distant neighbors."""
    rows = [[u, v, d] for u in sorted(field.distances)
            for v, d in field.distances[u]]
    write_delimited(data_path, rows, delimiter,
                    header=["unit", "neighbor", "distance"])
    topo = som.topology
    max_d = field.max_distance or 1.0
    fig, ax = plt.subplots(figsize=(0.75 * topo.cols, 0.75 * topo.rows))
    for unit in range(som.units):
        r, c = topo.coords(unit)
        cx, cy = float(c), float(topo.rows - 1 - r)
        by_neighbor = dict(field.distances[unit])
        vertices = []
        for angle_step, (dr, dc) in enumerate(
                [(0, 1), (-1, 1), (-1, 0), (-1, -1),
                 (0, -1), (1, -1), (1, 0), (1, 1)]):
            rr, cc = r + dr, c + dc
            if 0 <= rr < topo.rows and 0 <= cc < topo.cols:
                d = by_neighbor[topo.unit_at(rr, cc)]
                radius = 0.5 * (1.0 - 0.85 * d / max_d)
            else:
                radius = 0.5
            angle = np.pi / 4 * angle_step
            vertices.append((cx + radius * np.cos(angle),
                             cy + radius * np.sin(angle)))
        color = _class_color(int(partition.labels[unit]))
        ax.add_patch(Polygon(vertices, closed=True, facecolor=color,
                             edgecolor="black", lw=0.4))
    ax.set_xlim(-0.7, topo.cols - 0.3)
    ax.set_ylim(-0.7, topo.rows - 0.3)
    ax.set_aspect("equal")
    ax.set_xticks([])
    ax.set_yticks([])
    ax.set_title("Neighbor distances and broad classes")
    _save(fig, svg_path)
    return [svg_path, data_path]


def qualitative_figure(distributions, variable, svg_path, data_path,
                       delimiter=","):
    """Grouped bars: modality frequencies per broad class plus population."""
    rows = []
    for dist in distributions:
        scope = "population" if dist.group is None else str(dist.group)
        for modality, freq in dist.frequencies.items():
            rows.append([scope, dist.variable, modality, freq, dist.count,
                         "empty" if dist.empty else ""])
    write_delimited(data_path, rows, delimiter,
                    header=["scope", "variable", "modality", "frequency",
                            "count", "flag"])
    modalities = list(distributions[0].frequencies)
    n_groups = len(distributions)
    width = 0.8 / n_groups
    fig, ax = plt.subplots(figsize=(1.6 * len(modalities) + 2, 4))
    x = np.arange(len(modalities))
    for gi, dist in enumerate(distributions):
        if dist.group is None:
            label, color = "population", "0.3"
        else:
            label = f"class {dist.group}"
            color = _class_color(int(dist.group)) \
                if str(dist.group).isdigit() else CLASS_COLORS[gi % 10]
        heights = [dist.frequencies[m] for m in modalities]
        ax.bar(x + gi * width, heights, width=width, label=label, color=color)
    ax.set_xticks(x + 0.4 - width / 2)
    ax.set_xticklabels(modalities)
    ax.set_ylabel("frequency")
    ax.set_title(f"Distribution of {variable}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, svg_path)
    return [svg_path, data_path]


def mca_plane_figure(points, axis_pair, inertia_shares, svg_path, data_path,
                     delimiter=","):
    """Scatter of modality points on one factorial plane."""
    a, b = axis_pair
    write_delimited(data_path, points, delimiter,
                    header=["variable", "modality", f"axis{a}", f"axis{b}"])
    fig, ax = plt.subplots(figsize=(8, 6))
    ax.axhline(0.0, color="0.85", lw=0.8)
    ax.axvline(0.0, color="0.85", lw=0.8)
    variables = sorted({var for var, _, _, _ in points})
    for vi, var in enumerate(variables):
        xs = [x for v, _, x, _ in points if v == var]
        ys = [y for v, _, _, y in points if v == var]
        ax.scatter(xs, ys, s=18, color=CLASS_COLORS[vi % len(CLASS_COLORS)],
                   label=var)
    for var, mod, x, y in points:
        ax.annotate(f"{var}:{mod}", (x, y), fontsize=7,
                    xytext=(2, 2), textcoords="offset points")
    ax.set_xlabel(f"axis {a} ({100 * inertia_shares[a - 1]:.1f}%)")
    ax.set_ylabel(f"axis {b} ({100 * inertia_shares[b - 1]:.1f}%)")
    ax.set_title(f"Modalities on axes {a} and {b}")
    ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    _save(fig, svg_path)
    return [svg_path, data_path]
