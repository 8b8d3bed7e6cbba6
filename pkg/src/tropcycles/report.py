"""Summary report: a JSON file plus PNG figures of the triangulation and the star fans."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .chow import KClass  # noqa: E402
from .io import dumps_result, instance_hash  # noqa: E402
from .minkowski import default_generic, ones, psi, cup, tropical_intersection  # noqa: E402
from .gamma import period_asymptotic  # noqa: E402
from .tropical import dual_face_points, fan_at, fan_flags, interior_points  # noqa: E402


def _axes(rank):
    fig = plt.figure(figsize=(5, 5))
    ax = fig.add_subplot(111, projection="3d" if rank == 3 else None)
    return fig, ax


def _plot_segments(ax, segments, rank, **style):
    for a, b in segments:
        xs = [[float(p[i]) for p in (a, b)] for i in range(rank)]
        ax.plot(*xs, **style)


def plot_triangulation(inp, path: Path):
    if inp.rank not in (2, 3):
        return None
    fig, ax = _axes(inp.rank)
    edges = set()
    for s in inp.tri.simplices:
        for i in s:
            for j in s:
                if i < j:
                    edges.add((i, j))
    _plot_segments(ax, [(inp.points[i], inp.points[j]) for i, j in sorted(edges)], inp.rank, color="0.3", lw=0.8)
    ax.scatter(*[[p[i] for p in inp.points] for i in range(inp.rank)], color="k", s=12)
    ax.set_title(f"triangulation ({len(inp.tri.simplices)} simplices)")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path.name


def plot_dual_skeleton(inp, w, path: Path):
    """Barycentric subdivision of the boundary of the dual cell, drawn through the points b_sigma."""
    if inp.rank not in (2, 3):
        return None
    fan = fan_at(inp, w)
    pts = dual_face_points(inp, w)
    fig, ax = _axes(inp.rank)
    segs = [(pts[f.cones[0]], pts[f.cones[1]]) for f in fan_flags(fan, 1)]
    _plot_segments(ax, segs, inp.rank, color="tab:blue", lw=0.7)
    ax.set_title(f"dual cell skeleton at w = {list(w)}")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path.name


def write_report(inp, out_dir: Path, seed: int = 0) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    figures = []
    name = plot_triangulation(inp, out_dir / "triangulation.png")
    if name:
        figures.append(name)
    rows = []
    d = inp.d
    for k, w in enumerate(interior_points(inp)):
        fan = fan_at(inp, w)
        row = {"w": list(w), "rays": len(fan.rays), "maximal_cones": len(fan.maximal)}
        m0 = default_generic(fan, seed).m0
        if d >= 2 and d % 2 == 0:
            a = ones(fan, d // 2)
            row["psi_ones_squared"] = psi(cup(a, a, m0))
            row["self_intersection_ones"] = tropical_intersection(inp, w, a, w, a, m0)
        poly = period_asymptotic(inp, 1, w, w, KClass.structure_sheaf(fan))
        row["period_structure_sheaf"] = poly.to_json()
        fig = plot_dual_skeleton(inp, w, out_dir / f"dual_cell_{k}.png")
        if fig:
            figures.append(fig)
        rows.append(row)
    summary = {"instance_hash": instance_hash(inp), "name": inp.name, "d": d,
               "simplices": [list(s) for s in inp.tri.simplices], "interior_points": rows, "figures": figures}
    (out_dir / "report.json").write_text(dumps_result(summary))
    return {"out_dir": str(out_dir), "files": ["report.json"] + figures}
