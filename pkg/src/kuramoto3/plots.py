"""SVG rendering for the CLI (line charts and basin heatmaps)."""
from __future__ import annotations

import io
import math
from itertools import groupby

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

from .equilibria import CriticalPointId, Stability  # noqa: E402

COLORS = {
    CriticalPointId.STAR1: "#1f77b4",
    CriticalPointId.STAR2: "#ff7f0e",
    CriticalPointId.STAR3: "#2ca02c",
    CriticalPointId.STAR4: "#d62728",
    CriticalPointId.STAR5: "#9467bd",
    CriticalPointId.STAR6: "#8c564b",
}


def _to_svg(fig, deterministic: bool) -> str:
    buf = io.StringIO()
    with plt.rc_context({"svg.hashsalt": "kuramoto3", "svg.fonttype": "path"}):
        fig.savefig(buf, format="svg", metadata={"Date": None} if deterministic else None)
    plt.close(fig)
    return buf.getvalue()


def figure1_svg(rows, k1_sign: int, deterministic: bool = True) -> str:
    """Energy of each equilibrium against ``k2 / k1``; solid where stable, dashed otherwise."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for cid in CriticalPointId:
        series = [r for r in rows if r.point is cid]
        if not series:
            continue
        # break the curve wherever the ratio grid skips (k2 = 0) or stability changes
        labelled = False
        for stable, run in groupby(series, key=lambda r: r.stability is Stability.STABLE):
            run = list(run)
            ax.plot([r.ratio for r in run], [r.energy for r in run],
                    color=COLORS[cid], linestyle="-" if stable else "--",
                    label=None if labelled else cid.value)
            labelled = True
    ax.set_xlabel("k2 / k1")
    ax.set_ylabel("V")
    ax.set_title(f"k1 {'> 0' if k1_sign > 0 else '< 0'}")
    ax.legend(fontsize="small")
    return _to_svg(fig, deterministic)


def trajectory_svg(times, energies, diameters, deterministic: bool = True) -> str:
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    top.plot(times, energies, color="k")
    top.set_ylabel("V")
    bottom.semilogy(times, [max(d, 1e-300) for d in diameters], color="C0")
    bottom.set_ylabel("diameter")
    bottom.set_xlabel("t")
    return _to_svg(fig, deterministic)


def basin_svg(grid, deterministic: bool = True) -> str:
    colors = ["#ffffff"] + [COLORS[c] for c in CriticalPointId]
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.imshow(grid.cells.T, origin="lower", cmap=ListedColormap(colors), vmin=-0.5, vmax=6.5,
              extent=(-math.pi, math.pi, -math.pi, math.pi), interpolation="nearest")
    ax.set_xlabel("theta1 - theta3")
    ax.set_ylabel("theta2 - theta3")
    ax.set_title(f"k1={grid.coupling.k1:g}, k2={grid.coupling.k2:g}")
    return _to_svg(fig, deterministic)
