"""Matplotlib renderers for the report paths; every figure lands in an SVG.

Outputs are deterministic for a fixed input: the SVG hash salt is pinned,
the date stamp is stripped, and the run configuration is embedded in the
document description so any figure can be traced back to its inputs.
"""

from __future__ import annotations

import json

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "zeromass"

import matplotlib.pyplot as plt
import numpy as np

from .exponents import Atlas, SignPrediction, d_star, sobolev_critical

_CATEGORY_COLORS = {
    0: "#d9d9d9",  # no existence
    1: "#4f81bd",  # positive curvature
    2: "#c0504d",  # negative curvature
    3: "#9bbb59",  # zero (on the curve)
    4: "#f2c977",  # indeterminate sign
}


def _savefig(fig, path, config: dict | None):
    meta = {"Date": None}
    if config is not None:
        meta["Description"] = json.dumps(config, sort_keys=True, default=str)
    fig.savefig(path, format="svg", metadata=meta)
    plt.close(fig)


def _category(report) -> int:
    if not report.existence_possible:
        return 0
    return {
        SignPrediction.POSITIVE: 1,
        SignPrediction.NEGATIVE: 2,
        SignPrediction.ZERO: 3,
        SignPrediction.INDETERMINATE: 4,
    }[report.curvature_sign]


def render_atlas_svg(atlas: Atlas, path, config: dict | None = None) -> None:
    """Region map: existence/curvature categories, the critical curve, and
    the guide lines p=2, q=2, p=2*, q=2*, p=q."""
    nx, ny = len(atlas.p_values), len(atlas.q_values)
    if not atlas.cells:
        fig, ax = plt.subplots(figsize=(6.4, 5.6))
        ax.set_xlabel("p")
        ax.set_ylabel("q")
        ax.set_title(f"region map, N={atlas.dim}, domain={atlas.domain.value} (empty)")
        _savefig(fig, path, config)
        return
    cats = np.empty((ny, nx))
    for j in range(ny):
        for i in range(nx):
            cats[j, i] = _category(atlas.cells[j * nx + i].report)

    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    from matplotlib.colors import BoundaryNorm, ListedColormap

    cmap = ListedColormap([_CATEGORY_COLORS[k] for k in range(5)])
    norm = BoundaryNorm(np.arange(-0.5, 5.5), cmap.N)
    p, q = np.asarray(atlas.p_values), np.asarray(atlas.q_values)
    ax.pcolormesh(p, q, cats, cmap=cmap, norm=norm, shading="nearest")

    # critical curve from a fine sign map, plus the structural lines
    pf = np.linspace(p[0], p[-1], 400)
    qf = np.linspace(q[0], q[-1], 400)
    Pf, Qf = np.meshgrid(pf, qf)
    ax.contour(Pf, Qf, d_star(Pf, Qf, atlas.dim), levels=[0.0],
               colors="k", linewidths=1.4)
    for val in (2.0, sobolev_critical(atlas.dim)):
        if np.isfinite(val) and p[0] < val < p[-1]:
            ax.axvline(val, color="0.25", linewidth=0.7, linestyle="--")
        if np.isfinite(val) and q[0] < val < q[-1]:
            ax.axhline(val, color="0.25", linewidth=0.7, linestyle="--")
    lo, hi = max(p[0], q[0]), min(p[-1], q[-1])
    ax.plot([lo, hi], [lo, hi], color="0.25", linewidth=0.7, linestyle=":")

    ax.set_xlabel("p")
    ax.set_ylabel("q")
    ax.set_title(f"region map, N={atlas.dim}, domain={atlas.domain.value}")
    handles = [
        plt.Rectangle((0, 0), 1, 1, color=_CATEGORY_COLORS[k])
        for k in range(5)
    ]
    ax.legend(
        handles,
        ["no existence", "E'' > 0", "E'' < 0", "E'' = 0", "indeterminate"],
        loc="upper right",
        fontsize=7,
        framealpha=0.9,
    )
    fig.tight_layout()
    _savefig(fig, path, config)


def render_profile_svg(profile, path, config: dict | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(profile.r, profile.u, lw=1.2, label="u")
    ax.plot(profile.r, profile.du, lw=0.9, ls="--", label="u'")
    if profile.support_radius is not None:
        ax.axvline(profile.support_radius, color="0.4", lw=0.7, ls=":",
                   label="support radius")
    ax.set_xlabel("r")
    ax.axhline(0.0, color="0.7", lw=0.5)
    ax.legend(fontsize=8)
    ax.set_title(f"radial profile ({profile.domain}, N={profile.dim})")
    fig.tight_layout()
    _savefig(fig, path, config)


def render_trajectory_svg(times, energies, dissipation, path,
                          config: dict | None = None) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.plot(times, energies, lw=1.2)
    ax1.set_xlabel("t")
    ax1.set_ylabel("energy")
    e0 = energies[0]
    residual = [abs(d + e - e0) for d, e in zip(dissipation, energies)]
    ax2.semilogy(times, np.maximum(residual, 1e-18), lw=1.0)
    ax2.set_xlabel("t")
    ax2.set_ylabel("energy-identity residual")
    fig.tight_layout()
    _savefig(fig, path, config)
