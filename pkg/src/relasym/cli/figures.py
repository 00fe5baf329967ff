"""PNG figures for the report path (Agg backend, fixed metadata)."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import numpy as np

_METADATA = {"Software": None}


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_METADATA)
    _plt().close(fig)
    return path


def szego_figure(path, tables):
    """tables: list of (label, points, observed, boundary_x, boundary_lhs, boundary_rhs)."""
    plt = _plt()
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for label, z, g, bx, lhs, rhs in tables:
        t = np.arange(len(z))
        axes[0].plot(t, np.abs(g), "o-", label=f"|{label}|")
        axes[0].plot(t, np.angle(g), "s--", label=f"arg {label}")
        axes[1].plot(bx, lhs, "o", label=f"{label}: lim |G|^2")
        axes[1].plot(bx, rhs, "k+", ms=10)
    axes[0].set_xlabel("contour point")
    axes[0].legend(fontsize=8)
    axes[1].set_xlabel("x")
    axes[1].set_title("boundary modulus (+ = 1/rho)")
    axes[1].legend(fontsize=8)
    return _save(fig, path)


def zeros_figure(path, zeros, delta1, delta2):
    """zeros: list of (size, zeros of Q1, zeros of Q2)."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for size, z1, z2 in zeros:
        ax.plot(z1, np.full(len(z1), size), "b|", ms=8)
        ax.plot(z2, np.full(len(z2), size), "r|", ms=8)
    for iv, c in ((delta1, "b"), (delta2, "r")):
        ax.axvspan(iv.a, iv.b, color=c, alpha=0.08)
    ax.set_xlabel("x")
    ax.set_ylabel("|n|")
    ax.set_title("zeros of Q1 (blue) and Q2 (red)")
    return _save(fig, path)


def phi_figure(path, phi, delta1, delta2):
    plt = _plt()
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for k, iv in ((1, delta2), (2, delta1)):
        x, v = phi.phi.dense(k)
        axes[0].plot(x, v, label=f"Phi{k} on [{iv.a:g}, {iv.b:g}]")
    axes[0].set_xlabel("x")
    axes[0].legend(fontsize=8)
    axes[1].semilogy(np.arange(1, len(phi.history) + 1), phi.history, "o-", ms=3)
    axes[1].set_xlabel("iteration")
    axes[1].set_ylabel("d(f_{m+1}, f_m)")
    return _save(fig, path)


def residual_figure(path, reports):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    size = [r["n1"] + r["n2"] for r in reports]
    tiny = 1e-300
    ax.semilogy(size, [max(r["tn_residual"], tiny) for r in reports], "o-", label="T_n")
    ax.semilogy(size, [max(r["ttilde_residual"], tiny) for r in reports], "s-", label="T~_n")
    ax.axhline(reports[0]["tol"] if reports else 1e-8, color="k", ls=":", lw=1)
    ax.set_xlabel("|n|")
    ax.set_ylabel("fixed-point residual")
    ax.legend()
    return _save(fig, path)


def convergence_figure(path, records, title=""):
    plt = _plt()
    series = defaultdict(list)
    for r in records:
        series[r.quantity].append((r.index.size, max(r.sup_error, 1e-300)))
    fig, ax = plt.subplots(figsize=(8, 5))
    for q, pts in series.items():
        pts.sort()
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3, label=q)
    ax.set_xlabel("|n|")
    ax.set_ylabel("sup error")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7, ncol=2)
    return _save(fig, path)
