"""Matplotlib figures written next to CLI reports."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import linalg as la  # noqa: E402
from .epistemics import RecursionTrace, branch_probabilities  # noqa: E402

FIGSIZE = (6.4, 4.0)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def recursion_figure(trace: RecursionTrace, rho, path, title: str = "") -> Path:
    """Weights Tr(A_n rho), Tr(B_n rho) per level, with the common-certainty weight."""
    n = np.arange(len(trace.levels))
    wa = [la.expectation(a, rho) for a, _ in trace.levels]
    wb = [la.expectation(b, rho) for _, b in trace.levels]
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.bar(n - 0.18, wa, width=0.36, label="Tr(A_n rho)")
    ax.bar(n + 0.18, wb, width=0.36, label="Tr(B_n rho)")
    ax.axhline(trace.cc_weight, color="k", ls="--", lw=1, label=f"Tr(C_* rho) = {trace.cc_weight:.4g}")
    ax.set_xticks(n)
    ax.set_xlabel("recursion level n")
    ax.set_ylabel("weight")
    ax.set_ylim(0, 1.05)
    ax.set_title(title or f"q_A = {trace.q_alice:.4g}, q_B = {trace.q_bob:.4g}")
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def branch_figure(s, path, title: str = "") -> Path:
    """Per-outcome probability of the property for both agents; bar width ~ outcome weight."""
    fig, axes = plt.subplots(1, 2, figsize=FIGSIZE, sharey=True)
    for ax, meas, name in ((axes[0], s.alice, "Alice"), (axes[1], s.bob, "Bob")):
        rows = branch_probabilities(meas, s.property, s.rho)
        ks = [k for k, _, p in rows if p is not None]
        ps = [p for _, _, p in rows if p is not None]
        ws = [w for _, w, p in rows if p is not None]
        ax.bar(ks, ps, width=[0.2 + 0.6 * w for w in ws], color="C0" if name == "Alice" else "C1")
        ax.set_xticks(range(meas.count))
        ax.set_xlabel(f"{name} outcome")
        ax.set_ylim(0, 1.05)
    axes[0].set_ylabel("Pr[E ; outcome]")
    fig.suptitle(title or s.name)
    return _save(fig, path)


def block_weight_figure(weights: dict, path, title: str = "recorded transcript weights") -> Path:
    labels = [f"({i},{j})" for i, j in weights]
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.bar(labels, list(weights.values()), color="C2")
    ax.set_xlabel("transcript (i, j)")
    ax.set_ylabel("Tr(M_r rho M_r^dagger)")
    ax.set_title(title)
    return _save(fig, path)


def box_figure(box, path, title: str = "no-signaling box") -> Path:
    from .classical import OUTCOME_ORDER

    pairs = list(box.contexts)
    table = np.array([[float(box.contexts[p][o]) for o in OUTCOME_ORDER] for p in pairs])
    fig, ax = plt.subplots(figsize=FIGSIZE)
    im = ax.imshow(table, cmap="Blues", vmin=0, vmax=1)
    ax.set_xticks(range(4), [str(o) for o in OUTCOME_ORDER])
    ax.set_yticks(range(len(pairs)), [f"({x},{y})" for x, y in pairs])
    for r in range(table.shape[0]):
        for c in range(4):
            ax.text(c, r, f"{table[r, c]:.3g}", ha="center", va="center", fontsize=9)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title(title)
    return _save(fig, path)


def sweep_figure(values, bounds, path, title: str, xlabel: str = "instance") -> Path:
    """Measured quantity per instance against its bound (a scalar or per-instance array)."""
    values = np.asarray(values, dtype=float)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    x = np.arange(values.size)
    ax.plot(x, values, ".", ms=3, label="measured")
    b = np.broadcast_to(np.asarray(bounds, dtype=float), values.shape)
    ax.plot(x, b, "-", lw=0.8, color="C3", label="bound")
    if values.size and np.all(values >= 0) and np.any(values > 0):
        ax.set_yscale("symlog", linthresh=max(1e-18, float(np.min(values[values > 0]))))
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def theta_figure(path, thetas=None) -> Path:
    """Branch probabilities of example1 as the property angle varies."""
    from .epistemics import cond_prob, run_recursion
    from .scenarios import example1

    thetas = np.linspace(0, math.pi, 25) if thetas is None else np.asarray(thetas)
    rows = []
    for th in thetas:
        s = example1(float(th))
        q = math.cos(th / 2) ** 2
        probs = [cond_prob(s.property, p, s.rho).value for p in (*s.alice, *s.bob)]
        rows.append(probs + [run_recursion(s, q, q).cc_weight])
    rows = np.array(rows)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    names = ["A0", "A1", "B0", "B1", "B2"]
    for k, name in enumerate(names):
        ax.plot(thetas, rows[:, k], label=f"Pr[E; {name}]")
    ax.plot(thetas, rows[:, -1], "k--", label="Tr(C_* rho)")
    ax.set_xlabel("theta")
    ax.set_ylabel("probability")
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)
