"""Figures for the CLI's ``--plot`` option.

matplotlib is optional (the ``plot`` extra) and imported only here, on
demand, with the non-interactive Agg backend.
"""

from __future__ import annotations

import math

from .errors import InvalidInput


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        raise InvalidInput("--plot needs matplotlib; install the 'plot' extra") from None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_moment_roots(rows, rank: int, path, title: str = "") -> None:
    """phi(a^2n)^(1/2n) against 2n, with the 2 sqrt(2N-1) and 2N levels."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [r[0] for r in rows]
    ax.plot(xs, [r[2] for r in rows], marker=".", label="moment root")
    ax.axhline(2 * math.sqrt(2 * rank - 1), color="k", ls="--", lw=0.8, label="2 sqrt(2N-1)")
    ax.axhline(2 * rank, color="grey", ls=":", lw=0.8, label="2N")
    ax.set_xlabel("2n")
    ax.set_ylabel("phi(a^2n)^(1/2n)")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_walk_ratios(rows, path, title: str = "") -> None:
    """exact_count / N_{n,k} against k, one line per n."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    by_n: dict[int, list] = {}
    for r in rows:
        if r.get("exact_count") is not None:
            by_n.setdefault(r["n"], []).append((r["k"], r["exact_count"] / r["N_nk"]))
    for n, pts in sorted(by_n.items()):
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=".", label=f"n={n}")
    ax.set_xlabel("k")
    ax.set_ylabel("exact count / lower bound")
    ax.set_title(title)
    if by_n:
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_length_histograms(reports, path, title: str = "") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for rep in reports:
        hist = rep["length_histogram"]
        ax.plot([int(k) for k in hist], list(hist.values()), marker="o", label=rep["label"])
    ax.set_yscale("log")
    ax.set_xlabel("word length")
    ax.set_ylabel("elements")
    ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
