"""Optional figure rendering next to the delimited output.

The delimited output is the contract; these figures are a convenience
view of the same rows and nothing reads them back.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_rates(results, path: str) -> str:
    """Logical rate vs p, one curve per (code, L, alg, eps) group."""
    groups = {}
    for r in results:
        groups.setdefault((r.code, r.L, r.alg, r.eps), []).append(r)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for key in sorted(groups):
        rows = sorted(groups[key], key=lambda r: r.p)
        ps = [r.p for r in rows]
        rates = [r.logical_rate for r in rows]
        errs = [r.stderr for r in rows]
        code, L, alg, eps = key
        label = "%s %s" % (code, alg)
        if eps:
            label += " eps=%g" % eps
        ax.errorbar(ps, rates, yerr=errs, marker="o", ms=3, lw=1,
                    capsize=2, label=label)
    ax.set_xlabel("physical error rate p")
    ax.set_ylabel("logical failure rate")
    ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_grid(results, path: str) -> str:
    """Heat map of logical rate over the p x eps grid."""
    ps = sorted({r.p for r in results})
    epss = sorted({r.eps for r in results})
    import numpy as np
    z = np.full((len(epss), len(ps)), np.nan)
    for r in results:
        z[epss.index(r.eps), ps.index(r.p)] = r.logical_rate
    fig, ax = plt.subplots(figsize=(6, 4.5))
    im = ax.imshow(z, origin="lower", aspect="auto",
                   extent=(min(ps), max(ps), min(epss), max(epss)))
    fig.colorbar(im, ax=ax, label="logical failure rate")
    ax.set_xlabel("physical error rate p")
    ax.set_ylabel("erasure rate eps")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
