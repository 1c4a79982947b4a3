"""Error-rate figures for simulation reports."""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: float(v) if k not in ("trials", "block_errors", "bit_errors", "seed") or v == ""
             else int(v) for k, v in r.items() if v != ""} for r in rows]


def plot_curves(curves, path, xlabel="Eb/N0 [dB]", title=None):
    """Draw BLER (with Wilson bars) and BER panels.

    ``curves`` maps a label to a list of result rows, each a mapping or
    object exposing point, bler, ci_lo, ci_hi and ber.
    """
    fig, (ax_b, ax_e) = plt.subplots(1, 2, figsize=(10, 4), constrained_layout=True)
    for label, rows in curves.items():
        get = (lambda r, k: r[k]) if rows and isinstance(rows[0], dict) else getattr
        x = [get(r, "point") for r in rows]
        bler = [get(r, "bler") for r in rows]
        lo = [max(b - get(r, "ci_lo"), 0.0) for r, b in zip(rows, bler)]
        hi = [max(get(r, "ci_hi") - b, 0.0) for r, b in zip(rows, bler)]
        ax_b.errorbar(x, bler, yerr=[lo, hi], marker="o", capsize=3, label=label)
        ax_e.plot(x, [get(r, "ber") for r in rows], marker="s", label=label)
    for ax, name in ((ax_b, "BLER"), (ax_e, "BER")):
        ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(name)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
    if title:
        fig.suptitle(title)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
