"""SVG line plots of estimator and control curves (needs matplotlib)."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_plots(out, est, Rn, Rp: dict, n) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed metadata keeps the SVG bytes reproducible
    matplotlib.rcParams["svg.hashsalt"] = "mhdcert"
    meta = {"Date": None, "Creator": None}
    out = Path(out)
    written = []
    curves = [(e.label, e.times, e.values) for e in list(est.D.values()) + list(est.eps.values())]
    ts = est.times[est.times < Rn.t_end] if Rn.blew_up else est.times
    curves.append((f"R_{n}", ts, Rn.sample(ts)))
    for p, sol in Rp.items():
        curves.append((f"R_{p}", ts, sol.sample(ts)))
    for label, t, v in curves:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot(t, v, lw=1.2)
        ax.set_xlabel("t")
        ax.set_ylabel(label)
        if np.all(v > 0):
            ax.set_yscale("log")
        fig.tight_layout()
        path = out / f"{label}.svg"
        fig.savefig(path, format="svg", metadata=meta)
        plt.close(fig)
        written.append(path)
    return written
