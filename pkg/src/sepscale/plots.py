"""Figure rendering for sweep reports.

Uses the Agg backend so figures render to files on headless machines.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_BASE_MARKERS = {2: "o", 4: "s", 8: "^"}


def render_sweep_figure(rows, path) -> None:
    """Scatter separation quality against model size for swept configs.

    ``rows`` are sweep rows (objects with params_k, ref_si_sdr_db, dil_base,
    gflops_s attributes).  Rows with a reference score are plotted as SI-SDR
    vs parameter count, one marker style per dilation base.  If no row has a
    score, compute cost vs parameter count is plotted instead so the figure
    is never empty.
    """
    rows = list(rows)
    scored = [r for r in rows if r.ref_si_sdr_db is not None]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if scored:
        for base in sorted({r.dil_base for r in scored}):
            pts = [r for r in scored if r.dil_base == base]
            ax.scatter(
                [r.params_k for r in pts],
                [r.ref_si_sdr_db for r in pts],
                marker=_BASE_MARKERS.get(base, "x"),
                label=f"dilation base {base}",
                alpha=0.85,
            )
        ax.set_ylabel("reference SI-SDR (dB)")
        ax.legend(loc="lower right", fontsize="small")
    else:
        ax.scatter([r.params_k for r in rows], [r.gflops_s for r in rows], marker="o")
        ax.set_ylabel("GFLOP per second of audio")
    ax.set_xlabel("parameters (K)")
    ax.set_title("separation quality vs model size")
    ax.grid(True, linestyle=":", linewidth=0.6)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
