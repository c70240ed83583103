"""Matplotlib rendering of figure records to image files.

Every figure command writes a PNG next to its CSV. Curves are grouped by
(metric, encoding, K, Nt, analytic_kind); outage figures use a log
probability axis, capacity figures plain linear axes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _group(records, keyfn):
    groups = {}
    for rec in records:
        groups.setdefault(keyfn(rec), []).append(rec)
    return groups


def _mode_label(rec) -> str:
    label = f"{rec.encoding} K={rec.K}"
    if rec.Nt > 1:
        label += f", t={rec.Nt}" if rec.encoding != "complex" else f", Nt={rec.Nt}"
    return label


def render_figure(figure_id: str, records, path) -> None:
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    if figure_id.startswith("top-"):
        mc = [r for r in records if r.metric == "top_lb" and r.mc_value is not None]
        true = [r for r in records if r.metric == "top_true"]
        ax.semilogy([r.beta_db for r in mc], [max(r.mc_value, 1e-12) for r in mc],
                    "o", ms=4, label="sim (lower-bound CQI)")
        ax.semilogy([r.beta_db for r in true], [max(r.mc_value, 1e-12) for r in true],
                    "s", ms=4, mfc="none", label="sim (true post-SINR)")
        for kind in sorted({r.analytic_kind for r in records if r.analytic_kind}):
            rows = [r for r in records if r.analytic_kind == kind
                    and r.analytic_value is not None]
            ax.semilogy([r.beta_db for r in rows],
                        [max(r.analytic_value, 1e-12) for r in rows], label=kind)
        ax.set_xlabel("target SNR (dB)")
        ax.set_ylabel("transmitter outage probability")
        ax.set_ylim(1e-4, 1.5)
        head = records[0]
        ax.set_title(f"{head.encoding} encoding, Nr={head.Nr}, K={head.K}, "
                     f"L={head.L}, SNR={head.snr_db:.0f} dB")
    elif figure_id == "capacity-vs-L":
        for (enc, K), rows in sorted(_group(records, lambda r: (r.encoding, r.K)).items()):
            ax.plot([r.L for r in rows], [r.analytic_value for r in rows],
                    marker=".", label=f"{enc} K={K}")
        ax.set_xlabel("active users L")
        ax.set_ylabel("sum outage capacity (bits/s/Hz)")
        ax.set_title("Sum outage capacity vs L (Nr=2, TOP=0.2, SNR=20 dB)")
    else:  # mean-capacity and sm-* figures
        for key, rows in sorted(_group(records, lambda r: (r.encoding, r.K, r.Nt)).items()):
            rows = sorted(rows, key=lambda r: r.snr_db)
            ax.plot([r.snr_db for r in rows], [r.mc_value for r in rows],
                    marker=".", label=_mode_label(rows[0]))
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("mean sum capacity (bits/s/Hz)")
        head = records[0]
        ax.set_title(f"Mean sum capacity, Nr={head.Nr}, L={head.L}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
