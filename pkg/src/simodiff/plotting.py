"""Render sweep results as figures next to the delimited output.

The CSV/JSON files remain the machine contract; these figures are a
convenience view of the same records.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _group(records, keys):
    groups = {}
    for rec in records:
        k = tuple(getattr(rec.config, key) for key in keys)
        groups.setdefault(k, []).append(rec)
    return groups


def _label(cfg, skip=()):
    parts = [f"{cfg.method.upper()} {cfg.osc_mode.value.upper()}"]
    if "m_antennas" not in skip:
        parts.append(f"M={cfg.m_antennas}")
    parts.append(f"$\\sigma^2_t$={cfg.var_tx:g}, $\\sigma^2_r$={cfg.var_rx:g}")
    return ", ".join(parts)


def save_sep_vs_snr(records, path):
    """SEP against the SNR axis, one curve per remaining grid combination,
    with Wilson CI error bars and the analytical bound where present."""
    fig, ax = plt.subplots(figsize=(7, 5))
    groups = _group(records, ("method", "osc_mode", "m_antennas", "var_tx", "var_rx"))
    for _, recs in sorted(groups.items(), key=lambda kv: str(kv[0])):
        recs = sorted(recs, key=lambda r: r.config.snr_db)
        snr = [r.config.snr_db for r in recs]
        sep = [r.sep for r in recs]
        yerr = [
            [max(r.sep - r.ci_low, 0.0) for r in recs],
            [max(r.ci_high - r.sep, 0.0) for r in recs],
        ]
        ax.errorbar(snr, sep, yerr=yerr, marker="o", capsize=3, label=_label(recs[0].config))
        ana = [r.analytical_sep for r in recs]
        if all(a is not None for a in ana):
            ax.plot(snr, ana, linestyle="--", color=ax.lines[-1].get_color(), alpha=0.7)
    ax.set_yscale("log")
    ax.set_xlabel("SNR per symbol [dB]")
    ax.set_ylabel("SEP")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sep_vs_antennas(records, path):
    """SEP against the antenna count, with the analytic error floor as a
    horizontal reference line per curve."""
    fig, ax = plt.subplots(figsize=(7, 5))
    groups = _group(records, ("method", "osc_mode", "snr_db", "var_tx", "var_rx"))
    for _, recs in sorted(groups.items(), key=lambda kv: str(kv[0])):
        recs = sorted(recs, key=lambda r: r.config.m_antennas)
        m = [r.config.m_antennas for r in recs]
        sep = [r.sep for r in recs]
        yerr = [
            [max(r.sep - r.ci_low, 0.0) for r in recs],
            [max(r.ci_high - r.sep, 0.0) for r in recs],
        ]
        ax.errorbar(m, sep, yerr=yerr, marker="o", capsize=3,
                    label=_label(recs[0].config, skip=("m_antennas",)))
        if recs[0].floor is not None and recs[0].floor > 0:
            ax.axhline(recs[0].floor, linestyle=":", color=ax.lines[-1].get_color(), alpha=0.7)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("Number of antennas M")
    ax.set_ylabel("SEP")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_figures(records, out_stem):
    """Write whichever figure(s) the sweep's grid shape supports; returns
    the list of paths written."""
    written = []
    snrs = {r.config.snr_db for r in records}
    ms = {r.config.m_antennas for r in records}
    if len(snrs) > 1:
        p = f"{out_stem}_sep_vs_snr.png"
        save_sep_vs_snr(records, p)
        written.append(p)
    if len(ms) > 1:
        p = f"{out_stem}_sep_vs_antennas.png"
        save_sep_vs_antennas(records, p)
        written.append(p)
    if not written:
        p = f"{out_stem}_sep_vs_snr.png"
        save_sep_vs_snr(records, p)
        written.append(p)
    return written
