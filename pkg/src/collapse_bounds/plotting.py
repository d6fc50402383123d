"""Figures rendered straight to files (no pyplot state, no display)."""

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .constraints import BENCHMARKS

_STYLE = {
    "thermal": ("tab:red", "-"),
    "gas": ("tab:orange", "-"),
    "seismic_rotation": ("tab:blue", "-"),
    "laser_rp": ("tab:green", "--"),
    "laser_frequency": ("tab:olive", "--"),
    "thermoelastic": ("tab:brown", ":"),
    "newtonian": ("tab:purple", "-."),
    "shot": ("tab:pink", ":"),
    "sql": ("grey", "-."),
}


_NO_METADATA = {
    "png": {"Software": None},
    "pdf": {"Creator": None, "Producer": None, "CreationDate": None},
    "svg": {"Creator": None, "Date": None},
}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    FigureCanvasAgg(fig)
    # strip timestamps and version strings so reruns are byte-identical
    meta = _NO_METADATA.get(path.suffix.lower().lstrip("."))
    fig.savefig(path, dpi=150, metadata=meta)
    return path


def plot_exclusion(curves, path, overlay=None, benchmarks=BENCHMARKS):
    """Exclusion curves in the (r, lambda) plane with reference points.

    ``overlay`` is an optional (N, 2) array of (r, lambda) points bounding a
    region drawn in grey.
    """
    fig = Figure(figsize=(6, 4.5))
    ax = fig.add_subplot(1, 1, 1)
    if overlay is not None:
        ax.fill_between(overlay[:, 0], overlay[:, 1], 1e-30, color="0.85", label="overlay")
    styles = {"LPF-2016": "tab:blue", "LPF-updated": "m", "underground-proposal": "g"}
    for curve in curves:
        ls = "--" if curve.source_label == "underground-proposal" else "-"
        ax.loglog(curve.r, curve.lambda_max, ls, color=styles.get(curve.source_label),
                  label=curve.source_label)
    for b in benchmarks:
        if b.log10_spread:
            ax.errorbar(b.r, b.lam, yerr=[[b.lam - b.lam * 10**-b.log10_spread],
                                         [b.lam * 10**b.log10_spread - b.lam]],
                        fmt="ks", ms=4, capsize=3)
        else:
            ax.plot(b.r, b.lam, "k*", ms=8)
        ax.annotate(b.name, (b.r, b.lam), textcoords="offset points", xytext=(5, 5), fontsize=7)
    ax.set_xlabel(r"$r_{\rm CSL}$ [m]")
    ax.set_ylabel(r"$\lambda_{\rm CSL}$ [s$^{-1}$]")
    ax.legend(fontsize=8, loc="upper left")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_budget(report, path):
    """Force (top) and displacement (bottom) amplitude budgets."""
    fig = Figure(figsize=(6, 7))
    ax_f = fig.add_subplot(2, 1, 1)
    ax_x = fig.add_subplot(2, 1, 2, sharex=ax_f)
    ax_f.loglog(report.freqs, report.total.asd, color="0.6", lw=4, label="total")
    ax_f.loglog(report.freqs, report.residual.asd, "k--", lw=1.5, label="calibrated residual")
    ax_x.loglog(report.freqs, report.total_displacement.asd, color="0.6", lw=4, label="total")
    ax_x.loglog(report.freqs, report.residual_displacement.asd, "k--", lw=1.5)
    for name, spec in report.force.items():
        color, ls = _STYLE.get(name, (None, "-"))
        ax_f.loglog(spec.freqs, np.sqrt(spec.values), ls, color=color, label=name)
        disp = report.displacement[name]
        ax_x.loglog(disp.freqs, np.sqrt(disp.values), ls, color=color, label=name)
    ax_f.set_ylabel(r"force [N/$\sqrt{\rm Hz}$]")
    ax_x.set_ylabel(r"displacement [m/$\sqrt{\rm Hz}$]")
    ax_x.set_xlabel("frequency [Hz]")
    ax_f.legend(fontsize=7, ncol=2)
    for ax in (ax_f, ax_x):
        ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_spectrum(spec, path, fit=None):
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot(1, 1, 1)
    ax.loglog(spec.freqs, spec.values, ".", ms=3, label=spec.kind.name)
    if fit is not None:
        model = fit.white_level + fit.colored_coeff * spec.freqs**fit.exponent
        ax.loglog(spec.freqs, model, "r-", label="white + colored fit")
        ax.axhline(fit.white_level, color="r", ls=":", lw=1)
    ax.set_xlabel("frequency [Hz]")
    ax.set_ylabel(f"PSD [{spec.kind.unit}]")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)
