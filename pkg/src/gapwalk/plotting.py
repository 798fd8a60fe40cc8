"""Figure rendering for the CLI report path.

Each renderer takes computed results and writes one PNG next to the
delimited output. Rendering is deterministic for a fixed input.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 130


def _save(fig, path):
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def variance_figure(report, path):
    labels, vals, errs = [], [], []
    if report.closed_form is not None:
        labels.append("closed form")
        vals.append(report.closed_form)
        errs.append(0.0)
    labels.append(f"series (K={report.truncation_k})")
    vals.append(report.series_truncated)
    errs.append(report.series_tail_bound or 0.0)
    labels.append("monte carlo")
    vals.append(report.monte_carlo)
    errs.append(report.monte_carlo_std_err)

    fig, ax = plt.subplots(figsize=(5, 3.2))
    xs = np.arange(len(labels))
    ax.errorbar(xs, vals, yerr=errs, fmt="o", capsize=4)
    ax.set_xticks(xs, labels)
    ax.set_ylabel("limiting variance")
    ax.set_title("variance estimates, three routes")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def density_figure(density, path):
    g = density.grid_size
    t = (np.arange(g) + 0.5) / g
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    ax.step(t, density.values, where="mid", lw=0.9)
    ax.axhline(1.0, color="k", ls="--", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("density")
    ax.set_title(f"walk density mod 1 at step {density.step}")
    fig.tight_layout()
    return _save(fig, path)


def decay_figure(fit, path):
    ns = np.asarray(fit.steps)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.semilogy(ns, fit.gaps, "o", ms=4, label="uniformity gap")
    ax.semilogy(ns, fit.C * fit.w**ns, "-", lw=1,
                label=f"fit C={fit.C:.3g}, w={fit.w:.4f}")
    ax.set_xlabel("step n")
    ax.set_ylabel("sup |density - 1|")
    ax.set_title(f"geometric mixing, r^2={fit.r_squared:.4f}")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def schedule_figure(ks, long_ratios, short_ratios, path):
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    ax.plot(ks, long_ratios, lw=1, label="long total / (2/3) n^1.5")
    ax.plot(ks, short_ratios, lw=1, label="short total / (4/5) n^1.25")
    ax.axhline(1.0, color="k", ls="--", lw=0.8)
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("normalized total")
    ax.set_title("block schedule growth")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def blocks_figure(profile, path):
    sched = profile.schedule
    v = profile.limiting_variance
    ks = np.arange(1, sched.n_blocks + 1)
    cum_long = np.cumsum(profile.long_vars) / (v * sched.long_totals[1:])
    cum_short = np.cumsum(profile.short_vars) / (v * sched.short_totals[1:])
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    ax.plot(ks, cum_long, lw=1, label="long blocks")
    ax.plot(ks, cum_short, lw=1, label="short blocks")
    ax.axhline(1.0, color="k", ls="--", lw=0.8)
    ax.set_xlabel("blocks used")
    ax.set_ylabel("cumulative variance ratio")
    ax.set_title(f"block variances vs limit line ({profile.reps} reps)")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def clt_figure(z, path):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist(z, bins=40, density=True, alpha=0.7)
    grid = np.linspace(-4, 4, 200)
    ax.plot(grid, np.exp(-grid**2 / 2) / np.sqrt(2 * np.pi), "k-", lw=1)
    ax.set_xlabel("normalized partial sum")
    ax.set_ylabel("density")
    ax.set_title("scaled sums vs standard normal")
    fig.tight_layout()
    return _save(fig, path)


def limit_series_figure(series_list, target, ylabel, title, path):
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    for s in series_list:
        ax.plot(s.ns, s.values, lw=0.5, alpha=0.35, color="C0")
    med = np.median(np.stack([s.running_extreme for s in series_list]), axis=0)
    ax.plot(series_list[0].ns, med, lw=1.8, color="C1",
            label="median running extreme")
    if target is not None:
        ax.axhline(target, color="k", ls="--", lw=0.9, label="reference level")
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def kefp_figure(a, t_grid, partials, verdict, path):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.semilogx(t_grid, partials, lw=1.2)
    ax.set_xlabel("T")
    ax.set_ylabel("partial integral")
    ax.set_title(f"integral test, a={a:g}: {verdict}")
    fig.tight_layout()
    return _save(fig, path)


def moment4_figure(ns, ratios, errs, path):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.errorbar(ns, ratios, yerr=np.asarray(errs) * 3, fmt="o-", capsize=4)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("number of equal weights")
    ax.set_ylabel("normalized fourth moment")
    ax.set_title("fourth-moment ratio (3 s.e. bars)")
    fig.tight_layout()
    return _save(fig, path)
