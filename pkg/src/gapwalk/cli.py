"""Batch CLI: config in, CSV/JSON tables and figures out.

Every run writes its outputs into --out with the config hash in each
file name, plus a manifest recording the hash, master seed, and package
version. Output bytes depend only on (config, seed), never on worker
count or scheduling. Exit codes: 0 all checks pass or diagnostic,
1 a check failed or a module raised, 2 bad usage or config.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, blocks, density, limits, plotting, variance
from .config import SUBCOMMANDS, load_config
from .errors import DegenerateFitError, GapwalkError, InvalidInputError
from .periodic import TrigPolynomial
from .reporting import config_hash, fmt17, write_json, write_manifest, write_table
from .seeding import parallel_map

_BATTERY_ORDER = (
    "variance",
    "density",
    "decay",
    "schedule",
    "blocks",
    "clt",
    "lil",
    "chung",
    "kefp",
    "moment4",
)


class _Run:
    """Shared state for one CLI invocation."""

    def __init__(self, cfg, subcommand, out_dir, workers, fmt, figures):
        self.cfg = cfg
        self.subcommand = subcommand
        self.out = Path(out_dir)
        self.workers = workers
        self.fmt = fmt
        self.figures = figures
        self.digest = config_hash(
            {"config": cfg.canonical(), "subcommand": subcommand}
        )
        self.outputs = []
        self.verdicts = []

    def path(self, stem, suffix=""):
        return self.out / f"{stem}_{self.digest}{suffix}"

    def table(self, stem, header, rows):
        p = write_table(self.path(stem), header, rows, self.fmt)
        self.outputs.append(p.name)
        return p

    def json(self, stem, obj):
        p = write_json(self.path(stem, ".json"), obj)
        self.outputs.append(p.name)
        return p

    def figure(self, render, stem, *args):
        if not self.figures:
            return None
        p = render(*args, self.path(stem, ".png"))
        self.outputs.append(p.name)
        return p

    def verdict(self, check, verdict, **details):
        entry = {"check": check, "verdict": verdict, **details}
        self.verdicts.append(entry)
        return entry


def _run_variance(run: _Run):
    cfg = run.cfg
    p = cfg.params_for("variance")
    rep = variance.report(
        cfg.function, cfg.gaps, cfg.x, p["K"], p["G"], p["reps"], cfg.seed, run.workers
    )
    tail = rep.series_tail_bound
    ok_mc = abs((rep.closed_form if rep.closed_form is not None else rep.series_truncated)
                - rep.monte_carlo) <= 4.0 * rep.monte_carlo_std_err
    if rep.closed_form is not None:
        ok_series = abs(rep.closed_form - rep.series_truncated) <= (tail or 0.0) + 1e-4
    else:
        ok_series = True
    run.json("variance", rep.to_json())
    run.figure(plotting.variance_figure, "variance", rep)
    rows = [("closed form", rep.closed_form, 0.0)]
    rows.append((f"series K={rep.truncation_k}", rep.series_truncated, tail))
    rows.append(("monte carlo", rep.monte_carlo, rep.monte_carlo_std_err))
    print(f"{'route':<16}{'estimate':>22}{'uncertainty':>16}")
    for name, val, unc in rows:
        v = "-" if val is None else fmt17(float(val))
        u = "-" if unc is None else format(float(unc), ".3g")
        print(f"{name:<16}{v:>22}{u:>16}")
    return run.verdict(
        "variance",
        "pass" if (ok_mc and ok_series) else "fail",
        report=rep.to_json(),
    )


def _run_density(run: _Run):
    cfg = run.cfg
    p = cfg.params_for("density")
    d = density.mod1_density(cfg.gaps, cfg.x, p["n"], p["G"])
    run.table("density", ["bin", "value"], list(enumerate(d.values)))
    run.figure(plotting.density_figure, "density", d)
    mass_ok = abs(float(np.mean(d.values)) - 1.0) <= 1e-10
    return run.verdict(
        "density",
        "pass" if mass_ok else "fail",
        step=d.step,
        uniformityGap=density.uniformity_gap(d),
        massConserved=mass_ok,
    )


def _run_decay(run: _Run, battery: bool = False):
    cfg = run.cfg
    p = cfg.params_for("decay")
    try:
        fit = density.decay_fit(cfg.gaps, cfg.x, p["nMax"], p["G"])
    except DegenerateFitError as exc:
        if not battery:
            raise
        return run.verdict("decay", "diagnostic", note=str(exc))
    run.table("decay", ["n", "gap"], list(zip(fit.steps, fit.gaps)))
    run.json("decay_fit", {"C": fit.C, "w": fit.w, "rSquared": fit.r_squared})
    run.figure(plotting.decay_figure, "decay", fit)
    return run.verdict(
        "decay",
        "pass" if fit.r_squared >= 0.98 else "diagnostic",
        C=fit.C,
        w=fit.w,
        rSquared=fit.r_squared,
    )


def _run_schedule(run: _Run):
    p = run.cfg.params_for("schedule")
    n = p["n"]
    diag = blocks.schedule_asymptotics(n)
    sched = blocks.BlockSchedule(max(diag.block_count, 1))
    run.table(
        "schedule",
        ["k", "longTotal", "shortTotal", "total",
         "longStart", "longEnd", "shortStart", "shortEnd"],
        sched.rows(),
    )
    run.json("schedule_asymptotics", {
        "n": diag.n,
        "blockCount": diag.block_count,
        "longRatio": diag.long_ratio,
        "shortRatio": diag.short_ratio,
        "remainderScaled": diag.remainder_scaled,
    })
    ks = np.unique(np.geomspace(10, max(diag.block_count, 11), 40).astype(int))
    lr = [sched.long_totals[k] / ((2 / 3) * k**1.5) for k in ks]
    sr = [sched.short_totals[k] / ((4 / 5) * k**1.25) for k in ks]
    run.figure(plotting.schedule_figure, "schedule", ks, lr, sr)

    # structural exactness at this n: tiling, sandwich, monotonicity
    t = sched.totals
    tiling_ok = bool(
        np.all(np.diff(t) == sched.long_lengths + sched.short_lengths)
        and np.all(sched.long_lengths >= 1)
        and np.all(sched.short_lengths >= 1)
    )
    pcount = blocks.block_count_for(n)
    sandwich_ok = blocks.block_total(pcount) <= n < blocks.block_total(pcount + 1)
    monotone_ok = bool(np.all(np.diff(t) > 0))
    ok = tiling_ok and sandwich_ok and monotone_ok
    return run.verdict(
        "schedule",
        "pass" if ok else "fail",
        tiling=tiling_ok,
        sandwich=sandwich_ok,
        monotone=monotone_ok,
    )


def _run_blocks(run: _Run):
    cfg = run.cfg
    p = cfg.params_for("blocks")
    prof = blocks.block_variances(
        cfg.function, cfg.gaps, cfg.x, p["nBlocks"], p["reps"], cfg.seed, run.workers
    )
    run.table(
        "block_variances",
        ["k", "longVar", "shortVar"],
        zip(range(1, prof.schedule.n_blocks + 1), prof.long_vars, prof.short_vars),
    )
    run.json("block_ratio", {
        "nBlocks": prof.schedule.n_blocks,
        "reps": prof.reps,
        "limitingVariance": prof.limiting_variance,
        "ratioLong": prof.ratio_long,
        "ratioShort": prof.ratio_short,
    })
    run.figure(plotting.blocks_figure, "blocks", prof)
    return run.verdict(
        "blocks",
        "diagnostic",
        ratioLong=prof.ratio_long,
        ratioShort=prof.ratio_short,
    )


def _run_clt(run: _Run):
    cfg = run.cfg
    p = cfg.params_for("clt")
    rep, z = limits.clt_test(
        cfg.function, cfg.gaps, cfg.x, p["N"], p["reps"], cfg.seed,
        run.workers, return_samples=True,
    )
    run.json("clt", rep.to_json())
    run.figure(plotting.clt_figure, "clt", z)
    return run.verdict("clt", rep.verdict, pValue=rep.p_value,
                       statistic=rep.statistic, details=rep.details)


def _limit_trajectories(run: _Run, p):
    cfg = run.cfg

    def one(i):
        return limits.simulate_trajectory(
            cfg.function, cfg.gaps, cfg.x, p["Nmax"], p["gamma"],
            limits._oracle_seed(cfg.seed, i),
        )

    return parallel_map(one, range(p["seeds"]), run.workers)


def _run_limit_checks(run: _Run, which: str):
    cfg = run.cfg
    p = cfg.params_for(which)
    trajs = _limit_trajectories(run, p)
    try:
        v = variance.closed_form(cfg.function, cfg.gaps, cfg.x)
    except GapwalkError:
        v, _ = variance.series(cfg.function, cfg.gaps, cfg.x, 64, 4096)
    if v <= 0:
        raise InvalidInputError("limiting variance must be positive")
    lil_series = [limits.lil_statistic(t) for t in trajs]
    chung_series = [limits.chung_statistic(t) for t in trajs]
    rows = []
    for i, t in enumerate(trajs):
        lil = lil_series[i]
        chung = chung_series[i]
        offset = t.ns.size - lil.ns.size
        for j, ncp in enumerate(t.ns):
            jj = j - offset
            rows.append((
                i, int(ncp), t.partial_sums[j], t.running_max_abs[j],
                lil.values[jj] if jj >= 0 else float("nan"),
                chung.values[jj] if jj >= 0 else float("nan"),
            ))
    run.table(
        "checkpoints",
        ["seed", "N", "partialSum", "runningMaxAbs", "lilStat", "chungStat"],
        rows,
    )
    oracle_lil, oracle_chung = limits.brownian_band_medians(
        p["Nmax"], p["gamma"], p["seeds"], cfg.seed + 1, run.workers
    )
    sv = math.sqrt(v)
    out = []
    if which == "lil" or run.subcommand == "battery":
        med = float(np.median([s.running_extreme[-1] for s in lil_series]))
        ok = abs(math.log((med / sv) / oracle_lil)) <= math.log(2.0) if med > 0 else False
        run.figure(
            plotting.limit_series_figure, "lil",
            lil_series, oracle_lil * sv, "scaled partial sum",
            "iterated-logarithm statistic (running max)",
        )
        out.append(run.verdict(
            "lil",
            "pass" if ok else "fail",
            medianFinalRunningMax=med,
            brownianOracleMedian=oracle_lil,
            limitingVariance=v,
            scaledMedian=med / sv,
        ))
    if which == "chung" or run.subcommand == "battery":
        med = float(np.median([s.running_extreme[-1] for s in chung_series]))
        ok = abs(math.log((med / sv) / oracle_chung)) <= math.log(2.0)
        run.figure(
            plotting.limit_series_figure, "chung",
            chung_series, oracle_chung * sv, "scaled running |sum| max",
            "small-deviation statistic (running min)",
        )
        out.append(run.verdict(
            "chung",
            "pass" if ok else "fail",
            medianFinalRunningMin=med,
            brownianOracleMedian=oracle_chung,
            classicalConstant=math.pi / math.sqrt(8.0),
            printedConstantReportedOnly=8.0 / math.pi**2,
            limitingVariance=v,
            scaledMedian=med / sv,
        ))
    return out


def _run_kefp(run: _Run):
    p = run.cfg.params_for("kefp")
    res = limits.kefp_classify(p["a"], p["Tmax"])
    run.json("kefp", res.to_json())
    t_grid = np.geomspace(32.0, p["Tmax"], 24)
    partials = [limits.kefp_classify(p["a"], t).partial_integral for t in t_grid]
    run.figure(plotting.kefp_figure, "kefp", p["a"], t_grid, partials, res.verdict)
    return run.verdict("kefp", "diagnostic",
                       classification=res.verdict,
                       partialIntegral=res.partial_integral)


def _run_moment4(run: _Run):
    cfg = run.cfg
    p = cfg.params_for("moment4")
    results = []
    if p.get("weights"):
        r, se = limits.fourth_moment_ratio(
            cfg.function, cfg.gaps, cfg.x, p["weights"], p["reps"], cfg.seed,
            run.workers,
        )
        results.append({"n": len(p["weights"]), "ratio": r, "stdErr": se,
                        "weights": "explicit"})
    else:
        for n in p["nList"]:
            r, se = limits.fourth_moment_ratio(
                cfg.function, cfg.gaps, cfg.x, np.ones(n), p["reps"], cfg.seed,
                run.workers,
            )
            results.append({"n": n, "ratio": r, "stdErr": se, "weights": "equal"})
    run.json("moment4", results)
    if len(results) >= 2:
        ratios = [r["ratio"] for r in results]
        bounded = max(ratios) < 3.0 * min(ratios)
        no_trend = ratios[-1] <= ratios[0] * 1.5
        verdict = "pass" if (bounded and no_trend) else "fail"
        run.figure(
            plotting.moment4_figure, "moment4",
            [r["n"] for r in results], ratios, [r["stdErr"] for r in results],
        )
    else:
        verdict = "diagnostic"
    return run.verdict("moment4", verdict, results=results)


def _dispatch(run: _Run, sub: str):
    if sub == "variance":
        _run_variance(run)
    elif sub == "density":
        _run_density(run)
    elif sub == "decay":
        _run_decay(run, battery=(run.subcommand == "battery"))
    elif sub == "schedule":
        _run_schedule(run)
    elif sub == "blocks":
        _run_blocks(run)
    elif sub == "clt":
        _run_clt(run)
    elif sub in ("lil", "chung"):
        _run_limit_checks(run, sub)
    elif sub == "kefp":
        _run_kefp(run)
    elif sub == "moment4":
        _run_moment4(run)
    else:
        raise InvalidInputError(f"unknown subcommand {sub!r}")


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="gapwalk",
        description="Random-gap walk simulation lab: variance, mixing, "
                    "block schedule, and limit-theorem batteries.",
    )
    ap.add_argument("subcommand", help="one of: " + ", ".join(SUBCOMMANDS))
    ap.add_argument("--config", required=True, help="path to the JSON config")
    ap.add_argument("--seed", type=int, default=None, help="master seed override")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--format", choices=("csv", "json"), default="csv",
                    dest="fmt", help="tabular output format")
    ap.add_argument("--no-figures", action="store_true",
                    help="skip PNG rendering")
    return ap


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    def error(exc, code):
        doc = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(doc), file=sys.stderr)
        return code

    if args.subcommand not in SUBCOMMANDS:
        return error(InvalidInputError(f"unknown subcommand {args.subcommand!r}"), 2)
    try:
        cfg = load_config(args.config, args.seed)
        if args.subcommand != "battery":
            cfg.params_for(args.subcommand)
    except (OSError, ValueError, KeyError) as exc:
        return error(exc, 2)

    run = _Run(cfg, args.subcommand, args.out, args.workers, args.fmt,
               not args.no_figures)
    try:
        if args.subcommand == "battery":
            for sub in _BATTERY_ORDER:
                if sub == "chung":
                    continue  # emitted together with lil
                if sub == "lil":
                    _run_limit_checks(run, "lil")
                else:
                    _dispatch(run, sub)
        else:
            _dispatch(run, args.subcommand)
    except GapwalkError as exc:
        return error(exc, 1)

    summary = {
        "artifactVersion": __version__,
        "configHash": run.digest,
        "masterSeed": cfg.seed,
        "subcommand": args.subcommand,
        "verdicts": run.verdicts,
    }
    run.json("verdicts", summary)
    write_manifest(run.out, run.digest, {
        "artifactVersion": __version__,
        "configHash": run.digest,
        "masterSeed": cfg.seed,
        "subcommand": args.subcommand,
        "outputs": sorted(run.outputs),
    })
    for v in run.verdicts:
        print(f"[{v['verdict']:<10}] {v['check']}")
    return 0 if all(v["verdict"] in ("pass", "diagnostic") for v in run.verdicts) else 1


if __name__ == "__main__":
    sys.exit(main())
