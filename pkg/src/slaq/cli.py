"""Command-line interface.

Subcommands::

    slaq bounds     architecture-free revenue bounds for a scenario
    slaq optimize   sweep the load grid with an architecture optimizer
    slaq simulate   cross-check an optimized configuration by simulation
    slaq dsic       exhaustively verify truthfulness of an optimized menu
    slaq reproduce  regenerate the report datasets (CSV, optionally PNG)

Exit codes: 0 success, 2 scenario problems, 3 no feasible
configuration, 4 any other domain error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from typing import Optional

from . import optimizer, scenario as scenario_mod
from .errors import NoFeasibleCandidateError, ScenarioError, SlaqError
from .mechanism import verify_dsic
from .model import zero_value_delay
from .optimizer import (
    OptResult,
    cut_phi0,
    od_max_load,
    od_revenue,
    pbs_upper_bound,
    sms_lower_bound_beta3,
    sweep_load,
)
from .queueing import residual_term, sweep_branch_means
from .simulator import SimConfig, predicted_delays, simulate, validate_formulas

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_NO_FEASIBLE = 3
EXIT_DOMAIN = 4


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--scenario", help="path to a scenario YAML file")
    g.add_argument(
        "--preset",
        choices=scenario_mod.PRESETS,
        default="paper-low",
        help="built-in scenario (default: paper-low)",
    )
    p.add_argument("--L", type=int, help="override the number of SLAs")


def _load_scenario(args) -> scenario_mod.Scenario:
    if args.scenario:
        sc = scenario_mod.load(args.scenario)
    else:
        sc = scenario_mod.preset(args.preset)
    if getattr(args, "L", None):
        if args.L < 1 or args.L > sc.m:
            raise ScenarioError([f"L override {args.L} outside 1..{sc.m}"])
        sc = scenario_mod.Scenario(
            name=sc.name, model=sc.model, population=sc.population,
            dist=sc.dist, m=sc.m, L=args.L, load_grid=sc.load_grid,
        )
    return sc


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get("SLAQ_THREADS", "1")))


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _print_table(header, rows, out=None) -> None:
    out = out or sys.stdout
    cells = [list(map(_fmt, header))] + [[_fmt(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=out)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_bounds(args) -> int:
    sc = _load_scenario(args)
    a = residual_term(sc.dist)
    phi0_hat = zero_value_delay(sc.model, sc.population.alpha_min)
    rows = [
        ("residual_term", a),
        ("od_max_load", od_max_load(sc.model.T, sc.dist)),
        ("od_revenue", od_revenue(sc.m, sc.model, sc.dist)),
        ("priority_shared_upper_bound", pbs_upper_bound(sc.model.T, sc.dist)),
        ("split_module_lower_bound", sms_lower_bound_beta3(sc.model.T, phi0_hat, sc.dist)),
    ]
    if args.out:
        _write_csv(args.out, ("quantity", "value"), rows)
        print(f"wrote {args.out}")
    else:
        _print_table(("quantity", "value"), rows)
    return EXIT_OK


def _result_row(row) -> list:
    """Flatten one sweep row into load, gamma, revenue, menu, structure."""
    if row.result is None:
        return [row.load, None, None, "", "", "", "", "infeasible"]
    r = row.result
    return [
        row.load,
        r.gamma,
        r.revenue,
        " ".join(f"{d:.6g}" for d in r.menu.delays),
        " ".join(f"{p:.6g}" for p in r.menu.prices),
        " ".join(str(c) for c in r.segmentation.interior_cuts),
        _arch_desc(r.architecture),
        "exact" if r.exact else "best-effort",
    ]


def _arch_desc(arch) -> str:
    if arch.kind == "sms":
        return "sms:" + "+".join(map(str, arch.partition))
    if arch.kind == "hybrid":
        return f"hybrid:{arch.m1}+{arch.m2}"
    return f"{arch.kind}:{arch.m}"


_SWEEP_HEADER = (
    "load", "gamma", "revenue", "delays", "prices", "cuts", "architecture", "status",
)


def cmd_optimize(args) -> int:
    sc = _load_scenario(args)
    grid = list(sc.load_grid)
    # the pure on-demand operating point is always worth evaluating (it
    # is the only feasible load for a one-SLA menu on a fresh grid)
    lam_od = od_max_load(sc.model.T, sc.dist)
    if not any(abs(x - lam_od) < 1e-12 for x in grid):
        grid.append(round(lam_od, 12))
        grid.sort()
    if args.load is not None:
        grid = [args.load]
    rows = sweep_load(
        sc.model, sc.population, sc.m, sc.L, sc.dist, grid,
        arch=args.arch, workers=_threads(args), best_effort=args.best_effort,
    )
    table = [_result_row(r) for r in rows]
    if args.out:
        _write_csv(args.out, _SWEEP_HEADER, table)
        print(f"wrote {args.out}")
    else:
        _print_table(_SWEEP_HEADER, table)
    feasible = [r for r in rows if r.result is not None]
    if not feasible:
        print("no feasible configuration at any grid load", file=sys.stderr)
        return EXIT_NO_FEASIBLE
    best = max(feasible, key=lambda r: r.result.revenue)
    print(
        f"best: load={best.load:.4g} gamma={best.result.gamma:.6g} "
        f"revenue={best.result.revenue:.6g} ({_arch_desc(best.result.architecture)})"
    )
    return EXIT_OK


def _optimize_single(sc, arch: str, load: float, threads: int, best_effort: bool) -> OptResult:
    pop = sc.population.with_total_rate(load * sc.m)
    if arch == "sms":
        return optimizer.optimize_sms(
            sc.model, pop, sc.m, sc.L, sc.dist, workers=threads, best_effort=best_effort
        )
    if arch == "pbs":
        return optimizer.optimize_pbs(sc.model, pop, sc.m, sc.L, sc.dist, [load])
    if arch == "hybrid":
        return optimizer.optimize_hybrid(
            sc.model, pop, sc.m, sc.L, sc.dist, [load], best_effort=best_effort
        )
    res = optimizer._evaluate_od(sc.model, pop, sc.m, sc.dist, load)
    if res is None:
        raise NoFeasibleCandidateError(f"on-demand wait exceeds T at load {load}")
    return res


def cmd_simulate(args) -> int:
    sc = _load_scenario(args)
    res = _optimize_single(sc, args.arch, args.load, _threads(args), args.best_effort)
    cfg = SimConfig(
        seed=args.seed,
        warmup_jobs=args.warmup,
        measured_jobs=args.jobs,
        replications=args.reps,
        dispatch=args.dispatch,
    )
    arch = res.architecture
    rates = list(res.rates)
    predicted = predicted_delays(arch, rates, sc.dist)
    if args.validate:
        rep = validate_formulas(arch, rates, sc.dist, cfg, predicted, args.tolerance)
        rows = [
            (l + 1, p, o, d, "ok" if d <= rep.tolerance else "FAIL")
            for l, (p, o, d) in enumerate(
                zip(rep.predicted, rep.observed, rep.relative_deviation)
            )
        ]
        _print_table(("sla", "predicted_wait", "observed_wait", "rel_dev", "status"), rows)
        print(f"validation {'passed' if rep.passed else 'FAILED'} at tolerance {rep.tolerance}")
        return EXIT_OK if rep.passed else EXIT_DOMAIN
    rep = simulate(arch, rates, sc.dist, cfg, trace_path=args.trace)
    rows = [
        (l + 1, predicted[l], c.mean_wait, c.ci_half_width, c.throughput, c.jobs)
        for l, c in enumerate(rep.per_class)
    ]
    _print_table(
        ("sla", "predicted_wait", "mean_wait", "ci95_half_width", "throughput", "jobs"),
        rows,
    )
    print(f"utilization {rep.utilization:.4g} +/- {rep.utilization_ci:.2g}")
    return EXIT_OK


def cmd_dsic(args) -> int:
    sc = _load_scenario(args)
    res = _optimize_single(sc, args.arch, args.load, _threads(args), args.best_effort)
    pop = sc.population
    report = verify_dsic(sc.model, pop, res.menu, seg=res.segmentation)
    print(
        f"menu delays={tuple(round(d, 6) for d in res.menu.delays)} "
        f"prices={tuple(round(p, 6) for p in res.menu.prices)}"
    )
    print(f"checked {report.pairs_checked} (type, report) pairs")
    if report.truthful:
        print("truthful: no profitable misreport exists")
        return EXIT_OK
    print(f"NOT truthful: {len(report.violations)} violations, worst gain {report.worst_violation:.3g}")
    return EXIT_DOMAIN


# ---------------------------------------------------------------------------
# reproduce
# ---------------------------------------------------------------------------

REPORTS = (
    "residual-sweep",
    "bound-sweep",
    "gamma-vs-load",
    "gamma-vs-levels",
    "prices-vs-load",
    "delays-vs-load",
    "config-replay",
)


#: The two-branch service-time sweep: 75% of jobs take the fast branch,
#: whose mean varies over 0.20..0.95; the slow branch mean keeps E[x]=1.
_SWEEP_ETA1 = 0.75
_SWEEP_GRID = tuple(round(0.2 + 0.05 * i, 10) for i in range(16))

#: Reference zero-value delay of the split used in the closed-form
#: revenue guarantee report.
_BOUND_PHI0_HAT = 0.5


def _report_residual_sweep(sc, out, plot, threads):
    """Residual-work constant across the two-branch service sweep."""
    rows = [(m1, residual_term(sweep_branch_means(_SWEEP_ETA1, m1))) for m1 in _SWEEP_GRID]
    path = os.path.join(out, "residual_sweep.csv")
    _write_csv(path, ("branch_mean1", "residual_term"), rows)
    if plot:
        line_plot = _plotting().line_plot
        line_plot(
            [r[0] for r in rows], {"A": [r[1] for r in rows]},
            "first branch mean", "residual-work constant A",
            os.path.join(out, "residual_sweep.png"),
        )
    return [path]


def _report_bound_sweep(sc, out, plot, threads):
    """Split-module revenue guarantee across the same service sweep."""
    rows = []
    for m1 in _SWEEP_GRID:
        dist = sweep_branch_means(_SWEEP_ETA1, m1)
        rows.append((m1, sms_lower_bound_beta3(sc.model.T, _BOUND_PHI0_HAT, dist)))
    path = os.path.join(out, "bound_sweep.csv")
    _write_csv(path, ("branch_mean1", "revenue_ratio_lower_bound"), rows)
    if plot:
        _plotting().line_plot(
            [r[0] for r in rows], {"lower bound": [r[1] for r in rows]},
            "first branch mean", "revenue ratio lower bound",
            os.path.join(out, "bound_sweep.png"),
        )
    return [path]


def _sweep(sc, L, threads, best_effort=False, arch="sms"):
    return sweep_load(
        sc.model, sc.population, sc.m, L, sc.dist, sc.load_grid,
        arch=arch, workers=threads, best_effort=best_effort,
    )


def _report_gamma_vs_load(sc, out, plot, threads):
    """Revenue ratio versus load for each architecture at the scenario's L."""
    archs = ["sms", "pbs", "hybrid"] if sc.L >= 2 else ["sms", "pbs"]
    series = {}
    for arch in archs:
        series[arch] = _sweep(sc, sc.L, threads, arch=arch)
    loads = list(sc.load_grid)
    rows = [
        [load] + [series[a][i].gamma for a in archs]
        for i, load in enumerate(loads)
    ]
    path = os.path.join(out, "gamma_vs_load.csv")
    _write_csv(path, ["load"] + [f"gamma_{a}" for a in archs], rows)
    if plot:
        _plotting().line_plot(
            loads, {a: [series[a][i].gamma for i in range(len(loads))] for a in archs},
            "per-server load", "revenue ratio",
            os.path.join(out, "gamma_vs_load.png"),
        )
    return [path]


def _report_gamma_vs_levels(sc, out, plot, threads, l_max=3):
    """Best revenue ratio over the load grid as the SLA count grows."""
    rows = []
    for L in range(1, min(l_max, sc.m) + 1):
        grid = list(sc.load_grid)
        lam_od = od_max_load(sc.model.T, sc.dist)
        if L == 1 and not any(abs(x - lam_od) < 1e-12 for x in grid):
            grid = sorted(grid + [round(lam_od, 12)])
        sweep = sweep_load(
            sc.model, sc.population, sc.m, L, sc.dist, grid,
            arch="sms", workers=threads, best_effort=(L >= 4),
        )
        feas = [r for r in sweep if r.result is not None]
        if feas:
            best = max(feas, key=lambda r: r.result.revenue)
            rows.append((L, best.result.gamma, best.load,
                         "exact" if best.result.exact else "best-effort"))
        else:
            rows.append((L, None, None, "infeasible"))
    path = os.path.join(out, "gamma_vs_levels.csv")
    _write_csv(path, ("L", "best_gamma", "argmax_load", "status"), rows)
    if plot:
        _plotting().bar_plot(
            [r[0] for r in rows], [r[1] or 0.0 for r in rows],
            "number of SLAs", "best revenue ratio",
            os.path.join(out, "gamma_vs_levels.png"),
        )
    return [path]


def _report_prices_vs_load(sc, out, plot, threads):
    """Optimal SLA prices along the load grid (split-module, scenario L)."""
    sweep = _sweep(sc, sc.L, threads)
    loads = list(sc.load_grid)
    rows = []
    for r in sweep:
        prices = list(r.result.menu.prices) if r.result else [None] * sc.L
        rows.append([r.load] + prices)
    path = os.path.join(out, "prices_vs_load.csv")
    _write_csv(path, ["load"] + [f"price_{l}" for l in range(1, sc.L + 1)], rows)
    if plot:
        _plotting().line_plot(
            loads,
            {f"SLA {l}": [row[l] for row in rows] for l in range(1, sc.L + 1)},
            "per-server load", "price",
            os.path.join(out, "prices_vs_load.png"),
        )
    return [path]


def _report_delays_vs_load(sc, out, plot, threads):
    """Optimal SLA delays and threshold zero-value delays along the grid."""
    sweep = _sweep(sc, sc.L, threads)
    loads = list(sc.load_grid)
    rows = []
    for r in sweep:
        if r.result:
            delays = list(r.result.menu.delays)
            phi0 = cut_phi0(sc.model, sc.population, r.result.segmentation)
        else:
            delays = [None] * sc.L
            phi0 = [None] * sc.L
        rows.append([r.load] + delays + phi0)
    header = (
        ["load"]
        + [f"delay_{l}" for l in range(1, sc.L + 1)]
        + [f"cut_phi0_{l}" for l in range(1, sc.L + 1)]
    )
    path = os.path.join(out, "delays_vs_load.csv")
    _write_csv(path, header, rows)
    if plot:
        series = {f"SLA {l} delay": [row[l] for row in rows] for l in range(1, sc.L + 1)}
        series.update(
            {f"SLA {l} cut phi0": [row[sc.L + l] for row in rows] for l in range(1, sc.L + 1)}
        )
        _plotting().line_plot(
            loads, series, "per-server load", "delay",
            os.path.join(out, "delays_vs_load.png"),
        )
    return [path]


#: Hand-picked four-SLA configurations used as fixed regression points:
#: a split-module system and a hybrid one on the dense type grid.
_REPLAY_SMS = {"partition": (21, 24, 28, 27), "cuts": (5, 12, 26), "total_rate": 12.0}
_REPLAY_HYBRID = {"m1": 51, "cuts": (13, 19, 30), "total_rate": 10.0}


def _report_config_replay(sc, out, plot, threads):
    """Evaluate the two pinned four-SLA configurations exactly."""
    sc4 = scenario_mod.preset("paper-low")
    model, dist, m = sc4.model, sc4.dist, sc4.m
    pop_s = sc4.population.with_total_rate(_REPLAY_SMS["total_rate"])
    r_s = optimizer.evaluate_sms(
        model, pop_s, _REPLAY_SMS["partition"], _REPLAY_SMS["cuts"], dist
    )
    pop_h = sc4.population.with_total_rate(_REPLAY_HYBRID["total_rate"])
    r_h = optimizer.evaluate_hybrid(
        model, pop_h, _REPLAY_HYBRID["m1"], m - _REPLAY_HYBRID["m1"],
        _REPLAY_HYBRID["cuts"], dist,
    )
    if not (isinstance(r_s, OptResult) and isinstance(r_h, OptResult)):
        raise NoFeasibleCandidateError("a pinned replay configuration became infeasible")
    rows = []
    for name, r in (("split-module", r_s), ("hybrid", r_h)):
        rows.append(
            (
                name, _arch_desc(r.architecture),
                " ".join(str(c) for c in r.segmentation.interior_cuts),
                r.revenue, r.gamma,
            )
        )
    rows.append(("hybrid/split-module revenue ratio", "", "", r_h.revenue / r_s.revenue, ""))
    path = os.path.join(out, "config_replay.csv")
    _write_csv(path, ("configuration", "architecture", "cuts", "revenue", "gamma"), rows)
    return [path]


def _plotting():
    from . import plotting

    return plotting


_REPORT_FNS = {
    "residual-sweep": _report_residual_sweep,
    "bound-sweep": _report_bound_sweep,
    "gamma-vs-load": _report_gamma_vs_load,
    "gamma-vs-levels": _report_gamma_vs_levels,
    "prices-vs-load": _report_prices_vs_load,
    "delays-vs-load": _report_delays_vs_load,
    "config-replay": _report_config_replay,
}


def cmd_reproduce(args) -> int:
    sc = _load_scenario(args)
    os.makedirs(args.out, exist_ok=True)
    t0 = time.time()
    written = []
    for name in args.only or REPORTS:
        written.extend(_REPORT_FNS[name](sc, args.out, args.plot, _threads(args)))
        print(f"[{time.time() - t0:7.1f}s] {name} done")
    summary = {
        "scenario": sc.name,
        "scenario_sha256": _scenario_digest(args),
        "m": sc.m,
        "L": sc.L,
        "reports": [os.path.basename(p) for p in written],
        "wall_time_s": round(time.time() - t0, 2),
    }
    spath = os.path.join(args.out, "summary.json")
    with open(spath, "w") as fh:
        json.dump(summary, fh, indent=2)
    print(f"wrote {spath}")
    return EXIT_OK


def _scenario_digest(args) -> Optional[str]:
    if args.scenario:
        with open(args.scenario, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()
    return hashlib.sha256(args.preset.encode()).hexdigest()


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slaq", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, load_default=None):
        _add_scenario_args(sp)
        sp.add_argument("--threads", type=int, default=None,
                        help="worker processes (default: env SLAQ_THREADS or 1)")
        sp.add_argument("--best-effort", action="store_true",
                        help="local search instead of exhaustive enumeration")
        if load_default is not False:
            sp.add_argument("--load", type=float, default=load_default,
                            help="per-server load (overrides the scenario grid)")

    sp = sub.add_parser("bounds", help="architecture-free revenue bounds")
    _add_scenario_args(sp)
    sp.add_argument("--out", help="write CSV here instead of printing")
    sp.set_defaults(fn=cmd_bounds)

    sp = sub.add_parser("optimize", help="sweep the load grid")
    common(sp)
    sp.add_argument("--arch", choices=("sms", "pbs", "hybrid", "od"), default="sms")
    sp.add_argument("--out", help="write the sweep CSV here")
    sp.set_defaults(fn=cmd_optimize)

    sp = sub.add_parser("simulate", help="simulate an optimized configuration")
    common(sp, load_default=0.1)
    sp.add_argument("--arch", choices=("sms", "pbs", "hybrid", "od"), default="sms")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--warmup", type=int, default=20_000, help="warmup jobs per replication")
    sp.add_argument("--jobs", type=int, default=100_000, help="measured jobs per replication")
    sp.add_argument("--reps", type=int, default=5, help="independent replications")
    sp.add_argument("--dispatch", choices=("random", "round_robin"), default="random")
    sp.add_argument("--validate", action="store_true",
                    help="compare against the closed-form waits and set the exit code")
    sp.add_argument("--tolerance", type=float, default=0.03)
    sp.add_argument("--trace", help="write replication 0's per-job trace CSV here")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("dsic", help="verify truthfulness of an optimized menu")
    common(sp, load_default=0.1)
    sp.add_argument("--arch", choices=("sms", "pbs", "hybrid", "od"), default="sms")
    sp.set_defaults(fn=cmd_dsic)

    sp = sub.add_parser("reproduce", help="regenerate the report datasets")
    common(sp, load_default=False)
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--plot", action="store_true", help="render a PNG next to each CSV")
    sp.add_argument("--only", nargs="+", choices=REPORTS, help="subset of reports")
    sp.set_defaults(fn=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as exc:
        for problem in exc.problems:
            print(f"scenario error: {problem}", file=sys.stderr)
        return EXIT_SCENARIO
    except NoFeasibleCandidateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_FEASIBLE
    except SlaqError as exc:
        print(f"error ({exc.category}): {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
