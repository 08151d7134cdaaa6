"""Command-line front end: ``compols <problem> <action> ...``.

Exit codes: 0 success, 1 invalid input or missing file, 2 infeasible
instance or unwritable output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import eac, learning, okp, oracles, osc, otp, ski
from .core import (DensityBounds, InfeasibleError, InvalidInputError, OkpInstance, RateInstance,
                   load_instance, save_instance, seeded_rng)

log = logging.getLogger("compols")

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2


class OutputError(Exception):
    """Raised when an output path cannot be written."""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; this tool reserves 2 for infeasibility
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class ExperimentConfig:
    problem: str
    params: tuple
    instance_file: str | None = None
    generator_seed: int | None = None
    out: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        if (self.instance_file is None) == (self.generator_seed is None):
            raise InvalidInputError("give exactly one instance source: a file or a generator seed")


# --- output ------------------------------------------------------------------

def fmt_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        s = f"{x:.12g}"
        if "e" not in s and "." not in s and "n" not in s:
            s += ".0"
        return s
    return str(x)


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if not math.isfinite(x) else float(f"{x:.12g}")
    if isinstance(x, np.integer):
        return int(x)
    return x


def render(header, rows, fmt: str = "csv") -> str:
    if fmt == "json":
        objs = [{h: _json_value(v) for h, v in zip(header, r)} for r in rows]
        return json.dumps(objs, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt_value(v) for v in r])
    return buf.getvalue()


def emit_curve(header, rows, path=None, fmt: str = "csv") -> None:
    """Write ``header`` + ``rows`` to ``path`` (stdout when None)."""
    rows = list(rows)
    if not rows:
        raise InvalidInputError("nothing to emit: empty series")
    text = render(header, rows, fmt)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None


def read_curve(path) -> tuple[list[str], list[list[float]]]:
    """Parse an emitted CSV back into floats (used for round-trip checks)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def _plot(args, fn, *a, **kw):
    if args.no_plot or not getattr(args, "out", None) or args.out == "-":
        return
    from . import plotting
    try:
        fn(plotting.figure_path(args.out), *a, **kw)
    except OSError as exc:
        raise OutputError(f"cannot write figure: {exc}") from None


def _print_scalar(x):
    print(fmt_value(x))


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise InvalidInputError(f"expected comma-separated numbers, got {text!r}") from None


def _range(text: str) -> list[float]:
    """lo:hi:n, log-spaced when both ends are positive."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise InvalidInputError(f"expected lo:hi:n, got {text!r}") from None
    if n < 1 or hi < lo:
        raise InvalidInputError(f"bad range {text!r}")
    if n == 1:
        return [lo]
    return list(np.geomspace(lo, hi, n)) if lo > 0 else list(np.linspace(lo, hi, n))


def _load(path, kind=None):
    try:
        inst = load_instance(path)
    except FileNotFoundError:
        raise InvalidInputError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from None
    if kind is not None and not isinstance(inst, kind):
        raise InvalidInputError(f"{path} holds a {type(inst).__name__}, expected {kind.__name__}")
    return inst


def _pool_map(fn, items, jobs):
    items = list(items)
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# --- ski ---------------------------------------------------------------------

def cmd_ski_df(args):
    _print_scalar(ski.ski_df(args.p, args.b))


def cmd_ski_class(args):
    c = ski.ski_phi_class(args.p, args.phi)
    emit_curve(("lo", "hi", "df_lo", "df_hi", "baseline"),
               [(int(c.lo), int(c.hi), c.df_lo, c.df_hi, int(c.baseline))], args.out, args.format)


def cmd_ski_curve(args):
    rows = ski.ski_curve(args.p, args.b_max_factor)
    emit_curve(("b_over_p", "df"), rows, args.out, args.format)
    from . import plotting
    _plot(args, plotting.line_plot, ("b/p", "DF"), rows, title=f"ski rental, p={args.p}",
          ylabel="degradation factor")


# --- okp ---------------------------------------------------------------------

def cmd_okp_run(args):
    inst = _load(args.instance, OkpInstance)
    r = okp.okp_run(okp.ThresholdCurve(inst.bounds, args.alpha), inst)
    admitted = sum(d == okp.ADMIT for d in r.decisions)
    emit_curve(("alg_value", "opt_value", "ratio", "admitted", "items", "final_z"),
               [(r.alg_value, r.opt_value, r.ratio, admitted, len(inst.items), r.final_state.z)],
               args.out, args.format)


def cmd_okp_df(args):
    _print_scalar(okp.okp_df(args.gamma, args.alpha))


def cmd_okp_class(args):
    c = okp.okp_phi_class(args.gamma, args.phi)
    emit_curve(("alpha_lo", "alpha_hi", "df_lo", "df_hi", "open_at_zero", "lambert_alpha_lo",
                "lambert_branch"),
               [(c.lo, c.hi, c.df_lo, c.df_hi, bool(c.extra.get("open_at_zero", False)),
                 c.extra.get("lambert_alpha_low", float("nan")), c.extra.get("lambert_branch", ""))],
               args.out, args.format)


def cmd_okp_worstcase(args):
    bounds = DensityBounds.from_gamma(args.gamma)
    inst = okp.okp_worst_case(bounds, args.alpha, args.cap)
    if args.out:
        try:
            save_instance(inst, args.out)
        except OSError as exc:
            raise OutputError(f"cannot write {args.out}: {exc.strerror or exc}") from None
    r = okp.okp_run(okp.ThresholdCurve(bounds, args.alpha), inst)
    print(render(("items", "ratio", "predicted"),
                 [(len(inst.items), r.ratio, okp.okp_cr(args.gamma, args.alpha))], "csv"), end="")


def cmd_okp_curve(args):
    from . import plotting
    gammas = _floats(args.gamma)
    if args.kind == "df":
        alphas = _floats(args.alphas) if args.alphas else list(np.geomspace(0.05, 10, 121))
        rows = okp.df_table(gammas, alphas)
        header = ("alpha", *(f"df_gamma_{g:g}" for g in gammas))
        emit_curve(header, rows, args.out, args.format)
        _plot(args, plotting.line_plot, header, rows, title="OKP degradation factor",
              ylabel="DF", logx=True)
    elif args.kind == "threshold":
        alphas = _floats(args.alphas or "0.5,1,2")
        rows = okp.threshold_table(gammas[0], alphas)
        header = ("z", *(f"psi_alpha_{a:g}" for a in alphas))
        emit_curve(header, rows, args.out, args.format)
        _plot(args, plotting.line_plot, header, rows,
              title=f"threshold functions, gamma={gammas[0]:g}", ylabel="marginal cost")
    else:
        alphas = _floats(args.alphas or "0.1,0.5,2,10")
        gs = _floats(args.gammas) if args.gammas else list(np.geomspace(2, 1e4, 81))
        rows = okp.df_gamma_table(alphas, gs)
        header = ("gamma", *(f"df_alpha_{a:g}" for a in alphas))
        emit_curve(header, rows, args.out, args.format)
        _plot(args, plotting.line_plot, header, rows, title="DF against gamma", ylabel="DF",
              logx=True, logy=True)


# --- otp ---------------------------------------------------------------------

def cmd_otp_reward(args):
    inst = _load(args.instance, RateInstance)
    curve = okp.ThresholdCurve(inst.bounds, args.alpha)
    closed = otp.otp_reward_closed_form(inst, args.alpha)
    simulated, _ = otp.otp_simulate(curve, inst.rates)
    best = max(inst.rates) if inst.rates else 0.0
    emit_curve(("reward_closed_form", "reward_simulated", "opt_value", "ratio"),
               [(closed, simulated, best, best / simulated if simulated > 0 else math.inf)],
               args.out, args.format)


def cmd_otp_segments(args):
    inst = _load(args.instance, RateInstance)
    emit_curve(("kind", "alpha_from", "alpha_to", "const", "coef_over_alpha"),
               otp.segments_table(inst), args.out, args.format)


# --- osc ---------------------------------------------------------------------

def cmd_osc_run(args):
    inst = _load(args.instance, osc.OscInstance)
    r = osc.osc_run(inst.system, inst.arrivals, args.theta, args.seed, opt=args.opt)
    kind = next(v for k, v in r.final_state.events if k == "opt_kind")
    derand = sum(1 for k, _ in r.final_state.events if k == "derandomized")
    emit_curve(("cost", "opt_value", "opt_kind", "ratio", "derandomized_steps", "cr_bound"),
               [(r.alg_value, r.opt_value, kind, r.ratio, derand,
                 osc.osc_cr(max(inst.system.n, 2), max(inst.system.m, 2), args.theta))],
               args.out, args.format)


def cmd_osc_df(args):
    _print_scalar(osc.osc_df(args.m, args.theta))


def cmd_osc_curve(args):
    from . import plotting
    ms = [int(x) for x in _floats(args.m)]
    thetas = _floats(args.thetas) if args.thetas else list(np.linspace(1.1, 8.0, 139))
    rows = osc.df_table(ms, thetas)
    header = ("theta", *(f"df_m_{m}" for m in ms))
    emit_curve(header, rows, args.out, args.format)
    _plot(args, plotting.line_plot, header, rows, title="OSC degradation factor", ylabel="DF")


def _scenario_cost(job):
    kind, n, m, a, theta, seed = job
    system, arrivals = osc.osc_scenario_generator(kind, n, m, a, seed)
    return osc.osc_run(system, arrivals, theta, seed, opt=1.0).alg_value


def scenario_costs(thetas, seeds, n=120, m=3200, arrivals=80, jobs=1) -> dict:
    """Mean cost per (scenario, theta) over ``seeds``."""
    out = {}
    for kind in ("high_overlap", "low_overlap"):
        for th in thetas:
            costs = _pool_map(_scenario_cost, [(kind, n, m, arrivals, th, s) for s in seeds], jobs)
            out[(kind, th)] = (float(np.mean(costs)), float(np.std(costs)))
    return out


def cmd_osc_scenarios(args):
    from . import plotting
    outdir = Path(args.out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {outdir}: {exc.strerror or exc}") from None
    thetas = _floats(args.thetas)
    seeds = range(args.seed, args.seed + args.seeds)
    res = scenario_costs(thetas, seeds, args.n, args.m, args.arrivals, args.jobs)
    rows = []
    groups = {}
    for kind in ("high_overlap", "low_overlap"):
        norm = min(res[(kind, th)][0] for th in thetas)
        for th in thetas:
            mean, std = res[(kind, th)]
            rows.append((kind, th, mean, std, mean / norm))
            groups.setdefault(kind, {})[f"theta={th:g}"] = mean / norm
    path = outdir / f"scenarios.{args.format}"
    emit_curve(("scenario", "theta", "mean_cost", "std_cost", "normalized_cost"), rows, path,
               args.format)
    if not args.no_plot:
        plotting.bar_plot(outdir / "scenarios.png", groups, title="OSC cost by scenario",
                          ylabel="cost / best theta")
    print(path)


# --- eac ---------------------------------------------------------------------

def _value_model(args):
    return eac.ValueModel(a=args.a, b=args.b)


def _trace_days(args) -> tuple[list[eac.EacInstance], dict]:
    """Per-day instances from --trace or from synthetic days."""
    if bool(args.trace) == bool(args.synthetic_days):
        raise InvalidInputError("give exactly one of --trace or --synthetic-days")
    if args.synthetic_days:
        bounds = DensityBounds(args.L or 1.0, args.U or 20.0)
        rng = seeded_rng(args.seed)
        days = [eac.synthetic_day(bounds, rng, slots=args.slots) for _ in range(args.synthetic_days)]
        return days, {"skipped": 0, "clipped": 0}
    if args.slots < 1 or 24 % args.slots and args.slots % 24:
        raise InvalidInputError("--slots must divide a day evenly")
    slot_hours = 24.0 / args.slots
    model = _value_model(args)
    try:
        res = eac.ingest_ev_csv(args.trace, model, slot_hours, args.capacity_kwh)
    except FileNotFoundError:
        raise InvalidInputError(f"file not found: {args.trace}") from None
    if not res.requests:
        return [], {"skipped": res.skipped, "clipped": 0}
    dens = np.array([r.density for r in res.requests])
    # default bounds span the bulk of the estimated densities
    L = args.L or float(np.quantile(dens, 0.02))
    U = args.U or float(np.quantile(dens, 0.98))
    if not U > L:
        U = L * 2.0
    bounds = DensityBounds(L, U)
    clipped = 0
    reqs = []
    for r in res.requests:
        v, was = eac.clip_value(r.value, r.energy, bounds)
        clipped += was
        reqs.append(eac.EvRequest(r.arrival, r.departure, r.energy, v))
    cap = max(r.energy for r in reqs)
    days = [eac.EacInstance(bounds, tuple(d), args.slots, cap)
            for d in eac.split_days(reqs, args.slots)]
    return days, {"skipped": res.skipped, "clipped": clipped}


def _eac_day(job):
    inst, alphas, chunk = job
    opt = oracles.eac_fractional_opt(inst.requests, inst.horizon).value
    out = []
    for a in alphas:
        r = eac.eac_run_instance(okp.ThresholdCurve(inst.bounds, a), inst, chunk, opt_value=opt)
        admitted = sum(d == eac.ADMIT for d in r.decisions)
        out.append((a, len(inst.requests), admitted, r.alg_value, r.opt_value, r.ratio))
    return out


def cmd_eac_run(args):
    days, info = _trace_days(args)
    if info["skipped"] or info["clipped"]:
        log.warning("trace: %d rows skipped, %d values clipped", info["skipped"], info["clipped"])
    results = _pool_map(_eac_day, [(d, [args.alpha], args.chunk) for d in days], args.jobs)
    rows = [(k, *res[0][1:]) for k, res in enumerate(results)]
    if not rows:
        raise InvalidInputError("trace contains no usable requests")
    emit_curve(("day", "requests", "admitted", "alg_value", "opt_value", "ratio"), rows,
               args.out, args.format)


def cmd_eac_sweep(args):
    from . import plotting
    alphas = _range(args.alphas)
    days, _ = _trace_days(args)
    if not days:
        raise InvalidInputError("trace contains no usable requests")
    results = _pool_map(_eac_day, [(d, alphas, args.chunk) for d in days], args.jobs)
    per_alpha = {a: sorted(res[j][5] for res in results) for j, a in enumerate(alphas)}
    rows = []
    for a in alphas:
        vals = per_alpha[a]
        for k, v in enumerate(vals):
            rows.append((a, v, (k + 1) / len(vals)))
    emit_curve(("alpha", "ratio", "cdf"), rows, args.out, args.format)
    _plot(args, plotting.cdf_plot, {f"alpha={a:.3g}": per_alpha[a] for a in alphas},
          title="EV admission: empirical profit ratio")


def cmd_eac_synth(args):
    rows = eac.synthetic_trace(args.days, args.seed, args.sessions)
    if args.out in (None, "-"):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(eac.TRACE_COLUMNS)
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
        return
    try:
        eac.write_trace_csv(rows, args.out)
    except OSError as exc:
        raise OutputError(f"cannot write {args.out}: {exc.strerror or exc}") from None


# --- oracle ------------------------------------------------------------------

def cmd_oracle(args):
    inst = _load(args.instance)
    rows = []
    if args.problem == "okp":
        if not isinstance(inst, OkpInstance):
            raise InvalidInputError("okp oracle needs an okp instance")
        rows.append(("fractional_knapsack", *_oracle_row(oracles.fractional_knapsack(inst))))
        try:
            rows.append(("knapsack_dp", *_oracle_row(oracles.knapsack_dp(inst, args.resolution))))
        except InvalidInputError as exc:
            log.warning("knapsack_dp skipped: %s", exc)
    elif args.problem == "osc":
        if not isinstance(inst, osc.OscInstance):
            raise InvalidInputError("osc oracle needs an osc instance")
        targets = set(inst.arrivals)
        rows.append(("set_cover_greedy", *_oracle_row(oracles.set_cover_greedy(inst.system, targets))))
        if inst.system.m <= args.exact_limit:
            rows.append(("set_cover_exact", *_oracle_row(oracles.set_cover_exact(inst.system, targets))))
    elif args.problem == "eac":
        if not isinstance(inst, eac.EacInstance):
            raise InvalidInputError("eac oracle needs an eac instance")
        rows.append(("eac_fractional_opt",
                     *_oracle_row(oracles.eac_fractional_opt(inst.requests, inst.horizon))))
        rows.append(("eac_greedy", *_oracle_row(oracles.eac_greedy(inst.requests, inst.horizon))))
        if len(inst.requests) <= 12:
            rows.append(("eac_exhaustive",
                         *_oracle_row(oracles.eac_exhaustive(inst.requests, inst.horizon))))
    elif args.problem == "otp":
        if not isinstance(inst, RateInstance):
            raise InvalidInputError("otp oracle needs a rate instance")
        rows.append(("sell_at_best_rate", max(inst.rates) if inst.rates else 0.0, "exact"))
    emit_curve(("oracle", "value", "kind"), rows, args.out, args.format)


def _oracle_row(res):
    return res.value, res.kind


# --- learning ----------------------------------------------------------------

def cmd_learn(args):
    from . import plotting
    adapter = learning.get_adapter(args.problem)
    grid = learning.ParameterGrid.from_interval(adapter.interval(args.phi), args.K)
    instances = adapter.stream(args.rounds, args.seed, args.regime)
    run = learning.run_learning(adapter, instances, grid, args.learner, args.seed,
                                eta=args.eta, jobs=args.jobs)
    rows = run.table()
    header = ("round", "chosen_param", "reward", "best_fixed_avg", "regret")
    emit_curve(header, rows, args.out, args.format)
    if rows:
        t = np.arange(1, len(rows) + 1)
        avg = np.cumsum(run.played_rewards) / t
        _plot(args, plotting.grouped_line_plot,
              {"average reward": (t, avg), "best fixed average": (t, [r[3] for r in rows]),
               "regret / round": (t, run.regret / t)},
              title=f"{args.learner} on {args.problem}, phi={args.phi:g}", xlabel="round")


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--no-plot", action="store_true", help="skip the PNG next to --out")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="compols", parents=[common],
                description="Parametric competitive online algorithms and their policy classes.")
    sub = p.add_subparsers(dest="problem", parser_class=_Parser)

    def add(parent, name, fn, help_=None):
        q = parent.add_parser(name, parents=[common], help=help_)
        q.set_defaults(fn=fn)
        return q

    def out(q, required=False):
        q.add_argument("--out", required=required, help="output path ('-' or omitted: stdout)")

    s = sub.add_parser("ski", help="ski rental").add_subparsers(dest="action", parser_class=_Parser)
    q = add(s, "df", cmd_ski_df)
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--b", type=int, required=True)
    q = add(s, "class", cmd_ski_class)
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--phi", type=float, required=True)
    out(q)
    q = add(s, "curve", cmd_ski_curve)
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--b-max-factor", type=float, default=4.0)
    out(q)

    s = sub.add_parser("okp", help="online knapsack").add_subparsers(dest="action", parser_class=_Parser)
    q = add(s, "run", cmd_okp_run)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--instance", required=True)
    out(q)
    q = add(s, "df", cmd_okp_df)
    q.add_argument("--gamma", type=float, required=True)
    q.add_argument("--alpha", type=float, required=True)
    q = add(s, "class", cmd_okp_class)
    q.add_argument("--gamma", type=float, required=True)
    q.add_argument("--phi", type=float, required=True)
    out(q)
    q = add(s, "worstcase", cmd_okp_worstcase)
    q.add_argument("--gamma", type=float, required=True)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--cap", type=float, default=1e-4)
    out(q)
    q = add(s, "curve", cmd_okp_curve)
    q.add_argument("--gamma", default="20", help="one value, or a comma list for --kind df")
    q.add_argument("--kind", choices=("df", "threshold", "gamma"), default="df")
    q.add_argument("--alphas", help="comma list of alpha values")
    q.add_argument("--gammas", help="comma list of gamma values for --kind gamma")
    out(q)

    s = sub.add_parser("otp", help="one-way trading").add_subparsers(dest="action", parser_class=_Parser)
    q = add(s, "reward", cmd_otp_reward)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--instance", required=True)
    out(q)
    q = add(s, "segments", cmd_otp_segments)
    q.add_argument("--instance", required=True)
    out(q)

    s = sub.add_parser("osc", help="online set cover").add_subparsers(dest="action", parser_class=_Parser)
    q = add(s, "run", cmd_osc_run)
    q.add_argument("--theta", type=float, required=True)
    q.add_argument("--instance", required=True)
    q.add_argument("--opt", choices=("auto", "exact", "greedy"), default="auto")
    out(q)
    q = add(s, "df", cmd_osc_df)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--theta", type=float, required=True)
    q = add(s, "curve", cmd_osc_curve)
    q.add_argument("--m", default="100,1000,100000", help="comma list of family sizes")
    q.add_argument("--thetas", help="comma list of theta values")
    out(q)
    q = add(s, "scenarios", cmd_osc_scenarios)
    q.add_argument("--out", required=True, help="output directory")
    q.add_argument("--seeds", type=int, default=20)
    q.add_argument("--thetas", default="2,3,4")
    q.add_argument("--n", type=int, default=120)
    q.add_argument("--m", type=int, default=3200)
    q.add_argument("--arrivals", type=int, default=80)

    s = sub.add_parser("eac", help="EV admission control").add_subparsers(dest="action", parser_class=_Parser)

    def eac_source(q):
        q.add_argument("--trace", help="CSV with arrival_ts, departure_ts, energy_kwh")
        q.add_argument("--synthetic-days", type=int, help="use generated days instead of a trace")
        q.add_argument("--slots", type=int, default=24, help="slots per day")
        q.add_argument("--chunk", type=float, default=None, help="water-filling piece size")
        q.add_argument("--capacity-kwh", type=float, default=30.0, help="station energy per slot")
        q.add_argument("--a", type=float, default=0.72, help="value model price scale")
        q.add_argument("--b", type=float, default=2.0, help="value model demand weight")
        q.add_argument("--L", type=float, default=None, help="density lower bound")
        q.add_argument("--U", type=float, default=None, help="density upper bound")
        out(q)

    q = add(s, "run", cmd_eac_run)
    q.add_argument("--alpha", type=float, required=True)
    eac_source(q)
    q = add(s, "sweep", cmd_eac_sweep)
    q.add_argument("--alphas", required=True, help="lo:hi:n")
    eac_source(q)
    q = add(s, "synth", cmd_eac_synth)
    q.add_argument("--days", type=int, required=True)
    q.add_argument("--sessions", type=int, default=60, help="sessions per day")
    out(q)

    q = sub.add_parser("oracle", parents=[common], help="offline optimum of an instance file")
    q.set_defaults(fn=cmd_oracle, action="oracle")
    q.add_argument("problem_kind", metavar="problem", choices=("okp", "osc", "eac", "otp"))
    q.add_argument("--instance", required=True)
    q.add_argument("--resolution", type=float, default=1e-4)
    q.add_argument("--exact-limit", type=int, default=60)
    out(q)

    q = sub.add_parser("learn", parents=[common], help="learn a parameter over an instance stream")
    q.set_defaults(fn=cmd_learn, action="learn")
    q.add_argument("--problem", dest="learn_problem", choices=sorted(learning.ADAPTERS), required=True)
    q.add_argument("--phi", type=float, required=True)
    q.add_argument("--learner", choices=("hedge", "exp3", "prevbest"), default="hedge")
    q.add_argument("--rounds", type=int, default=200)
    q.add_argument("--K", type=int, default=21)
    q.add_argument("--eta", type=float, default=None)
    q.add_argument("--regime", choices=learning.STREAM_REGIMES, default="stationary")
    out(q)
    return p


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "fn", None):
            parser.print_help(sys.stderr)
            return EXIT_INVALID
        # the oracle and learn subcommands keep their problem in a separate field
        if args.fn is cmd_oracle:
            args.problem = args.problem_kind
        if args.fn is cmd_learn:
            args.problem = args.learn_problem
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        if args.jobs < 1:
            raise InvalidInputError("--jobs must be >= 1")
        args.fn(args)
        return EXIT_OK
    except UsageError as exc:
        print(f"compols: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InvalidInputError, FileNotFoundError) as exc:
        print(f"compols: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InfeasibleError, OutputError) as exc:
        print(f"compols: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
