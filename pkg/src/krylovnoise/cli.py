"""Command-line front end.

Each subcommand prints ``key=value`` lines on stdout and writes any tabular
artifacts as CSV files in the working directory. Failures print a single
``error=<code> message=<text>`` line on stderr and exit with 2 (usage or
validation), 3 (bad data) or 4 (numerical failure).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import dist, model, simulate, stats, trace
from .dist import JohnsonSU, Uniform
from .errors import ConfigError, DegenerateSample, KrylovNoiseError
from .rng import make_rng
from .trace import Method

# coefficient that reproduces a KS threshold of 0.024 at n = m = 5000
LOOSE_KS_C = 1.20


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error=usage message={message}", file=sys.stderr)
        sys.exit(2)


def _emit(out, key, value):
    if isinstance(value, float):
        value = format(value, ".17g")
    print(f"{key}={value}", file=out)


def _rel(est, ref):
    return (est - ref) / ref


def _fit_hyper(series, seed):
    try:
        return dist.fit_johnson_su(series, seed=seed).spec
    except DegenerateSample:
        return None


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else repr(v) for v in row) + "\n")


# -- fit ---------------------------------------------------------------------------------


def cmd_fit(args, out):
    tr = trace.filter_fill(trace.read_trace(args.trace_path))
    stem = Path(args.trace_path).stem
    _emit(out, "iterations", tr.K)
    _emit(out, "P", tr.P)
    if args.per_iteration:
        fits = trace.per_iteration_uniform_fits(tr)
        csv_path = Path(f"{stem}.iterfits.csv")
        _write_csv(csv_path, ("iter", "a", "s"), ((k, float(a), float(s)) for k, (a, s) in enumerate(zip(fits.a, fits.s))))
        _emit(out, "fits_csv", csv_path)
        for name, series in (("a_dist", fits.a), ("s_dist", fits.s)):
            spec = _fit_hyper(series, args.seed)
            _emit(out, name, "degenerate" if spec is None else dist.format_spec(spec))
        return 0

    values = tr.times.ravel()
    if args.family == "uniform":
        spec = dist.fit_uniform(values)
    else:
        fit = dist.fit_johnson_su(values, seed=args.seed)
        spec = fit.spec
        _emit(out, "loglik", fit.loglik)
    bins = args.bins if args.bins is not None else dist.fd_bins(values)
    density, edges = dist.histogram(values, bins)
    hist_path = Path(f"{stem}.hist.csv")
    _write_csv(hist_path, ("bin_left", "bin_right", "density"),
               ((float(lo), float(hi), float(d)) for lo, hi, d in zip(edges[:-1], edges[1:], density)))
    _emit(out, "spec", dist.format_spec(spec))
    _emit(out, "bins", bins)
    _emit(out, "sse", dist.goodness_sse(spec, values, bins))
    _emit(out, "hist_csv", hist_path)
    return 0


# -- ks ----------------------------------------------------------------------------------


def cmd_ks(args, out):
    stats.c_alpha(args.alpha)
    tr = trace.read_trace(args.trace_path)
    results = stats.rank_ks_tests(tr, args.reference_rank, args.alpha)
    csv_path = Path(f"{Path(args.trace_path).stem}.ks.csv")
    _write_csv(csv_path, ("rank", "d", "reject"),
               ((p, r.d, str(int(r.reject))) for p, r in results.items()))
    first = next(iter(results.values()))
    rate = sum(r.reject for r in results.values()) / len(results)
    _emit(out, "reference_rank", args.reference_rank)
    _emit(out, "alpha", args.alpha)
    _emit(out, "c_alpha", stats.c_alpha(args.alpha))
    _emit(out, "threshold", first.threshold)
    _emit(out, "max_d", max(r.d for r in results.values()))
    _emit(out, "rejection_rate", rate)
    _emit(out, "ks_csv", csv_path)
    return 0


# -- predict -----------------------------------------------------------------------------


def _sniff(path: Path) -> str:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip().replace(" ", "")
    if first == "rank,iteration,seconds":
        return "trace"
    if first == "iter,a,s":
        return "fits"
    return "config"


def _read_fits(path: Path) -> trace.IterationFit:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if data.shape[0] == 0 or data.shape[1] != 3:
        raise ConfigError(f"{path}: expected iter,a,s rows")
    return trace.IterationFit(data[:, 1], data[:, 2])


def _mixture_moments(fits: trace.IterationFit):
    mu_k = fits.a + fits.s / 2.0
    mu = float(np.mean(mu_k))
    second = float(np.mean(fits.s**2 / 12.0 + mu_k**2))
    return mu, math.sqrt(max(second - mu * mu, 0.0))


def _hyper_from_config(kv):
    try:
        return simulate.HyperModel(dist.parse_spec(kv["a_dist"]), dist.parse_spec(kv["s_dist"]))
    except KeyError as exc:
        raise ConfigError(f"config is missing {exc.args[0]}") from None


def _point_mass_limit(spec):
    # scale -> 0 collapses Johnson S_U onto loc
    if isinstance(spec, JohnsonSU):
        return Uniform(spec.loc, 0.0)
    return spec


def cmd_predict(args, out):
    path = Path(args.input)
    kind = _sniff(path)
    measured = None
    reference = None
    fits = None
    bulk = None
    hyper = None
    mode = Method(args.mode) if args.mode else None
    pe = args.pe

    if kind == "trace":
        tr = trace.read_trace(path)
        mode = mode or tr.meta.method
        measured = tr.meta.solve_seconds
        tr = trace.filter_fill(tr)
        pe = pe or tr.meta.n_nodes
        fits = trace.per_iteration_uniform_fits(tr)
        bulk = tr.times.ravel()
        K = tr.K
    elif kind == "fits":
        fits = _read_fits(path)
        K = len(fits)
    else:
        kv = trace.parse_kv(path.read_text(encoding="utf-8"))
        if "a_dist" not in kv:
            raise ConfigError(f"{path}: not a trace, fits file or hyper-model config")
        hyper = _hyper_from_config(kv)
        try:
            K = int(kv["K"])
            if pe is None and "pe" in kv:
                pe = int(kv["pe"])
            elif pe is None and "P" in kv:
                pe = trace.effective_process_count(int(kv["P"]), int(kv.get("cores_per_node", 1)))
            if mode is None and "method" in kv:
                mode = Method(kv["method"])
            reference = float(kv["reference_seconds"]) if "reference_seconds" in kv else None
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad hyper-model config: {exc}") from None
    mode = mode or Method.BARRIER
    if pe is None:
        raise ConfigError("effective process count unknown; pass --pe")
    if args.model != "hyper" and hyper is not None:
        raise ConfigError("a hyper-model config only supports --model hyper")

    _emit(out, "model", args.model)
    _emit(out, "mode", mode.value)
    _emit(out, "K", K)
    _emit(out, "pe", pe)

    barrier = mode is Method.BARRIER
    if args.model == "nonstationary":
        specs = fits.specs()
        est = (model.nonstationary_barrier_total(specs, pe) if barrier
               else model.nonstationary_pipelined_total(specs))
        seconds = est.seconds
    elif args.model == "stationary":
        if bulk is not None:
            fit = dist.fit_johnson_su(bulk, seed=args.seed)
            spec = fit.spec
            bounds = (float(bulk.min()), float(bulk.max()))
        else:
            spec = Uniform(float(np.mean(fits.a)), float(np.mean(fits.s)))
            bounds = None
        _emit(out, "spec", dist.format_spec(spec))
        est = (model.stationary_barrier_total(spec, K, pe, bounds=bounds) if barrier
               else model.stationary_pipelined_total(spec, K))
        seconds = est.seconds
    else:
        if hyper is None:
            a_spec = dist.fit_johnson_su(fits.a, seed=args.seed).spec
            s_spec = dist.fit_johnson_su(fits.s, seed=args.seed).spec
            hyper = simulate.HyperModel(a_spec, s_spec)
        _emit(out, "a_dist", dist.format_spec(hyper.a_dist))
        _emit(out, "s_dist", dist.format_spec(hyper.s_dist))
        config = simulate.SimConfig(K=K, P=pe, source=hyper, mode=mode, seed=args.seed)
        result = simulate.mc_predict(config, args.replicates)
        seconds = result.total_seconds
        _emit(out, "replicates", args.replicates)
        _emit(out, "seed", args.seed)
        _emit(out, "std", result.std)
        _emit(out, "clamped_spans", result.clamped_spans)
        limit = simulate.HyperModel(_point_mass_limit(hyper.a_dist), _point_mass_limit(hyper.s_dist))
        limit_result = simulate.mc_predict(
            simulate.SimConfig(K=K, P=pe, source=limit, mode=mode, seed=args.seed), 1
        )
        _emit(out, "seconds_point_mass_limit", limit_result.total_seconds)

    _emit(out, "seconds", seconds)
    if measured is not None:
        _emit(out, "measured_seconds", measured)
        _emit(out, "rel_error", _rel(seconds, measured))
    if reference is not None:
        _emit(out, "reference_seconds", reference)
        _emit(out, "rel_deviation", _rel(seconds, reference))

    if args.bounds:
        if bulk is not None:
            mu, sigma = float(np.mean(bulk)), float(np.std(bulk, ddof=1))
        elif fits is not None:
            mu, sigma = _mixture_moments(fits)
        else:
            mu = sigma = None
        if mu is None:
            _emit(out, "bounds", "unavailable")
        else:
            _emit(out, "bulk_mean", mu)
            _emit(out, "bulk_std", sigma)
            _emit(out, "cramer_seconds", K * model.cramer_bound(mu, sigma, pe))
            _emit(out, "bertsimas_seconds", K * model.bertsimas_bound(mu, sigma, pe))
    return 0


# -- simulate ----------------------------------------------------------------------------


def cmd_simulate(args, out):
    kv = trace.parse_kv(Path(args.config).read_text(encoding="utf-8"))
    try:
        K = int(kv["K"])
        seed = int(kv.get("seed", 0))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad simulate config: {exc}") from None
    meta = trace.meta_from_mapping(kv)
    clamped = 0
    if "spec" in kv:
        specs = [dist.parse_spec(kv["spec"])] * K
    elif "a_dist" in kv:
        hyper = _hyper_from_config(kv)
        a, s, clamped = simulate.draw_iteration_params(hyper, K, make_rng(seed, 0))
        specs = [Uniform(float(ak), float(sk)) for ak, sk in zip(a, s)]
    else:
        raise ConfigError("simulate config needs spec= or a_dist=/s_dist=")
    tr = simulate.synth_trace(specs, meta.P, make_rng(seed, 1), meta)
    trace.write_trace(tr, args.emit_trace)
    _emit(out, "K", tr.K)
    _emit(out, "P", tr.P)
    _emit(out, "seed", seed)
    _emit(out, "clamped_spans", clamped)
    _emit(out, "barrier_seconds", simulate.eval_barrier(tr))
    _emit(out, "pipeline_seconds", simulate.eval_pipeline(tr))
    _emit(out, "trace", args.emit_trace)
    _emit(out, "meta", trace.meta_path(args.emit_trace))
    return 0


# -- report ------------------------------------------------------------------------------


def cmd_report(args, out):
    raw = trace.read_trace(args.trace_path)
    meta = raw.meta
    layout = meta.cycle
    tr = trace.filter_fill(raw)
    pe = tr.meta.n_nodes
    _emit(out, "platform", meta.platform)
    _emit(out, "method", meta.method.value)
    _emit(out, "P", meta.P)
    _emit(out, "pe", pe)
    _emit(out, "K_total", raw.K)
    _emit(out, "K_retained", tr.K)

    if layout.fill:
        mask = trace.fill_mask(raw.K, layout)
        row_means = raw.times.mean(axis=1)
        cycle = np.arange(raw.K) // layout.length
        ok = True
        for c in np.unique(cycle):
            sel = cycle == c
            removed, kept = row_means[sel & mask], row_means[sel & ~mask]
            if removed.size and kept.size and removed.max() > kept.min():
                ok = False
                break
        _emit(out, "fill_iterations_shortest", str(ok).lower())

    # mid-cycle iteration of the second cycle
    k_mid = layout.length + layout.fill + layout.restart // 2 - 1
    if k_mid < raw.K:
        _emit(out, "mid_cycle_iteration", k_mid)
        _emit(out, "node0_variance", stats.node_variance(raw, 0, k_mid))
        if meta.n_nodes > 1:
            _emit(out, "cross_node_variance", float(np.var(stats.node_means(raw, k_mid))))

    if raw.P >= 2:
        _emit(out, "ks_threshold", stats.ks_threshold(raw.K, raw.K, args.alpha))
        _emit(out, "ks_rejection_rate", stats.pairwise_rejection_rate(raw, args.reference_rank, args.alpha))
        _emit(out, "ks_threshold_loose_c", stats.ks_threshold(raw.K, raw.K, args.alpha, LOOSE_KS_C))
        _emit(out, "ks_rejection_rate_loose_c",
              stats.pairwise_rejection_rate(raw, args.reference_rank, args.alpha, LOOSE_KS_C))

    fits = trace.per_iteration_uniform_fits(tr)
    specs = fits.specs()
    bulk = tr.times.ravel()
    estimates = {
        "eval_barrier_seconds": simulate.eval_barrier(tr),
        "eval_pipeline_seconds": simulate.eval_pipeline(tr),
        "nonstationary_barrier_pe_seconds": model.nonstationary_barrier_total(specs, pe).seconds,
        "nonstationary_barrier_P_seconds": model.nonstationary_barrier_total(specs, tr.P).seconds,
        "nonstationary_pipelined_seconds": model.nonstationary_pipelined_total(specs).seconds,
    }
    try:
        fit = dist.fit_johnson_su(bulk, seed=args.seed).spec
    except KrylovNoiseError:
        fit = None
    if fit is not None:
        bounds = (float(bulk.min()), float(bulk.max()))
        _emit(out, "bulk_spec", dist.format_spec(fit))
        estimates["stationary_barrier_seconds"] = model.stationary_barrier_total(fit, tr.K, pe, bounds=bounds).seconds
        estimates["stationary_pipelined_seconds"] = model.stationary_pipelined_total(fit, tr.K).seconds
    mu, sigma = float(np.mean(bulk)), float(np.std(bulk, ddof=1))
    estimates["cramer_seconds"] = tr.K * model.cramer_bound(mu, sigma, pe)
    estimates["bertsimas_seconds"] = tr.K * model.bertsimas_bound(mu, sigma, pe)
    for key, value in estimates.items():
        _emit(out, key, value)
    if meta.solve_seconds is not None:
        _emit(out, "measured_seconds", meta.solve_seconds)
        for key, value in estimates.items():
            _emit(out, key.replace("_seconds", "_rel_error"), _rel(value, meta.solve_seconds))
    return 0


# -- entry point -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="krylovnoise", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("fit", help="fit per-iteration uniforms or a bulk distribution")
    f.add_argument("trace_path")
    g = f.add_mutually_exclusive_group(required=True)
    g.add_argument("--per-iteration", action="store_true")
    g.add_argument("--bulk", action="store_true")
    f.add_argument("--family", choices=("johnsonsu", "uniform"), default="johnsonsu")
    f.add_argument("--bins", type=int, default=None)
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=cmd_fit)

    k = sub.add_parser("ks", help="two-sample KS test of every rank against a reference rank")
    k.add_argument("trace_path")
    k.add_argument("--reference-rank", type=int, default=0)
    k.add_argument("--alpha", type=float, default=0.05)
    k.set_defaults(func=cmd_ks)

    pr = sub.add_parser("predict", help="expected total runtime from a trace, fits or hyper-model")
    pr.add_argument("input")
    pr.add_argument("--mode", choices=("barrier", "pipelined"), default=None)
    pr.add_argument("--pe", type=int, default=None)
    pr.add_argument("--model", choices=("stationary", "nonstationary", "hyper"), default="nonstationary")
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--replicates", type=int, default=32)
    pr.add_argument("--bounds", action="store_true")
    pr.set_defaults(func=cmd_predict)

    s = sub.add_parser("simulate", help="write a synthetic trace and its exact totals")
    s.add_argument("--config", required=True)
    s.add_argument("--emit-trace", required=True)
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="full analysis of one trace")
    r.add_argument("trace_path")
    r.add_argument("--reference-rank", type=int, default=0)
    r.add_argument("--alpha", type=float, default=0.05)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except KrylovNoiseError as exc:
        message = " ".join(str(exc).split())
        print(f"error={exc.code} message={message}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error=file_not_found message={exc.filename}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error=io_error message={exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
