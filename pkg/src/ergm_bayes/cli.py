"""Command-line entry point.

Every subcommand reads an optional flat ``key = value`` config (``--config``),
applies command-line overrides, validates everything against the dataset
and model, then writes its artifacts plus ``resolved_config.txt`` into
``--out``.  When no seed is given one is drawn and echoed, so every run can
be repeated exactly.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .classical import mcmle, mple, simulate_reference_stats
from .diagnostics import autocorrelation, summarize
from .exchange import ExchangeConfig, Prior, degeneracy_monitor, run_exchange
from .gof import bayesian_gof
from .population import PopulationConfig, run_population
from .sampler import SamplerConfig, as_rng, stats_trace
from .statistics import ModelSpec


class ConfigError(ValueError):
    pass


def _add(p, *names, **kw):
    kw.setdefault("default", argparse.SUPPRESS)
    p.add_argument(*names, **kw)


def _common(p):
    _add(p, "--seed", type=int, help="master seed (drawn and echoed when omitted)")
    _add(p, "--out", help="output directory (default: out)")
    _add(p, "--config", help="flat key = value config file")


def _data_model(p):
    _add(p, "--dataset", help="bundled dataset name or edge-list path")
    _add(p, "--model", help="terms, e.g. 'edges + kstar2' or 'edges + gwesp(0.8)'")


def _prior(p):
    _add(p, "--prior-mean", help="prior mean, one value or one per term")
    _add(p, "--prior-variance", type=float, help="prior variance per term (default 30)")


def _aux(p):
    _add(p, "--aux-iterations", type=int, help="sampler proposals per auxiliary draw (default 1000)")
    _add(p, "--proposal", choices=["tnt", "uniform"], help="dyad proposal (default tnt)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergm-bayes", description="Bayesian and classical ERGM estimation")
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the graph sampler at a fixed theta")
    _common(p), _data_model(p), _aux(p)
    _add(p, "--theta", help="parameter vector")
    _add(p, "--iterations", type=int, help="sampler proposals (default 10000)")
    _add(p, "--record-every", type=int, help="record statistics every k proposals (default 1)")

    p = sub.add_parser("mple", help="maximum pseudolikelihood estimate")
    _common(p), _data_model(p)

    p = sub.add_parser("mcmle", help="Monte Carlo maximum likelihood estimate")
    _common(p), _data_model(p), _aux(p)
    _add(p, "--theta0", help="reference parameter (default: the MPLE)")
    _add(p, "--m", type=int, help="number of simulated graphs (default 1000)")

    p = sub.add_parser("exchange", help="single-site exchange algorithm")
    _common(p), _data_model(p), _prior(p), _aux(p)
    _add(p, "--main-iterations", type=int, help="sweeps (default 30000)")
    _add(p, "--proposal-sd", help="random-walk sd per term")
    _add(p, "--proposal-variance", help="random-walk variance per term (alternative to --proposal-sd)")
    _add(p, "--init", help="starting theta (default zeros)")
    _add(p, "--burn-in", type=float, help="fraction discarded from summaries (default 0.1)")
    _add(p, "--keep-aux-stats", action="store_const", const=True, help="write aux_stats.csv")
    _add(p, "--max-lag", type=int, help="largest lag in acf.csv (default 500)")

    p = sub.add_parser("pop-exchange", help="population exchange with ADS moves")
    _common(p), _data_model(p), _prior(p), _aux(p)
    _add(p, "--chains", type=int, help="number of chains H (default 2 x terms)")
    _add(p, "--gamma", type=float, help="ADS scale (default 1)")
    _add(p, "--epsilon-variance", type=float, help="variance of the ADS noise per term (default 0.1)")
    _add(p, "--iterations-per-chain", type=int, help="iterations per chain, warmup included (default 6000)")
    _add(p, "--warmup", type=int, help="block-update iterations (default 20%%)")
    _add(p, "--init-sd", type=float, help="sd of the starting points around the prior mean (default 3)")
    _add(p, "--keep-aux-stats", action="store_const", const=True, help="write aux_stats.csv")
    _add(p, "--max-lag", type=int, help="largest lag in acf.csv (default 500)")

    p = sub.add_parser("gof", help="posterior-predictive goodness of fit")
    _common(p), _data_model(p), _aux(p)
    _add(p, "--draws", help="draws.csv from exchange or pop-exchange")
    _add(p, "--burn-in", type=float, help="fraction of each chain discarded (default 0.1)")
    _add(p, "--gof-count", type=int, help="number of simulated graphs (default 100)")

    p = sub.add_parser("fetch-data", help="write the benchmark networks to --out")
    _common(p)
    p.add_argument("--source", help="directory with edge-list copies of networks that are not bundled")

    p = sub.add_parser("summarize", help="summaries and ACF of an existing draws.csv")
    _common(p)
    _add(p, "--draws", help="draws.csv to summarize")
    _add(p, "--burn-in", type=float, help="fraction of each chain discarded (default 0.1)")
    _add(p, "--max-lag", type=int, help="largest lag in acf.csv (default 500)")

    p = sub.add_parser("convert", help="adjacency-matrix CSV to edge list")
    p.add_argument("input", help="CSV adjacency matrix")
    p.add_argument("output", help="edge-list file to write")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--directed", dest="directed", action="store_const", const=True, default=None)
    g.add_argument("--undirected", dest="directed", action="store_const", const=False)
    return parser


# helpers ---------------------------------------------------------------------

def _vector(values, d: int, name: str, default=None) -> np.ndarray:
    if values is None:
        if default is None:
            raise ConfigError(f"{name} is required")
        return np.broadcast_to(np.asarray(default, dtype=float), (d,)).copy()
    v = np.asarray(values, dtype=float)
    if v.size == 1:
        v = np.full(d, float(v[0]))
    if v.size != d:
        raise ConfigError(f"{name} needs {d} values, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ConfigError(f"{name} must be finite")
    return v


def _positive(value, name):
    if value is None or value <= 0:
        raise ConfigError(f"{name} must be positive")


def _setup(cfg: io.RunConfig):
    if cfg.dataset is None:
        raise ConfigError("dataset is required")
    if cfg.model is None:
        raise ConfigError("model is required")
    try:
        g = io.resolve_graph(cfg.dataset)
        spec = ModelSpec.parse(cfg.model, directed=g.directed)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        raise ConfigError(str(exc)) from exc
    return g, spec


def _prior_from(cfg, d) -> Prior:
    _positive(cfg.prior_variance, "prior_variance")
    return Prior(_vector(cfg.prior_mean, d, "prior_mean", 0.0), cfg.prior_variance * np.eye(d))


def _aux_from(cfg) -> SamplerConfig:
    _positive(cfg.aux_iterations, "aux_iterations")
    try:
        return SamplerConfig(cfg.aux_iterations, cfg.proposal)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _acf_rows(chains, labels, max_lag):
    for c, draws in enumerate(chains, start=1):
        lag = min(max_lag, draws.shape[0] - 1)
        for k, lab in enumerate(labels):
            for t, v in enumerate(autocorrelation(draws[:, k], lag)):
                yield [str(c), lab, str(t), v]


def _summary_block(chains, labels, burn_in, acceptance=None):
    return summarize(chains, burn_in, labels, acceptance).as_dict()


# commands --------------------------------------------------------------------

def cmd_simulate(cfg, out):
    g, spec = _setup(cfg)
    theta = _vector(cfg.theta, spec.dim, "theta")
    _positive(cfg.iterations, "iterations")
    _positive(cfg.record_every, "record_every")
    scfg = SamplerConfig(cfg.iterations, cfg.proposal, record_stats_every=cfg.record_every)
    trace = stats_trace(theta, spec, g, scfg, as_rng(seed=cfg.seed))
    every = cfg.record_every
    io.write_matrix(out / "stats.csv", ["iteration", *spec.labels],
                    ([str((t + 1) * every), *row] for t, row in enumerate(trace)))
    return {"labels": spec.labels, "recorded": int(trace.shape[0]),
            "mean_stats": trace.mean(axis=0) if trace.size else None}


def cmd_mple(cfg, out):
    g, spec = _setup(cfg)
    fit = mple(g, spec)
    return {"labels": spec.labels, **fit.as_dict()}


def cmd_mcmle(cfg, out):
    g, spec = _setup(cfg)
    if cfg.m is None or cfg.m < 2:
        raise ConfigError("m must be at least 2")
    aux = _aux_from(cfg)
    theta0 = mple(g, spec).estimate if cfg.theta0 is None else _vector(cfg.theta0, spec.dim, "theta0")
    sample = simulate_reference_stats(g, spec, theta0, cfg.m, aux, as_rng(seed=cfg.seed))
    fit = mcmle(g, spec, theta0, sample_stats=sample)
    io.write_matrix(out / "aux_stats.csv", ["draw", *spec.labels],
                    ([str(i + 1), *row] for i, row in enumerate(sample)))
    return {"labels": spec.labels, "theta0": theta0, **fit.as_dict()}


def cmd_exchange(cfg, out):
    g, spec = _setup(cfg)
    d = spec.dim
    prior = _prior_from(cfg, d)
    aux = _aux_from(cfg)
    if cfg.proposal_sd is not None and cfg.proposal_variance is not None:
        raise ConfigError("give proposal_sd or proposal_variance, not both")
    if cfg.proposal_variance is not None:
        var = _vector(cfg.proposal_variance, d, "proposal_variance")
        if np.any(var <= 0):
            raise ConfigError("proposal_variance must be positive")
        sd = np.sqrt(var)
    else:
        sd = _vector(cfg.proposal_sd, d, "proposal_sd", 1.0)
    if not 0 <= cfg.burn_in < 1:
        raise ConfigError("burn_in must be in [0, 1)")
    _positive(cfg.main_iterations, "main_iterations")
    try:
        ecfg = ExchangeConfig(cfg.main_iterations, aux, sd, _vector(cfg.init, d, "init", 0.0),
                              cfg.seed, cfg.keep_aux_stats)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    res = run_exchange(g, spec, prior, ecfg)
    io.write_draws(out / "draws.csv", [res.draws], spec.labels)
    io.write_matrix(out / "acf.csv", ["chain", "parameter", "lag", "acf"],
                    _acf_rows([res.draws[int(cfg.burn_in * res.draws.shape[0]):]], spec.labels, cfg.max_lag))
    summary = {
        "algorithm": "exchange",
        "labels": spec.labels,
        "burn_in": cfg.burn_in,
        "acceptance_per_parameter": res.acceptance,
        "acceptance": res.overall_acceptance,
        **_summary_block([res], spec.labels, cfg.burn_in),
    }
    if res.aux_stats is not None:
        io.write_matrix(out / "aux_stats.csv", ["proposal", "accepted", *spec.labels],
                        ([str(i + 1), str(int(a)), *row]
                         for i, (row, a) in enumerate(zip(res.aux_stats, res.aux_accepted))))
        if "edges" in [t.kind for t in spec.terms]:
            summary["degeneracy"] = degeneracy_monitor(res.aux_stats, g.n, res.aux_accepted, g.directed,
                                                       spec.index("edges")).as_dict()
    return summary


def cmd_pop(cfg, out):
    g, spec = _setup(cfg)
    d = spec.dim
    prior = _prior_from(cfg, d)
    aux = _aux_from(cfg)
    _positive(cfg.epsilon_variance, "epsilon_variance")
    try:
        pcfg = PopulationConfig(prior, cfg.chains, cfg.gamma, cfg.epsilon_variance, cfg.iterations_per_chain,
                                cfg.warmup, aux, init_sd=cfg.init_sd, seed=cfg.seed,
                                keep_aux_stats=cfg.keep_aux_stats)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    res = run_population(g, spec, pcfg)
    chains = [c.draws for c in res.chains]
    io.write_draws(out / "draws.csv", chains, spec.labels, start=pcfg.warmup + 1)
    io.write_matrix(out / "acf.csv", ["chain", "parameter", "lag", "acf"],
                    _acf_rows(chains, spec.labels, cfg.max_lag))
    summary = {
        "algorithm": "pop-exchange",
        "labels": spec.labels,
        "chains_count": pcfg.H,
        "gamma": pcfg.gamma,
        "warmup": pcfg.warmup,
        "acceptance": res.overall_acceptance,
        **_summary_block(res.chains, spec.labels, 0.0),
    }
    if cfg.keep_aux_stats:
        rows = []
        for h, c in enumerate(res.chains, start=1):
            for i, (row, a) in enumerate(zip(c.aux_stats, c.aux_accepted)):
                rows.append([str(h), str(pcfg.warmup + i + 1), str(int(a)), *row])
        io.write_matrix(out / "aux_stats.csv", ["chain", "iteration", "accepted", *spec.labels], rows)
    return summary


def cmd_gof(cfg, out):
    g, spec = _setup(cfg)
    aux = _aux_from(cfg)
    if cfg.draws is None:
        raise ConfigError("draws is required")
    if not 0 <= cfg.burn_in < 1:
        raise ConfigError("burn_in must be in [0, 1)")
    labels, chains = io.read_draws(cfg.draws)
    if len(labels) != spec.dim:
        raise ConfigError(f"draws have {len(labels)} parameters, model has {spec.dim}")
    pooled = np.vstack([c[int(cfg.burn_in * c.shape[0]):] for c in chains.values()])
    if cfg.gof_count > pooled.shape[0]:
        raise ConfigError(f"gof_count {cfg.gof_count} exceeds the {pooled.shape[0]} available draws")
    rep = bayesian_gof(g, spec, pooled, cfg.gof_count, aux, cfg.seed)
    io.write_matrix(out / "gof.csv", ["family", "bin", "observed", "p5", "p50", "p95"],
                    ([name, b, *vals] for name, b, *vals in rep.rows()))
    return {"labels": spec.labels, "count": cfg.gof_count, "coverage": rep.coverage()}


def cmd_summarize(cfg, out):
    if cfg.draws is None:
        raise ConfigError("draws is required")
    labels, chains = io.read_draws(cfg.draws)
    mats = list(chains.values())
    io.write_matrix(out / "acf.csv", ["chain", "parameter", "lag", "acf"],
                    _acf_rows([m[int(cfg.burn_in * m.shape[0]):] for m in mats], labels, cfg.max_lag))
    return {"labels": labels, "burn_in": cfg.burn_in, **_summary_block(mats, labels, cfg.burn_in)}


COMMANDS = {
    "simulate": cmd_simulate,
    "mple": cmd_mple,
    "mcmle": cmd_mcmle,
    "exchange": cmd_exchange,
    "pop-exchange": cmd_pop,
    "gof": cmd_gof,
    "summarize": cmd_summarize,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")

    if command == "convert":
        try:
            g = io.adjacency_csv_to_graph(ns["input"], ns["directed"])
            io.save_graph(g, ns["output"])
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(f"wrote {ns['output']}: {g!r}")
        return 0

    cfg = io.RunConfig()
    try:
        if "config" in ns:
            cfg = io.RunConfig.from_file(ns.pop("config"))
        source = ns.pop("source", None)
        cfg.update(ns)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.algorithm not in (None, command):
        print(f"error: config is for {cfg.algorithm!r}, not {command!r}", file=sys.stderr)
        return 2
    cfg.algorithm = command
    if cfg.seed is None:
        cfg.seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0] >> 1)
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output directory {out} is not writable: {exc}", file=sys.stderr)
        return 2

    if command == "fetch-data":
        try:
            status = io.fetch_datasets(out, source)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        for name, st in status.items():
            print(f"{name}: {st}")
        return 0

    t0 = time.perf_counter()
    try:
        result = COMMANDS[command](cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result["seed"] = cfg.seed
    result["wall_clock_seconds"] = time.perf_counter() - t0
    (out / "resolved_config.txt").write_text(cfg.to_text(), encoding="utf-8", newline="\n")
    name = "fit.json" if command in ("mple", "mcmle") else "summary.json"
    io.write_json(out / name, result)
    _report(command, result)
    return 0


def _report(command, result):
    labels = result.get("labels", [])
    if "estimate" in result:
        se = result.get("std_errors") or [float("nan")] * len(labels)
        for lab, e, s in zip(labels, result["estimate"], se):
            print(f"{lab:>14} {e:>10.4f} {s:>10.4f}")
        print(f"converged: {result['converged']}")
    elif "overall" in result:
        o = result["overall"]
        for lab, m, s in zip(labels, o["mean"], o["sd"]):
            print(f"{lab:>14} mean {m:>9.4f} sd {s:>8.4f}")
        if "acceptance" in result:
            print(f"acceptance: {result['acceptance']:.3f}")
    elif "coverage" in result:
        print(f"band coverage: {result['coverage']:.3f}")
    print(f"seed: {result['seed']}")


if __name__ == "__main__":
    sys.exit(main())
