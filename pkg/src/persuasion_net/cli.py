"""Command-line interface.

Subcommands: limits, sample, simulate, optimize, compare, scenario,
selftest.  Every run validates its config, writes the resolved config next
to the outputs, and is bit-reproducible for a fixed (config, seed)
regardless of the thread count.

Exit codes: 0 success, 1 validation error, 2 assertion or verdict failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .components import decompose
from .config import ConfigError, RunConfig, load_config
from .diffusion import simulate_payoff
from .limits import check_condition_a1, compute_d_vote, compute_limits
from .model import H, L, TYPE_INDEX
from .netgen import dump_network, empirical_stats, sample_network
from .optimizer import compare as run_compare
from .optimizer import optimize_network, optimize_public
from .scenarios import SCENARIOS, HypothesisError, scenario_sceptics
from .serialize import dump_json, write_csv


def _engine_limits(cfg: RunConfig):
    e = cfg.engine
    return compute_limits(cfg.model, tail_cutoff=e.tail_cutoff, tol=e.tol,
                          max_iter=e.max_iter, d_max_floor=e.d_max_floor)


def _write_resolved(cfg: RunConfig, out: Path) -> None:
    dump_json(cfg.to_dict(), out / "config.resolved.json")


def _limits_outputs(cfg: RunConfig, out: Path) -> None:
    limits = _engine_limits(cfg)
    rows = []
    for t in (H, L):
        ti = TYPE_INDEX[t]
        dist = limits.p(t)
        fwd = limits.fwd_h if t == H else limits.fwd_l
        for d in range(limits.d_max + 1):
            fwd_p = fwd.probs[d] if fwd is not None and d < len(fwd.probs) else None
            rows.append((t, d, dist.probs[d], fwd_p,
                         limits.zeta[ti, d], limits.zeta_hat[ti, d]))
    write_csv(out / "limits.csv",
              ["type", "d", "p_d", "forward_p_d", "zeta", "zeta_hat"], rows)
    a1 = check_condition_a1(cfg.model, limits)
    d_vote = compute_d_vote(cfg.model, limits)
    dump_json({
        "q_h": limits.q_h, "q_l": limits.q_l,
        "c": limits.c, "c_hat": limits.c_hat,
        "d_vote": None if math.isinf(d_vote) else int(d_vote),
        "condition_a1": {"holds": a1.holds, "offending": a1.offending,
                         "excluded": a1.excluded},
        "d_max": limits.d_max,
        "degenerate": limits.degenerate,
    }, out / "limits.json")


def _sample_outputs(cfg: RunConfig, out: Path, dump: bool) -> None:
    e = cfg.engine
    net = sample_network(cfg.model, e.n, e.rng().child("sample"),
                         edge_budget=e.edge_budget)
    stats = empirical_stats(net)
    decomp = decompose(net)
    dump_json({
        "n": net.n,
        "edges": net.edge_count,
        "mean_degree": float(net.degree.mean()),
        "l1_fraction": decomp.full.l1_size() / net.n,
        "l2_fraction": decomp.full.l2_size() / net.n,
        "lhat1_fraction": decomp.believer.l1_size() / net.n,
        "same_type_fraction": {t: stats.same_type_fraction[t] for t in (H, L)},
        "degree_hist": {t: stats.degree_hist[t] for t in (H, L)},
        "missing_types": list(stats.missing_types),
        "kernel_backend": _kernels.BACKEND,
    }, out / "sample.json")
    if dump:
        dump_network(net, out / "network.edges", out / "network.nodes")


def _simulate_outputs(cfg: RunConfig, out: Path) -> int:
    if cfg.strategy is None:
        raise ConfigError("simulate requires a strategy section in the config")
    e = cfg.engine
    limits = _engine_limits(cfg)
    report = simulate_payoff(cfg.model, cfg.strategy, n=e.n, reps=e.reps,
                             rng=e.rng(), pilot_reps=e.pilot_reps,
                             d_max=limits.d_max, limits=limits,
                             edge_budget=e.edge_budget, threads=e.threads)
    write_csv(out / "sim.csv",
              ["rep", "state", "signal", "n_observed", "fraction_action1",
               "payoff", "payoff_expected"],
              [(r.rep, r.state, r.signal, r.n_observed, r.fraction_action1,
                r.payoff, r.payoff_expected) for r in report.rows])
    rows = []
    for si, sig in enumerate(cfg.strategy.signals):
        for t in (H, L):
            ti = TYPE_INDEX[t]
            for d in range(report.obs_fractions.shape[2]):
                emp = report.obs_fractions[si, ti, d]
                pred = (report.predictions[si, ti, d]
                        if report.predictions is not None else None)
                rows.append((t, d, sig.label,
                             None if np.isnan(emp) else float(emp), pred))
    write_csv(out / "obsfrac.csv",
              ["type", "d", "signal", "empirical_fraction", "zeta_prediction"],
              rows)
    dump_json({
        "mean_payoff": report.mean_payoff, "se_payoff": report.se_payoff,
        "mean_expected_payoff": report.mean_expected_payoff,
        "se_expected_payoff": report.se_expected_payoff,
        "n": report.n, "reps": report.reps, "pilot_reps": report.pilot_reps,
    }, out / "simulate.json")
    return 0


def _report_dict(rep) -> dict:
    return {
        "value": rep.value,
        "strategy": {"pi_s1": rep.strategy.pi_s1, "pi_s0": rep.strategy.pi_s0,
                     "pi_sp1": rep.strategy.pi_sp1, "pi_sp0": rep.strategy.pi_sp0},
        "regime": rep.regime,
        "value_restricted": rep.value_restricted,
        "value_full": rep.value_full,
        "search_gap": rep.gap,
        "empty_actions": rep.empty_actions,
        "tail_error_bound": rep.tail_error_bound,
        "closed_form": rep.closed_form,
        "flags": list(rep.flags),
        "condition_a1": (None if rep.condition_a1 is None else
                         {"holds": rep.condition_a1.holds,
                          "offending": rep.condition_a1.offending,
                          "excluded": rep.condition_a1.excluded}),
    }


def _optimize_outputs(cfg: RunConfig, out: Path, mode: str) -> None:
    e = cfg.engine
    limits = _engine_limits(cfg)
    doc = {}
    if mode in ("network", "both"):
        doc["network"] = _report_dict(optimize_network(
            cfg.model, limits, grid_n=e.grid_n, refine_iters=e.refine_iters))
    if mode in ("public", "both"):
        doc["public"] = _report_dict(optimize_public(
            cfg.model, limits, grid_n=e.grid_n, refine_iters=e.refine_iters))
    dump_json(doc, out / "optimum.json")


def _compare_outputs(cfg: RunConfig, out: Path) -> None:
    e = cfg.engine
    limits = _engine_limits(cfg)
    rep = run_compare(cfg.model, limits, grid_n=e.grid_n,
                      refine_iters=e.refine_iters)
    dump_json({
        "network": _report_dict(rep.v_net),
        "public": _report_dict(rep.v_pub),
        "gap": rep.gap,
        "hypotheses": rep.hypotheses,
        "verdicts": rep.verdicts,
    }, out / "compare.json")


def _scenario_outputs(cfg: RunConfig, out: Path, name: str) -> int:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; "
                          f"choose from {sorted(SCENARIOS)}")
    e = cfg.engine
    if name == "sceptics":
        result = scenario_sceptics(cfg.model, rng=e.rng(), n=e.n, reps=e.reps,
                                   pilot_reps=e.pilot_reps, grid_n=e.grid_n,
                                   edge_budget=e.edge_budget)
    else:
        result = SCENARIOS[name](cfg.model, grid_n=e.grid_n)
    dump_json(result.to_dict(), out / f"scenario_{name}.json")
    write_csv(out / "report.csv",
              ["scenario", "verdict", "v_net", "v_pub", "gap", "mc_mean", "mc_se"],
              [(result.name, result.verdict, result.v_net, result.v_pub,
                result.gap, result.mc_mean, result.mc_se)],
              append=True)
    return 0 if result.verdict else 2


def _selftest() -> int:
    """Fast invariant suite; prints one PASS/FAIL line per check."""
    from . import selftest

    return selftest.run()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="persuasion-net",
        description="Persuasion with network vs. public signals on large random graphs",
    )
    parser.add_argument("--threads", type=int, default=None,
                        help="worker cap (fallback: PERSUASION_NET_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        if name != "selftest":
            p.add_argument("--config", required=True, help="path to a run config JSON")
            p.add_argument("--out-dir", default=".", help="output directory")
        return p

    add("limits", help="emit limits.csv / limits.json")
    p_sample = add("sample", help="sample one network and report empirical stats")
    p_sample.add_argument("--dump", action="store_true",
                          help="also write network.edges / network.nodes")
    add("simulate", help="Monte Carlo payoff run (sim.csv, obsfrac.csv)")
    p_opt = add("optimize", help="optimize sender strategies (optimum.json)")
    mode = p_opt.add_mutually_exclusive_group()
    mode.add_argument("--public", action="store_const", const="public", dest="mode")
    mode.add_argument("--network", action="store_const", const="network", dest="mode")
    p_opt.set_defaults(mode="both")
    add("compare", help="run both optimizers and check predictions (compare.json)")
    p_scen = add("scenario", help="run a named scenario")
    p_scen.add_argument("name", choices=sorted(SCENARIOS))
    sub.add_parser("selftest", help="run the built-in invariant suite")

    args = parser.parse_args(argv)

    if args.command == "selftest":
        return _selftest()

    try:
        cfg = load_config(args.config)
        if args.threads is None:
            env = os.environ.get("PERSUASION_NET_THREADS")
            if env:
                cfg = RunConfig(cfg.model,
                                type(cfg.engine)(**{**cfg.engine.__dict__,
                                                    "threads": int(env)}),
                                cfg.strategy)
        elif args.threads != cfg.engine.threads:
            cfg = RunConfig(cfg.model,
                            type(cfg.engine)(**{**cfg.engine.__dict__,
                                                "threads": args.threads}),
                            cfg.strategy)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_resolved(cfg, out)
        if args.command == "limits":
            _limits_outputs(cfg, out)
            return 0
        if args.command == "sample":
            _sample_outputs(cfg, out, args.dump)
            return 0
        if args.command == "simulate":
            return _simulate_outputs(cfg, out)
        if args.command == "optimize":
            _optimize_outputs(cfg, out, args.mode)
            return 0
        if args.command == "compare":
            _compare_outputs(cfg, out)
            return 0
        if args.command == "scenario":
            return _scenario_outputs(cfg, out, args.name)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except HypothesisError as exc:
        print(f"scenario hypothesis violated: {exc}", file=sys.stderr)
        return 2
    except (AssertionError, RuntimeError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
