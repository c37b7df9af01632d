# cli.py
"""
Batch runner for the spectral-count toolkit.

    python cli.py count     --config count.json   [--out counts.csv]
    python cli.py witness   --config witness.json [--out cert.json]
    python cli.py reduce    --config reduce.json  [--out reduce.json]
    python cli.py wegner    --config wegner.json  [--out wegner.csv] [--seed S] [--trials T]
    python cli.py det-event --config det.json     [--out det.csv]    [--seed S] [--trials T]
    python cli.py verify    [--select core,witness] [--seed S] [--trials T] [--slack X]

Exit codes: 0 success, 1 numerical/runtime failure, 2 configuration error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Type

import pandas as pd
from pydantic import BaseModel, ValidationError

import evaluator
import settings
from config import (
    CountConfig,
    DetEventConfig,
    ReduceConfig,
    WegnerConfig,
    WitnessConfig,
    build_or_config_error,
    dump_config,
    load_config,
)
from counting_witness import (
    certify_lower_count,
    counting_constant,
    find_block_witness,
    find_witness_pair,
    inverse_principal_count,
    witness_margin,
)
from errors import ConfigError, InsufficientPositivePoints, SpectralError, TrialFailure
from file_utils import dump_json, save_json
from hermitian_core import count_in_interval
from random_models import SampleSeed
from report_generator import (
    count_frame,
    mc_document,
    mc_frame,
    render_verify_table,
    write_count_csv,
    write_mc_csv,
    write_mc_json,
)
from spectral_reduction import count_sandwich_check, reduce
from wegner_mc import (
    McReport,
    fit_scaling,
    minami_gap_check,
    single_site_det_probability,
    sweep_count_events,
    sweep_det_events,
)

log = logging.getLogger("cli")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


# ---------- Config plumbing ----------

def _load(args: argparse.Namespace, model: Type[BaseModel]) -> BaseModel:
    """Parse --config, apply --seed/--trials overrides, then validate."""
    overrides = {flag: getattr(args, flag, None) for flag in ("seed", "trials")}
    return load_config(args.config, model, overrides)


def _jobs(args: argparse.Namespace, config: Any) -> int:
    if args.jobs is not None:
        return args.jobs
    return getattr(config, "jobs", None) or settings.DEFAULT_JOBS


def _emit_json(doc: Dict[str, Any], out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(dump_json(doc))
    else:
        save_json(out, doc)
        log.info("wrote %s", out)


def _emit_frame(frame: pd.DataFrame, out: Optional[str], writer: Callable, rows: Any) -> None:
    if out is None:
        sys.stdout.write(frame.to_csv(index=False, lineterminator="\n"))
    else:
        writer(out, rows)
        log.info("wrote %s", out)


def _emit_mc(reports: Sequence[McReport], summary: Dict[str, Any], out: Optional[str]) -> None:
    """CSV to --out (or stdout), then the reports-plus-summary JSON next to it."""
    _emit_frame(mc_frame(reports), out, write_mc_csv, reports)
    if out is None:
        sys.stdout.write(dump_json(mc_document(reports, summary)))
    else:
        path = write_mc_json(Path(out).with_suffix(".json"), reports, summary)
        log.info("wrote %s", path)


# ---------- Commands ----------

def run_count(args: argparse.Namespace) -> int:
    cfg = _load(args, CountConfig)
    if args.dump_config:
        _emit_json(dump_config(cfg), None)
        return EXIT_OK
    A = build_or_config_error(cfg.load_matrix, str(args.config))
    rows: List[Dict[str, Any]] = []
    for eps in cfg.eps:
        count = count_in_interval(A, cfg.energy, eps)
        for m in cfg.m:
            rows.append({"eps": eps, "m": m, "energy": cfg.energy, "count": count, "at_least_m": count >= m})
    _emit_frame(count_frame(rows), args.out, write_count_csv, rows)
    return EXIT_OK


def run_witness(args: argparse.Namespace) -> int:
    cfg = _load(args, WitnessConfig)
    if args.dump_config:
        _emit_json(dump_config(cfg), None)
        return EXIT_OK
    A = build_or_config_error(cfg.load_matrix, str(args.config))
    doc: Dict[str, Any] = {"eps": cfg.eps, "m": cfg.m, "count": count_in_interval(A, 0.0, cfg.eps)}

    pair = build_or_config_error(lambda: cfg.index_pair(A.dim), str(args.config))
    if pair is not None:
        alpha, beta = pair
        cert = witness_margin(A, cfg.eps, alpha, beta, K=1.0)
        doc["certificate"] = cert.to_document()
        doc["certified"] = certify_lower_count(A, cfg.eps, alpha, beta)
    elif cfg.block > 1:
        K = cfg.K if cfg.K is not None else counting_constant(cfg.m, A.dim).K
        gamma = find_block_witness(A, cfg.eps, cfg.m, cfg.block, K)
        doc["K"] = K
        doc["block"] = cfg.block
        doc["gamma"] = None if gamma is None else gamma.to_list()
        doc["inverse_principal_count"] = None if gamma is None else inverse_principal_count(A, gamma, cfg.eps)
    else:
        K = cfg.K if cfg.K is not None else counting_constant(cfg.m, A.dim).K
        cert = find_witness_pair(A, cfg.eps, cfg.m, K)
        doc["K"] = K
        doc["certificate"] = None if cert is None else cert.to_document()
    _emit_json(doc, args.out)
    return EXIT_OK


def run_reduce(args: argparse.Namespace) -> int:
    cfg = _load(args, ReduceConfig)
    if args.dump_config:
        _emit_json(dump_config(cfg), None)
        return EXIT_OK
    B1 = build_or_config_error(cfg.b1.to_matrix, str(args.config))
    B2 = build_or_config_error(cfg.b2.to_matrix, str(args.config))
    red = reduce(B1, B2)
    sandwich = []
    for eps in cfg.eps:
        s = count_sandwich_check(B1, B2, eps)
        sandwich.append({"eps": eps, "low": s.low, "mid": s.mid, "high": s.high, "holds": s.holds})
    doc = {
        "reduction": red.to_document(),
        "factorization_residual": red.factorization_residual(B1 + B2),
        "sandwich": sandwich,
    }
    _emit_json(doc, args.out)
    return EXIT_OK


def run_wegner(args: argparse.Namespace) -> int:
    cfg = _load(args, WegnerConfig)
    if args.dump_config:
        _emit_json(dump_config(cfg), None)
        return EXIT_OK
    spec = build_or_config_error(cfg.load_spec, str(args.config))
    seed = SampleSeed(cfg.seed)
    jobs = _jobs(args, cfg)

    # the gap check reads m = 1 and m = 2 off the same sweep
    m_values = sorted(set(cfg.m) | {1, 2}) if cfg.minami else list(cfg.m)
    sweep = sweep_count_events(spec, cfg.eps, m_values, cfg.trials, seed, jobs=jobs, alpha=cfg.alpha)
    reports = [sweep.report(e, m) for e in sweep.eps_grid for m in cfg.m]
    summary: Dict[str, Any] = {
        "family": spec.family.value,
        "sites": spec.sites,
        "coupling": spec.coupling,
        "trials": cfg.trials,
        "seed": cfg.seed,
    }
    if cfg.fit:
        fits = {}
        for m in dict.fromkeys(cfg.m):
            try:
                fits[str(m)] = fit_scaling(sweep.eps_grid, [sweep.report(e, m) for e in sweep.eps_grid]).to_document()
            except InsufficientPositivePoints as exc:
                log.warning("no scaling fit for m=%d: %s", m, exc)
                fits[str(m)] = {"error": str(exc)}
        summary["fits"] = fits
    if cfg.minami:
        summary["minami"] = minami_gap_check(spec, cfg.eps, cfg.trials, seed, jobs=jobs, sweep=sweep).to_document()

    _emit_mc(reports, summary, args.out)
    return EXIT_OK


def run_det_event(args: argparse.Namespace) -> int:
    cfg = _load(args, DetEventConfig)
    if args.dump_config:
        _emit_json(dump_config(cfg), None)
        return EXIT_OK
    spec = build_or_config_error(cfg.load_spec, str(args.config))
    seed = SampleSeed(cfg.seed)

    sweep = sweep_det_events(
        spec, cfg.a, cfg.delta, cfg.trials, seed, jobs=_jobs(args, cfg), regularity_K=cfg.regularity_K, alpha=cfg.alpha
    )
    summary: Dict[str, Any] = {
        "family": spec.family.value,
        "sites": spec.sites,
        "a": cfg.a,
        "trials": cfg.trials,
        "seed": cfg.seed,
    }
    if spec.sites == 1 and spec.block_size == 1 and spec.site_dist.is_scalar:
        summary["exact"] = [
            {"delta": d, "probability": single_site_det_probability(spec, cfg.a, d)} for d in sweep.delta_grid
        ]

    _emit_mc(sweep.reports, summary, args.out)
    return EXIT_OK


def run_verify(args: argparse.Namespace) -> int:
    groups = [g.strip() for g in args.select.split(",") if g.strip()]
    try:
        properties = evaluator.select(groups)
    except ValueError as exc:
        raise ConfigError(f"--select: {exc}") from exc
    if not properties:
        raise ConfigError("--select: no property groups given")

    results = evaluator.run_properties(groups, seed=args.seed, instances=args.trials, slack=args.slack)
    print(render_verify_table(results))
    if args.out:
        save_json(args.out, {"seed": args.seed, "results": [r.to_document() for r in results]})
    failed = [r for r in results if not r.passed]
    if failed:
        first = failed[0]
        detail = f" ({first.errors[0]})" if first.errors else ""
        print(f"FAIL: {first.name}{detail}; replay with {first.replay}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"all {len(results)} properties passed")
    return EXIT_OK


# ---------- Parser ----------

def _config_command(sub, name: str, handler: Callable, help_text: str, sampling: bool = False):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("--config", required=True, help="JSON config path.")
    p.add_argument("--out", default=None, help="Output path (stdout when omitted).")
    p.add_argument("--dump-config", action="store_true", help="Print the effective config and exit.")
    if sampling:
        p.add_argument("--seed", type=int, default=None, help="Master seed override (0 .. 2^64-1).")
        p.add_argument("--trials", type=int, default=None, help="Trial count override.")
    p.set_defaults(handler=handler)
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spectral-count", description="Eigenvalue counting and multi-level Wegner experiments.")
    ap.add_argument("--jobs", type=int, default=None, help="Worker processes (default: SPECTRAL_COUNT_JOBS or CPU count).")
    ap.add_argument("--log-level", default=settings.LOG_LEVEL, help="Logging level name.")
    sub = ap.add_subparsers(dest="command", required=True)

    _config_command(sub, "count", run_count, "Count eigenvalues in (E - eps, E + eps).")
    _config_command(sub, "witness", run_witness, "Search or certify a Green-function witness.")
    _config_command(sub, "reduce", run_reduce, "Shift reduction and count sandwich.")
    _config_command(sub, "wegner", run_wegner, "Monte Carlo multi-level Wegner sweep.", sampling=True)
    _config_command(sub, "det-event", run_det_event, "Monte Carlo determinant event sweep.", sampling=True)

    v = sub.add_parser("verify", help="Run the property suite.")
    v.add_argument("--select", default=",".join(evaluator.GROUPS), help="Comma-separated property groups.")
    v.add_argument("--seed", type=int, default=0, help="Suite seed.")
    v.add_argument("--trials", type=int, default=evaluator.DEFAULT_INSTANCES, help="Instances per property.")
    v.add_argument("--slack", type=float, default=0.0, help="Added to every inequality margin.")
    v.add_argument("--out", default=None, help="Optional JSON results path.")
    v.set_defaults(handler=run_verify)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if args.jobs is not None and args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG

    try:
        return args.handler(args)
    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrialFailure as exc:
        print(f"error: trial {exc.trial} failed: {exc.cause}", file=sys.stderr)
        return EXIT_FAILURE
    except SpectralError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as exc:
        log.exception("unexpected failure")
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
