"""Command-line front end: experiments, closed-form norms, acceptance checks."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .dense import (orbit_moment_coefficients, orbit_tables, random_traceless_observable,
                    shadow_norm_orbit)
from .shadows import (BadRank, ConfigError, ExperimentConfig, UnsupportedSpec, gamma_tilde,
                      norm_stab_projector, rows_to_csv, run_experiment)
from .tgate import TGateSpec, canonical_tspec, tspec_from_class
from .verify import CHECKS, run_checks

SCHEME_ALIASES = {"global": "global-clifford", "local": "local-clifford"}


def _parse_tspec(text: str, d: int) -> TGateSpec:
    parts = text.split(":")
    dagger = parts[-1] == "dagger"
    if dagger:
        parts = parts[:-1]
    head = parts[0]
    if head == "canonical" and len(parts) == 1:
        return canonical_tspec(d, dagger=dagger)
    if head == "class" and len(parts) == 2:
        return tspec_from_class(d, int(parts[1]), dagger=dagger)
    if head == "coeffs" and len(parts) == 2:
        coeffs = [int(c) for c in parts[1].split(",")]
        if not 1 <= len(coeffs) <= 3:
            raise UnsupportedSpec(f"coeffs take 1..3 entries, got {parts[1]!r}")
        coeffs += [0] * (3 - len(coeffs))
        return TGateSpec(d=d, c3=coeffs[0], c2=coeffs[1], c1=coeffs[2], dagger=dagger)
    raise UnsupportedSpec(f"bad magic-gate spec {text!r}; use canonical, class:J, or coeffs:c3,c2,c1"
                          " with an optional :dagger suffix")


def _out_path(arg: str | None, default_name: str) -> Path:
    if arg is not None:
        return Path(arg)
    return Path(os.environ.get("QUSHADOW_OUTDIR", ".")) / default_name


def _config_dict(config: ExperimentConfig) -> dict:
    out = asdict(config)
    out["t_specs"] = [asdict(sp) for sp in config.t_specs]
    out["lattice"] = list(config.lattice)
    return out


def _envelope(config: dict, results: list[dict]) -> str:
    return json.dumps({"config": config, "results": results, "version": __version__},
                      indent=2, sort_keys=True) + "\n"


def cmd_estimate(args: argparse.Namespace) -> int:
    scheme = SCHEME_ALIASES.get(args.scheme, args.scheme)
    t_specs = tuple(_parse_tspec(s, args.d) for s in args.t or [])
    config = ExperimentConfig(
        d=args.d, n=args.n, scheme=scheme, k=args.k, t_specs=t_specs, state=args.state,
        depolarize=args.p, lattice=tuple(args.lattice) if args.lattice else (0, 0),
        shots=args.N, runs=args.runs, groups=args.L, seed=args.seed, workers=args.workers)
    row = run_experiment(config).row()
    name = f"estimate_d{config.d}_n{config.n}_k{config.k}_seed{config.seed}.{args.format}"
    path = _out_path(args.out, name)
    if args.format == "csv":
        path.write_text(rows_to_csv([row]))
    else:
        path.write_text(_envelope(_config_dict(config), [row]))
    print(f"N*MSE = {config.shots * row['mse']:.4f} against theory bound "
          f"{row['theory_bound']:.4f}; mean estimate {row['estimate_mean']:.4f} "
          f"over {config.runs} runs")
    print(f"wrote {path}")
    return 0


def cmd_norm(args: argparse.Namespace) -> int:
    if args.stab_projector:
        ratio = norm_stab_projector(args.n, args.d, args.K)
        hs2 = args.K * (1 - args.K / args.d ** args.n)
        results = [{"ratio": ratio, "squared_norm": ratio * hs2}]
        text = f"ratio = {ratio!r}\nsquared shadow norm = {ratio * hs2!r}"
    elif args.gamma:
        value = gamma_tilde(args.d, args.k)
        results = [{"gamma": value}]
        text = f"gamma = {value!r}"
    else:
        value = float((args.d + 1) ** args.m)
        results = [{"squared_norm": value}]
        text = f"squared shadow norm = {value!r}"
    if args.format == "json":
        print(_envelope({k: v for k, v in vars(args).items() if k != "func"}, results), end="")
    else:
        print(text)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    names = None
    if args.only:
        names = [n for chunk in args.only for n in chunk.split(",") if n]
    results = run_checks(names)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  ({r.seconds:.1f}s)  {r.details}")
    failed = [r.name for r in results if not r.passed]
    path = _out_path(args.out, "verify_report.json")
    path.write_text(_envelope({"only": names}, [asdict(r) for r in results]))
    print(f"wrote {path}")
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def cmd_randobs(args: argparse.Namespace) -> int:
    t0 = time.time()
    rng = np.random.default_rng(args.seed)
    tabs = orbit_tables(args.n, args.d)
    specs = tuple(canonical_tspec(args.d) for _ in range(args.k))
    coeffs = orbit_moment_coefficients(tabs, specs)
    lines = ["sample,d,n,k,diagonal,norm,spectral_sq,bound"]
    worst = 0.0
    violations = 0
    for i in range(args.count):
        obs = random_traceless_observable(args.n, args.d, rng, diagonal=args.diagonal)
        op2 = float(np.linalg.norm(obs, 2) ** 2)
        norm = shadow_norm_orbit(obs, tabs, specs, coeffs=coeffs)
        if args.k:
            bound = gamma_tilde(args.d, args.k)
        elif args.diagonal:
            bound = (args.d - 1) + args.d * op2
        else:
            bound = (2 * args.d - 3) + 2 * op2
        worst = max(worst, norm / bound)
        violations += norm > bound * (1 + 1e-9)
        lines.append(f"{i},{args.d},{args.n},{args.k},{int(args.diagonal)},"
                     f"{norm!r},{op2!r},{bound!r}")
    tag = "_diag" if args.diagonal else ""
    path = _out_path(args.out, f"randobs_d{args.d}_k{args.k}{tag}_seed{args.seed}.csv")
    path.write_text("\n".join(lines) + "\n")
    print(f"{args.count} observables; max norm/bound {worst:.3f}; "
          f"{violations} violations; {time.time() - t0:.1f}s")
    print(f"wrote {path}")
    return 1 if violations else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qushadow",
                                     description="Qudit shadow estimation toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="run a fidelity-estimation experiment")
    est.add_argument("--d", type=int, required=True)
    est.add_argument("--n", type=int, required=True)
    est.add_argument("--state", choices=("ghz", "cluster", "depolarized-ghz"), default="ghz")
    est.add_argument("--scheme", default="global",
                     choices=("global", "global-clifford", "clifford+t"))
    est.add_argument("--k", type=int, default=0, help="number of magic sites")
    est.add_argument("--t", action="append", metavar="SPEC",
                     help="magic-gate spec per site: canonical, class:J, or coeffs:c3,c2,c1")
    est.add_argument("--p", type=float, default=0.0, help="depolarization rate")
    est.add_argument("--lattice", type=int, nargs=2, metavar=("ROWS", "COLS"))
    est.add_argument("--N", type=int, default=1000, help="shots per run")
    est.add_argument("--runs", type=int, default=10)
    est.add_argument("--L", type=int, default=1, help="median-of-means groups")
    est.add_argument("--seed", type=int, required=True)
    est.add_argument("--workers", type=int, default=1)
    est.add_argument("--out")
    est.add_argument("--format", choices=("csv", "json"), default="csv")
    est.set_defaults(func=cmd_estimate)

    norm = sub.add_parser("norm", help="closed-form squared shadow norms")
    which = norm.add_mutually_exclusive_group(required=True)
    which.add_argument("--stab-projector", action="store_true")
    which.add_argument("--gamma", action="store_true")
    which.add_argument("--local-weyl", action="store_true")
    norm.add_argument("--d", type=int, required=True)
    norm.add_argument("--n", type=int, default=1)
    norm.add_argument("--K", type=int, default=1, help="stabilizer projector rank")
    norm.add_argument("--k", type=int, default=1, help="magic-layer size for --gamma")
    norm.add_argument("--m", type=int, default=1, help="Weyl weight for --local-weyl")
    norm.add_argument("--format", choices=("text", "json"), default="text")
    norm.set_defaults(func=cmd_norm)

    ver = sub.add_parser("verify", help="run the acceptance checks")
    ver.add_argument("--only", action="append", metavar="NAME",
                     help=f"subset of checks: {', '.join(CHECKS)}")
    ver.add_argument("--out")
    ver.set_defaults(func=cmd_verify)

    robs = sub.add_parser("randobs", help="shadow-norm histogram of random observables")
    robs.add_argument("--d", type=int, choices=(3, 5, 7), required=True)
    robs.add_argument("--n", type=int, choices=(2,), default=2)
    robs.add_argument("--k", type=int, choices=(0, 1, 2), required=True)
    robs.add_argument("--count", type=int, required=True)
    robs.add_argument("--diagonal", action="store_true")
    robs.add_argument("--seed", type=int, required=True)
    robs.add_argument("--out")
    robs.set_defaults(func=cmd_randobs)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnsupportedSpec, BadRank, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
