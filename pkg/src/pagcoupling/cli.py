"""Command-line front end.

    pagcoupling gen      --model K --n N --c C [--alpha A] --seed S --out FILE
    pagcoupling couple   --n N --c C --alpha A --seed S --out-dir DIR
    pagcoupling dist     FILE_A FILE_B [--exact-cap M] [--out FILE]
    pagcoupling scaling  CONFIG [--out-dir DIR] [--workers W] [--section NAME ...]
    pagcoupling verify   SUITE [--n N --alpha A --c C --samples M --seed S --fault F]
    pagcoupling beta     [--alpha A ...]

Exit codes: 0 success, 1 verification or audit failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import configparser
import os
import sys
import time

import numpy as np

from . import __version__
from .couplings import FAULTS, build_chain
from .distance import DEFAULT_EXACT_CAP, DistanceReport, beta_exponent, beta_optimum, distance_report
from .errors import InvalidParameterError
from .experiments import (
    ADJACENT_PAIRS,
    ExperimentConfig,
    TestReport,
    marginal_samples,
    negative_control_loops,
    run_scaling,
    verify_hstar_mean,
    verify_lemma3,
    verify_lower_bounds,
    verify_marginals,
    verify_norms,
    write_scaling,
)
from .models import NEEDS_ALPHA, ModelParams, generate
from .multigraph import read_graph, write_graph
from .rand import StreamKey, make_stream

CONFIG_KEYS = {"c", "alpha", "n_grid", "replications", "run_seed", "pair", "statistic", "exact_cap"}
SUITES = ("lemma3", "marginals", "lowerbounds", "hstar", "norms")


class UsageError(Exception):
    pass


def write_manifest(path, command: str, params: dict, seed, artifacts, started: float) -> str:
    mpath = f"{path}.manifest"
    lines = [f"command={command}"]
    lines += [f"param.{k}={params[k]}" for k in sorted(params)]
    lines += [f"run_seed={seed}", f"version={__version__}"]
    lines += [f"artifact={a}" for a in artifacts]
    lines.append(f"duration_s={time.perf_counter() - started:.3f}")
    with open(mpath, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return mpath


def _params(n, c, alpha) -> ModelParams:
    try:
        return ModelParams(n, c, alpha)
    except InvalidParameterError as exc:
        raise UsageError(str(exc)) from exc


def cmd_gen(args) -> int:
    started = time.perf_counter()
    if args.model in NEEDS_ALPHA and args.alpha is None:
        raise UsageError(f"model {args.model} requires --alpha (a value in (1, 2))")
    p = _params(args.n, args.c, args.alpha)
    g = generate(args.model, p, make_stream(StreamKey(args.seed, 0, f"gen/{args.model}")))
    write_graph(args.out, g, c=args.c, model=args.model, seed=args.seed)
    write_manifest(args.out, "gen", {"model": args.model, "n": args.n, "c": args.c, "alpha": args.alpha},
                   args.seed, [args.out], started)
    return 0


def _latent_text(latent, p: ModelParams) -> str:
    return "\n".join([
        f"n {p.n}",
        f"c {p.c!r}",
        f"alpha {p.alpha!r}",
        f"r {latent.r}",
        "xi " + " ".join(repr(float(x)) for x in latent.xi),
        "C " + " ".join(str(int(x)) for x in latent.C),
    ]) + "\n"


def _read_latent(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            key, _, rest = line.strip().partition(" ")
            out[key] = rest.split()
    return out


def audit_couple(out_dir) -> list[str]:
    """Re-read a ``couple`` output directory and list violated coupling properties."""
    g = {k: read_graph(os.path.join(out_dir, f"G{k}.txt"))[0] for k in range(1, 8)}
    lat = _read_latent(os.path.join(out_dir, "latent.txt"))
    problems = []
    if np.any(g[2].A > g[1].A):
        problems.append("G2 exceeds G1 somewhere")
    if np.any(np.diagonal(g[7].A)):
        problems.append("G7 has loops")
    if not np.array_equal(g[7].A, g[6].without_loops().A):
        problems.append("G7 differs from G6 off the diagonal")
    C = [int(x) for x in lat["C"]]
    if int(lat["r"][0]) != sum(C) - len(C):
        problems.append("sidecar r != sum(C) - n")
    return problems


def cmd_couple(args) -> int:
    started = time.perf_counter()
    if args.alpha is None:
        raise UsageError("couple requires --alpha (a value in (1, 2))")
    p = _params(args.n, args.c, args.alpha)
    real = build_chain(p, make_stream(StreamKey(args.seed, 0, "couple")))
    os.makedirs(args.out_dir, exist_ok=True)
    paths = []
    for k in range(1, 8):
        path = os.path.join(args.out_dir, f"G{k}.txt")
        write_graph(path, real[k], c=args.c, model=k, seed=args.seed)
        paths.append(path)
    lpath = os.path.join(args.out_dir, "latent.txt")
    with open(lpath, "w", newline="\n") as fh:
        fh.write(_latent_text(real.latent, p))
    paths.append(lpath)
    write_manifest(os.path.join(args.out_dir, "couple"), "couple",
                   {"n": args.n, "c": args.c, "alpha": args.alpha}, args.seed, paths, started)
    problems = audit_couple(args.out_dir)
    for msg in problems:
        print(f"audit: {msg}", file=sys.stderr)
    return 1 if problems else 0


def cmd_dist(args) -> int:
    try:
        g, _ = read_graph(args.file_a)
        h, _ = read_graph(args.file_b)
    except (OSError, InvalidParameterError) as exc:
        raise UsageError(str(exc)) from exc
    if g.n != h.n:
        raise UsageError(f"vertex counts differ: {g.n} vs {h.n}")
    if g.n > args.exact_cap:
        print(f"notice: n={g.n} exceeds exact cap {args.exact_cap}; exact fields left empty", file=sys.stderr)
    rep = distance_report(g, h, cap=args.exact_cap)
    text = DistanceReport.CSV_HEADER + "\n" + rep.csv_row() + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def parse_config(path) -> dict[str, ExperimentConfig]:
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for name in cp.sections():
        sec = cp[name]
        unknown = sorted(set(sec.keys()) - CONFIG_KEYS)
        if unknown:
            raise UsageError(f"[{name}] unknown config keys: {', '.join(unknown)}")
        try:
            cfg = ExperimentConfig(
                c=float(sec["c"]),
                alpha=float(sec["alpha"]) if "alpha" in sec else None,
                n_grid=[int(x) for x in sec["n_grid"].replace(",", " ").split()],
                replications=int(sec["replications"]),
                run_seed=int(sec.get("run_seed", "0")),
                pair=tuple(int(x) for x in sec.get("pair", "1,7").replace(",", " ").split()),
                statistic=sec.get("statistic", "rowsum_bound"),
                exact_cap=int(sec.get("exact_cap", str(DEFAULT_EXACT_CAP))),
            )
        except KeyError as exc:
            raise UsageError(f"[{name}] missing required key {exc}") from exc
        except (ValueError, InvalidParameterError) as exc:
            raise UsageError(f"[{name}] {exc}") from exc
        out[name] = cfg
    if not out:
        raise UsageError(f"config {path} defines no experiment sections")
    return out


def cmd_scaling(args) -> int:
    started = time.perf_counter()
    cfgs = parse_config(args.config)
    if args.section:
        missing = sorted(set(args.section) - set(cfgs))
        if missing:
            raise UsageError(f"no such section(s) in {args.config}: {', '.join(missing)}")
        cfgs = {k: v for k, v in cfgs.items() if k in args.section}
    for name, cfg in cfgs.items():
        run = run_scaling(cfg, workers=args.workers)
        paths = write_scaling(run, args.out_dir, name)
        print(f"[{name}] pair={cfg.pair} statistic={cfg.statistic} slope={run.slope:.4f} r2={run.r_squared:.4f}")
        write_manifest(paths["csv"], "scaling", {"config": args.config, "section": name}, cfg.run_seed,
                       list(paths.values()), started)
    return 0


def _suite_reports(args) -> list[TestReport]:
    seed = args.seed
    if args.suite == "lemma3":
        return [verify_lemma3(args.n or 3, args.alpha or 1.5, args.samples or 200_000, seed)]
    if args.suite == "marginals":
        n, alpha, c = args.n or 8, args.alpha or 1.5, args.c or 1.0
        samples = args.samples or 10_000
        data = marginal_samples(n, alpha, c, samples, seed, fault=args.fault)
        reps = [verify_marginals(pair, n, alpha, samples, c, seed, fault=args.fault, data=data)
                for pair in ADJACENT_PAIRS]
        return reps
    if args.suite == "lowerbounds":
        return [verify_lower_bounds(args.n or 100, args.c or 1.0, args.samples or 10_000, seed)]
    if args.suite == "hstar":
        alpha = args.alpha or 5 / 3
        run = verify_hstar_mean(alpha=alpha, samples=args.samples or 20_000, c=args.c or 1.0, seed=seed)
        limit = max(-0.5, 1 - alpha) + 0.1
        ok = run.slope <= limit
        return [TestReport(f"hstar mean slope <= {limit:.3f}", run.slope, 0, 1.0 if ok else 0.0, ok,
                           {"records": run.records})]
    if args.suite == "norms":
        return verify_norms(seed=seed)
    raise UsageError(f"unknown suite {args.suite!r}")


def cmd_verify(args) -> int:
    reports = _suite_reports(args)
    for r in reports:
        print(r.line())
    return 0 if all(r.passed for r in reports) else 1


def cmd_beta(args) -> int:
    alphas = args.alpha or [1.1, 1.25, 1.5, 5 / 3, 1.75, 1.9]
    print("alpha beta")
    for a in alphas:
        try:
            print(f"{a:.6f} {float(beta_exponent(a)):.6f}")
        except InvalidParameterError as exc:
            raise UsageError(str(exc)) from exc
    a, b = beta_optimum()
    print(f"optimum alpha={a} beta={b}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pagcoupling", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate one graph from a single model")
    g.add_argument("--model", type=int, required=True, choices=range(1, 8))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--c", type=float, required=True)
    g.add_argument("--alpha", type=float)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("couple", help="one realization of the full coupling chain")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--c", type=float, required=True)
    c.add_argument("--alpha", type=float)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out-dir", required=True)
    c.set_defaults(func=cmd_couple)

    d = sub.add_parser("dist", help="distance statistics between two graph files")
    d.add_argument("file_a")
    d.add_argument("file_b")
    d.add_argument("--exact-cap", type=int, default=DEFAULT_EXACT_CAP)
    d.add_argument("--out")
    d.set_defaults(func=cmd_dist)

    s = sub.add_parser("scaling", help="run scaling experiments from a key=value config")
    s.add_argument("config")
    s.add_argument("--out-dir", default="results")
    s.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    s.add_argument("--section", action="append", help="run only this section (repeatable)")
    s.set_defaults(func=cmd_scaling)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--n", type=int)
    v.add_argument("--alpha", type=float)
    v.add_argument("--c", type=float)
    v.add_argument("--samples", type=int)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--fault", choices=[f for f in FAULTS if f], help="inject a known defect (test hook)")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("beta", help="print the exponent envelope and its optimum")
    b.add_argument("--alpha", type=float, action="append")
    b.set_defaults(func=cmd_beta)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.exit(2, f"{parser.prog}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
