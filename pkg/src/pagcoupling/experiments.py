"""Monte Carlo harness: scaling runs, log-log slope fits and distributional checks."""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaincc

from .couplings import build_chain
from .distance import (
    DEFAULT_EXACT_CAP,
    cut_exact,
    global_stats,
    jumble_exact,
    jumble_naive,
    jumble_rowsum_bound,
)
from .errors import InsufficientDataError, InvalidParameterError
from .models import ModelParams, gen_model6, generate
from .multigraph import Multigraph
from .rand import (
    StreamKey,
    make_stream,
    sample_exponential,
    sample_geometric_from_exponential,
    sample_poisson,
    sample_uniform,
)
from .urn import batch_final_counts

P_THRESHOLD = 1e-3
STATISTICS = ("rowsum_bound", "exact", "edge_stat")
ADJACENT_PAIRS = ((1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7))


# -- statistical tests ---------------------------------------------------------

def chi_square_pvalue(stat: float, dof: int) -> float:
    """Upper tail of the chi-square law, via the regularized incomplete gamma."""
    if dof < 1:
        raise InvalidParameterError("dof must be a positive integer")
    if stat <= 0:
        return 1.0
    return float(gammaincc(dof / 2.0, stat / 2.0))


@dataclass
class TestReport:
    """Outcome of one check.

    Threshold checks without a sampling distribution report ``dof = 0`` and a
    p-value of 1.0 (pass) or 0.0 (fail).
    """

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    dof: int
    p_value: float
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<40s} stat={self.statistic:.6g} dof={self.dof} p={self.p_value:.3g}"


def _merge_bins(expected_min: np.ndarray, *tables: np.ndarray) -> list[np.ndarray]:
    """Merge adjacent bins left to right until ``expected_min`` of each bin is >= 5."""
    groups = []
    acc = 0.0
    start = 0
    for k, e in enumerate(expected_min):
        acc += e
        if acc >= 5:
            groups.append((start, k + 1))
            start, acc = k + 1, 0.0
    if start < len(expected_min):
        if groups:
            groups[-1] = (groups[-1][0], len(expected_min))
        else:
            groups.append((0, len(expected_min)))
    return [np.array([t[a:b].sum() for a, b in groups], dtype=float) for t in tables]


def chi2_gof(observed, probs, name: str = "goodness-of-fit", ddof: int = 0) -> TestReport:
    """Chi-square goodness of fit of integer counts against cell probabilities.

    ``probs`` may sum to less than one; the missing mass is appended as a tail cell
    (``observed`` must then include that cell as its last entry).
    """
    obs = np.asarray(observed, dtype=float)
    pr = np.asarray(probs, dtype=float)
    if pr.size == obs.size - 1:
        pr = np.append(pr, max(0.0, 1.0 - pr.sum()))
    if pr.size != obs.size:
        raise InvalidParameterError("observed and probs differ in length")
    total = obs.sum()
    exp = pr / pr.sum() * total
    o, e = _merge_bins(exp, obs, exp)
    dof = o.size - 1 - ddof
    if dof < 1:
        return TestReport(name, 0.0, 0, 1.0, True)
    stat = float(((o - e) ** 2 / e).sum())
    p = chi_square_pvalue(stat, dof)
    return TestReport(name, stat, dof, p, p > P_THRESHOLD)


def two_sample_chi2(x, y, name: str = "two-sample") -> TestReport:
    """Chi-square homogeneity test for two samples of integer values."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    values = np.union1d(x, y)
    cx = np.bincount(np.searchsorted(values, x), minlength=values.size).astype(float)
    cy = np.bincount(np.searchsorted(values, y), minlength=values.size).astype(float)
    nx, ny = cx.sum(), cy.sum()
    col = cx + cy
    exp_min = col * min(nx, ny) / (nx + ny)
    ox, oy = _merge_bins(exp_min, cx, cy)
    k = ox.size
    if k < 2:
        return TestReport(name, 0.0, 0, 1.0, True)
    col = ox + oy
    ex = col * nx / (nx + ny)
    ey = col * ny / (nx + ny)
    stat = float(((ox - ex) ** 2 / ex).sum() + ((oy - ey) ** 2 / ey).sum())
    p = chi_square_pvalue(stat, k - 1)
    return TestReport(name, stat, k - 1, p, p > P_THRESHOLD)


def bonferroni(reports: list[TestReport], name: str) -> TestReport:
    m = len(reports)
    worst = min(reports, key=lambda r: r.p_value)
    p = min(1.0, worst.p_value * m)
    return TestReport(name, worst.statistic, worst.dof, p, p > P_THRESHOLD,
                      details={r.name: r.p_value for r in reports})


# -- slope fitting -------------------------------------------------------------

def fit_slope(points) -> tuple[float, float, float]:
    """OLS of log(mean) on log(n); returns ``(slope, intercept, r_squared)``."""
    pts = [(float(n), float(m)) for n, m in points if m > 0 and n > 0]
    if len(pts) < 2:
        raise InsufficientDataError("need at least two points with positive mean")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    if np.ptp(x) == 0:
        raise InsufficientDataError("need at least two distinct n")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - float((resid ** 2).sum()) / ss_tot
    return float(slope), float(intercept), r2


# -- scaling experiments -------------------------------------------------------

@dataclass
class ExperimentConfig:
    c: float
    n_grid: list
    replications: int
    run_seed: int
    pair: tuple = (1, 7)
    statistic: str = "rowsum_bound"
    alpha: float | None = None
    exact_cap: int = DEFAULT_EXACT_CAP

    def __post_init__(self):
        self.n_grid = [int(n) for n in self.n_grid]
        self.pair = tuple(int(k) for k in self.pair)
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise InvalidParameterError("n_grid must be non-empty and strictly increasing")
        if self.n_grid[0] < 1:
            raise InvalidParameterError("vertex counts must be positive")
        if self.replications < 2:
            raise InvalidParameterError("replications must be >= 2 (stderr is undefined otherwise)")
        if len(self.pair) != 2 or not (1 <= self.pair[0] < self.pair[1] <= 7):
            raise InvalidParameterError(f"pair must be (a, b) with 1 <= a < b <= 7, got {self.pair}")
        if self.statistic not in STATISTICS:
            raise InvalidParameterError(f"statistic must be one of {STATISTICS}")
        if self.statistic == "exact" and self.n_grid[-1] > self.exact_cap:
            raise InvalidParameterError(f"exact statistic refused: n={self.n_grid[-1]} exceeds cap {self.exact_cap}")
        if self.pair[0] < 6 and self.alpha is None:
            raise InvalidParameterError("alpha is required unless the pair is (6, 7)")
        ModelParams(1, self.c, self.alpha)


@dataclass
class ScalingRun:
    records: list
    slope: float
    intercept: float
    r_squared: float
    config: dict = field(default_factory=dict)

    @property
    def ns(self):
        return [r["n"] for r in self.records]

    @property
    def means(self):
        return [r["mean"] for r in self.records]

    def non_increasing(self, k: float = 2.0) -> bool:
        """Each mean is at most the previous one plus ``k`` combined standard errors."""
        for a, b in zip(self.records, self.records[1:]):
            if b["mean"] > a["mean"] + k * math.hypot(a["stderr"], b["stderr"]):
                return False
        return True

    def csv(self) -> str:
        lines = ["n,mean,stderr,replications"]
        lines += [f"{r['n']},{r['mean']!r},{r['stderr']!r},{r['replications']}" for r in self.records]
        return "\n".join(lines) + "\n"

    def loglog(self) -> str:
        return "".join(f"{math.log(r['n'])!r} {math.log(r['mean'])!r}\n" for r in self.records if r["mean"] > 0)

    def summary(self) -> dict:
        return {"config": self.config, "slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "records": self.records}


def pair_statistic(g: Multigraph, h: Multigraph, statistic: str, cap: int = DEFAULT_EXACT_CAP) -> float:
    if statistic == "rowsum_bound":
        return jumble_rowsum_bound(g, h)
    if statistic == "exact":
        return jumble_exact(g, h, cap)
    if statistic == "edge_stat":
        return global_stats(g, h)[1]
    raise InvalidParameterError(f"unknown statistic {statistic!r}")


def _replicate(job):
    n, rep, cfg = job
    a, b = cfg.pair
    s = make_stream(StreamKey(cfg.run_seed, rep, f"scaling/{a}-{b}/n={n}"))
    p = ModelParams(n, cfg.c, cfg.alpha)
    real = build_chain(p, s, first=a, last=b)
    return pair_statistic(real[a], real[b], cfg.statistic, cfg.exact_cap)


def _records(cfg: ExperimentConfig, values: dict) -> list:
    recs = []
    for n in cfg.n_grid:
        v = np.asarray(values[n], dtype=float)
        recs.append({"n": n, "mean": float(v.mean()),
                     "stderr": float(v.std(ddof=1) / math.sqrt(v.size)), "replications": int(v.size)})
    return recs


def _finish(cfg_dict: dict, recs: list) -> ScalingRun:
    slope, intercept, r2 = fit_slope([(r["n"], r["mean"]) for r in recs])
    return ScalingRun(recs, slope, intercept, r2, cfg_dict)


def run_scaling(cfg: ExperimentConfig, workers: int = 1) -> ScalingRun:
    """Mean of the configured pair statistic per n over independent chain realizations.

    Replication ``k`` at vertex count ``n`` always uses the same stream key, so
    results do not depend on ``workers``.
    """
    jobs = [(n, rep, cfg) for n in cfg.n_grid for rep in range(cfg.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_replicate, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        out = [_replicate(j) for j in jobs]
    values = {n: [] for n in cfg.n_grid}
    for (n, _, _), v in zip(jobs, out):
        values[n].append(v)
    return _finish(_config_dict(cfg), _records(cfg, values))


def _config_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["pair"] = list(cfg.pair)
    return d


def write_scaling(run: ScalingRun, out_dir, name: str) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    seed = run.config.get("run_seed")
    base = os.path.join(out_dir, f"{name}_seed{seed}")
    paths = {"csv": base + ".csv", "json": base + ".json", "loglog": base + "_loglog.txt"}
    with open(paths["csv"], "w", newline="\n") as fh:
        fh.write(run.csv())
    with open(paths["loglog"], "w", newline="\n") as fh:
        fh.write(run.loglog())
    with open(paths["json"], "w", newline="\n") as fh:
        json.dump(run.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


# -- distributional verification -------------------------------------------------

def _negbin_oracle(n: int, p: float, samples: int, s) -> np.ndarray:
    """Sum of ``n`` inverse-CDF geometrics on {1, 2, ...} (independent of the xi route)."""
    u = sample_uniform(s, (samples, n))
    g = 1 + np.floor(np.log(u) / math.log1p(-p)).astype(np.int64)
    return g.sum(axis=1)


def verify_lemma3(n: int = 3, alpha: float = 1.5, samples: int = 200_000, seed: int = 0,
                  perturb: bool = False) -> TestReport:
    """Urn contents after a negative-binomial number of steps vs rounded exponentials.

    ``perturb`` adds one to every rounded exponential (negative control).
    """
    if n < 2:
        raise InvalidParameterError("n must be >= 2")
    p = ModelParams(n, 1.0, alpha)
    root = make_stream(StreamKey(seed, 0, "verify/lemma3"))
    total = _negbin_oracle(n, p.p_alpha, samples, root.child("negbin"))
    X = batch_final_counts(n, total - n, root.child("urn"))
    C, _ = sample_geometric_from_exponential(root.child("xi"), p.scale, (samples, n))
    if perturb:
        C = C + 1
    first = two_sample_chi2(X[:, 0], C[:, 0], "first urn count vs rounded exponential")
    sums = two_sample_chi2(X.sum(axis=1), C.sum(axis=1), "total balls vs sum of rounded exponentials")
    rep = bonferroni([first, sums], f"lemma3 n={n} alpha={alpha}" + (" perturbed" if perturb else ""))
    return rep


def _graph_stats(g: Multigraph) -> tuple[int, int]:
    return g.edge_count(), g.max_row_sum()


def marginal_samples(n: int = 8, alpha: float = 1.5, c: float = 1.0, samples: int = 10_000,
                     seed: int = 0, fault: str | None = None, on_chain=None) -> tuple[np.ndarray, np.ndarray]:
    """(edge count, max row sum) of G1..G7 from the chain and from standalone generators.

    Returns two arrays of shape (7, samples, 2).  ``on_chain``, if given, is
    called with every chain realization (for per-sample property checks).
    """
    p = ModelParams(n, c, alpha)
    chain = np.empty((7, samples, 2), np.int64)
    alone = np.empty((7, samples, 2), np.int64)
    for rep in range(samples):
        real = build_chain(p, make_stream(StreamKey(seed, rep, "verify/chain")), fault=fault)
        if on_chain is not None:
            on_chain(real)
        for k in range(1, 8):
            chain[k - 1, rep] = _graph_stats(real[k])
            alone[k - 1, rep] = _graph_stats(
                generate(k, p, make_stream(StreamKey(seed, rep, f"verify/standalone/{k}"))))
    return chain, alone


def verify_marginals(pair=(5, 6), n: int = 8, alpha: float = 1.5, samples: int = 10_000, c: float = 1.0,
                     seed: int = 0, fault: str | None = None, data=None) -> TestReport:
    """Two-sample tests of chain-extracted vs standalone graphs for one adjacent pair.

    Both members of the pair are tested on edge count and maximum row sum
    (four tests, Bonferroni-combined).  ``data`` reuses ``marginal_samples`` output.
    """
    a, b = pair
    if (a, b) not in ADJACENT_PAIRS:
        raise InvalidParameterError(f"not an adjacent pair: {pair}")
    chain, alone = data if data is not None else marginal_samples(n, alpha, c, samples, seed, fault)
    reports = []
    for k in (a, b):
        for col, label in ((0, "edges"), (1, "max row sum")):
            reports.append(two_sample_chi2(chain[k - 1, :, col], alone[k - 1, :, col], f"G{k} {label}"))
    return bonferroni(reports, f"marginals {a}-{b}" + (f" fault={fault}" if fault else ""))


def negative_control_loops(n: int = 8, c: float = 1.0, samples: int = 10_000, seed: int = 0) -> TestReport:
    """Model 6 vs Model 7 edge counts; must be rejected (they differ by the loops)."""
    p = ModelParams(n, c)
    e6 = np.empty(samples, np.int64)
    e7 = np.empty(samples, np.int64)
    for rep in range(samples):
        e6[rep] = gen_model6(p, make_stream(StreamKey(seed, rep, "control/6"))).edge_count()
        e7[rep] = generate(7, p, make_stream(StreamKey(seed, rep, "control/7"))).edge_count()
    return two_sample_chi2(e6, e7, "negative control: G6 vs G7 edge counts")


def verify_lower_bounds(n: int = 100, c: float = 1.0, samples: int = 10_000, seed: int = 0) -> TestReport:
    """Edge-count deviation from the PAG edge count, with and without loops.

    Checks mean |E - m| >= |m - c n (n-1)/2| for the loopless W-random graph and
    mean |E_loops - m| >= e^-2 sqrt(c/2) n for the looped one, m = floor(floor(c n^2)/2).
    """
    p = ModelParams(n, c)
    m = p.edge_slots
    dev7 = np.empty(samples)
    dev6 = np.empty(samples)
    for rep in range(samples):
        g6 = gen_model6(p, make_stream(StreamKey(seed, rep, "verify/lower")))
        e6 = g6.edge_count()
        dev6[rep] = abs(e6 - m)
        dev7[rep] = abs(e6 - g6.loop_count() - m)
    bound7 = abs(m - c * n * (n - 1) / 2)
    bound6 = math.exp(-2) * math.sqrt(c / 2) * n
    ok7 = dev7.mean() >= bound7
    ok6 = dev6.mean() >= bound6
    details = {"mean_abs_dev_loopless": float(dev7.mean()), "bound_loopless": bound7,
               "mean_abs_dev_loops": float(dev6.mean()), "bound_loops": bound6, "m": m}
    return TestReport(f"lower bounds n={n} c={c}", float(dev6.mean()), 0, 1.0 if ok6 and ok7 else 0.0,
                      bool(ok6 and ok7), details)


def verify_hstar_mean(n_grid=(32, 64, 128, 256, 512), alpha: float = 5 / 3, samples: int = 20_000,
                      c: float = 1.0, seed: int = 0, pair=(0, 1)) -> ScalingRun:
    """Mean of the splitting gap H* on one off-diagonal pair, across n."""
    if not (1 < alpha < 2):
        raise InvalidParameterError("alpha must lie in (1, 2)")
    i, j = pair
    recs = []
    for n in n_grid:
        p = ModelParams(n, c, alpha)
        s = make_stream(StreamKey(seed, 0, f"verify/hstar/n={n}"))
        vals = []
        chunk = max(1, min(samples, 4_000_000 // n))
        done = 0
        while done < samples:
            m = min(chunk, samples - done)
            xi = sample_exponential(s, (m, n))
            C = np.maximum(np.ceil(xi * p.scale), 1)
            R = C / C.sum(axis=1, keepdims=True)
            mu_star = np.abs(c * xi[:, i] * xi[:, j] - c * n * n * R[:, i] * R[:, j])
            vals.append(sample_poisson(s, mu_star))
            done += m
        v = np.concatenate(vals).astype(float)
        recs.append({"n": int(n), "mean": float(v.mean()),
                     "stderr": float(v.std(ddof=1) / math.sqrt(v.size)), "replications": int(v.size)})
    cfg = {"alpha": alpha, "c": c, "samples": samples, "run_seed": seed, "pair": list(pair),
           "n_grid": list(n_grid), "statistic": "hstar_mean"}
    return _finish(cfg, recs)


def random_graph_pair(n: int, max_mult: int, s) -> tuple[Multigraph, Multigraph]:
    def one():
        U = s.rng.integers(0, max_mult + 1, size=(n, n))
        return Multigraph.from_upper(n, np.triu(U))

    return one(), one()


def verify_norms(pairs: int = 200, max_n: int = 8, max_mult: int = 3, seed: int = 0) -> list[TestReport]:
    """Oracle equivalence and the ordering chain on random multigraph pairs."""
    s = make_stream(StreamKey(seed, 0, "verify/norms"))
    worst = 0.0
    for _ in range(pairs):
        n = int(s.rng.integers(1, max_n + 1))
        g, h = random_graph_pair(n, max_mult, s)
        worst = max(worst, abs(jumble_exact(g, h) - jumble_naive(g, h)))
    oracle = TestReport("jumble exact vs naive enumeration", worst, 0, 1.0 if worst <= 1e-12 else 0.0,
                        worst <= 1e-12, {"pairs": pairs, "max_abs_diff": worst})
    violations = 0
    order_pairs = 500
    for _ in range(order_pairs):
        n = int(s.rng.integers(1, 11))
        g, h = random_graph_pair(n, max_mult, s)
        ms = global_stats(g, h)[0]
        cu = cut_exact(g, h)
        ju = jumble_exact(g, h)
        rb = jumble_rowsum_bound(g, h)
        tol = 1e-12
        if not (ms <= cu + tol and cu <= ju + tol and ju <= rb + tol):
            violations += 1
    order = TestReport("matrix <= cut <= jumble <= rowsum", float(violations), 0,
                       1.0 if violations == 0 else 0.0, violations == 0, {"pairs": order_pairs})
    return [oracle, order]
