"""Seeded Monte Carlo for maybe-probabilities, similarity probabilities,
admissibility audits, and empirical exponent fits.

Trials are split into fixed-size shards; shard i draws its generator from
SeedSequence(seed).spawn(...)[i], and results merge by summation, so estimates
are reproducible bit for bit regardless of how many worker threads run them.
QUADSIG_THREADS caps shard parallelism (default 1).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import GaussianPair, id_rate
from .covering import CoveringCode, build_covering
from .errors import DegenerateDataError, PreconditionError
from .scheme import SchemeConfig, assign_many, plan_scheme, query_many

__all__ = [
    "SourceSpec",
    "TrialEstimate",
    "ExponentFit",
    "sample_pair",
    "estimate_maybe_probability",
    "estimate_similarity_probability",
    "audit_admissibility",
    "fit_exponent",
    "chi_square_tail_bound",
    "robustness_experiment",
]

SHARD_SIZE = 32768

_FAMILIES = ("gaussian", "uniform", "laplace")


@dataclass(frozen=True)
class SourceSpec:
    """Zero-mean i.i.d. source with an exactly-matched variance."""

    family: str
    variance: float

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"family must be one of {_FAMILIES}")
        if self.variance <= 0.0:
            raise ValueError("variance must be positive")

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.family == "gaussian":
            return rng.normal(0.0, math.sqrt(self.variance), shape)
        if self.family == "uniform":
            half = math.sqrt(3.0 * self.variance)
            return rng.uniform(-half, half, shape)
        return rng.laplace(0.0, math.sqrt(self.variance / 2.0), shape)


@dataclass(frozen=True)
class TrialEstimate:
    p_hat: float
    trials: int
    ci_low: float
    ci_high: float
    false_negative_count: int

    def __post_init__(self):
        if not self.ci_low <= self.p_hat <= self.ci_high:
            raise ValueError("interval must bracket the estimate")


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    points: list[tuple[int, float]]


def _wilson(hits: int, trials: int) -> tuple[float, float, float]:
    """95% Wilson interval; zero counts get the rule-of-three upper bound."""
    p = hits / trials
    if hits == 0:
        return p, 0.0, min(1.0, 3.0 / trials)
    if hits == trials:
        return p, max(0.0, 1.0 - 3.0 / trials), 1.0
    z = 1.959963984540054
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4 * trials * trials)) / denom
    return p, max(0.0, center - half), min(1.0, center + half)


def sample_pair(
    spec_x: SourceSpec, spec_y: SourceSpec, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """One independent (x, y) pair with i.i.d. coordinates; the generator is
    the seed stream, so identical generator states give identical pairs."""
    x = spec_x.draw(rng, n)
    y = spec_y.draw(rng, n)
    return x, y


def _threads() -> int:
    try:
        t = int(os.environ.get("QUADSIG_THREADS", "1"))
    except ValueError:
        t = 1
    return max(1, t)


def _run_sharded(trials: int, seed: int, worker):
    """worker(rng, count) -> tuple of summable ints; returns elementwise sums."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    num_shards = (trials + SHARD_SIZE - 1) // SHARD_SIZE
    children = np.random.SeedSequence(seed).spawn(num_shards)
    sizes = [
        SHARD_SIZE if i < num_shards - 1 else trials - SHARD_SIZE * (num_shards - 1)
        for i in range(num_shards)
    ]

    def run(i):
        return worker(np.random.default_rng(children[i]), sizes[i])

    t = _threads()
    if t == 1 or num_shards == 1:
        results = [run(i) for i in range(num_shards)]
    else:
        with ThreadPoolExecutor(max_workers=min(t, num_shards)) as pool:
            results = list(pool.map(run, range(num_shards)))
    return tuple(int(sum(parts)) for parts in zip(*results))


def estimate_maybe_probability(
    config: SchemeConfig,
    code: CoveringCode,
    spec_x: SourceSpec,
    spec_y: SourceSpec,
    trials: int,
    seed: int,
) -> TrialEstimate:
    """Monte Carlo estimate of Pr{query says maybe} over independent pairs.

    Every sampled pair that happens to be d-similar is also audited: a "no"
    there is a false negative and is counted (it must never occur).
    """

    def worker(rng: np.random.Generator, count: int):
        X = spec_x.draw(rng, (count, config.n))
        Y = spec_y.draw(rng, (count, config.n))
        ci, si, er = assign_many(config, code, X)
        maybe = query_many(config, code, ci, si, er, Y)
        dxy = np.einsum("ij,ij->i", X - Y, X - Y) / config.n
        fn = int((~maybe & (dxy <= config.d)).sum())
        return int(maybe.sum()), fn

    hits, fn = _run_sharded(trials, seed, worker)
    p, lo, hi = _wilson(hits, trials)
    return TrialEstimate(
        p_hat=p, trials=trials, ci_low=lo, ci_high=hi, false_negative_count=fn
    )


def estimate_similarity_probability(
    spec_x: SourceSpec,
    spec_y: SourceSpec,
    d: float,
    n: int,
    trials: int,
    seed: int,
) -> TrialEstimate:
    """Monte Carlo estimate of Pr{d(X, Y) <= d} for independent sources."""

    def worker(rng: np.random.Generator, count: int):
        X = spec_x.draw(rng, (count, n))
        Y = spec_y.draw(rng, (count, n))
        dxy = np.einsum("ij,ij->i", X - Y, X - Y) / n
        return (int((dxy <= d).sum()),)

    (hits,) = _run_sharded(trials, seed, worker)
    p, lo, hi = _wilson(hits, trials)
    return TrialEstimate(
        p_hat=p, trials=trials, ci_low=lo, ci_high=hi, false_negative_count=0
    )


def audit_admissibility(
    config: SchemeConfig,
    code: CoveringCode,
    spec_x: SourceSpec,
    trials: int,
    seed: int,
    boundary_fraction: float = 0.02,
) -> TrialEstimate:
    """Adversarial zero-false-negative audit on constructed similar pairs.

    x is drawn from the source; y = x + r*u with u uniform on the sphere and
    r = sqrt(n d) * U^(1/n) (uniform in the ball).  A slice of each shard puts
    r at sqrt(n d) (1 +/- 1e-9) to stress the threshold; pairs that land
    dissimilar (the +1e-9 side) are queried but exempt from the must-maybe
    check.  p_hat is the maybe fraction over all queried pairs.
    """

    def worker(rng: np.random.Generator, count: int):
        X = spec_x.draw(rng, (count, config.n))
        U = rng.standard_normal((count, config.n))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        radius = math.sqrt(config.n * config.d) * rng.uniform(0.0, 1.0, count) ** (
            1.0 / config.n
        )
        nb = max(2, int(count * boundary_fraction))
        edge = math.sqrt(config.n * config.d)
        radius[: nb // 2] = edge * (1.0 - 1e-9)
        radius[nb // 2 : nb] = edge * (1.0 + 1e-9)
        Y = X + radius[:, None] * U
        ci, si, er = assign_many(config, code, X)
        maybe = query_many(config, code, ci, si, er, Y)
        dxy = np.einsum("ij,ij->i", X - Y, X - Y) / config.n
        fn = int((~maybe & (dxy <= config.d)).sum())
        return int(maybe.sum()), fn

    hits, fn = _run_sharded(trials, seed, worker)
    p, lo, hi = _wilson(hits, trials)
    return TrialEstimate(
        p_hat=p, trials=trials, ci_low=lo, ci_high=hi, false_negative_count=fn
    )


def fit_exponent(points: list[tuple[int, float]]) -> ExponentFit:
    """Least-squares slope of -log2 p_hat against n over points with p_hat > 0."""
    usable = [(n, p) for n, p in points if p > 0.0]
    if len(usable) < 2:
        raise DegenerateDataError(
            "need at least two points with p_hat > 0; estimates at or below the "
            "Monte Carlo resolution floor carry no slope information"
        )
    ns = np.array([n for n, _ in usable], dtype=float)
    ys = -np.log2([p for _, p in usable])
    slope, intercept = np.polyfit(ns, ys, 1)
    return ExponentFit(slope=float(slope), intercept=float(intercept), points=usable)


def chi_square_tail_bound(n: int, sigma2: float) -> float:
    """Chernoff bound exp(-n^2/4) * 2^(n/2) on Pr{|X|^2 > n^2 sigma2}.

    Scale-free: the threshold n^2 sigma2 grows with the variance, so sigma2
    cancels.  Decays super-exponentially in n.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    return math.exp(-n * n / 4.0) * 2.0 ** (n / 2.0)


def robustness_experiment(
    pair: GaussianPair,
    d: float,
    target_rate: float,
    n_list: list[int],
    spec_x: SourceSpec,
    spec_y: SourceSpec,
    trials: int,
    seed: int,
    epsilon: float = 0.1,
    mode: str = "basic",
    audit_samples: int = 20_000,
) -> list[tuple[int, TrialEstimate]]:
    """Run the Gaussian-designed scheme against non-Gaussian sources.

    Builds the scheme once per blocklength (seeded deterministically from
    `seed`), then estimates the maybe-probability under the given specs.
    The scheme stays d-admissible whatever the sources, so the estimates'
    false_negative_count must come back zero.
    """
    if not math.isclose(spec_x.variance, pair.sigma_x2, rel_tol=1e-12):
        raise PreconditionError("spec_x variance must match pair.sigma_x2")
    if not math.isclose(spec_y.variance, pair.sigma_y2, rel_tol=1e-12):
        raise PreconditionError("spec_y variance must match pair.sigma_y2")
    r_id = id_rate(pair, d)
    if not target_rate > r_id:
        raise PreconditionError(
            f"target_rate {target_rate} must exceed the identification rate {r_id:.6f}"
        )
    out = []
    for k, n in enumerate(n_list):
        plan = plan_scheme(pair, d, target_rate, n, epsilon, mode=mode)
        code = build_covering(
            n, pair.sigma_x2, plan.d0, seed + 1000 * (k + 1), audit_samples
        )
        est = estimate_maybe_probability(
            plan.config, code, spec_x, spec_y, trials, seed + k
        )
        out.append((n, est))
    return out
