"""Codes that cover a sphere shell with balls, built by greedy random sampling.

Center placement: every center sits at radius sqrt(n (sigma2 - d0)) so that
its ball of radius sqrt(n d0) carves the largest possible cap out of the shell
of radius sqrt(n sigma2); a shell point is then covered iff its angle to some
center is at most theta0 = arcsin(sqrt(d0 / sigma2)).

The builder cannot certify complete coverage the way an explicit covering
construction can; the consuming scheme treats any uncovered direction as an
erasure, so coverage gaps cost extra maybe-mass, never correctness.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import cap_fraction_bounds

__all__ = [
    "CoveringCode",
    "CoveringReport",
    "build_covering",
    "verify_covering",
    "nearest_center",
    "save_covering",
    "load_covering",
    "predicted_size_bounds",
    "overhead_budget",
]

_BATCH = 8192  # fixed so the sample stream is reproducible
_CENTER_CHUNK = 512  # keeps the cosine workspace small and reused


def _max_cos(units: np.ndarray, m: int, block: np.ndarray, buf, best) -> np.ndarray:
    """Max cosine of each block row against the first m unit centers.

    Chunks over centers into a preallocated (chunk, batch) buffer; fresh
    allocation of the full cosine matrix dominates runtime otherwise.
    """
    block_t = block.T
    b = block.shape[0]
    full = b == buf.shape[1]
    out = best[:b]
    out.fill(-2.0)
    for lo in range(0, m, _CENTER_CHUNK):
        k = min(_CENTER_CHUNK, m - lo)
        if full:
            np.dot(units[lo : lo + k], block_t, out=buf[:k])
            chunk_max = buf[:k].max(axis=0)
        else:  # partial tail block; out= needs a contiguous buffer
            chunk_max = np.dot(units[lo : lo + k], block_t).max(axis=0)
        np.maximum(out, chunk_max, out=out)
    return out


@dataclass(frozen=True)
class CoveringCode:
    """Set of centers whose cover balls blanket the shell of radius sqrt(n*sigma2)."""

    n: int
    sigma2: float
    d0: float
    centers: np.ndarray
    seed: int | None = None
    _units: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.d0 < self.sigma2:
            raise ValueError("need 0 < d0 < sigma2")
        centers = np.asarray(self.centers, dtype=float)
        if centers.ndim != 2 or centers.shape[1] != self.n or centers.shape[0] < 1:
            raise ValueError("centers must be a nonempty (m, n) array")
        norms = np.linalg.norm(centers, axis=1)
        if not np.allclose(norms, self.center_norm, rtol=1e-9, atol=0.0):
            raise ValueError(
                "every center must have norm sqrt(n * (sigma2 - d0))"
            )
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "_units", centers / norms[:, None])

    @property
    def size(self) -> int:
        return self.centers.shape[0]

    @property
    def shell_radius(self) -> float:
        return math.sqrt(self.n * self.sigma2)

    @property
    def cover_radius(self) -> float:
        return math.sqrt(self.n * self.d0)

    @property
    def center_norm(self) -> float:
        return math.sqrt(self.n * (self.sigma2 - self.d0))

    @property
    def theta0(self) -> float:
        return math.asin(math.sqrt(self.d0 / self.sigma2))

    @property
    def cos_theta0(self) -> float:
        return math.sqrt((self.sigma2 - self.d0) / self.sigma2)

    @property
    def rate(self) -> float:
        return math.log2(self.size) / self.n


@dataclass(frozen=True)
class CoveringReport:
    rate: float
    bound: float
    overhead_budget: float
    sampled_coverage: float
    samples: int

    def __post_init__(self):
        if not 0.0 <= self.sampled_coverage <= 1.0:
            raise ValueError("sampled_coverage must lie in [0, 1]")
        if self.rate < 0.0:
            raise ValueError("rate must be nonnegative")


def overhead_budget(n: int) -> float:
    """Engineering slack allowed on top of the half-log rate bound."""
    return (3.0 * math.log2(n) + 10.0) / n


def predicted_size_bounds(n: int, sigma2: float, d0: float) -> tuple[float, float]:
    """(min, max) plausible center counts from the cap-fraction bounds.

    The minimum is certified (no covering can use fewer than 1/upper caps);
    the maximum is the reciprocal lower bound, an optimistic ceiling only.
    """
    theta0 = math.asin(math.sqrt(d0 / sigma2))
    b = cap_fraction_bounds(theta0, n)
    return 1.0 / b.upper, 1.0 / b.lower


def build_covering(
    n: int, sigma2: float, d0: float, seed: int, audit_samples: int = 100_000
) -> CoveringCode:
    """Greedy-incremental covering of the shell of radius sqrt(n sigma2).

    Repeatedly samples uniform shell points; any sample farther than
    sqrt(n d0) from all current centers becomes a new center direction.
    Stops once `audit_samples` consecutive samples land covered.
    Deterministic given (n, sigma2, d0, seed, audit_samples).
    """
    if n < 2:
        raise ValueError("dimension must be at least 2")
    if not 0.0 < d0 < sigma2:
        raise ValueError("need 0 < d0 < sigma2")
    if audit_samples < 1:
        raise ValueError("audit_samples must be at least 1")

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    cos_thr = math.sqrt((sigma2 - d0) / sigma2)
    cap = 1024
    units = np.empty((cap, n))
    buf = np.empty((_CENTER_CHUNK, _BATCH))
    best = np.empty(_BATCH)
    m = 0
    consec = 0
    done = False
    while not done:
        block = rng.standard_normal((_BATCH, n))
        block /= np.linalg.norm(block, axis=1, keepdims=True)
        if m:
            covered = _max_cos(units, m, block, buf, best) >= cos_thr
            misses = np.flatnonzero(~covered)
        else:
            misses = np.arange(_BATCH)
        start_m = m
        pos = 0
        for i in misses:
            run = int(i) - pos
            if consec + run >= audit_samples:
                done = True
                break
            consec += run
            # re-check against centers added earlier in this same batch
            if m > start_m and (units[start_m:m] @ block[i]).max() >= cos_thr:
                consec += 1
                if consec >= audit_samples:
                    done = True
                    break
            else:
                consec = 0
                if m == cap:
                    cap *= 2
                    grown = np.empty((cap, n))
                    grown[:m] = units[:m]
                    units = grown
                units[m] = block[i]
                m += 1
            pos = int(i) + 1
        if not done:
            run = _BATCH - pos
            if consec + run >= audit_samples:
                done = True
            else:
                consec += run

    centers = units[:m] * math.sqrt(n * (sigma2 - d0))
    return CoveringCode(n=n, sigma2=sigma2, d0=d0, centers=centers, seed=seed)


def verify_covering(code: CoveringCode, samples: int, seed: int) -> CoveringReport:
    """Empirical coverage check on fresh uniform shell samples."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    cos_thr = code.cos_theta0
    buf = np.empty((_CENTER_CHUNK, _BATCH))
    best = np.empty(_BATCH)
    covered = 0
    remaining = samples
    while remaining > 0:
        b = min(_BATCH, remaining)
        block = rng.standard_normal((b, code.n))
        block /= np.linalg.norm(block, axis=1, keepdims=True)
        cos = _max_cos(code._units, code.size, block, buf, best)
        covered += int((cos >= cos_thr).sum())
        remaining -= b
    return CoveringReport(
        rate=code.rate,
        bound=0.5 * math.log2(code.sigma2 / code.d0),
        overhead_budget=overhead_budget(code.n),
        sampled_coverage=covered / samples,
        samples=samples,
    )


def nearest_center(code: CoveringCode, x) -> tuple[int, float]:
    """Index of the center nearest the radial projection of x onto the shell,
    plus the angle to it.  Ties break to the lowest index; all centers share a
    norm, so nearest-on-shell is the same as smallest angle.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (code.n,):
        raise ValueError(f"expected a vector of dimension {code.n}")
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise ValueError("x must be nonzero")
    cos = code._units @ (x / norm)
    idx = int(np.argmax(cos))
    return idx, math.acos(min(1.0, max(-1.0, float(cos[idx]))))


def save_covering(code: CoveringCode, path) -> None:
    """Write the code as self-describing JSON; floats round-trip exactly."""
    payload = {
        "n": code.n,
        "sigma2": code.sigma2,
        "d0": code.d0,
        "seed": code.seed,
        "centers": code.centers.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_covering(path) -> CoveringCode:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return CoveringCode(
        n=int(payload["n"]),
        sigma2=payload["sigma2"],
        d0=payload["d0"],
        centers=np.asarray(payload["centers"], dtype=float),
        seed=payload.get("seed"),
    )
