"""Signature assignment and query with zero false negatives by construction.

A signature names a covering-code center plus an amplitude shell; the cell of
every non-erasure signature is contained in a known thick cap, so the query
can answer "no" exactly when the whole cap is farther than sqrt(n*d) from the
query point.  Anything atypical, out of range, or not captured by the covering
degrades to the erasure symbol, which always answers "maybe".

Two modes:
  basic       one amplitude shell (the typical shell of half-width eta);
              everything outside it is erased.
  shape_gain  amplitude quantized into shells of equal per-symbol variance
              step eta up to sigma_max2 = n * sigma_x2; only amplitudes above
              that are erased.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .analysis import GaussianPair, id_rate
from .covering import CoveringCode
from .errors import DomainError, PreconditionError
from .geometry import CapSpec, expansion_cone_angle

__all__ = [
    "SchemeConfig",
    "Signature",
    "ERASURE",
    "Verdict",
    "SchemePlan",
    "assign_signature",
    "assign_many",
    "query",
    "query_many",
    "cell_cap",
    "rate_of",
    "plan_scheme",
    "save_scheme",
    "load_scheme",
]


@dataclass(frozen=True)
class SchemeConfig:
    n: int
    d: float
    sigma_x2: float
    eta: float
    mode: str = "basic"
    sigma_max2: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.d <= 0.0:
            raise ValueError("d must be positive")
        if self.sigma_x2 <= 0.0:
            raise ValueError("sigma_x2 must be positive")
        if self.mode not in ("basic", "shape_gain"):
            raise ValueError("mode must be 'basic' or 'shape_gain'")
        if self.mode == "basic":
            if not 0.0 < self.eta < self.sigma_x2:
                raise ValueError("basic mode needs 0 < eta < sigma_x2")
        else:
            if self.eta <= 0.0:
                raise ValueError("shape_gain mode needs eta > 0")
            if self.sigma_max2 is None:
                object.__setattr__(self, "sigma_max2", self.n * self.sigma_x2)
            if self.sigma_max2 <= 0.0:
                raise ValueError("sigma_max2 must be positive")

    @property
    def num_shells(self) -> int:
        if self.mode == "basic":
            return 1
        return int(math.ceil(self.sigma_max2 / self.eta))

    def shell_radii(self, index: int) -> tuple[float, float]:
        """(inner, outer) radius of amplitude shell `index`."""
        if self.mode == "basic":
            if index != 0:
                raise ValueError("basic mode has a single shell, index 0")
            return (
                math.sqrt(self.n * (self.sigma_x2 - self.eta)),
                math.sqrt(self.n * (self.sigma_x2 + self.eta)),
            )
        if not 0 <= index < self.num_shells:
            raise ValueError(f"shell index {index} out of range")
        return (
            math.sqrt(self.n * index * self.eta),
            math.sqrt(self.n * (index + 1) * self.eta),
        )


@dataclass(frozen=True)
class Signature:
    """Covering-center index plus amplitude-shell index, or the erasure symbol."""

    center_index: int | None = None
    shell_index: int | None = None

    @property
    def is_erasure(self) -> bool:
        return self.center_index is None


ERASURE = Signature()


class Verdict(Enum):
    NO = "no"
    MAYBE = "maybe"


@dataclass(frozen=True)
class SchemePlan:
    """plan_scheme output: the config plus the covering target and the
    geometry that certifies the construction."""

    config: SchemeConfig
    d0: float
    theta0: float
    theta1: float
    theta_prime: float
    predicted_rate: float


def assign_signature(config: SchemeConfig, code: CoveringCode, x) -> Signature:
    """Map x to (nearest center, amplitude shell), or to the erasure symbol.

    Erasure triggers when the amplitude is out of range for the mode, or when
    the nearest center sits farther than theta0 (a covering gap).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (config.n,):
        raise ValueError(f"expected a vector of dimension {config.n}")
    centers_idx, shells, erased = assign_many(config, code, x[None, :])
    if erased[0]:
        return ERASURE
    return Signature(center_index=int(centers_idx[0]), shell_index=int(shells[0]))


def cell_cap(config: SchemeConfig, code: CoveringCode, sig: Signature) -> CapSpec:
    """Thick cap certified to contain the cell of a non-erasure signature."""
    if sig.is_erasure:
        raise ValueError("the erasure symbol has no cell cap")
    inner, outer = config.shell_radii(sig.shell_index)
    return CapSpec(
        axis=code.centers[sig.center_index],
        half_angle=code.theta0,
        inner_radius=inner,
        outer_radius=outer,
    )


def query(config: SchemeConfig, code: CoveringCode, sig: Signature, y) -> Verdict:
    """Exact admissible query: "no" only when every point of the signature's
    cap is farther than sqrt(n*d) from y."""
    y = np.asarray(y, dtype=float)
    if y.shape != (config.n,):
        raise ValueError(f"expected a vector of dimension {config.n}")
    if sig.is_erasure:
        return Verdict.MAYBE
    maybe = query_many(
        config,
        code,
        np.array([sig.center_index]),
        np.array([sig.shell_index]),
        np.array([False]),
        y[None, :],
    )
    return Verdict.MAYBE if maybe[0] else Verdict.NO


_SAMPLE_BATCH = 8192
_CENTER_CHUNK = 512


def _nearest_many(code: CoveringCode, units: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(index, cosine) of the nearest center for each unit row.

    Center-chunked with reused buffers; ties break to the lowest index
    because only strictly larger cosines replace the incumbent.
    """
    m = units.shape[0]
    idx = np.zeros(m, dtype=np.int64)
    best = np.full(m, -2.0)
    buf = np.empty((_CENTER_CHUNK, min(m, _SAMPLE_BATCH)))
    for lo in range(0, m, _SAMPLE_BATCH):
        hi = min(m, lo + _SAMPLE_BATCH)
        block_t = units[lo:hi].T
        b = hi - lo
        cols = np.arange(b)
        for clo in range(0, code.size, _CENTER_CHUNK):
            k = min(_CENTER_CHUNK, code.size - clo)
            if b == buf.shape[1]:
                np.dot(code._units[clo : clo + k], block_t, out=buf[:k])
                cos = buf[:k]
            else:
                cos = np.dot(code._units[clo : clo + k], block_t)
            loc = np.argmax(cos, axis=0)
            val = cos[loc, cols]
            upd = val > best[lo:hi]
            idx[lo:hi][upd] = clo + loc[upd]
            best[lo:hi][upd] = val[upd]
    return idx, best


def assign_many(
    config: SchemeConfig, code: CoveringCode, X: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized assign_signature over the rows of X.

    Returns (center_idx, shell_idx, erased); center/shell entries are
    meaningless where erased is set.
    """
    X = np.asarray(X, dtype=float)
    m = X.shape[0]
    norm2 = np.einsum("ij,ij->i", X, X)
    s2 = norm2 / config.n
    if config.mode == "basic":
        erased = (s2 < config.sigma_x2 - config.eta) | (
            s2 > config.sigma_x2 + config.eta
        )
        shells = np.zeros(m, dtype=np.int64)
    else:
        erased = s2 > config.sigma_max2
        shells = np.minimum(
            np.floor(s2 / config.eta).astype(np.int64), config.num_shells - 1
        )
    erased |= norm2 == 0.0

    norms = np.sqrt(np.where(norm2 > 0.0, norm2, 1.0))
    centers_idx, cos_best = _nearest_many(code, X / norms[:, None])
    erased |= cos_best < code.cos_theta0
    return centers_idx, shells, erased


def query_many(
    config: SchemeConfig,
    code: CoveringCode,
    centers_idx: np.ndarray,
    shells_idx: np.ndarray,
    erased: np.ndarray,
    Y: np.ndarray,
) -> np.ndarray:
    """Vectorized query over signature/query-point rows; True means maybe."""
    Y = np.asarray(Y, dtype=float)
    m = Y.shape[0]
    maybe = np.ones(m, dtype=bool)
    live = np.flatnonzero(~np.asarray(erased, dtype=bool))
    if live.size == 0:
        return maybe
    s = np.linalg.norm(Y[live], axis=1)
    s_safe = np.where(s > 0.0, s, 1.0)
    axes = code._units[centers_idx[live]]
    cosb = np.einsum("ij,ij->i", Y[live] / s_safe[:, None], axes)
    beta = np.arccos(np.clip(cosb, -1.0, 1.0))
    beta = np.where(s > 0.0, beta, 0.0)
    delta = np.maximum(beta - code.theta0, 0.0)

    if config.mode == "basic":
        inner = np.full(live.size, math.sqrt(config.n * (config.sigma_x2 - config.eta)))
        outer = np.full(live.size, math.sqrt(config.n * (config.sigma_x2 + config.eta)))
    else:
        si = shells_idx[live].astype(float)
        inner = np.sqrt(config.n * si * config.eta)
        outer = np.sqrt(config.n * (si + 1.0) * config.eta)
    r = np.clip(s * np.cos(delta), inner, outer)
    d2 = s * s + r * r - 2.0 * s * r * np.cos(delta)
    dist = np.sqrt(np.maximum(d2, 0.0))
    maybe[live] = dist <= math.sqrt(config.n * config.d)
    return maybe


def rate_of(config: SchemeConfig, code: CoveringCode) -> float:
    """Signature rate in bits per symbol, counting the erasure symbol."""
    if config.mode == "basic":
        return math.log2(code.size + 1) / config.n
    return math.log2(code.size * config.num_shells + 1) / config.n


def plan_scheme(
    pair: GaussianPair,
    d: float,
    target_rate: float,
    n: int,
    epsilon: float,
    mode: str = "basic",
) -> SchemePlan:
    """Choose the shell half-width eta and covering distortion d0 for a
    d-admissible scheme at blocklength n.

    eta is the largest value in (0, sigma_x2/4] keeping the shrunken
    law-of-cosines bracket above (1 - epsilon) of its eta = 0 value; d0 is the
    midpoint of ((1 - epsilon) sigma_x2 b^2, sigma_x2 b^2) for that bracket b.
    The resulting cone angle theta0 + theta1 is provably below pi/2.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    sx = math.sqrt(pair.sigma_x2)
    sy = math.sqrt(pair.sigma_y2)
    if not (sx - sy) ** 2 < d < pair.sigma_x2 + pair.sigma_y2:
        raise DomainError("need (sigma_x - sigma_y)^2 < d < sigma_x2 + sigma_y2")
    r_id = id_rate(pair, d)
    if not target_rate > r_id:
        raise PreconditionError(
            f"target_rate {target_rate} must exceed the identification rate {r_id:.6f}"
        )

    def bracket(eta: float) -> float:
        return (pair.sigma_x2 + pair.sigma_y2 - 2.0 * eta - d) / (
            2.0 * math.sqrt((pair.sigma_x2 + eta) * (pair.sigma_y2 + eta))
        )

    b0 = bracket(0.0)
    floor = (1.0 - epsilon) * b0 * b0
    eta_hi = pair.sigma_x2 / 4.0
    if bracket(eta_hi) > 0.0 and bracket(eta_hi) ** 2 > floor:
        eta = eta_hi
    else:
        lo, hi = 0.0, eta_hi
        for _ in range(200):
            mid = (lo + hi) / 2.0
            if bracket(mid) > 0.0 and bracket(mid) ** 2 > floor:
                lo = mid
            else:
                hi = mid
        eta = lo * (1.0 - 1e-12)
    if eta <= 0.0:
        raise RuntimeError("no feasible eta; preconditions should prevent this")

    b = bracket(eta)
    d0 = (1.0 - epsilon / 2.0) * pair.sigma_x2 * b * b
    theta0 = math.asin(math.sqrt(d0 / pair.sigma_x2))
    expansion = expansion_cone_angle(d, pair.sigma_x2, pair.sigma_y2, eta, theta0)
    if not expansion.acute:
        raise RuntimeError("cone angle reached pi/2; construction invariant broken")

    config = SchemeConfig(
        n=n,
        d=d,
        sigma_x2=pair.sigma_x2,
        eta=eta,
        mode=mode,
        sigma_max2=n * pair.sigma_x2 if mode == "shape_gain" else None,
    )
    predicted = 0.5 * math.log2(pair.sigma_x2 / d0)
    if mode == "shape_gain":
        predicted += math.log2(config.num_shells) / n
    if predicted > target_rate:
        raise PreconditionError(
            f"predicted rate {predicted:.6f} exceeds target {target_rate:.6f}; "
            "raise the target rate or adjust epsilon (smaller epsilon tightens "
            "the covering term, larger epsilon coarsens the amplitude shells)"
        )
    return SchemePlan(
        config=config,
        d0=d0,
        theta0=theta0,
        theta1=expansion.theta1,
        theta_prime=expansion.theta_prime,
        predicted_rate=predicted,
    )


def save_scheme(config: SchemeConfig, code: CoveringCode, path) -> None:
    """Persist a scheme config alongside its covering code in one JSON file."""
    scheme_part = {
        "n": config.n,
        "d": config.d,
        "sigma_x2": config.sigma_x2,
        "eta": config.eta,
        "mode": config.mode,
        "sigma_max2": config.sigma_max2,
        "d0": code.d0,
    }
    covering_part = {
        "n": code.n,
        "sigma2": code.sigma2,
        "d0": code.d0,
        "seed": code.seed,
        "centers": code.centers.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"scheme": scheme_part, "covering": covering_part}, fh)
        fh.write("\n")


def load_scheme(path) -> tuple[SchemeConfig, CoveringCode]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    s = payload["scheme"]
    config = SchemeConfig(
        n=int(s["n"]),
        d=s["d"],
        sigma_x2=s["sigma_x2"],
        eta=s["eta"],
        mode=s["mode"],
        sigma_max2=s["sigma_max2"],
    )
    c = payload["covering"]
    code = CoveringCode(
        n=int(c["n"]),
        sigma2=c["sigma2"],
        d0=c["d0"],
        centers=np.asarray(c["centers"], dtype=float),
        seed=c.get("seed"),
    )
    return config, code
