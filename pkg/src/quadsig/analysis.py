"""Closed-form identification rate and exponent for memoryless Gaussian pairs.

Rates and exponents are in bits per symbol (base-2 logs); the chi-square
deviation exponent keeps its natural log inside, per its definition
E_Z(rho) = (rho - 1 - ln rho) / (2 ln 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError

__all__ = [
    "GaussianPair",
    "ExponentSolution",
    "TestChannel",
    "id_rate",
    "id_rate_symmetric",
    "chi_square_exponent",
    "angle_probability_exponent",
    "id_exponent",
    "id_exponent_symmetric",
    "similarity_exponent",
    "gaussian_test_channel",
    "test_channel_moments",
    "test_channel_rate_bound",
    "test_channel_constraint_gap",
]


@dataclass(frozen=True)
class GaussianPair:
    """Variances of the two independent i.i.d. Gaussian sources.

    Means are equal and irrelevant: the quadratic similarity measure is
    translation invariant.
    """

    sigma_x2: float
    sigma_y2: float

    def __post_init__(self):
        if not (self.sigma_x2 > 0.0 and math.isfinite(self.sigma_x2)):
            raise ValueError("sigma_x2 must be positive and finite")
        if not (self.sigma_y2 > 0.0 and math.isfinite(self.sigma_y2)):
            raise ValueError("sigma_y2 must be positive and finite")

    @property
    def swap(self) -> "GaussianPair":
        return GaussianPair(self.sigma_y2, self.sigma_x2)


@dataclass(frozen=True)
class ExponentSolution:
    """Value and minimizer of the identification-exponent program.

    The two boundary flags report whether the minimizer sits on the closure of
    either constraint: |sqrt(z1) - sqrt(z2)| = sqrt(d), or z1 + z2 = d, where
    z1 = rho_x * sigma_x2 and z2 = rho_y * sigma_y2.
    """

    value: float
    rho_x: float
    rho_y: float
    on_difference_boundary: bool = False
    on_sum_boundary: bool = False


@dataclass(frozen=True)
class TestChannel:
    """Scaled-and-noised channel x_hat = gain * sqrt(sigma_y/sigma_x) * x + z."""

    gain: float
    noise_var: float


def id_rate(pair: GaussianPair, d: float) -> float:
    """Identification rate in bits per symbol; may be math.inf.

    0 below the variance-mismatch floor, log2(2 s_x s_y / (s_x^2 + s_y^2 - d))
    in the middle regime, and infinite once similarity becomes typical.
    """
    if d < 0.0:
        raise ValueError("d must be nonnegative")
    sx = math.sqrt(pair.sigma_x2)
    sy = math.sqrt(pair.sigma_y2)
    if d < (sx - sy) ** 2:
        return 0.0
    if d >= pair.sigma_x2 + pair.sigma_y2:
        return math.inf
    return math.log2(2.0 * sx * sy / (pair.sigma_x2 + pair.sigma_y2 - d))


def id_rate_symmetric(sigma2: float, d: float) -> float:
    """Identification rate when both sources share variance sigma2."""
    return id_rate(GaussianPair(sigma2, sigma2), d)


def chi_square_exponent(rho: float) -> float:
    """Large-deviation rate, in bits, of a normalized chi-square at level rho.

    Nonnegative, convex, zero only at rho = 1.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    return (rho - 1.0 - math.log(rho)) / (2.0 * math.log(2.0))


def angle_probability_exponent(rate: float, d: float, z1: float, z2: float) -> float:
    """-log2 sin of the (clamped) reach angle arcsin(2^-rate) + law-of-cosines
    angle for squared radii z1, z2 at threshold d.  Zero when the sum clamps
    at pi/2.
    """
    if z1 <= 0.0 or z2 <= 0.0:
        raise DomainError("need z1, z2 > 0")
    c = (z1 + z2 - d) / (2.0 * math.sqrt(z1 * z2))
    if not -1.0 <= c <= 1.0:
        raise DomainError(f"arccos argument {c:.6g} outside [-1, 1]")
    ang = min(math.pi / 2, math.asin(2.0 ** (-rate)) + math.acos(c))
    return -math.log2(math.sin(ang))


def _exponent_objective(rate, d, z1, z2):
    """Vectorized objective E_Z + E_Z + angle term over arrays of squared radii."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    c = np.clip((z1 + z2 - d) / (2.0 * np.sqrt(z1 * z2)), -1.0, 1.0)
    ang = np.minimum(math.pi / 2, math.asin(2.0 ** (-rate)) + np.arccos(c))
    return -np.log2(np.sin(ang))


def _feasible(d, z1, z2):
    return (np.abs(np.sqrt(z1) - np.sqrt(z2)) <= math.sqrt(d)) & (z1 + z2 >= d)


_BOUNDARY_TOL = 1e-7


def id_exponent(
    pair: GaussianPair,
    d: float,
    rate: float,
    rho_max: float = 4.0,
    grid: int = 400,
) -> ExponentSolution:
    """Identification exponent: constrained 2-D minimum over scale factors
    (rho_x, rho_y) of the chi-square deviation costs plus the angular term.

    Dense [grid x grid] scan over (0, rho_max]^2 with the difference
    constraint treated as closed, followed by coordinate descent to 1e-8
    steps.  Objective accuracy ~1e-6 or better on smooth instances.
    """
    sx = math.sqrt(pair.sigma_x2)
    sy = math.sqrt(pair.sigma_y2)
    if not (sx - sy) ** 2 < d < pair.sigma_x2 + pair.sigma_y2:
        raise DomainError("need (sigma_x - sigma_y)^2 < d < sigma_x^2 + sigma_y^2")
    r_id = id_rate(pair, d)
    if not rate > r_id:
        raise PreconditionError(
            f"rate {rate} must exceed the identification rate {r_id:.6f}"
        )

    ez_grid = np.arange(1, grid + 1) * (rho_max / grid)
    ez_vals = (ez_grid - 1.0 - np.log(ez_grid)) / (2.0 * math.log(2.0))
    z1 = ez_grid[:, None] * pair.sigma_x2
    z2 = ez_grid[None, :] * pair.sigma_y2
    feas = _feasible(d, z1, z2)
    if not feas.any():
        raise RuntimeError("empty feasible grid; preconditions should prevent this")
    obj = ez_vals[:, None] + ez_vals[None, :] + _exponent_objective(rate, d, z1, z2)
    obj = np.where(feas, obj, np.inf)
    i, j = np.unravel_index(int(np.argmin(obj)), obj.shape)
    rx, ry = float(ez_grid[i]), float(ez_grid[j])

    def point_value(rx_, ry_):
        if rx_ <= 0.0 or ry_ <= 0.0 or rx_ > rho_max or ry_ > rho_max:
            return math.inf
        z1_, z2_ = rx_ * pair.sigma_x2, ry_ * pair.sigma_y2
        if not _feasible(d, np.float64(z1_), np.float64(z2_)):
            return math.inf
        return (
            chi_square_exponent(rx_)
            + chi_square_exponent(ry_)
            + float(_exponent_objective(rate, d, z1_, z2_))
        )

    best = point_value(rx, ry)
    step = rho_max / grid
    while step > 1e-8:
        moved = False
        for dx, dy in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
            v = point_value(rx + dx, ry + dy)
            if v < best:
                best, rx, ry = v, rx + dx, ry + dy
                moved = True
        if not moved:
            step /= 2.0

    z1_, z2_ = rx * pair.sigma_x2, ry * pair.sigma_y2
    diff_gap = math.sqrt(d) - abs(math.sqrt(z1_) - math.sqrt(z2_))
    sum_gap = (z1_ + z2_) - d
    return ExponentSolution(
        value=best,
        rho_x=rx,
        rho_y=ry,
        on_difference_boundary=diff_gap <= _BOUNDARY_TOL * math.sqrt(d),
        on_sum_boundary=sum_gap <= _BOUNDARY_TOL * max(d, 1.0),
    )


def id_exponent_symmetric(sigma2: float, d: float, rate: float) -> ExponentSolution:
    """Identification exponent for equal variances: 1-D minimization over the
    common scale factor rho in [d/(2 sigma2), 1].
    """
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    if not 0.0 < d < 2.0 * sigma2:
        raise DomainError("need 0 < d < 2*sigma2")
    r_id = id_rate_symmetric(sigma2, d)
    if not rate > r_id:
        raise PreconditionError(
            f"rate {rate} must exceed the identification rate {r_id:.6f}"
        )

    lo = d / (2.0 * sigma2)
    hi = 1.0

    def f(rho):
        z = rho * sigma2
        return 2.0 * chi_square_exponent(rho) + float(
            _exponent_objective(rate, d, z, z)
        )

    rhos = np.linspace(lo, hi, 4001)
    zs = rhos * sigma2
    ez = (rhos - 1.0 - np.log(rhos)) / (2.0 * math.log(2.0))
    vals = 2.0 * ez + _exponent_objective(rate, d, zs, zs)
    k = int(np.argmin(vals))
    a = rhos[max(0, k - 1)]
    b = rhos[min(len(rhos) - 1, k + 1)]

    # golden-section refinement on the bracketing interval
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1, f2 = f(c1), f(c2)
    while b - a > 1e-12:
        if f1 < f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = f(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = f(c2)
    rho_star = (a + b) / 2.0
    value = f(rho_star)
    z = rho_star * sigma2
    return ExponentSolution(
        value=value,
        rho_x=rho_star,
        rho_y=rho_star,
        on_difference_boundary=False,
        on_sum_boundary=(2.0 * z - d) <= _BOUNDARY_TOL * max(d, 1.0),
    )


def similarity_exponent(pair: GaussianPair, d: float) -> float:
    """Exponential decay rate, in bits, of the probability that two
    independent draws are d-similar."""
    total = pair.sigma_x2 + pair.sigma_y2
    if not 0.0 < d <= total:
        raise DomainError("need 0 < d <= sigma_x2 + sigma_y2")
    return chi_square_exponent(d / total)


def gaussian_test_channel(sigma_x: float, sigma_y: float, d: float) -> TestChannel:
    """Explicit Gaussian channel meeting the admissibility constraint with
    equality and achieving the identification rate as its mutual-information
    bound.

    Arguments are standard deviations, not variances.
    """
    if sigma_x <= 0.0 or sigma_y <= 0.0:
        raise ValueError("standard deviations must be positive")
    if d <= (sigma_x - sigma_y) ** 2:
        raise DomainError("noise variance pole: need d > (sigma_x - sigma_y)^2")
    if d > sigma_x**2 + sigma_y**2:
        raise DomainError("need d <= sigma_x^2 + sigma_y^2")
    gain = ((sigma_x + sigma_y) ** 2 - d) / (2.0 * sigma_x * sigma_y)
    noise_var = (
        ((sigma_x + sigma_y) ** 2 - d)
        * (sigma_x**2 + sigma_y**2 - d) ** 2
        / (4.0 * sigma_x * sigma_y * (d - (sigma_x - sigma_y) ** 2))
    )
    return TestChannel(gain=gain, noise_var=noise_var)


def test_channel_moments(
    channel: TestChannel, sigma_x: float, sigma_y: float
) -> tuple[float, float]:
    """Square-root second moments (cross side, own side) of the channel:
    sqrt(E[(sqrt(sx/sy) Y - Xhat)^2]) and sqrt(E[(sqrt(sy/sx) X - Xhat)^2]).
    """
    rho, sz2 = channel.gain, channel.noise_var
    cross = math.sqrt(sigma_x * sigma_y * (1.0 + rho * rho) + sz2)
    own = math.sqrt(sigma_x * sigma_y * (1.0 - rho) ** 2 + sz2)
    return cross, own


def test_channel_rate_bound(
    channel: TestChannel, sigma_x: float, sigma_y: float
) -> float:
    """Mutual-information upper bound (1/2) log2((gain^2 sx sy + sz2) / sz2)."""
    rho, sz2 = channel.gain, channel.noise_var
    if sz2 <= 0.0:
        return math.inf
    return 0.5 * math.log2((rho * rho * sigma_x * sigma_y + sz2) / sz2)


def test_channel_constraint_gap(
    sigma_x: float, sigma_y: float, d: float, lhs: float, rhs: float
) -> float:
    """Slack lhs - rhs - sqrt(d - (sigma_x - sigma_y)^2) of the admissibility
    constraint for caller-supplied moment roots; nonnegative means admissible.
    """
    if d < (sigma_x - sigma_y) ** 2:
        raise DomainError("need d >= (sigma_x - sigma_y)^2")
    return lhs - rhs - math.sqrt(d - (sigma_x - sigma_y) ** 2)
