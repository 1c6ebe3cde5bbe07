"""Empirical upper/lower densities of time sets, Phi profiles and running
ergodic averages.

Counting is exact: counts and horizons stay integers, ratios are
``fractions.Fraction`` until the reporting boundary. The limsup/liminf of
count(S cap [1,n])/n is replaced by the max/min over a geometric checkpoint
grid beyond a burn-in; that finite-horizon surrogate is the only
approximation in this module.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import PolicyError, ValidationError

DEFAULT_CHECKPOINT_RATIO = 1.05


def default_burn_in(horizon: int) -> int:
    return max(100, horizon // 1000)


@dataclass(frozen=True)
class CheckpointPolicy:
    """Geometric checkpoint grid from burn-in to the horizon.

    burn_in=None defers to max(100, N/1000) at evaluation time.
    """

    burn_in: int | None = None
    ratio: float = DEFAULT_CHECKPOINT_RATIO

    def __post_init__(self):
        if self.burn_in is not None and self.burn_in < 1:
            raise PolicyError("burn-in must be >= 1")
        if self.ratio <= 1.0:
            raise PolicyError("checkpoint ratio must be > 1")

    def resolve_burn_in(self, horizon: int) -> int:
        return self.burn_in if self.burn_in is not None else default_burn_in(horizon)

    def checkpoints(self, horizon: int) -> list[int]:
        burn = self.resolve_burn_in(horizon)
        if horizon < burn:
            raise PolicyError(
                f"horizon {horizon} below burn-in {burn}: no checkpoints"
            )
        pts = []
        x = burn
        while x < horizon:
            pts.append(x)
            x = max(int(x * self.ratio), x + 1)
        pts.append(horizon)
        return sorted(set(pts))

    def descriptor(self, horizon: int) -> tuple:
        """Identity token used to detect mismatched-policy comparisons."""
        return (self.resolve_burn_in(horizon), self.ratio, horizon)


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing times in [1, horizon]."""

    times: np.ndarray
    horizon: int

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.int64)
        object.__setattr__(self, "times", t)
        if self.horizon < 1:
            raise ValidationError("horizon must be >= 1")
        if t.size:
            if t[0] < 1 or t[-1] > self.horizon:
                raise ValidationError("times must lie in [1, horizon]")
            if np.any(np.diff(t) <= 0):
                raise ValidationError("times must be strictly increasing")

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "IndexSet":
        mask = np.asarray(mask, dtype=bool)
        return cls(np.flatnonzero(mask) + 1, mask.size)

    def count_upto(self, n: int) -> int:
        return int(np.searchsorted(self.times, n, side="right"))

    def complement(self) -> "IndexSet":
        mask = np.zeros(self.horizon, dtype=bool)
        mask[self.times - 1] = True
        return IndexSet.from_mask(~mask)

    def __len__(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True)
class DensityEstimate:
    upper: Fraction
    lower: Fraction
    checkpoints: tuple[int, ...]
    burn_in: int
    count_at_horizon: int = 0

    def __post_init__(self):
        if not (0 <= self.lower <= self.upper <= 1):
            raise ValidationError("need 0 <= lower <= upper <= 1")

    @property
    def upper_float(self) -> float:
        return float(self.upper)

    @property
    def lower_float(self) -> float:
        return float(self.lower)

    @property
    def gap(self) -> Fraction:
        return self.upper - self.lower


def _ratios_at_checkpoints(s: IndexSet, cps: Sequence[int]) -> list[Fraction]:
    counts = np.searchsorted(s.times, np.asarray(cps, dtype=np.int64), side="right")
    return [Fraction(int(c), int(n)) for c, n in zip(counts, cps)]


def empirical_density(s: IndexSet, policy: CheckpointPolicy = CheckpointPolicy()) -> DensityEstimate:
    """max/min of count(s cap [1,n])/n over the policy's checkpoint grid."""
    cps = policy.checkpoints(s.horizon)
    ratios = _ratios_at_checkpoints(s, cps)
    return DensityEstimate(
        upper=max(ratios),
        lower=min(ratios),
        checkpoints=tuple(cps),
        burn_in=policy.resolve_burn_in(s.horizon),
        count_at_horizon=s.count_upto(s.horizon),
    )


def density_along(s: IndexSet, checkpoints: Iterable[int], which: str = "lower") -> Fraction:
    """Density achieved along an explicit checkpoint subsequence.

    which="lower" takes the min of count/n over the given checkpoints (the
    density achieved as a liminf along the subsequence), "upper" the max.
    """
    cps = sorted(set(int(n) for n in checkpoints))
    if not cps:
        raise PolicyError("empty checkpoint subsequence")
    if cps[0] < 1 or cps[-1] > s.horizon:
        raise PolicyError("checkpoints must lie in [1, horizon]")
    ratios = _ratios_at_checkpoints(s, cps)
    if which == "lower":
        return min(ratios)
    if which == "upper":
        return max(ratios)
    raise ValidationError(f"which must be lower|upper, got {which!r}")


@dataclass(frozen=True)
class DistanceSeries:
    """Per-time separation values of an orbit pair; values in [0, diameter]."""

    values: np.ndarray
    diameter: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if self.diameter <= 0:
            raise ValidationError("diameter must be > 0")
        if v.size == 0:
            raise ValidationError("distance series must be nonempty")
        if np.isnan(v).any():
            raise ValidationError("distances must not contain NaN")
        if float(v.min()) < 0 or float(v.max()) > self.diameter:
            raise ValidationError("distances must lie in [0, diameter]")

    @property
    def horizon(self) -> int:
        return int(self.values.size)

    def below(self, t: float) -> IndexSet:
        """Times n with d_n < t."""
        return IndexSet.from_mask(self.values < t)


def default_threshold_grid(diameter: float = 1.0, points: int = 16) -> np.ndarray:
    """Logarithmic grid from diameter*2^-16 up to the diameter; the smallest
    point stands in for the t -> 0+ limit."""
    return np.geomspace(diameter * 2.0**-16, diameter, points)


@dataclass(frozen=True)
class PhiProfile:
    """Empirical Phi*(t) (upper density of {n: d_n < t}) and Phi(t) (lower)
    on a threshold grid."""

    thresholds: np.ndarray
    estimates: tuple[DensityEstimate, ...]
    horizon: int
    policy_descriptor: tuple = field(default=())

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=np.float64)
        object.__setattr__(self, "thresholds", t)
        if t.size == 0 or np.any(np.diff(t) <= 0):
            raise ValidationError("threshold grid must be strictly increasing")
        if t[0] <= 0:
            raise ValidationError("smallest threshold must be > 0")
        if len(self.estimates) != t.size:
            raise ValidationError("one estimate per threshold required")
        stars = self.phi_star
        lows = self.phi_lower
        if np.any(np.diff(stars) < 0) or np.any(np.diff(lows) < 0):
            raise ValidationError("Phi profiles must be nondecreasing in t")
        if np.any(lows > stars):
            raise ValidationError("Phi must not exceed Phi* anywhere")

    @property
    def phi_star(self) -> np.ndarray:
        return np.array([e.upper_float for e in self.estimates])

    @property
    def phi_lower(self) -> np.ndarray:
        return np.array([e.lower_float for e in self.estimates])

    @property
    def counts_at_horizon(self) -> np.ndarray:
        return np.array([e.count_at_horizon for e in self.estimates], dtype=np.int64)


def phi_profile(
    d: DistanceSeries,
    grid: np.ndarray | None = None,
    policy: CheckpointPolicy = CheckpointPolicy(),
) -> PhiProfile:
    if grid is None:
        grid = default_threshold_grid(d.diameter)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0 or grid[0] <= 0:
        raise PolicyError("threshold grid must start above 0")
    if np.any(np.diff(grid) <= 0):
        raise PolicyError("threshold grid must be strictly increasing")
    estimates = tuple(empirical_density(d.below(t), policy) for t in grid)
    return PhiProfile(
        thresholds=grid,
        estimates=estimates,
        horizon=d.horizon,
        policy_descriptor=policy.descriptor(d.horizon),
    )


@dataclass(frozen=True)
class BesicovitchBounds:
    """min/max of the running mean of the distance over the checkpoint grid;
    unpacks as (low, high)."""

    low: Fraction | float
    high: Fraction | float
    policy_descriptor: tuple = ()

    def __iter__(self):
        return iter((self.low, self.high))


def besicovitch_bounds(
    d: DistanceSeries, policy: CheckpointPolicy = CheckpointPolicy()
) -> BesicovitchBounds:
    """Running-mean extrema of the distance series; exact Fractions for
    integer-valued series, floats otherwise."""
    cps = policy.checkpoints(d.horizon)
    v = d.values
    rounded = np.rint(v)
    if np.array_equal(v, rounded):
        cum = np.cumsum(rounded.astype(np.int64))
        means = [Fraction(int(cum[n - 1]), n) for n in cps]
    else:
        cum = np.cumsum(v)
        means = [float(cum[n - 1] / n) for n in cps]
    return BesicovitchBounds(min(means), max(means), policy.descriptor(d.horizon))
