"""Core domain types for the market-selection game.

A market holds M investors competing for the payoffs of N short-lived
assets.  Wealth is tracked in absolute units (``Y``), as a market total
(``W``) and as relative shares (``r``).  Everything downstream (payoff
models, strategies, engines, diagnostics) builds on the small set of
validated value types defined here.

Tolerance policy: structural identities (weights summing to one, shares
of a unit) are enforced at 1e-12 absolute; quantities accumulated along
paths of ~1e4 steps drift more and are checked at 1e-9 relative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

SUM_ATOL = 1e-12
PATH_RTOL = 1e-9

# Norms below this are treated as exactly zero when normalizing, so that
# denormal inputs cannot blow up the division.
NORM_FLOOR = 1e-300


class DomainError(ValueError):
    """A domain-type invariant was violated."""


def as_vector(x, name: str) -> np.ndarray:
    """Coerce to a finite 1-d float array or raise DomainError."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must contain only finite values")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SimplexVector:
    """A point of the standard simplex: non-negative weights summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = as_vector(self.weights, "weights")
        if w.size == 0:
            raise DomainError("simplex vector needs at least one component")
        if np.any(w < 0.0):
            raise DomainError("simplex components must be non-negative")
        if abs(w.sum() - 1.0) > SUM_ATOL:
            raise DomainError(f"simplex components must sum to 1, got {w.sum()!r}")
        object.__setattr__(self, "weights", _freeze(w))

    def __len__(self) -> int:
        return self.weights.size

    def __getitem__(self, idx):
        return self.weights[idx]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)

    @classmethod
    def _trusted(cls, weights: np.ndarray) -> "SimplexVector":
        # Fast path for weights that are valid by construction (already
        # normalized from validated non-negative inputs).
        obj = object.__new__(cls)
        object.__setattr__(obj, "weights", weights)
        return obj


def make_simplex(raw) -> SimplexVector:
    """Normalize a non-negative vector onto the simplex.

    A vector with (numerically) zero total mass maps to the uniform
    weights ``(1/N, ..., 1/N)``, which is the degenerate branch used when
    a strategy has nothing to normalize.
    """
    arr = as_vector(raw, "raw")
    if arr.size == 0:
        raise DomainError("cannot normalize an empty vector")
    if np.any(arr < 0.0):
        raise DomainError("components must be non-negative")
    total = float(arr.sum())
    if total < NORM_FLOOR:
        return SimplexVector._trusted(_freeze(np.full(arr.size, 1.0 / arr.size)))
    out = arr / total
    out.flags.writeable = False
    return SimplexVector._trusted(out)


def divergence_rows(alpha: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Gibbs divergence of ``alpha`` from each row of ``rows``.

    Returns sum_n alpha_n (ln alpha_n - ln rows_{k,n}) for every row k,
    with the 0*ln 0 terms on {alpha_n = 0} dropped and +inf where a row
    has a zero component that alpha does not share.  No input validation;
    callers own that.
    """
    rows = np.atleast_2d(rows)
    pos = alpha > 0.0
    if not np.any(pos):
        return np.zeros(rows.shape[0])
    a = alpha[pos]
    b = rows[:, pos]
    bad = np.any(b <= 0.0, axis=1)
    safe = np.where(b > 0.0, b, 1.0)
    out = (a * (np.log(a) - np.log(safe))).sum(axis=1)
    out[bad] = np.inf
    return out


@dataclass(frozen=True)
class MarketSpec:
    """Static description of a market: sizes, initial wealth, payoff model."""

    num_investors: int
    num_assets: int
    initial_wealth: np.ndarray
    payoff_model: Any = None

    def __post_init__(self):
        object.__setattr__(self, "num_investors", int(self.num_investors))
        object.__setattr__(self, "num_assets", int(self.num_assets))
        object.__setattr__(
            self, "initial_wealth", _freeze(np.asarray(self.initial_wealth, dtype=float))
        )


def validate_market(spec: MarketSpec) -> list[str]:
    """Report invariant violations of a market spec (empty list when valid)."""
    violations = []
    if spec.num_investors < 2:
        violations.append("at least 2 investors required")
    if spec.num_assets < 2:
        violations.append("at least 2 assets required")
    y0 = np.asarray(spec.initial_wealth, dtype=float)
    if y0.ndim != 1 or y0.size != spec.num_investors:
        violations.append(
            f"initial wealth must list one value per investor "
            f"(got {y0.size}, expected {spec.num_investors})"
        )
    if not np.all(np.isfinite(y0)):
        violations.append("initial wealth must be finite")
    elif np.any(y0 <= 0.0):
        violations.append("initial wealth must be strictly positive")
    if spec.payoff_model is None:
        violations.append("a payoff model is required")
    return violations


@dataclass(frozen=True)
class WealthState:
    """Snapshot of the market at one instant: absolute, total and relative wealth."""

    time: float
    wealth: np.ndarray
    total: float
    rel: np.ndarray

    def __post_init__(self):
        y = as_vector(self.wealth, "wealth")
        r = as_vector(self.rel, "rel")
        w = float(self.total)
        if w <= 0.0:
            raise DomainError("total wealth must be positive")
        if abs(y.sum() - w) > 1e-10 * w:
            raise DomainError("total wealth does not match the sum of investor wealth")
        if np.any(r <= 0.0):
            raise DomainError("relative wealth must be strictly positive")
        if abs(r.sum() - 1.0) > SUM_ATOL:
            raise DomainError("relative wealth must sum to 1")
        object.__setattr__(self, "wealth", _freeze(y))
        object.__setattr__(self, "rel", _freeze(r))
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "total", w)

    @classmethod
    def from_wealth(cls, time: float, wealth) -> "WealthState":
        y = as_vector(wealth, "wealth")
        w = float(y.sum())
        return cls(time=time, wealth=y, total=w, rel=y / w)


@dataclass(frozen=True)
class PayoffEvent:
    """One realized increment of the payoff environment.

    ``dx`` is the payoff delivered per asset over the step (currency
    units), ``dv`` the matching consumption increment.  ``is_jump``
    distinguishes an actual payoff event from a continuous-rate segment
    between events; the strict ``dv < 1`` bound applies only to jumps.
    """

    time: float
    dx: np.ndarray
    dv: float
    is_jump: bool = True

    def __post_init__(self):
        dx = as_vector(self.dx, "dx")
        if np.any(dx < 0.0):
            raise DomainError("payoff increments must be non-negative")
        dv = float(self.dv)
        if not np.isfinite(dv) or dv < 0.0:
            raise DomainError("consumption increment must be finite and >= 0")
        if self.is_jump and dv >= 1.0:
            raise DomainError("consumption jump must be < 1")
        object.__setattr__(self, "dx", _freeze(dx))
        object.__setattr__(self, "dv", dv)
        object.__setattr__(self, "time", float(self.time))


@dataclass
class Trajectory:
    """Recorded path of one simulation run.

    Index k runs over recorded states (k = 0 is the initial state); the
    event arrays describe the interval between record k and record k+1.
    ``pressure`` is the selection-pressure clock (the integral of
    |claim + drift| / W against operational time), ``gap_integral`` the
    per-investor Gibbs-gap integral against it, and ``closeness`` the
    per-investor integral of the squared distance to the survival
    candidate.  ``z_cont``/``z_jump`` hold the increments of the
    total-wealth log-exponent used for reconstruction checks, and
    ``retention`` the pure-consumption wealth floor factor.
    """

    mode: str
    times: np.ndarray
    wealth: np.ndarray
    total: np.ndarray
    rel: np.ndarray
    dx: np.ndarray
    dv: np.ndarray
    is_jump: np.ndarray
    cum_x: np.ndarray
    cum_v: np.ndarray
    retention: np.ndarray
    pressure: np.ndarray
    gap_integral: np.ndarray
    closeness: np.ndarray
    weights: np.ndarray
    candidate: np.ndarray
    z_cont: np.ndarray
    z_jump: np.ndarray
    support_violations: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def num_investors(self) -> int:
        return self.wealth.shape[1]

    @property
    def num_assets(self) -> int:
        return self.dx.shape[1] if self.dx.ndim == 2 else 0

    @property
    def n_records(self) -> int:
        return self.times.size - 1

    def state_at(self, k: int) -> WealthState:
        return WealthState(
            time=self.times[k], wealth=self.wealth[k], total=self.total[k], rel=self.rel[k]
        )

    def event_at(self, k: int) -> PayoffEvent:
        # Discrete records are pure payoff events.  Continuous records
        # aggregate a rate segment with a possible terminal jump, so they
        # map to segment events (the raw flag lives in ``is_jump[k]``).
        return PayoffEvent(
            time=self.times[k + 1],
            dx=self.dx[k],
            dv=self.dv[k],
            is_jump=bool(self.is_jump[k]) and self.mode == "discrete",
        )

    def exponent_increments(self):
        """Per-interval (continuous, jump) increments of ln W's driving process."""
        return list(zip(self.z_cont.tolist(), self.z_jump.tolist()))

    def validate(self) -> list[str]:
        """Check recording invariants; returns a list of violations."""
        violations = []
        if np.any(np.diff(self.times) <= 0.0):
            violations.append("record times must be strictly increasing")
        if np.any(self.wealth <= 0.0):
            violations.append("wealth must stay strictly positive")
        if np.any(self.rel <= 0.0):
            violations.append("relative wealth must stay strictly positive")
        for name in ("pressure", "gap_integral", "closeness"):
            arr = getattr(self, name)
            # an accumulator stuck at +inf differences to nan; that is not
            # a monotonicity violation
            with np.errstate(invalid="ignore"):
                if np.any(np.diff(arr, axis=0) < -SUM_ATOL):
                    violations.append(f"{name} must be non-decreasing")
        if np.any(np.diff(self.cum_x, axis=0) < 0.0) or np.any(np.diff(self.cum_v) < 0.0):
            violations.append("cumulative payoff/consumption must be non-decreasing")
        return violations
