"""Closed-form schedule parameter derivations.

Given instance sizes (m, n), a failure budget delta, and an approximation
slack eps, these functions derive the cooling parameter ell, the freeze-out
factor a, the drift-phase length t_base, the optimal phase-stretch gamma
(via Lambert W), the resulting approximation bound 1+kappa, and the stopping
step. All are pure double-precision functions of their arguments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import ConstraintViolation, DomainError, NegativeArgument

_LOG_DBL_MAX = math.log(1.7976931348623157e308)


def lambert_w0(x: float) -> float:
    """Principal branch of w * e^w = x for x >= 0.

    Halley iteration from the initial guess ln(1+x), run to a fixed
    relative tolerance of 1e-14. The back-substitution residual and the
    bracketing bounds are pinned by tests.
    """
    x = float(x)
    if x < 0.0:
        raise NegativeArgument(f"lambert_w0 needs x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    w = math.log1p(x)
    for _ in range(80):
        ew = math.exp(w)
        f = w * ew - x
        # Halley step: f' = e^w (1+w), f'' = e^w (2+w)
        step = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0))
        w -= step
        if abs(step) <= 1e-14 * max(1.0, abs(w)):
            return w
    return w


def t_base(m: int, n: int, delta: float) -> float:
    """Drift-phase length 4.21 * m * n * ln(2 m^2 / delta)."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must be in (0,1), got {delta!r}")
    if m < 1 or n < 2:
        raise DomainError(f"need m >= 1 and n >= 2, got m={m}, n={n}")
    return 4.21 * m * n * math.log(2.0 * m * m / delta)


def ell_from_eps(m: int, n: int, delta: float, eps: float) -> float:
    """Cooling parameter (m n ln(m/delta))^(1 + 1/eps).

    The vanishing exponent correction of the asymptotic statement is
    dropped; downstream statistical gates carry explicit slack instead.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must be in (0,1), got {delta!r}")
    if eps <= 0.0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if m / delta <= 1.0:
        raise DomainError(f"m/delta must exceed 1, got {m / delta!r}")
    base = m * n * math.log(m / delta)
    if base <= 1.0:
        raise DomainError(f"m*n*ln(m/delta) must exceed 1, got {base!r}")
    return base ** (1.0 + 1.0 / eps)


def optimal_gamma(ell: float, tb: float) -> float:
    """The gamma minimizing the 1+kappa bound: exp(W((ell-1)/t_base))."""
    if ell <= 2.0:
        raise DomainError(f"ell must exceed 2, got {ell!r}")
    if tb <= 0.0:
        raise DomainError(f"t_base must be positive, got {tb!r}")
    return math.exp(lambert_w0((ell - 1.0) / tb))


def kappa_bound(a: float, gamma: float, ell: float, tb: float) -> float:
    """The approximation factor 1+kappa = a * exp(gamma*t_base/(ell-1)) / ln(gamma)."""
    if gamma <= 1.0:
        raise DomainError(f"gamma must exceed 1, got {gamma!r}")
    if a <= 1.0:
        raise DomainError(f"a must exceed 1, got {a!r}")
    if ell <= 2.0:
        raise DomainError(f"ell must exceed 2, got {ell!r}")
    if tb <= 0.0:
        raise DomainError(f"t_base must be positive, got {tb!r}")
    return a * math.exp(gamma * tb / (ell - 1.0)) / math.log(gamma)


def freeze_out_a(ell: float, delta: float) -> float:
    """Smallest admissible freeze-out factor, ln(4(ell-1)/delta).

    Warns (and still returns) when the result exceeds ell-1, where the
    freeze-out guarantee stops applying; callers flag such runs as
    out-of-regime.
    """
    if ell <= 1.0:
        raise DomainError(f"ell must exceed 1, got {ell!r}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must be in (0,1), got {delta!r}")
    a = math.log(4.0 * (ell - 1.0) / delta)
    if a > ell - 1.0:
        warnings.warn(
            ConstraintViolation(
                f"freeze-out factor a={a:.6g} exceeds ell-1={ell - 1.0:.6g}; "
                "the one-sided inclusion guarantee does not apply"
            ),
            stacklevel=2,
        )
    return a


def _check_t_end_domain(ell: float, a: float, t0: float, w_min: float) -> None:
    if ell <= 1.0:
        raise DomainError(f"ell must exceed 1, got {ell!r}")
    if t0 <= 0.0 or w_min <= 0.0:
        raise DomainError("t0 and w_min must be positive")
    if a * t0 <= w_min:
        raise DomainError(
            f"a*t0={a * t0!r} <= w_min={w_min!r}: temperature starts below freeze-out"
        )


def t_end_bound(ell: float, a: float, t0: float, w_min: float) -> float:
    """The half-ell closed form (ell/2) * ln(a*t0/w_min).

    This quantity underestimates the exact freeze-out step (by a factor
    approaching 2 as ell grows), so runners budget with t_end_exact; the
    closed form is kept for reporting and comparisons.
    """
    _check_t_end_domain(ell, a, t0, w_min)
    return (ell / 2.0) * math.log(a * t0 / w_min)


def t_end_exact(ell: float, a: float, t0: float, w_min: float) -> float:
    """Exact real solution of t0 * (1-1/ell)^t = w_min/a.

    The earliest time the temperature reaches the lightest edge's
    freeze-out threshold; callers take the ceiling for a step budget.
    """
    _check_t_end_domain(ell, a, t0, w_min)
    return math.log(w_min / (a * t0)) / math.log1p(-1.0 / ell)


@dataclass(frozen=True)
class WegenerSchedule:
    """Legacy comparison schedule: t0 = 2^m with a fixed polynomial budget."""

    t0: float
    beta: float
    max_steps: float


def wegener_schedule(m: int, eps: float, w_max: float | None = None) -> WegenerSchedule:
    """The predecessor schedule (t0, beta, step budget) for comparison runs.

    t0 = 2^m, beta = (1+eps/2)^(-m^(-7-8/eps)), and the budget is
    2 * m^(8+8/eps) / log2(1+eps/2), returned real-valued for the caller
    to ceil. Raises OverflowError when 2^m or m^(8+8/eps) leaves double
    range. Passing the instance's w_max warns when it exceeds 2^m, the
    weight cap this schedule's guarantees assume.
    """
    if m < 2:
        raise DomainError(f"need m >= 2, got {m}")
    if eps <= 0.0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if w_max is not None and math.log(w_max) > m * math.log(2.0):
        warnings.warn(
            ConstraintViolation(
                f"w_max={w_max!r} exceeds 2^{m}; the legacy schedule's "
                "guarantees assume weights up to 2^m"
            ),
            stacklevel=2,
        )
    if m * math.log(2.0) >= _LOG_DBL_MAX:
        raise OverflowError(f"2^{m} exceeds double range")
    power = 8.0 + 8.0 / eps
    if power * math.log(m) >= _LOG_DBL_MAX:
        raise OverflowError(f"m^{power!r} exceeds double range")
    t0 = 2.0 ** m
    base = 1.0 + eps / 2.0
    beta = base ** (-(m ** (-7.0 - 8.0 / eps)))
    max_steps = 2.0 * m ** power / math.log2(base)
    return WegenerSchedule(t0=t0, beta=beta, max_steps=max_steps)


@dataclass(frozen=True)
class ScheduleParams:
    """Every derived quantity for one (instance, delta, eps) configuration."""

    m: int
    n: int
    delta: float
    eps: float
    ell: float
    a: float
    t_base: float
    gamma: float
    one_plus_kappa: float
    t0: float
    w_min: float
    w_max: float
    t_end_bound: float
    t_end_exact: float
    b: float
    out_of_regime: bool = field(default=False)

    @property
    def kappa(self) -> float:
        return self.one_plus_kappa - 1.0

    @property
    def beta(self) -> float:
        return 1.0 - 1.0 / self.ell

    @property
    def t_end(self) -> float:
        """The stopping step callers ceil; the exact freeze-out solution."""
        return self.t_end_exact

    @property
    def max_steps(self) -> int:
        return math.ceil(self.t_end_exact)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "delta": self.delta,
            "eps": self.eps,
            "ell": self.ell,
            "a": self.a,
            "t_base": self.t_base,
            "gamma": self.gamma,
            "one_plus_kappa": self.one_plus_kappa,
            "kappa": self.kappa,
            "beta": self.beta,
            "t0": self.t0,
            "w_min": self.w_min,
            "w_max": self.w_max,
            "b": self.b,
            "t_end_bound": self.t_end_bound,
            "t_end_exact": self.t_end_exact,
            "max_steps": self.max_steps,
            "out_of_regime": self.out_of_regime,
        }


def derive_schedule(
    m: int,
    n: int,
    delta: float,
    eps: float,
    w_min: float,
    w_max: float,
    t0: float | None = None,
    ell: float | None = None,
    a: float | None = None,
) -> ScheduleParams:
    """Derive the full schedule, allowing explicit ell/a/t0 overrides.

    Defaults: ell from ell_from_eps, a at its admissible lower bound, and
    t0 = w_max. Overrides below the admissible ranges trigger a
    ConstraintViolation warning and mark the result out-of-regime rather
    than failing, so comparison experiments stay expressible.
    """
    if not 0.0 < w_min <= w_max:
        raise DomainError(f"need 0 < w_min <= w_max, got {w_min!r}, {w_max!r}")
    if t0 is None:
        t0 = w_max
    if t0 < w_max:
        raise DomainError(f"t0={t0!r} must be at least w_max={w_max!r}")
    if ell is None:
        ell = ell_from_eps(m, n, delta, eps)
    if ell <= 2.0:
        raise DomainError(f"ell must exceed 2, got {ell!r}")
    tb = t_base(m, n, delta)
    a_floor = freeze_out_a(ell, delta)
    if a is None:
        a = a_floor
    elif a < a_floor:
        warnings.warn(
            ConstraintViolation(
                f"a={a:.6g} is below the admissible floor {a_floor:.6g}; "
                "freeze-out guarantees do not apply"
            ),
            stacklevel=2,
        )
    out_of_regime = not (1.0 < a <= ell - 1.0) or a < a_floor
    gamma = optimal_gamma(ell, tb)
    one_plus_kappa = kappa_bound(a, gamma, ell, tb)
    return ScheduleParams(
        m=m,
        n=n,
        delta=delta,
        eps=eps,
        ell=ell,
        a=a,
        t_base=tb,
        gamma=gamma,
        one_plus_kappa=one_plus_kappa,
        t0=t0,
        w_min=w_min,
        w_max=w_max,
        t_end_bound=t_end_bound(ell, a, t0, w_min),
        t_end_exact=t_end_exact(ell, a, t0, w_min),
        b=(ell - 1.0) / tb,
        out_of_regime=out_of_regime,
    )
