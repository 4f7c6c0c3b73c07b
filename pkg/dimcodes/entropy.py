"""
Binary entropy calculus.
H and its inverse branch, the critical rate of a dimension, the envelope f,
the Worst(s, t) distance bound and the distance envelopes between dimensions.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from .exceptions import DomainError

# Inputs this close outside [0, 1] are float noise and get clamped
_SLACK = 1e-12
BRANCH_SLACK = 1e-12
BISECT_STEPS = 60


@dataclass(frozen=True)
class DimPair:
    s: float
    t: float

    def __post_init__(self):
        for name in ("s", "t"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name}={value} is not a dimension in [0, 1]")


@dataclass(frozen=True)
class CriticalProfile:
    """Critical rate data of a dimension s.

    ``ratio`` is None at s = 1, where c = 0 turns it into a 0/0 form.
    """

    s: float
    c: float
    t_star: float
    ratio: Optional[float]


def _unit(value: float, name: str, hi: float = 1.0) -> float:
    if value < -_SLACK or value > hi + _SLACK or math.isnan(value):
        raise DomainError(f"{name}={value} outside [0, {hi:g}]")
    return min(max(value, 0.0), hi)


def _sign(x: float) -> int:
    if x < 0:
        return -1
    elif x > 0:
        return +1
    return 0


def bisect_root(function: Callable[[float], float], lo: float, hi: float,
                num_steps: int = BISECT_STEPS) -> float:
    """
    Bisection for a sign change of ``function`` inside [lo, hi].

    Args:
        function: Continuous function with opposite signs (or a zero) at the ends
        lo: One end of the bracket
        hi: Other end of the bracket
        num_steps: Number of halvings before returning

    Returns:
        Midpoint of the final bracket, or an exact zero hit on the way
    """
    lo_sign = _sign(function(lo))
    hi_sign = _sign(function(hi))
    if lo_sign == 0:
        return lo
    if hi_sign == 0:
        return hi
    if lo_sign * hi_sign != -1:
        raise DomainError(f"no sign change on [{lo}, {hi}]")
    for _ in range(num_steps):
        middle = .5 * lo + .5 * hi
        middle_sign = _sign(function(middle))
        if middle_sign == 0:
            return middle
        if lo_sign != middle_sign:
            hi = middle
        else:
            lo = middle
            lo_sign = middle_sign
    return .5 * lo + .5 * hi


def entropy(p: float) -> float:
    """Binary entropy H(p) in bits, with H(0) = H(1) = 0."""
    p = _unit(p, "p")
    if p == 0.0 or p == 1.0:
        return 0.0
    q = 1.0 - p
    return -p * math.log2(p) - q * math.log2(q)


def entropy_inv(y: float) -> float:
    """The p in [0, 1/2] with H(p) = y."""
    y = _unit(y, "y")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    return bisect_root(lambda p: entropy(p) - y, 0.0, 0.5)


def critical_profile(s: float) -> CriticalProfile:
    """c = 1 - 2^(s-1), t* = 1 - H(c) and the benefit per change (s-1+H(c))/c."""
    s = _unit(s, "s")
    c = 1.0 - 2.0 ** (s - 1.0)
    h_c = entropy(c)
    ratio = (s - 1.0 + h_c) / c if c > 0.0 else None
    return CriticalProfile(s=s, c=c, t_star=1.0 - h_c, ratio=ratio)


def f_envelope(s: float, d: float) -> float:
    """Largest dimension drop per distance d (linear below c, entropic above)."""
    s = _unit(s, "s")
    d = _unit(d, "d", hi=0.5)
    profile = critical_profile(s)
    if d >= profile.c:
        return s - 1.0 + entropy(d)
    if profile.ratio is None:
        return 0.0
    return profile.ratio * d


def worst_distance(s: float, t: float) -> float:
    """Worst(s, t): how far a dimension-s sequence can sit from every dimension-t one."""
    s = _unit(s, "s")
    t = _unit(t, "t")
    if t > s + _SLACK:
        raise DomainError(f"worst_distance needs t <= s (got s={s}, t={t})")
    if t >= s:
        return 0.0
    profile = critical_profile(s)
    if t <= profile.t_star + BRANCH_SLACK:
        return entropy_inv(1.0 - t)
    return profile.c / (s - profile.t_star) * (s - t)


def worst_transition(s: float) -> Tuple[float, float]:
    """Case transition of Worst(s, .): the point (t*, c)."""
    profile = critical_profile(s)
    return profile.t_star, profile.c


def fig1_transition(t: float) -> Tuple[float, float]:
    """The s whose breakpoint t* equals ``t``, with Worst(s, t) there."""
    t = _unit(t, "t")
    c = entropy_inv(1.0 - t)
    s = 1.0 + math.log2(1.0 - c)
    return s, c


def bound_envelope(s: float, t: float) -> Tuple[float, float]:
    """(min, max) distance from a dimension-s sequence to the nearest dimension-t one."""
    s = _unit(s, "s")
    t = _unit(t, "t")
    if t >= s:
        return entropy_inv(t - s), entropy_inv(t) - entropy_inv(s)
    return entropy_inv(s - t), worst_distance(s, t)


def ternary_residual(a: float, b: float) -> float:
    """LHS - RHS of H(a) + a H((a-b)/a) = H(1-b) + (1-b) H((a-b)/(1-b))."""
    a = _unit(a, "a")
    b = _unit(b, "b")
    if a == 0.0 or b == 1.0:
        raise DomainError(f"ternary identity needs a > 0 and b < 1 (got a={a}, b={b})")
    if b > a + _SLACK:
        raise DomainError(f"ternary identity needs a >= b (got a={a}, b={b})")
    b = min(a, b)
    lhs = entropy(a) + a * entropy((a - b) / a)
    rhs = entropy(1.0 - b) + (1.0 - b) * entropy((a - b) / (1.0 - b))
    return lhs - rhs


def thinning_dimension(p: float) -> float:
    """Dimension of a half-density sequence thinned by a Bernoulli(2p) selection."""
    p = _unit(p, "p", hi=0.5)
    if p == 0.5:
        return 1.0
    return 1.0 + 0.5 * entropy(2.0 * p) - (1.0 - p) * entropy((0.5 - p) / (1.0 - p))


def interpolation_ratio(s: float, d: float) -> float:
    """Mix ratio that puts a codeword/thinning mixture at distance d from its base."""
    s = _unit(s, "s")
    if s >= 1.0:
        raise DomainError("interpolation_ratio needs s < 1")
    near = entropy_inv(1.0 - s)
    far = 0.5 - entropy_inv(s)
    if not near - _SLACK <= d <= far + _SLACK:
        raise DomainError(f"d={d} outside the reachable range [{near:.6g}, {far:.6g}]")
    if far <= near:
        return 0.0
    return min(1.0, max(0.0, (d - near) / (far - near)))
