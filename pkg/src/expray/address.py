"""External addresses, the shift, and the growth model F(t) = exp(t) - 1.

Two finitely describable families of integer sequences are supported:

* ``EventuallyPeriodic(preamble, period)`` -- ``preamble`` followed by
  ``period`` repeated forever.  Always slow, with minimal potential 0.
* ``FastGenerator(x, sign, prefix, drop)`` -- ``prefix`` followed by
  ``sign * floor(F**(j)(x) / 2pi)`` for ``j = drop, drop + 1, ...``.
  Always fast; its minimal potential is ``F**(drop - len(prefix))(x)``.

Address literals::

    p:1,2|3,4        preamble 1,2 then period 3,4 (preamble may be empty: p:|0)
    f:2.0            FastGenerator(x=2, sign=+1)
    f:-2.0           FastGenerator(x=2, sign=-1)
    f:0,3|1.0@2      prefix 0,3 then the generator for x=1 with two leading
                     generator entries dropped
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import NamedTuple, Union

from .errors import AddressSyntaxError, OverflowDepth

TWO_PI = 2.0 * math.pi

# Iterates of F above this are reported as OverflowDepth.
R_CAP = 1e100
# exp(t) overflows a double just above this.
EXP_MAX = 709.78
K_MAX_DEFAULT = 60


# --------------------------------------------------------------------------
# growth model
# --------------------------------------------------------------------------

def growth_F(t: float) -> float:
    """F(t) = exp(t) - 1, accurate near 0."""
    if t < 0:
        raise ValueError(f"growth_F needs t >= 0, got {t!r}")
    if t > EXP_MAX:
        raise OverflowDepth(f"exp({t!r}) is not representable", level=1)
    return math.expm1(t)


def growth_F_iter(t: float, n: int, cap: float = R_CAP) -> float:
    """n-th iterate of F; raises OverflowDepth at the first iterate above ``cap``."""
    if t < 0 or n < 0:
        raise ValueError("growth_F_iter needs t >= 0 and n >= 0")
    for i in range(1, n + 1):
        if t > EXP_MAX:
            raise OverflowDepth(f"F^{i}({t!r}) overflows", level=i)
        t = math.expm1(t)
        if t > cap:
            raise OverflowDepth(f"F^{i} exceeds cap {cap:g}", level=i)
    return t


def growth_F_inv(u: float) -> float:
    return math.log1p(u)


def growth_F_inv_iter(u: float, n: int) -> float:
    """n-th iterate of F^{-1}(u) = log(1 + u)."""
    if u < 0 or n < 0:
        raise ValueError("growth_F_inv_iter needs u >= 0 and n >= 0")
    for _ in range(n):
        u = math.log1p(u)
    return u


def growth_levels(t: float, n: int, cap: float = R_CAP) -> list[float]:
    """``[t, F(t), ..., F^m(t)]`` for the largest ``m <= n`` staying below ``cap``."""
    out = [t]
    for _ in range(n):
        if t > EXP_MAX:
            break
        t = math.expm1(t)
        if t > cap:
            break
        out.append(t)
    return out


def log_growth(t: float, n: int, cap: float = R_CAP) -> float:
    """log(F^n(t)) for n >= 1, needing only F^(n-1)(t) to be representable."""
    if n == 0:
        return math.log(t) if t > 0 else -math.inf
    u = growth_F_iter(t, n - 1, cap)
    if u == 0:
        return -math.inf
    if u > 30.0:
        return u + math.log1p(-math.exp(-u))
    return math.log(math.expm1(u))


# --------------------------------------------------------------------------
# addresses
# --------------------------------------------------------------------------

class SpeedClass(enum.Enum):
    SLOW = "slow"
    FAST = "fast"
    UNDETERMINED = "undetermined"


def _int_tuple(values) -> tuple[int, ...]:
    out = []
    for v in values:
        if isinstance(v, bool) or int(v) != v:
            raise ValueError(f"address entries must be integers, got {v!r}")
        out.append(int(v))
    return tuple(out)


@dataclass(frozen=True)
class EventuallyPeriodic:
    preamble: tuple[int, ...] = ()
    period: tuple[int, ...] = (0,)

    def __post_init__(self):
        object.__setattr__(self, "preamble", _int_tuple(self.preamble))
        object.__setattr__(self, "period", _int_tuple(self.period))
        if not self.period:
            raise ValueError("period must be nonempty")

    def entry(self, k: int, cap: float = R_CAP) -> int:
        if k < 1:
            raise ValueError(f"entries are indexed from 1, got {k}")
        if k <= len(self.preamble):
            return self.preamble[k - 1]
        return self.period[(k - 1 - len(self.preamble)) % len(self.period)]

    def shift(self) -> EventuallyPeriodic:
        if self.preamble:
            return EventuallyPeriodic(self.preamble[1:], self.period)
        return EventuallyPeriodic((), self.period[1:] + self.period[:1])

    def prepend(self, k: int) -> EventuallyPeriodic:
        return EventuallyPeriodic((k,) + self.preamble, self.period)

    def negate(self) -> EventuallyPeriodic:
        return EventuallyPeriodic(tuple(-a for a in self.preamble),
                                  tuple(-a for a in self.period))

    def literal(self) -> str:
        return "p:" + ",".join(map(str, self.preamble)) + "|" + ",".join(map(str, self.period))

    def __str__(self):
        return self.literal()


@dataclass(frozen=True)
class FastGenerator:
    x: float
    sign: int = 1
    prefix: tuple[int, ...] = ()
    drop: int = 0

    def __post_init__(self):
        x = float(self.x)
        if not (x > 0 and math.isfinite(x)):
            raise ValueError(f"FastGenerator needs a finite x > 0, got {self.x!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.drop < 0:
            raise ValueError("drop must be nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "prefix", _int_tuple(self.prefix))
        object.__setattr__(self, "drop", int(self.drop))

    def generator_level(self, k: int) -> int:
        """Iterate count j with s_k = sign * floor(F^j(x) / 2pi), for k past the prefix."""
        return k - 1 - len(self.prefix) + self.drop

    def entry(self, k: int, cap: float = R_CAP) -> int:
        if k < 1:
            raise ValueError(f"entries are indexed from 1, got {k}")
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        y = growth_F_iter(self.x, self.generator_level(k), cap)
        return self.sign * math.floor(y / TWO_PI)

    def shift(self) -> FastGenerator:
        if self.prefix:
            return FastGenerator(self.x, self.sign, self.prefix[1:], self.drop)
        return FastGenerator(self.x, self.sign, (), self.drop + 1)

    def prepend(self, k: int) -> FastGenerator:
        return FastGenerator(self.x, self.sign, (k,) + self.prefix, self.drop)

    def negate(self) -> FastGenerator:
        return FastGenerator(self.x, -self.sign, tuple(-a for a in self.prefix), self.drop)

    def literal(self) -> str:
        head = ",".join(map(str, self.prefix)) + "|" if self.prefix else ""
        tail = f"@{self.drop}" if self.drop else ""
        return f"f:{head}{self.sign * self.x!r}{tail}"

    def __str__(self):
        return self.literal()


ExternalAddress = Union[EventuallyPeriodic, FastGenerator]


def entry(s: ExternalAddress, k: int, cap: float = R_CAP) -> int:
    return s.entry(k, cap)


def shift(s: ExternalAddress) -> ExternalAddress:
    return s.shift()


def entry_log_magnitude(s: ExternalAddress, k: int, cap: float = R_CAP) -> float:
    """log(2pi |s_k|), or -inf for a zero entry.

    Works one level beyond what :func:`entry` can materialize: for a generator
    entry whose F-iterate exceeds ``cap`` the value is taken from the previous
    iterate, since log(2pi floor(F(u)/2pi)) = u up to a relative error below
    exp(-u).
    """
    try:
        e = s.entry(k, cap)
    except OverflowDepth:
        if not isinstance(s, FastGenerator):
            raise
        return log_growth(s.x, s.generator_level(k), cap)
    return math.log(TWO_PI * abs(e)) if e else -math.inf


# --------------------------------------------------------------------------
# minimal potential and speed
# --------------------------------------------------------------------------

class PotentialBound(NamedTuple):
    t_s: float
    exact: bool
    delta: float


def _inverse_coordinate(s: FastGenerator, k: int, cap: float) -> float:
    """F^{-(k-1)}(2pi |s_k|) without materializing s_k when it is huge."""
    if k <= len(s.prefix):
        return growth_F_inv_iter(TWO_PI * abs(s.prefix[k - 1]), k - 1)
    j = s.generator_level(k)
    levels = growth_levels(s.x, j, cap)
    top = len(levels) - 1
    if top == j:
        return growth_F_inv_iter(TWO_PI * math.floor(levels[j] / TWO_PI), k - 1)
    # F^{-1}(F^{top+1}(x) - r) == F^top(x) to double precision once F^top(x) > log(cap)
    remaining = (k - 1) - (j - top)
    if remaining < 0:
        raise OverflowDepth(f"minimal potential of {s} is beyond {cap:g}", level=-remaining)
    return growth_F_inv_iter(levels[top], remaining)


def potential_bound(s: ExternalAddress, k_max: int = K_MAX_DEFAULT,
                    cap: float = R_CAP) -> PotentialBound:
    """Estimate t_s = limsup F^{-(k-1)}(2pi|s_k|).

    Eventually periodic addresses have t_s = 0 exactly.  For generator forms the
    limsup is approximated by the maximum over k in [k_max/2, k_max]; ``delta``
    bounds how far that window can sit below the limit.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if isinstance(s, EventuallyPeriodic):
        return PotentialBound(0.0, True, 0.0)
    k_lo = max(1, k_max // 2)
    est = max(_inverse_coordinate(s, k, cap) for k in range(k_lo, k_max + 1))
    # width of (F^{-n}(F^n(x) - 2pi), x] is about 2pi / (F^n)'(x), with log (F^n)' = sum F^i(x)
    n = max(0, k_lo - 1 - len(s.prefix))
    levels = growth_levels(est, n, cap)
    delta = TWO_PI * math.exp(-sum(levels[:n])) if len(levels) > n else 0.0
    delta = max(delta, 4.0 * math.ulp(est))
    return PotentialBound(est, False, delta)


def classify_speed(s: ExternalAddress) -> SpeedClass:
    if isinstance(s, EventuallyPeriodic):
        return SpeedClass.SLOW
    if isinstance(s, FastGenerator):
        return SpeedClass.FAST
    return SpeedClass.UNDETERMINED


# --------------------------------------------------------------------------
# literals
# --------------------------------------------------------------------------

_INTS = r"(?:[+-]?\d+(?:,[+-]?\d+)*)?"
_P_RE = re.compile(rf"^p:({_INTS})\|({_INTS})$")
_F_RE = re.compile(rf"^f:(?:({_INTS})\|)?([^@|]+)(?:@(\d+))?$")


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(a) for a in text.split(",")) if text else ()


def parse_address(text: str) -> ExternalAddress:
    """Parse an address literal (see module docstring)."""
    text = text.strip().replace(" ", "")
    m = _P_RE.match(text)
    if m:
        period = _parse_ints(m.group(2))
        if not period:
            raise AddressSyntaxError(f"{text!r}: period must be nonempty")
        return EventuallyPeriodic(_parse_ints(m.group(1)), period)
    m = _F_RE.match(text)
    if m:
        try:
            x = float(m.group(2))
        except ValueError:
            raise AddressSyntaxError(f"{text!r}: bad generator value") from None
        if x == 0 or not math.isfinite(x):
            raise AddressSyntaxError(f"{text!r}: generator value must be finite and nonzero")
        return FastGenerator(abs(x), 1 if x > 0 else -1,
                             _parse_ints(m.group(1) or ""), int(m.group(3) or 0))
    raise AddressSyntaxError(f"cannot parse address literal {text!r}")


def format_address(s: ExternalAddress) -> str:
    return s.literal()
