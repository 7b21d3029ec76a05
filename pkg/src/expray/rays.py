"""Dynamic rays g_s^kappa(t) by pulling back along logarithm branches.

A ray point is the end of a backward chain

    z_{k-1} = Log(z_k - kappa) + 2 pi i s_k,      k = N, ..., 1,

seeded at a level N where the ray is indistinguishable from its asymptote.
The seed is taken one level deeper than the chain itself and evaluated in
log coordinates,

    z_N = Log(F^{N+1}(t) + 2 pi i s_{N+2} - kappa) + 2 pi i s_{N+1}
        = T + log1p(-(1 + kappa) e^{-T} + i 2 pi s_{N+2} e^{-T}) + 2 pi i s_{N+1},

with T = F^N(t), so F^{N+1}(t) and s_{N+2} never need to be materialized.
This matters for fast addresses near t_s, where 2 pi s_{N+2} is comparable to
F^{N+1}(t) and the naive seed is off by O(1).  The kappa-derivative follows
the same chain: d_{k-1} = (d_k - 1) / (z_k - kappa).
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from .address import (EXP_MAX, TWO_PI, ExternalAddress, SpeedClass, classify_speed,
                      entry_log_magnitude, potential_bound)
from .errors import DomainError, NoConvergence, OverflowDepth, SingularHit

# Working cap for pullback seeds; F^N(t) up to here keeps z_N - kappa representable.
PULLBACK_CAP = 1e300
MAX_DEPTH = 256
TOL_SING = 1e-12
EPS = 1e-9
DOMAIN_TOL = 1e-12
# Largest change of arg(z_k - kappa) accepted between neighbouring trace points.
MAX_ARG_STEP = math.pi / 2
MIN_T_STEP = 1e-13


@functools.lru_cache(maxsize=4096)
def minimal_potential(s: ExternalAddress) -> float:
    return potential_bound(s).t_s


def check_domain(s: ExternalAddress, t: float, tol: float = DOMAIN_TOL) -> None:
    """Raise DomainError unless t lies in X_s (open for slow, closed for fast)."""
    t_s = minimal_potential(s)
    if classify_speed(s) is SpeedClass.FAST:
        if not t >= t_s - tol:
            raise DomainError(f"t = {t!r} is below t_s = {t_s!r} for fast address {s}")
    elif not t > t_s:
        raise DomainError(f"t = {t!r} must exceed t_s = {t_s!r} for slow address {s}")


def clog1p(u: complex) -> complex:
    """Principal log(1 + u), accurate for small |u|."""
    x, y = u.real, u.imag
    return complex(0.5 * math.log1p(2.0 * x + x * x + y * y), math.atan2(y, 1.0 + x))


class _Plan(NamedTuple):
    """Everything about a pullback that does not depend on kappa."""
    depth: int
    levels: tuple[float, ...]       # F^k(t), k = 0..depth
    branches: tuple[int, ...]       # s_1..s_{depth+1}
    seed_log: tuple[float, float]   # (sign, log 2pi|s_{depth+2}|)


def _sign_of_entry(s: ExternalAddress, k: int, cap: float) -> int:
    """Sign of s_k, available even where s_k itself overflows."""
    try:
        e = s.entry(k, cap)
    except OverflowDepth:
        return s.sign
    return (e > 0) - (e < 0)


def _plan(s: ExternalAddress, t: float, depth_hint: int, cap: float) -> _Plan:
    """Deepest admissible seed level: F^N(t) <= cap, s_{N+1} exact, log|s_{N+2}| known."""
    levels = [t]
    branches = []
    seed_log = None
    while True:
        n = len(levels) - 1
        try:
            e = s.entry(n + 1, cap)
            lm = entry_log_magnitude(s, n + 2, cap)
            sign = _sign_of_entry(s, n + 2, cap) if lm > -math.inf else 0
        except OverflowDepth:
            break
        if lm - levels[-1] > EXP_MAX:
            # s_{n+2} outgrows F^n(t): only possible within rounding of t_s
            if not branches:
                raise DomainError(f"address entries outgrow the potential t = {t!r}")
            break
        branches.append(e)
        seed_log = (sign, lm)
        if n >= depth_hint or levels[-1] > EXP_MAX:
            break
        nxt = math.expm1(levels[-1])
        if nxt > cap:
            break
        levels.append(nxt)
    if seed_log is None:
        raise OverflowDepth(f"address {s} is not representable at t = {t!r}")
    depth = len(branches) - 1
    return _Plan(depth, tuple(levels[:depth + 1]), tuple(branches), seed_log)


def _seed(kappa: complex, plan: _Plan, depth: int, branches) -> tuple[complex, complex]:
    T = plan.levels[depth]
    if depth == plan.depth:
        sign, lm = plan.seed_log
    else:
        e = plan.branches[depth + 1]
        sign = (e > 0) - (e < 0)
        lm = math.log(TWO_PI * abs(e)) if e else -math.inf
    expo = lm - T
    if expo > EXP_MAX:
        raise DomainError("address entries outgrow the potential (t below t_s)")
    rho = sign * math.exp(expo) if sign else 0.0
    damp = math.exp(-T)
    q = complex(-(1.0 + kappa.real) * damp, -kappa.imag * damp + rho)
    z = T + clog1p(q) + 1j * TWO_PI * branches[depth]
    d = -damp / (1.0 + q)
    return z, d


def _chain(kappa: complex, plan: _Plan, depth: int, branches, tol_sing: float):
    """Backward chain from ``depth``; returns ([z_0..z_depth], d_0, on_cut)."""
    z, d = _seed(kappa, plan, depth, branches)
    chain = [z]
    on_cut = False
    for k in range(depth, 0, -1):
        w = z - kappa
        aw = abs(w)
        if aw < tol_sing:
            raise SingularHit(f"|z_{k} - kappa| = {aw:.3g} at t = {plan.levels[0]!r}",
                              level=k, t=plan.levels[0])
        if w.real < 0 and abs(w.imag) <= tol_sing * aw:
            on_cut = True
        d = (d - 1.0) / w
        z = cmath.log(w) + 1j * TWO_PI * branches[k - 1]
        chain.append(z)
    chain.reverse()
    return chain, d, on_cut


@dataclass(frozen=True)
class RaySample:
    address: ExternalAddress
    t: float
    value: complex
    dvalue_dkappa: complex
    depth: int
    residual: float
    on_cut: bool = False
    chain: tuple[complex, ...] = field(default=(), repr=False, compare=False)
    branches: tuple[int, ...] = field(default=(), repr=False, compare=False)


def _evaluate(kappa: complex, s: ExternalAddress, t: float, plan: _Plan, branches,
              eps: float, tol_sing: float) -> RaySample:
    N = plan.depth
    chain, d, on_cut = _chain(kappa, plan, N, branches, tol_sing)
    if N > 0:
        coarse, _, _ = _chain(kappa, plan, N - 1, branches, tol_sing)
    else:
        coarse = [t + 1j * TWO_PI * branches[0]]
    residual = abs(chain[0] - coarse[0])
    # a chain point closer to kappa than its own uncertainty is a singular hit
    for k in range(1, len(coarse)):
        gap = abs(chain[k] - kappa)
        if gap <= 8.0 * abs(chain[k] - coarse[k]) and gap < 1e-6 * (1.0 + abs(kappa)):
            raise SingularHit(f"z_{k} is within its error of kappa at t = {t!r}", level=k, t=t)
    if not residual <= eps:
        raise NoConvergence(f"pullback residual {residual:.3g} > {eps:g} at t = {t!r}",
                            residual=residual)
    return RaySample(s, t, chain[0], d, N, residual, on_cut, tuple(chain), tuple(branches))


def pullback_point(kappa, s: ExternalAddress, t: float, depth_hint: int = MAX_DEPTH,
                   eps: float = EPS, cap: float = PULLBACK_CAP,
                   tol_sing: float = TOL_SING) -> RaySample:
    """The point of static address s at potential t: g_s^kappa(t) for t large enough.

    Uses principal logarithms, so Im z_{k-1} lies in ((2 s_k - 1) pi, (2 s_k + 1) pi].
    Raises DomainError, SingularHit or NoConvergence.
    """
    kappa = complex(kappa)
    t = float(t)
    if not t > 0:
        raise DomainError(f"potential must be positive, got {t!r}")
    check_domain(s, t)
    plan = _plan(s, t, depth_hint, cap)
    return _evaluate(kappa, s, t, plan, plan.branches, eps, tol_sing)


def dynamic_ray(kappa, s: ExternalAddress, t: float, **kwargs) -> complex:
    return pullback_point(kappa, s, t, **kwargs).value


# --------------------------------------------------------------------------
# traces
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Complete:
    def to_json(self):
        return {"kind": "complete"}


@dataclass(frozen=True)
class PrematureEnd:
    at_t: float

    def to_json(self):
        return {"kind": "premature_end", "at_t": self.at_t}


Truncation = Union[Complete, PrematureEnd]


@dataclass(frozen=True)
class RayTrace:
    address: ExternalAddress
    kappa: complex
    samples: tuple[RaySample, ...]
    truncation: Truncation
    failures: tuple[tuple[float, str], ...] = ()

    @property
    def values(self) -> list[complex]:
        return [p.value for p in self.samples]


def geometric_potentials(t_lo: float, t_hi: float, n: int) -> list[float]:
    """n potentials from t_hi down to t_lo, equally spaced in log t; ends are exact."""
    if n < 2:
        raise ValueError("need at least two samples")
    r = math.log(t_lo / t_hi)
    ts = [t_hi * math.exp(r * i / (n - 1)) for i in range(n)]
    ts[0], ts[-1] = t_hi, t_lo
    return ts


class _Break(Exception):
    def __init__(self, t):
        self.t = t


class _Tracker:
    """Follows one ray downward in t, keeping every chain level continuous.

    Below the potentials where the static address is realized a ray may cross
    a strip boundary; the logarithm branch is then taken from the neighbouring
    sample instead of the principal one.  A change of arg(z_k - kappa) above
    MAX_ARG_STEP forces subdivision; one that survives subdivision down to
    MIN_T_STEP means the ray runs through the singular value there.
    """

    def __init__(self, kappa, s, eps, cap, tol_sing, depth_hint):
        self.kappa = kappa
        self.s = s
        self.eps = eps
        self.cap = cap
        self.tol_sing = tol_sing
        self.depth_hint = depth_hint
        self.ref = None

    def _try(self, t):
        plan = _plan(self.s, t, self.depth_hint, self.cap)
        branches = list(plan.branches)
        ref = self.ref
        if ref is None:
            return _evaluate(self.kappa, self.s, t, plan, branches, self.eps, self.tol_sing)
        # unwrap branch choices level by level from the top
        z, _ = _seed(self.kappa, plan, plan.depth, branches)
        for k in range(plan.depth, 0, -1):
            w = z - self.kappa
            if abs(w) < self.tol_sing:
                raise SingularHit("singular value hit", level=k, t=t)
            u = cmath.log(w) + 1j * TWO_PI * plan.branches[k - 1]
            if k - 1 < len(ref.chain):
                target = ref.chain[k - 1].imag
                c = round((target - u.imag) / TWO_PI)
                if abs(u.imag + TWO_PI * c - target) > MAX_ARG_STEP:
                    return None
                branches[k - 1] = plan.branches[k - 1] + c
                u += 1j * TWO_PI * c
            z = u
        return _evaluate(self.kappa, self.s, t, plan, branches, self.eps, self.tol_sing)

    def advance(self, t):
        """Move to potential t; returns the sample there or raises _Break/SingularHit."""
        sample = self._try(t)
        if sample is not None:
            self.ref = sample
            return sample
        t_prev = self.ref.t
        if abs(t_prev - t) < MIN_T_STEP * max(1.0, t):
            raise _Break(t)
        self.advance(0.5 * (t_prev + t))
        return self.advance(t)


def trace_ray(kappa, s: ExternalAddress, t_lo: float, t_hi: float, n_samples: int,
              eps: float = EPS, cap: float = PULLBACK_CAP, tol_sing: float = TOL_SING,
              depth_hint: int = MAX_DEPTH) -> RayTrace:
    """Sample g_s^kappa at geometrically spaced potentials from t_hi down to t_lo.

    Sampling stops with PrematureEnd(t) where the ray runs into the singular
    value; the rest of the interval is not part of the ray.  Per-sample
    NoConvergence is recorded in ``failures`` and that potential is skipped.
    """
    kappa = complex(kappa)
    if not 0 < t_lo < t_hi:
        raise ValueError("need 0 < t_lo < t_hi")
    check_domain(s, t_lo)
    tracker = _Tracker(kappa, s, eps, cap, tol_sing, depth_hint)
    samples = []
    failures = []
    truncation: Truncation = Complete()
    for t in geometric_potentials(t_lo, t_hi, n_samples):
        try:
            samples.append(tracker.advance(t))
        except NoConvergence as exc:
            failures.append((t, str(exc)))
        except SingularHit as exc:
            truncation = PrematureEnd(exc.t if exc.t is not None else t)
            break
        except _Break as exc:
            truncation = PrematureEnd(exc.t)
            break
    return RayTrace(s, kappa, tuple(samples), truncation, tuple(failures))


class DerivativeCheck(NamedTuple):
    analytic: complex
    finite_diff: complex
    rel_err: float
    finite_diff_imag: complex
    holomorphy_err: float


def ray_derivative_check(kappa, s: ExternalAddress, t: float, h: float = 1e-5,
                         **kwargs) -> DerivativeCheck:
    """Compare d g_s^kappa(t) / d kappa with central differences along 1 and i."""
    kappa = complex(kappa)
    p = pullback_point(kappa, s, t, **kwargs)

    def g(k):
        return pullback_point(k, s, t, **kwargs).value

    fd_re = (g(kappa + h) - g(kappa - h)) / (2.0 * h)
    fd_im = (g(kappa + 1j * h) - g(kappa - 1j * h)) / (2j * h)
    scale = max(1.0, abs(p.dvalue_dkappa))
    rel = max(abs(p.dvalue_dkappa - fd_re), abs(p.dvalue_dkappa - fd_im)) / scale
    return DerivativeCheck(p.dvalue_dkappa, fd_re, rel, fd_im, abs(fd_re - fd_im) / scale)
