"""Parameter rays G_s(t): the parameters kappa with kappa = g_s^kappa(t).

Solved by Newton's method on h(kappa) = g_s^kappa(t) - kappa, using the
kappa-derivative carried along the pullback chain (h' = d_0 - 1).  Far out
(t >= T_SEED) the asymptote t + 2 pi i s_1 is a good enough seed; below that
the solution is continued downward in t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .address import (TWO_PI, EventuallyPeriodic, ExternalAddress, SpeedClass,
                      classify_speed, potential_bound)
from .dynamics import (BUDGET, Escaping, escape_orbit, orbit_address, orbit_potential)
from .errors import (ContinuationStuck, DomainError, ExpRayError, NotEscaping,
                     NotFastAddress, RoundtripFailure)
from .highprec import pullback_point_mp
from .rays import check_domain, geometric_potentials, minimal_potential, pullback_point

T_SEED = 20.0
EPS = 1e-10
NEWTON_MAX_ITER = 40
STEP_INIT = 1.0
STEP_MIN = 1e-6
GROW_AFTER = 3
# continuity bound between consecutive continuation points: |dkappa| <= JUMP_BASE + JUMP_SLOPE * dt
JUMP_BASE = 0.5
JUMP_SLOPE = 2.0
STRIP_TOL = 1e-12


@dataclass(frozen=True)
class ParamRaySample:
    address: ExternalAddress
    t: float
    kappa: complex
    residual: float
    newton_iters: int
    seed: complex = 0j
    path_length: int = 0
    dg_dkappa: complex = 0j     # d g_s^kappa(t) / d kappa at the solution
    depth: int = 0


@dataclass(frozen=True)
class ClassificationResult:
    address_prefix: tuple[int, ...]
    t: float
    verified_kappa: complex
    roundtrip_error: float
    address: ExternalAddress = field(default=None, compare=False)
    orbit_t: float = math.nan


class _NewtonFailed(ExpRayError):
    pass


def in_first_strip(s: ExternalAddress, kappa: complex, tol: float = STRIP_TOL) -> bool:
    s1 = s.entry(1)
    return (2 * s1 - 1) * math.pi - tol < kappa.imag < (2 * s1 + 1) * math.pi + tol


def newton_parameter(s: ExternalAddress, t: float, seed: complex, eps: float = EPS,
                     max_iter: int = NEWTON_MAX_ITER):
    """Newton iteration for kappa = g_s^kappa(t) from ``seed``.

    Iterates until the step stalls at rounding level, then demands
    |g - kappa| <= eps and kappa in the first-entry strip of s.
    Returns (kappa, pullback sample at kappa, iterations).
    """
    kappa = complex(seed)
    h = math.inf
    for it in range(1, max_iter + 1):
        try:
            p = pullback_point(kappa, s, t)
        except ExpRayError as exc:
            raise _NewtonFailed(str(exc)) from exc
        hv = p.value - kappa
        h = abs(hv)
        step = hv / (p.dvalue_dkappa - 1.0)
        kappa -= step
        if not (math.isfinite(kappa.real) and math.isfinite(kappa.imag)):
            raise _NewtonFailed("Newton iterate left the finite plane")
        if abs(step) <= 4e-16 * max(1.0, abs(kappa)):
            break
    else:
        if not h <= eps:
            raise _NewtonFailed(f"no convergence in {max_iter} iterations (|h| = {h:.3g})")
    try:
        p = pullback_point(kappa, s, t)
    except ExpRayError as exc:
        raise _NewtonFailed(str(exc)) from exc
    residual = abs(p.value - kappa)
    if not residual <= eps:
        raise _NewtonFailed(f"residual {residual:.3g} > {eps:g}")
    if not in_first_strip(s, kappa):
        raise _NewtonFailed(f"solution {kappa} left the first-entry strip")
    return kappa, p, it


def _sample(s, t, kappa, p, its, seed, steps) -> ParamRaySample:
    return ParamRaySample(s, t, kappa, abs(p.value - kappa), its, complex(seed), steps,
                          p.dvalue_dkappa, p.depth)


def refine_parameter(s: ExternalAddress, t: float, seed: complex,
                     eps: float = EPS) -> ParamRaySample:
    """One Newton solve from an explicit seed (no continuation)."""
    check_domain(s, t)
    try:
        kappa, p, its = newton_parameter(s, t, seed, eps)
    except _NewtonFailed as exc:
        raise ContinuationStuck(f"Newton from {seed} failed: {exc}", last_t=t) from exc
    return _sample(s, t, kappa, p, its, seed, 0)


def _continue(s, t_from, kappa_from, t_to, eps, step_init=STEP_INIT):
    """Follow the solution from (t_from, kappa_from) down to t_to.

    Returns (kappa, final pullback sample, newton_iters, steps).  Step control: halve on
    failure, double after GROW_AFTER consecutive first-try successes, give up
    below STEP_MIN.
    """
    t_cur, k_cur = t_from, kappa_from
    step = step_init
    streak = 0
    steps = 0
    p, its = None, 0
    while t_cur > t_to:
        t_next = max(t_to, t_cur - step)
        if t_cur - t_next < 0.5 * step:
            t_next = t_to
        try:
            k_new, p, its = newton_parameter(s, t_next, k_cur, eps)
            if abs(k_new - k_cur) > JUMP_BASE + JUMP_SLOPE * (t_cur - t_next):
                raise _NewtonFailed("continuity bound violated")
        except _NewtonFailed:
            step *= 0.5
            streak = 0
            if step < STEP_MIN:
                raise ContinuationStuck(
                    f"continuation for {s} stuck below t = {t_cur!r}",
                    last_t=t_cur, last_kappa=k_cur) from None
            continue
        t_cur, k_cur = t_next, k_new
        steps += 1
        streak += 1
        if streak >= GROW_AFTER:
            step *= 2.0
            streak = 0
    return k_cur, p, its, steps


def solve_parameter(s: ExternalAddress, t: float, eps: float = EPS,
                    t_seed: float = T_SEED) -> ParamRaySample:
    """G_s(t), the unique kappa with kappa = g_s^kappa(t)."""
    t = float(t)
    check_domain(s, t)
    seed = complex(max(t, t_seed), TWO_PI * s.entry(1))
    if t >= t_seed:
        try:
            kappa, p, its = newton_parameter(s, t, seed, eps)
        except _NewtonFailed as exc:
            raise ContinuationStuck(f"Newton at t = {t!r} failed: {exc}", last_t=t) from exc
        return _sample(s, t, kappa, p, its, seed, 0)
    try:
        k_far, _, _ = newton_parameter(s, t_seed, seed, eps)
    except _NewtonFailed as exc:
        raise ContinuationStuck(f"Newton at t = {t_seed!r} failed: {exc}", last_t=t_seed) from exc
    kappa, p, its, steps = _continue(s, t_seed, k_far, t, eps)
    return _sample(s, t, kappa, p, its, seed, steps)


def trace_parameter_ray(s: ExternalAddress, t_lo: float, t_hi: float, n_samples: int,
                        eps: float = EPS) -> list[ParamRaySample]:
    """G_s at geometrically spaced potentials from t_hi down to t_lo."""
    if not 0 < t_lo < t_hi:
        raise ValueError("need 0 < t_lo < t_hi")
    check_domain(s, t_lo)
    ts = geometric_potentials(t_lo, t_hi, n_samples)
    first = solve_parameter(s, ts[0], eps)
    out = [first]
    total = first.path_length
    for t in ts[1:]:
        prev = out[-1]
        step0 = min(STEP_INIT, prev.t - t)
        kappa, p, its, steps = _continue(s, prev.t, prev.kappa, t, eps, step0)
        total += steps
        out.append(_sample(s, t, kappa, p, its, prev.kappa, total))
    return out


def verify_parameter(sample: ParamRaySample, dps: int = 40) -> float:
    """|g_s^kappa(t) - kappa| recomputed by the independent mpmath pullback."""
    value, _ = pullback_point_mp(sample.kappa, sample.address, sample.t, dps=dps)
    return abs(value - sample.kappa)


@dataclass(frozen=True)
class Landing:
    sample: ParamRaySample
    t_s: float
    t_s_delta: float
    escaping: bool

    @property
    def kappa(self) -> complex:
        return self.sample.kappa


def land_endpoint(s: ExternalAddress, eps: float = EPS, budget: int = BUDGET) -> Landing:
    """Landing point of the parameter ray of a fast address: kappa = g_s^kappa(t_s)."""
    if classify_speed(s) is not SpeedClass.FAST:
        raise NotFastAddress(f"{s} is not a fast address")
    bound = potential_bound(s)
    sample = solve_parameter(s, bound.t_s, eps)
    rec = escape_orbit(sample.kappa, sample.kappa, budget=budget)
    if not rec.escaping:
        raise NotEscaping(f"landing parameter {sample.kappa} not detected as escaping",
                          verdict=rec.verdict)
    return Landing(sample, bound.t_s, bound.delta, True)


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

def periodic_extensions(prefix) -> list[EventuallyPeriodic]:
    """Eventually periodic addresses agreeing with ``prefix``, simplest first.

    Ordered by preamble + period length, then by preamble length.
    """
    prefix = tuple(prefix)
    n = len(prefix)
    cands = []
    for pre in range(n):
        for per in range(1, n - pre + 1):
            period = prefix[pre:pre + per]
            if all(prefix[i] == period[(i - pre) % per] for i in range(pre, n)):
                cands.append((pre + per, pre, EventuallyPeriodic(prefix[:pre], period)))
    cands.sort(key=lambda c: (c[0], c[1]))
    seen = []
    for _, _, s in cands:
        if s not in seen:
            seen.append(s)
    return seen


def _refine_potential(kappa: complex, s: ExternalAddress, t0: float, iters: int = 6) -> float:
    """Solve g_s^kappa(t) = kappa for real t by Gauss-Newton (kappa held fixed)."""
    t = t0
    for _ in range(iters):
        h = 1e-7 * max(1.0, t)
        try:
            g = pullback_point(kappa, s, t).value - kappa
            dg = (pullback_point(kappa, s, t + h).value
                  - pullback_point(kappa, s, t - h).value) / (2 * h)
        except ExpRayError:
            return t
        dd = dg.real * dg.real + dg.imag * dg.imag
        if dd == 0:
            return t
        dt = (dg.real * g.real + dg.imag * g.imag) / dd
        t -= dt
        if abs(dt) <= 1e-15 * max(1.0, t):
            break
    return t


def classify_parameter(kappa, budget: int = BUDGET, eps: float = 1e-8) -> ClassificationResult:
    """Recover (address, potential) of an escaping parameter and confirm kappa = G_s(t)."""
    kappa = complex(kappa)
    rec = escape_orbit(kappa, kappa, budget=budget)
    if not isinstance(rec.verdict, Escaping):
        raise NotEscaping(f"{kappa} is not detected as escaping ({rec.verdict})",
                          verdict=rec.verdict)
    depth = min(rec.observable_depth(), rec.verdict.detected_at + 1)
    prefix = tuple(orbit_address(rec, depth))
    t0 = orbit_potential(rec)
    best = None
    for s in periodic_extensions(prefix):
        if not t0 > minimal_potential(s):
            continue
        t = _refine_potential(kappa, s, t0)
        try:
            check_domain(s, t)
            back = solve_parameter(s, t)
        except (ExpRayError, DomainError):
            continue
        err = abs(back.kappa - kappa)
        result = ClassificationResult(prefix, t, back.kappa, err, s, t0)
        if err <= eps:
            return result
        if best is None or err < best.roundtrip_error:
            best = result
    err = best.roundtrip_error if best else math.inf
    raise RoundtripFailure(f"no address extension of {list(prefix)} reproduces {kappa} "
                           f"(best roundtrip error {err:.3g})", roundtrip_error=err)
