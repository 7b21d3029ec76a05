"""Independent high-precision ray evaluation used to re-verify solutions.

Runs the plain backward chain in mpmath, seeded with the bare asymptote
F^M(t) + 2 pi i s_{M+1} at a depth M up to twice the double-precision depth.
mpmath's unbounded exponent range lets the seed go well past where doubles
overflow, so this shares neither arithmetic nor seed construction with
:mod:`expray.rays`.
"""

import mpmath

from .address import FastGenerator
from .errors import OverflowDepth
from .rays import PULLBACK_CAP, _plan

# exp of anything larger is too costly to evaluate at working precision
MP_LEVEL_LIMIT = 1e16


def _mp_entry(s, k, levels_x, ctx):
    try:
        return ctx.mpf(s.entry(k, PULLBACK_CAP))
    except OverflowDepth:
        pass
    assert isinstance(s, FastGenerator)
    j = s.generator_level(k)
    y = levels_x(j)
    return s.sign * ctx.floor(y / (2 * ctx.pi))


def pullback_point_mp(kappa, s, t, depth=None, dps=40, raw=False):
    """g_s^kappa(t) in mpmath; returns (value, depth used).

    The value is rounded to a Python complex unless ``raw`` is set, in which
    case the full-precision mpc is returned together with its context as
    (value, depth, ctx).
    """
    ctx = mpmath.mp.clone()
    ctx.dps = dps
    if depth is None:
        depth = 2 * max(1, _plan(s, float(t), 256, PULLBACK_CAP).depth)

    cache = {}

    def levels_x(j):
        if j not in cache:
            y = ctx.mpf(s.x)
            for _ in range(j):
                if y > MP_LEVEL_LIMIT:
                    raise OverflowDepth("generator level beyond mpmath limit", level=j)
                y = ctx.expm1(y)
            cache[j] = y
        return cache[j]

    levels = [ctx.mpf(t)]
    while len(levels) <= depth:
        if levels[-1] > MP_LEVEL_LIMIT:
            break
        levels.append(ctx.expm1(levels[-1]))
    M = len(levels) - 1
    while M > 0:
        try:
            top = _mp_entry(s, M + 1, levels_x, ctx)
            break
        except OverflowDepth:
            M -= 1
    else:
        top = _mp_entry(s, 1, levels_x, ctx)
    k_mp = ctx.mpc(kappa)
    two_pi_i = 2j * ctx.pi
    z = levels[M] + two_pi_i * top
    for k in range(M, 0, -1):
        z = ctx.log(z - k_mp) + two_pi_i * _mp_entry(s, k, levels_x, ctx)
    if raw:
        return z, M, ctx
    return complex(z), M

