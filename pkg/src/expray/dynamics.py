"""Forward dynamics of E_kappa(z) = exp(z) + kappa.

Escape predicate
----------------
``Re z > R_esc`` alone proves nothing: ``Re E(z) = exp(Re z) cos(Im z) + Re kappa``
is negative whenever Im z sits near an odd multiple of pi.  A step
``z_m -> z_{m+1}`` is *growth-confirmed* when

    Re z_{m+1} >= gamma * F(Re z_m) - |kappa| - 1,      F(x) = exp(x) - 1,

and the orbit is declared escaping at the first index n >= 1 with
``Re z_n > R_esc`` where

* the last ``L_confirm`` steps were growth-confirmed, or the orbit has reached
  the precision horizon (``Re z_n > 700`` or ``|z_n| > 1e12``, beyond which
  exp cannot be evaluated or Im z_n no longer resolves a strip) and every
  available step, up to ``L_confirm`` of them, was confirmed; and
* ``cos(Im z_n) >= gamma`` whenever Im z_n is still meaningful.

Reaching the horizon otherwise gives ``Indeterminate``.  An exhausted budget
gives ``Bounded`` if the second half of the orbit stayed within ``|z| <= R_esc``.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Union

from . import kernels
from .address import growth_F_inv_iter
from .errors import BoundaryStrip, NotEscaping, OverflowDepth

R_ESC = 50.0
L_CONFIRM = 3
BUDGET = 1000
GROWTH_FACTOR = 0.5
OVERFLOW_GUARD = kernels.OVERFLOW_GUARD
PRECISION_HORIZON = kernels.PRECISION_HORIZON
TOL_STRIP = 1e-9


def checked_point(z) -> complex:
    """Coerce to complex, rejecting NaN and infinite parts."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite complex point {z!r}")
    return z


def eval_map(kappa, z, guard: float = OVERFLOW_GUARD) -> complex:
    z = complex(z)
    if z.real > guard:
        raise OverflowDepth(f"Re z = {z.real:g} exceeds the overflow guard {guard:g}")
    return cmath.exp(z) + complex(kappa)


def lambda_of_kappa(kappa, guard: float = OVERFLOW_GUARD) -> complex:
    """The multiplier lambda = exp(kappa) of the conjugate family z -> exp(lambda z)."""
    kappa = complex(kappa)
    if kappa.real > guard:
        raise OverflowDepth(f"Re kappa = {kappa.real:g} exceeds the overflow guard")
    return cmath.exp(kappa)


@dataclass(frozen=True)
class Escaping:
    detected_at: int

    def to_json(self):
        return {"kind": "escaping", "detected_at": self.detected_at}


@dataclass(frozen=True)
class Bounded:
    budget: int

    def to_json(self):
        return {"kind": "bounded", "budget": self.budget}


@dataclass(frozen=True)
class Indeterminate:
    def to_json(self):
        return {"kind": "indeterminate"}


Verdict = Union[Escaping, Bounded, Indeterminate]


def verdict_from_code(code: int, budget: int) -> Verdict:
    if code >= 0:
        return Escaping(int(code))
    if code == kernels.BOUNDED:
        return Bounded(budget)
    return Indeterminate()


@dataclass(frozen=True)
class OrbitRecord:
    kappa: complex
    points: tuple[complex, ...]
    verdict: Verdict

    def __post_init__(self):
        if not self.points:
            raise ValueError("an orbit record needs at least one point")

    @property
    def escaping(self) -> bool:
        return isinstance(self.verdict, Escaping)

    def observable_depth(self) -> int:
        """Number of leading points whose imaginary part still resolves a strip.

        Points past the overflow guard count as long as |z| stays below the
        precision horizon: their own strip is known even though their image is not.
        """
        n = 0
        for z in self.points:
            if abs(z) > PRECISION_HORIZON:
                break
            n += 1
        return n

    def to_json(self) -> dict:
        return {
            "kappa": [self.kappa.real, self.kappa.imag],
            "points": [[z.real, z.imag] for z in self.points],
            "verdict": self.verdict.to_json(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> OrbitRecord:
        v = data["verdict"]
        kind = v["kind"]
        if kind == "escaping":
            verdict = Escaping(int(v["detected_at"]))
        elif kind == "bounded":
            verdict = Bounded(int(v["budget"]))
        elif kind == "indeterminate":
            verdict = Indeterminate()
        else:
            raise ValueError(f"unknown verdict kind {kind!r}")
        return cls(complex(*data["kappa"]),
                   tuple(complex(re, im) for re, im in data["points"]), verdict)


def escape_orbit(kappa, z0=None, budget: int = BUDGET, r_esc: float = R_ESC,
                 l_confirm: int = L_CONFIRM, gamma: float = GROWTH_FACTOR) -> OrbitRecord:
    """Iterate E_kappa from z0 (default: the singular value kappa) and judge escape."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if l_confirm < 1:
        raise ValueError("l_confirm must be >= 1")
    kappa = checked_point(kappa)
    z = checked_point(kappa if z0 is None else z0)
    kr, ki = kappa.real, kappa.imag
    kabs = math.sqrt(kr * kr + ki * ki)
    h2 = PRECISION_HORIZON * PRECISION_HORIZON
    points = [z]
    run = 0
    late_max = 0.0
    half = budget // 2
    zr, zi = z.real, z.imag
    verdict = None
    for n in range(budget + 1):
        a2 = zr * zr + zi * zi
        horizon = zr > OVERFLOW_GUARD or a2 > h2
        if n >= 1 and zr > r_esc:
            need = min(l_confirm, n)
            if run >= l_confirm or (horizon and run >= need):
                if horizon or math.cos(zi) >= gamma:
                    verdict = Escaping(n)
                    break
        if horizon:
            verdict = Indeterminate()
            break
        if n >= half:
            late_max = max(late_max, a2)
        if n == budget:
            break
        e = math.exp(zr)
        nr = e * math.cos(zi) + kr
        ni = e * math.sin(zi) + ki
        run = run + 1 if nr >= gamma * math.expm1(zr) - kabs - 1.0 else 0
        zr, zi = nr, ni
        points.append(complex(zr, zi))
    if verdict is None:
        verdict = Bounded(budget) if late_max <= r_esc * r_esc else Indeterminate()
    return OrbitRecord(kappa, tuple(points), verdict)


def orbit_address(record: OrbitRecord, depth: int, tol_strip: float = TOL_STRIP) -> list[int]:
    """Strip indices s_k = round(Im z_{k-1} / 2pi) for k = 1..depth."""
    if depth > len(record.points):
        raise ValueError(f"record has {len(record.points)} points, {depth} requested")
    out = []
    for k in range(depth):
        y = record.points[k].imag
        half_turns = y / math.pi
        odd = 2.0 * math.floor((half_turns - 1.0) / 2.0 + 0.5) + 1.0
        if abs(y - odd * math.pi) < tol_strip:
            raise BoundaryStrip(f"Im z_{k} = {y!r} lies on a strip boundary", index=k)
        out.append(int(math.floor(y / (2.0 * math.pi) + 0.5)))
    return out


def orbit_potential(record: OrbitRecord, index: int | None = None) -> float:
    """Potential estimate F^{-n}(Re z_n).

    Uses the detection index of an escaping record (or ``index``), the deepest
    point whose real part is known to full relative precision: the error of the
    estimate shrinks like 1/(F^n)'(t).
    """
    if index is None:
        if not record.escaping:
            raise NotEscaping("orbit is not escaping", verdict=record.verdict)
        index = record.verdict.detected_at
    x = record.points[index].real
    if x < 0:
        raise ValueError(f"Re z_{index} = {x!r} is negative; no potential estimate")
    return growth_F_inv_iter(x, index)


def potential_estimates(record: OrbitRecord) -> list[float]:
    """F^{-n}(Re z_n) for every n with Re z_n >= 0 (NaN elsewhere)."""
    return [growth_F_inv_iter(z.real, n) if z.real >= 0 else math.nan
            for n, z in enumerate(record.points)]
