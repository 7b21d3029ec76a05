import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expray import kernels
from expray.address import EventuallyPeriodic
from expray.dynamics import (GROWTH_FACTOR, L_CONFIRM, R_ESC, Bounded, Escaping, Indeterminate,
                             OrbitRecord, checked_point, escape_orbit, eval_map,
                             lambda_of_kappa, orbit_address, orbit_potential, verdict_from_code)
from expray.errors import BoundaryStrip, NotEscaping, OverflowDepth
from expray.rays import pullback_point


def test_eval_map_examples():
    assert eval_map(0, 0) == 1
    assert eval_map(-1, 0) == 0
    assert abs(eval_map(1j, 1j * math.pi) - (-1 + 1j)) < 1e-15
    with pytest.raises(OverflowDepth):
        eval_map(0, 701)


def test_lambda_examples():
    assert lambda_of_kappa(0) == 1
    assert lambda_of_kappa(-1) == pytest.approx(1 / math.e, rel=1e-15)
    assert abs(lambda_of_kappa(math.log(2) + 1j * math.pi) - (-2)) < 1e-15
    with pytest.raises(OverflowDepth):
        lambda_of_kappa(800)


def test_checked_point_rejects_nonfinite():
    for z in (complex(math.nan, 0), complex(0, math.inf)):
        with pytest.raises(ValueError):
            checked_point(z)


def test_escape_examples():
    assert isinstance(escape_orbit(0, 0, budget=100).verdict, Escaping)
    assert escape_orbit(-2, -2, budget=10000).verdict == Bounded(10000)
    assert not isinstance(escape_orbit(-1, -1, budget=10000).verdict, Escaping)


def test_escape_orbit_points_follow_map():
    rec = escape_orbit(0.3 + 0.2j, budget=50)
    for a, b in zip(rec.points, rec.points[1:]):
        assert abs(b - eval_map(rec.kappa, a)) <= 1e-12 * max(1, abs(b))


def test_escape_false_positive_guard():
    # Re z large but Im near pi: the next point is hugely negative
    rec = escape_orbit(0, complex(60, math.pi), budget=20)
    assert not isinstance(rec.verdict, Escaping) or rec.verdict.detected_at > 1
    assert rec.points[1].real < -1e20


def test_escape_validates_arguments():
    with pytest.raises(ValueError):
        escape_orbit(0, 0, budget=0)
    with pytest.raises(ValueError):
        escape_orbit(complex(math.nan, 0))


@pytest.mark.parametrize("kappa", [-0.999, -0.5, 0.0, 0.25744271618668757 + 0.0663836742370668j,
                                   2 + 3j, -3 + 0.5j, 1 + 6.3j, -1.001, -2.0])
def test_kernel_matches_reference(kappa):
    rec = escape_orbit(kappa, budget=2000)
    code = kernels.escape_one(kappa, kappa, 2000, R_ESC, L_CONFIRM, GROWTH_FACTOR)
    assert verdict_from_code(code, 2000) == rec.verdict


def test_orbit_address_examples():
    rec = escape_orbit(0, 0, budget=100)
    assert orbit_address(rec, 4) == [0, 0, 0, 0]
    rec = OrbitRecord(0j, (complex(0, 2 * math.pi), complex(0, math.pi)), Indeterminate())
    assert orbit_address(rec, 1) == [1]
    with pytest.raises(BoundaryStrip) as info:
        orbit_address(rec, 2)
    assert info.value.index == 1
    rec = OrbitRecord(0j, (complex(0, -math.pi + 1e-12),), Indeterminate())
    with pytest.raises(BoundaryStrip):
        orbit_address(rec, 1)


def test_orbit_potential_examples():
    z0 = pullback_point(1, EventuallyPeriodic((), (0,)), 4.0).value
    rec = escape_orbit(1, z0, budget=100)
    assert rec.escaping
    assert abs(orbit_potential(rec) - 4.0) < 1e-2
    n = rec.verdict.detected_at
    assert abs(orbit_potential(rec, n) - orbit_potential(rec, n - 1)) < 1e-3
    rec0 = OrbitRecord(0j, (complex(2.5, 0.0),), Escaping(0))
    assert orbit_potential(rec0) == 2.5
    with pytest.raises(NotEscaping):
        orbit_potential(escape_orbit(-2, budget=100))


def test_orbit_potential_of_ray_point_with_complex_address():
    s = EventuallyPeriodic((2,), (-1, 1))
    z0 = pullback_point(-0.5 + 2j, s, 3.0).value
    rec = escape_orbit(-0.5 + 2j, z0, budget=100)
    assert abs(orbit_potential(rec) - 3.0) < 1e-6
    assert orbit_address(rec, rec.observable_depth()) == [s.entry(k) for k in
                                                          range(1, rec.observable_depth() + 1)]


def test_real_orbits_stay_real():
    for kappa in np.linspace(-3, 3, 13):
        rec = escape_orbit(kappa, budget=200)
        assert all(z.imag == 0 for z in rec.points)
        assert set(orbit_address(rec, rec.observable_depth())) <= {0}


@given(st.floats(-4, 4), st.floats(-4, 4))
@settings(max_examples=100, deadline=None)
def test_conjugation_symmetry(x, y):
    k = complex(x, y)
    a = escape_orbit(k, budget=300)
    b = escape_orbit(k.conjugate(), budget=300)
    assert a.verdict == b.verdict
    assert all(p == q.conjugate() for p, q in zip(a.points, b.points))
    try:
        addr = orbit_address(a, a.observable_depth())
    except BoundaryStrip:
        return
    assert orbit_address(b, b.observable_depth()) == [-v for v in addr]


def test_record_json_round_trip():
    for kappa in (0, -2, 1 + 6j):
        rec = escape_orbit(kappa, budget=64)
        data = json.loads(rec.dumps())
        assert set(data) == {"kappa", "points", "verdict"}
        assert OrbitRecord.from_json(data) == rec
    with pytest.raises(ValueError):
        OrbitRecord(0j, (), Indeterminate())


def test_euler_boundary_near_minus_one():
    ks = np.round(np.arange(-1.05, -0.95, 1e-3), 10)
    esc = [escape_orbit(k, budget=5000).escaping for k in ks]
    # escape iff kappa > -1 outside the parabolic window
    for k, e in zip(ks, esc):
        if k > -1 + 1e-2:
            assert e
        if k < -1 - 1e-2 or k == -1:
            assert not e
    assert cmath.isclose(lambda_of_kappa(-1), 1 / math.e)
