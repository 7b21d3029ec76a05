import hashlib

import numpy as np
import pytest

from expray import _jit
from expray.address import EventuallyPeriodic, parse_address
from expray.params import land_endpoint, trace_parameter_ray
from expray.rays import PrematureEnd
from expray.render import (NOT_ESCAPED, PALETTE, EscapeImage, GridSpec, broken_ray_figure,
                           colorize, overlay_rays, ppm_bytes, rasterize_polyline, read_ppm,
                           render_dynamic_plane, render_parameter_plane, write_counts_csv,
                           write_ppm)

TINY = 1e-9


def one_pixel(z):
    return GridSpec(complex(z), TINY, TINY, 1, 1)


def test_single_pixel_parameter_examples():
    assert render_parameter_plane(one_pixel(0)).counts[0, 0] >= 0
    assert render_parameter_plane(one_pixel(-2)).counts[0, 0] == NOT_ESCAPED


def test_single_pixel_dynamic_examples():
    assert render_dynamic_plane(0, one_pixel(5)).counts[0, 0] >= 0
    assert render_dynamic_plane(0, one_pixel(np.pi * 1j)).counts[0, 0] >= 0


def test_real_axis_row_boundary():
    grid = GridSpec(0j, 6.0, TINY, 6001, 1, 5000)
    x, _ = grid.axes()
    esc = render_parameter_plane(grid).counts[0] >= 0
    assert not esc[x < -1 - 1e-2].any()
    assert esc[x > -1 + 1e-2].all()


def test_pixel_centers():
    grid = GridSpec(1 + 1j, 4.0, 2.0, 4, 2)
    x, y = grid.axes()
    assert np.allclose(x, [-0.5, 0.5, 1.5, 2.5])
    assert np.allclose(y, [1.5, 0.5])    # top row first
    col, row = grid.to_pixel(complex(2.5, 0.5))
    assert (col, row) == (3.0, 1.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(0j, 1, 1, 0, 1)
    with pytest.raises(ValueError):
        GridSpec(0j, -1, 1, 1, 1)
    with pytest.raises(ValueError):
        EscapeImage(GridSpec(0j, 1, 1, 2, 2), np.zeros((3, 2), dtype=np.int64))


def test_mirror_symmetry():
    grid = GridSpec(0.5 + 0j, 7.0, 9.0, 61, 40, 300)
    p = render_parameter_plane(grid).counts
    assert np.array_equal(p, p[::-1])
    d = render_dynamic_plane(0.3, grid).counts
    assert np.array_equal(d, d[::-1])


@pytest.mark.parametrize("use_numba", [False, True])
def test_schedule_independence(use_numba):
    if use_numba and not _jit.HAVE_NUMBA:
        pytest.skip("numba disabled")
    grid = GridSpec(0j, 8.0, 8.0, 50, 37, 300)
    a = render_parameter_plane(grid, threads=1, use_numba=use_numba).counts
    b = render_parameter_plane(grid, threads=8, use_numba=use_numba).counts
    assert np.array_equal(a, b)


def test_palette_mapping():
    grid = GridSpec(0j, 1, 1, 4, 1)
    img = EscapeImage(grid, np.array([[NOT_ESCAPED, 0, 3, 999]], dtype=np.int64))
    rgb = colorize(img)
    assert rgb[0, 0].tolist() == [0, 0, 0]
    assert rgb[0, 1].tolist() == PALETTE[0].tolist()
    assert rgb[0, 2].tolist() == PALETTE[2].tolist()
    assert rgb[0, 3].tolist() == PALETTE[-1].tolist()


def test_overlay_empty_is_identity():
    img = render_parameter_plane(GridSpec(0j, 8, 8, 30, 30, 100))
    assert np.array_equal(overlay_rays(img, []), colorize(img))


def test_real_parameter_ray_lies_on_axis_row():
    grid = GridSpec(0j, 8.0, 8.0, 101, 101, 100)
    img = render_parameter_plane(grid)
    tr = trace_parameter_ray(EventuallyPeriodic((), (0,)), 0.5, 20.0, 30)
    pix = rasterize_polyline(grid, [p.kappa for p in tr])
    assert pix and {r for r, _ in pix} == {50}
    rgb = overlay_rays(img, [tr])
    changed = np.argwhere((rgb != colorize(img)).any(axis=2))
    assert set(changed[:, 0]) <= {50}


def test_polyline_clipping():
    grid = GridSpec(0j, 2.0, 2.0, 10, 10)
    assert rasterize_polyline(grid, [complex(5, 5), complex(6, 6)]) == []
    pix = rasterize_polyline(grid, [complex(-100, 0.05), complex(100, 0.05)])
    assert sorted(c for _, c in pix) == list(range(10))
    assert rasterize_polyline(grid, [complex(0.05, 0.05)]) == [(4, 5)]


def test_ppm_round_trip_and_determinism(tmp_path):
    grid = GridSpec(0j, 8, 8, 23, 17, 200)
    rgb = colorize(render_parameter_plane(grid))
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    write_ppm(a, rgb)
    write_ppm(b, colorize(render_parameter_plane(grid)))
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(b"P6\n23 17\n255\n")
    assert np.array_equal(read_ppm(a), rgb)
    assert len(ppm_bytes(rgb)) == len(b"P6\n23 17\n255\n") + 23 * 17 * 3


def test_counts_csv(tmp_path):
    img = render_parameter_plane(GridSpec(0j, 4, 4, 5, 3, 50))
    path = tmp_path / "c.csv"
    write_counts_csv(path, img)
    back = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
    assert np.array_equal(back, img.counts)


def test_broken_ray_figure():
    s = parse_address("f:1.0")
    land = land_endpoint(s)
    grid = GridSpec(complex(1, 0), 12.0, 20.0, 60, 100, 100)
    rgb, traces = broken_ray_figure(land.kappa, s, grid, n_samples=30)
    assert all(isinstance(t.truncation, PrematureEnd) for t in traces)
    rgb2, _ = broken_ray_figure(land.kappa, s, grid, n_samples=30)
    assert hashlib.sha256(ppm_bytes(rgb)).digest() == hashlib.sha256(ppm_bytes(rgb2)).digest()
