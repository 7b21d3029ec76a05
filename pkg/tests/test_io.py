import json

from expray.address import EventuallyPeriodic
from expray.io import (PARAM_COLUMNS, RAY_COLUMNS, read_ray_csv, sidecar_path,
                       write_param_ray, write_ray_trace)
from expray.params import trace_parameter_ray
from expray.rays import trace_ray


def test_ray_csv_schema_and_round_trip(tmp_path):
    tr = trace_ray(0.5 + 1j, EventuallyPeriodic((1,), (0, -1)), 0.5, 6.0, 9)
    path = tmp_path / "ray.csv"
    side = write_ray_trace(path, tr)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,re,im,d_re,d_im,depth,residual"
    rows = read_ray_csv(path)
    assert tuple(rows[0]) == RAY_COLUMNS
    assert [r["t"] for r in rows] == [p.t for p in tr.samples]
    assert [complex(r["re"], r["im"]) for r in rows] == tr.values
    assert all(a["t"] > b["t"] for a, b in zip(rows, rows[1:]))
    meta = json.loads(open(side).read())
    assert meta["address"] == "p:1|0,-1"
    assert meta["truncation"] == {"kind": "complete"}
    assert side == sidecar_path(path)


def test_param_csv(tmp_path):
    samples = trace_parameter_ray(EventuallyPeriodic((), (0,)), 1.0, 10.0, 20)
    path = tmp_path / "par.csv"
    write_param_ray(path, samples, t_s=0.0)
    rows = read_ray_csv(path)
    assert len(rows) == 20 and tuple(rows[0]) == PARAM_COLUMNS
    assert all(r["im"] == 0 for r in rows)
    meta = json.loads((tmp_path / "par.json").read_text())
    assert meta["seed"] == [20.0, 0.0] and meta["t_s_estimate"] == 0.0
    assert meta["path_length"] == samples[-1].path_length


def test_csv_byte_stable(tmp_path):
    s = EventuallyPeriodic((), (1,))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_ray_trace(a, trace_ray(1, s, 1.0, 5.0, 10))
    write_ray_trace(b, trace_ray(1, s, 1.0, 5.0, 10))
    assert a.read_bytes() == b.read_bytes()
