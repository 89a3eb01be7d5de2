import json

import numpy as np
import pytest

from semibiharmonic import closed_form as cf
from semibiharmonic import io
from semibiharmonic.constants import REPORT_SCHEMA_VERSION
from semibiharmonic.curves import sample_curve
from semibiharmonic.flat import PlaneField, RadialProfile
from semibiharmonic.geometry import ModelSpace


def test_sidecar_name(tmp_path):
    assert io.sidecar(tmp_path / "data.csv", "meta") == tmp_path / "data.meta.json"


def test_curve_round_trip(tmp_path):
    g = cf.great_circle(3, 64)
    path = tmp_path / "c.csv"
    io.write_curve_csv(path, g)
    back = io.read_curve_csv(path)
    np.testing.assert_allclose(back.points, g.points, rtol=0, atol=1e-15)
    assert back.ds == pytest.approx(g.ds, rel=1e-15)
    assert back.periodic == g.periodic
    assert back.space == g.space
    assert io.read_meta_kind(path) == "curve"


def test_open_curve_keeps_offset(tmp_path):
    g = cf.flat_graph_curve(np.sin, 1.0, 2.0, 33)
    path = tmp_path / "open.csv"
    io.write_curve_csv(path, g)
    back = io.read_curve_csv(path)
    assert not back.periodic
    assert back.s0 == pytest.approx(g.s0)
    np.testing.assert_allclose(back.s, g.s, atol=1e-15)


def test_csv_uses_17_significant_digits(tmp_path):
    g = sample_curve(lambda s: np.stack([np.full_like(s, 1 / 3), s], axis=1),
                     ModelSpace.flat(2), 5, 1.0, False)
    path = tmp_path / "d.csv"
    io.write_curve_csv(path, g)
    assert float(path.read_text().splitlines()[1].split(",")[1]) == 1 / 3


def test_radial_round_trip(tmp_path):
    p = RadialProfile.sample(np.exp, 3, 0.5, 5.0, 65)
    path = tmp_path / "r.csv"
    io.write_radial_csv(path, p)
    back = io.read_radial_csv(path)
    np.testing.assert_array_equal(back.values, p.values)
    assert back.n == 3
    assert io.read_meta_kind(path) == "radial"


def test_plane_round_trip(tmp_path):
    f = PlaneField.sample(lambda X, Y: X * np.cos(Y), (0, 1), (0, 2), 9, 7)
    path = tmp_path / "p.csv"
    io.write_plane_csv(path, f)
    back = io.read_plane_csv(path)
    np.testing.assert_array_equal(back.x, f.x)
    np.testing.assert_array_equal(back.y, f.y)
    np.testing.assert_array_equal(back.values, f.values)


def test_json_round_trip_is_sorted(tmp_path):
    path = tmp_path / "x.json"
    io.write_json(path, {"b": 1, "a": [1.5, None]})
    assert io.read_json(path) == {"a": [1.5, None], "b": 1}
    assert path.read_text().index('"a"') < path.read_text().index('"b"')


def test_invalid_json_is_format_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(io.FormatError):
        io.read_json(path)


@pytest.fixture
def curve_file(tmp_path):
    path = tmp_path / "c.csv"
    io.write_curve_csv(path, cf.great_circle(2, 16))
    return path


def test_missing_sidecar(curve_file):
    io.sidecar(curve_file, "meta").unlink()
    with pytest.raises(io.FormatError, match="sidecar"):
        io.read_curve_csv(curve_file)
    with pytest.raises(io.FormatError):
        io.read_meta_kind(curve_file)


def test_row_count_mismatch(curve_file):
    lines = curve_file.read_text().splitlines()
    curve_file.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(io.FormatError, match="n_nodes"):
        io.read_curve_csv(curve_file)


def test_bad_header(curve_file):
    text = curve_file.read_text().replace("s,x0", "t,x0", 1)
    curve_file.write_text(text)
    with pytest.raises(io.FormatError, match="header"):
        io.read_curve_csv(curve_file)


def test_non_numeric_entry(curve_file):
    lines = curve_file.read_text().splitlines()
    lines[3] = "abc," + lines[3].split(",", 1)[1]
    curve_file.write_text("\n".join(lines) + "\n")
    with pytest.raises(io.FormatError, match="non-numeric"):
        io.read_curve_csv(curve_file)


def test_ragged_rows(curve_file):
    lines = curve_file.read_text().splitlines()
    lines[2] = lines[2] + ",1.0"
    curve_file.write_text("\n".join(lines) + "\n")
    with pytest.raises(io.FormatError):
        io.read_curve_csv(curve_file)


def test_nonuniform_parameter(curve_file):
    lines = curve_file.read_text().splitlines()
    head, rest = lines[2].split(",", 1)
    lines[2] = f"{float(head) + 1e-3!r},{rest}"
    curve_file.write_text("\n".join(lines) + "\n")
    with pytest.raises(io.FormatError, match="uniform"):
        io.read_curve_csv(curve_file)


def test_empty_file(curve_file):
    curve_file.write_text("")
    with pytest.raises(io.FormatError, match="empty"):
        io.read_curve_csv(curve_file)


def test_trajectory_csv(tmp_path):
    path = tmp_path / "t.csv"
    io.write_trajectory_csv(path, [(0, 2.0, 1.0), (5, 1.0, 0.5)])
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,energy,residual"
    assert len(lines) == 3


def test_timestamp_honours_source_date_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    assert io.timestamp() == "1970-01-01T00:00:00Z"


def test_manifest_fields(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "86400")
    m = io.run_manifest("generate", {"z": 1, "a": 2}, seed=4, grid_sizes=[np.int64(8)])
    assert m["schema_version"] == REPORT_SCHEMA_VERSION
    assert list(m["flags"]) == ["a", "z"]
    assert m["seed"] == 4 and m["grid_sizes"] == [8]
    assert m["timestamp"] == "1970-01-02T00:00:00Z"
    assert isinstance(m["version"], str)
    path = tmp_path / "out.csv"
    io.write_manifest(path, m)
    assert json.loads((tmp_path / "out.manifest.json").read_text()) == m


def test_gnuplot_scripts(tmp_path):
    two = io.gnuplot_script(tmp_path / "a.csv", ["r", "f"], "radial")
    assert two.suffix == ".gp"
    assert "plot 'a.csv' using 1:2 with lines" in two.read_text()
    surface = io.gnuplot_script(tmp_path / "b.csv", ["x", "y", "f"], "plane")
    assert "splot 'b.csv'" in surface.read_text()
    multi = io.gnuplot_script(tmp_path / "c.csv", ["s", "x0", "x1", "x2"], "curve")
    assert multi.read_text().count("with lines") == 3
    assert "set datafile separator ','" in multi.read_text()
