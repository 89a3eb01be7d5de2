"""CSV/JSON serialisation of grids, profiles, reports and run manifests.

Numbers are written with 17 significant digits so that doubles round-trip
exactly.  Data files carry no timestamps; only the manifest does, taken from
``SOURCE_DATE_EPOCH`` when set.
"""

import csv
import io as _io
import json
import os
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from .constants import CSV_FORMAT, REPORT_SCHEMA_VERSION
from .curves import CurveGrid
from .errors import SemibiharmonicError
from .flat import PlaneField, RadialProfile
from .geometry import ModelSpace


class FormatError(SemibiharmonicError):
    """A data file or its sidecar is malformed or inconsistent."""


def sidecar(path, kind):
    """``data.csv`` -> ``data.<kind>.json``."""
    p = Path(path)
    return p.with_name(f"{p.stem}.{kind}.json")


def _fmt(x):
    return CSV_FORMAT % x


def _write_table(path, header, columns):
    cols = [np.asarray(c, dtype=float) for c in columns]
    buf = _io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*cols):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    Path(path).write_text(buf.getvalue())


def _read_table(path):
    text = Path(path).read_text()
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != len(header):
        raise FormatError(f"{path}: expected {len(header)} columns per row")
    return header, data


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def write_curve_csv(path, grid):
    """Write ``s,x0,..`` rows plus the ``.meta.json`` sidecar."""
    d = grid.points.shape[1]
    _write_table(path, ["s"] + [f"x{i}" for i in range(d)], [grid.s] + list(grid.points.T))
    write_json(sidecar(path, "meta"), {
        "kind": "curve",
        "space": grid.space.to_dict(),
        "periodic": grid.periodic,
        "ds": grid.ds,
        "n_nodes": grid.n_nodes,
        "s0": grid.s0,
    })


def read_curve_csv(path):
    meta_path = sidecar(path, "meta")
    if not meta_path.exists():
        raise FormatError(f"metadata sidecar {meta_path} not found")
    meta = read_json(meta_path)
    header, data = _read_table(path)
    if header[0] != "s" or header[1:] != [f"x{i}" for i in range(len(header) - 1)]:
        raise FormatError(f"{path}: header must be s,x0,x1,...; got {','.join(header)}")
    try:
        space = ModelSpace.from_dict(meta["space"])
        n_nodes, ds, periodic = int(meta["n_nodes"]), float(meta["ds"]), bool(meta["periodic"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{meta_path}: missing field {exc}") from None
    if data.shape[0] != n_nodes:
        raise FormatError(f"{path}: {data.shape[0]} rows but metadata says n_nodes = {n_nodes}")
    if n_nodes > 1 and np.max(np.abs(np.diff(data[:, 0]) - ds)) > 1e-9 * max(1.0, abs(ds)):
        raise FormatError(f"{path}: parameter column is not uniform with spacing ds = {ds}")
    return CurveGrid(data[:, 1:], ds, periodic, space, float(meta.get("s0", data[0, 0])))


def write_radial_csv(path, profile):
    _write_table(path, ["r", "f"], [profile.r, profile.values])
    write_json(sidecar(path, "meta"), {
        "kind": "radial",
        "n": profile.n,
        "r_min": profile.r_min,
        "r_max": profile.r_max,
        "n_nodes": profile.n_nodes,
    })


def read_radial_csv(path):
    meta = read_json(sidecar(path, "meta"))
    header, data = _read_table(path)
    if header != ["r", "f"]:
        raise FormatError(f"{path}: header must be r,f")
    if data.shape[0] != int(meta["n_nodes"]):
        raise FormatError(f"{path}: {data.shape[0]} rows but metadata says {meta['n_nodes']}")
    return RadialProfile(data[:, 0], data[:, 1], int(meta["n"]))


def write_plane_csv(path, field):
    X, Y = np.meshgrid(field.x, field.y, indexing="ij")
    _write_table(path, ["x", "y", "f"], [X.ravel(), Y.ravel(), field.values.ravel()])
    write_json(sidecar(path, "meta"), {"kind": "plane", "nx": field.x.size, "ny": field.y.size})


def read_plane_csv(path):
    meta = read_json(sidecar(path, "meta"))
    header, data = _read_table(path)
    if header != ["x", "y", "f"]:
        raise FormatError(f"{path}: header must be x,y,f")
    nx, ny = int(meta["nx"]), int(meta["ny"])
    if data.shape[0] != nx * ny:
        raise FormatError(f"{path}: {data.shape[0]} rows, expected {nx * ny}")
    return PlaneField(data[::ny, 0], data[:ny, 1], data[:, 2].reshape(nx, ny))


def read_meta_kind(path):
    meta_path = sidecar(path, "meta")
    if not meta_path.exists():
        raise FormatError(f"metadata sidecar {meta_path} not found")
    return read_json(meta_path).get("kind", "curve")


def write_trajectory_csv(path, trace):
    it, e, r = zip(*trace) if trace else ((), (), ())
    _write_table(path, ["iteration", "energy", "residual"], [it, e, r])


def package_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def timestamp():
    """UTC ISO-8601 time from SOURCE_DATE_EPOCH if set, else now."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch is not None else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def run_manifest(subcommand, flags, seed=None, grid_sizes=()):
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "subcommand": subcommand,
        "flags": {k: flags[k] for k in sorted(flags)},
        "seed": seed,
        "grid_sizes": [int(n) for n in grid_sizes],
        "version": package_version(),
        "timestamp": timestamp(),
    }


def write_manifest(path, manifest):
    write_json(sidecar(path, "manifest"), manifest)


def gnuplot_script(path, columns, title):
    """Plain-text gnuplot script plotting ``columns`` of a CSV written by this module."""
    name = Path(path).name
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
    ]
    if len(columns) == 2:
        lines.append(f"plot '{name}' using 1:2 with lines")
    elif columns[:3] == ["x", "y", "f"]:
        lines.append(f"splot '{name}' using 1:2:3 with points pointtype 7 pointsize 0.3")
    else:
        plots = [f"'{name}' using 1:{i + 2} with lines" for i in range(len(columns) - 1)]
        lines.append("plot " + ", \\\n     ".join(plots))
    script = Path(path).with_suffix(".gp")
    script.write_text("\n".join(lines) + "\n")
    return script
