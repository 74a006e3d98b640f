"""CSV and JSON readers and writers for curves, fields, graphs, trees and reports.

Floats go to CSV with 17 significant digits and to JSON via ``repr``, so
every file reads back to an equal value.  CSV files may start with ``#``
lines carrying ``key=value`` metadata.
"""
import csv
import json
import math

import numpy as np

from .curves import SampledCurve
from .exceptions import InvalidInputError
from .surface import ConvergenceReport, SquareField
from .tree import MetricGraphMap, QuotientTree
from .winding import WindingField, WindingMoments

FLOAT_FORMAT = "%.17g"


def _fmt(x):
    return FLOAT_FORMAT % x


def _read_rows(path):
    """Return ``(meta, header, rows)`` with rows as ``(line_number, fields)``."""
    meta = {}
    header = None
    rows = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise InvalidInputError(f"{path}: {e.strerror}") from None
    with fh:
        for lineno, fields in enumerate(csv.reader(fh), start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            if fields[0].startswith("#"):
                text = ",".join(fields)[1:]
                for part in text.split(";"):
                    if "=" in part:
                        k, v = part.split("=", 1)
                        meta[k.strip()] = v.strip()
                continue
            if header is None:
                header = [f.strip() for f in fields]
                continue
            if len(fields) != len(header):
                raise InvalidInputError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(fields)}"
                )
            rows.append((lineno, fields))
    if header is None:
        raise InvalidInputError(f"{path}: missing header")
    return meta, header, rows


def _read_table(path):
    """``(meta, header, data)`` for an all-numeric CSV.

    Well-formed files go through ``numpy.loadtxt``; anything it rejects is
    re-read row by row so the error names the offending line.
    """
    meta = {}
    header = None
    skip = 0
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                skip += 1
                text = line.strip()
                if not text:
                    continue
                if text.startswith("#"):
                    for part in text[1:].split(";"):
                        if "=" in part:
                            k, v = part.split("=", 1)
                            meta[k.strip()] = v.strip()
                    continue
                header = [f.strip() for f in text.split(",")]
                break
    except OSError as e:
        raise InvalidInputError(f"{path}: {e.strerror}") from None
    if header is not None:
        try:
            data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2, comments="#", encoding="utf-8")
        except ValueError:
            data = None
        if data is not None and (data.size == 0 or data.shape[1] == len(header)) and np.all(np.isfinite(data)):
            return meta, header, data.reshape(-1, len(header))
    meta, header, rows = _read_rows(path)
    return meta, header, _floats(path, rows)


def _floats(path, rows):
    out = np.empty((len(rows), len(rows[0][1]) if rows else 0))
    for k, (lineno, fields) in enumerate(rows):
        try:
            out[k] = [float(f) for f in fields]
        except ValueError:
            raise InvalidInputError(f"{path}:{lineno}: non-numeric value in {fields!r}") from None
        if not np.all(np.isfinite(out[k])):
            raise InvalidInputError(f"{path}:{lineno}: non-finite value")
    return out


def _meta_float(meta, key, path):
    try:
        return float(meta[key])
    except (KeyError, ValueError):
        raise InvalidInputError(f"{path}: metadata {key!r} missing or not a number") from None


# curves


def write_curve_csv(curve, path):
    d = curve.dim
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x{k + 1}" for k in range(d)])
    with open(path, "a", encoding="utf-8") as fh:
        np.savetxt(fh, np.column_stack([curve.times, curve.points]), fmt=FLOAT_FORMAT, delimiter=",")


def read_curve_csv(path):
    """Read ``t,x1,...,xd``; the curve is closed when its last row repeats the first point."""
    _, header, data = _read_table(path)
    if len(header) < 2 or header[0] != "t":
        raise InvalidInputError(f"{path}:1: header must be t,x1,...,xd")
    if data.shape[0] < 2:
        raise InvalidInputError(f"{path}: a curve needs at least 2 samples")
    t = data[:, 0]
    bad = np.flatnonzero(np.diff(t) <= 0)
    if bad.size:
        raise InvalidInputError(f"{path}: sample {bad[0] + 2}: times must be strictly increasing")
    p = data[:, 1:]
    return SampledCurve(t, p, closed=bool(np.array_equal(p[0], p[-1])))


# square fields


def write_field_csv(field, path):
    s = field.coords(0)
    t = field.coords(1)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# side={field.side!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "t", "phi1", "phi2"])
        S, T = np.meshgrid(s, t, indexing="ij")
        table = np.column_stack([S.ravel(), T.ravel(), field.phi1.ravel(), field.phi2.ravel()])
        np.savetxt(fh, table, fmt=FLOAT_FORMAT, delimiter=",")


def read_field_csv(path):
    """Read ``s,t,phi1,phi2`` samples of a full ``(2**N + 1)``-square regular grid, any row order."""
    meta, header, data = _read_table(path)
    if header != ["s", "t", "phi1", "phi2"]:
        raise InvalidInputError(f"{path}:1: header must be s,t,phi1,phi2")
    if not data.size:
        raise InvalidInputError(f"{path}: no samples")
    s = np.unique(data[:, 0])
    t = np.unique(data[:, 1])
    if s.size != t.size or s.size * t.size != data.shape[0]:
        raise InvalidInputError(
            f"{path}: samples do not form a full square grid ({s.size} x {t.size} for {data.shape[0]} rows)"
        )
    i = np.searchsorted(s, data[:, 0])
    j = np.searchsorted(t, data[:, 1])
    seen = np.zeros((s.size, s.size), dtype=bool)
    seen[i, j] = True
    if not seen.all():
        raise InvalidInputError(f"{path}: duplicate grid samples")
    p1 = np.empty((s.size, s.size))
    p2 = np.empty((s.size, s.size))
    p1[i, j] = data[:, 2]
    p2[i, j] = data[:, 3]
    side = _meta_float(meta, "side", path) if "side" in meta else s[-1] - s[0]
    h = side / (s.size - 1)
    grid = s[0] + h * np.arange(s.size)
    if not (np.allclose(s, grid, rtol=0, atol=1e-9 * max(1.0, abs(side)))
            and np.allclose(t, t[0] + h * np.arange(s.size), rtol=0, atol=1e-9 * max(1.0, abs(side)))):
        raise InvalidInputError(f"{path}: grid is not regular with equal spacing in s and t")
    return SquareField((s[0], t[0]), side, p1, p2)


# winding


def write_winding_csv(field, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(
            f"# origin_x={field.origin[0]!r}; origin_y={field.origin[1]!r}; cell={field.cell!r}; "
            f"nrows={field.nrows}; ncols={field.ncols}\n"
        )
        w = csv.writer(fh, lineterminator="\n")
        has_est = field.masked_estimate is not None
        w.writerow(["row", "col", "defined", "value"] + (["estimate"] if has_est else []))
        for r in range(field.nrows):
            for c in range(field.ncols):
                row = [r, c, int(field.defined_mask[r, c]), int(field.values[r, c])]
                if has_est:
                    e = field.masked_estimate[r, c]
                    row.append("" if math.isnan(e) else _fmt(e))
                w.writerow(row)


def read_winding_csv(path):
    meta, header, rows = _read_rows(path)
    if header[:4] != ["row", "col", "defined", "value"]:
        raise InvalidInputError(f"{path}:1: header must be row,col,defined,value[,estimate]")
    origin = (_meta_float(meta, "origin_x", path), _meta_float(meta, "origin_y", path))
    cell = _meta_float(meta, "cell", path)
    nrows = int(_meta_float(meta, "nrows", path))
    ncols = int(_meta_float(meta, "ncols", path))
    values = np.zeros((nrows, ncols), dtype=np.int64)
    mask = np.zeros((nrows, ncols), dtype=bool)
    est = np.full((nrows, ncols), np.nan) if len(header) > 4 else None
    for lineno, f in rows:
        try:
            r, c, d, v = int(f[0]), int(f[1]), int(f[2]), int(f[3])
            if est is not None and f[4].strip():
                est[r, c] = float(f[4])
        except (ValueError, IndexError):
            raise InvalidInputError(f"{path}:{lineno}: malformed winding row {f!r}") from None
        if not (0 <= r < nrows and 0 <= c < ncols):
            raise InvalidInputError(f"{path}:{lineno}: cell ({r}, {c}) outside the grid")
        values[r, c] = v
        mask[r, c] = bool(d)
    return WindingField(origin, cell, ncols, nrows, values, mask, est)


def moments_from_dict(d):
    def pair(v):
        return tuple(v) if v is not None else None

    return WindingMoments(
        m00=d["m00"],
        m10=d["m10"],
        m01=d["m01"],
        pos_mass=d["pos_mass"],
        neg_mass=d["neg_mass"],
        pos_center=pair(d["pos_center"]),
        neg_center=pair(d["neg_center"]),
        masked_area=d["masked_area"],
        error_bound=tuple(d["error_bound"]),
    )


# graphs and trees


def graph_to_dict(gmap):
    return {
        "vertices": list(gmap.vertices),
        "edges": [[u, v, w] for u, v, w in gmap.edges],
        "phi": gmap.phi.tolist(),
        "C": gmap.C,
    }


def graph_from_dict(d):
    try:
        return MetricGraphMap(d["vertices"], d["edges"], d["phi"], d.get("C", 1.0))
    except KeyError as e:
        raise InvalidInputError(f"graph JSON is missing key {e.args[0]!r}") from None


def tree_to_dict(tree):
    out = {
        "graph": graph_to_dict(tree.gmap),
        "classes": tree.classes,
        "arcs": [list(e) for e in tree.tree_edges],
        "psi": [[v, c] for v, c in tree.psi.items()],
        "phi_bar": tree.phi_bar.tolist(),
    }
    if len(tree) <= 500:
        out["d_T"] = tree.d_T_table().tolist()
    return out


def tree_from_dict(d):
    try:
        gmap = graph_from_dict(d["graph"])
        return QuotientTree(gmap, d["classes"], [tuple(a) for a in d["arcs"]])
    except KeyError as e:
        raise InvalidInputError(f"tree JSON is missing key {e.args[0]!r}") from None


def report_from_dict(d):
    rate = d.get("fitted_rate")
    drate = d.get("defect_rate")
    return ConvergenceReport(
        levels=list(d["levels"]),
        values=list(d["values"]),
        diffs=list(d["diffs"]),
        fitted_rate=float("nan") if rate is None else rate,
        converged=bool(d["converged"]),
        extrapolated=d.get("extrapolated"),
        defects=d.get("defects"),
        defect_rate=None if drate is None else drate,
        fit_levels=tuple(d.get("fit_levels", ())),
    )


def write_json(obj, path=None):
    text = json.dumps(obj, indent=2, allow_nan=False)
    if path is None:
        return text
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    return text


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise InvalidInputError(f"{path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"{path}:{e.lineno}: invalid JSON ({e.msg})") from None


def read_graph_json(path):
    return graph_from_dict(read_json(path))
