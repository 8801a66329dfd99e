"""Deterministic CSV, JSON and binary writers.

Every file starts with the resolved configuration: CSV files carry it as
``# key: value`` comment lines, JSON reports under ``"config"``, binary
field files in their JSON header.
"""

from __future__ import annotations

import csv
import json
import math
import struct
from fractions import Fraction
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "1.0"
FIELD_MAGIC = b"AGFIELD1"


def _plain(x):
    """Convert to JSON-ready values; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, complex):
        return {"re": _plain(x.real), "im": _plain(x.imag)}
    if isinstance(x, Path):
        return str(x)
    return x


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_json(path, report: dict, config: dict | None = None) -> Path:
    path = Path(path)
    body = {"schema_version": SCHEMA_VERSION, "config": _plain(config or {}), **_plain(report)}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_csv(path, header, rows, config: dict | None = None) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        for k in sorted(config or {}):
            fh.write(f"# {k}: {json.dumps(_plain(config[k]), sort_keys=True)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """(metadata dict, header, rows as strings) of a file written by write_csv."""
    meta, lines = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            meta[k] = v if k == "schema_version" else json.loads(v)
        else:
            lines.append(line)
    rows = list(csv.reader(lines))
    return meta, rows[0], rows[1:]


def write_profile_csv(path, profile, config: dict | None = None) -> Path:
    from .spectral import mode_ode_residual

    cfg = {"kappa": profile.spec.kappa, "mu": profile.spec.mu, "n": profile.spec.n,
           "truncation_s_max": profile.truncation_s_max,
           "contamination_bound": profile.contamination_bound,
           "ode_residual": mode_ode_residual(profile), **(config or {})}
    rows = zip(profile.s_grid, profile.B, profile.dB, profile.d2B)
    return write_csv(path, ["s", "B", "dB", "d2B"], rows, cfg)


def write_ray_csv(path, samples, dim: int, config: dict | None = None) -> Path:
    """Rows (segment, s, t, xd, x'..., tau, xi_d, xi'...) from RayPath.sample."""
    m = dim - 1
    header = ["segment", "s", "t", "xd"] + [f"xp{k}" for k in range(m)] + \
        ["tau", "xid"] + [f"xip{k}" for k in range(m)]
    rows = ([int(r[0])] + [float(v) for v in r[1:]] for r in samples)
    return write_csv(path, header, rows, config)


def write_collisions_csv(path, collisions, dim: int, config: dict | None = None) -> Path:
    m = dim - 1
    header = ["index", "s", "t"] + [f"xp{k}" for k in range(m)]
    rows = ([i, c.s, c.t] + list(np.atleast_1d(c.xp)) for i, c in enumerate(collisions))
    return write_csv(path, header, rows, config)


def write_ladder_csv(path, rows, config: dict | None = None) -> Path:
    return write_csv(path, ["j", "norm_name", "value", "log2_value"],
                     ([r.j, r.norm_name, r.value, r.log2_value] for r in rows), config)


def write_field_binary(path, field, config: dict | None = None) -> Path:
    """Magic, uint32 header length, UTF-8 JSON header, complex64 samples row-major.

    Sample shape is (n_xd, N, ..., N) with x' in [-L/2, L/2).
    """
    values = np.ascontiguousarray(field.values(), dtype=np.complex64)
    header = {"schema_version": SCHEMA_VERSION, "d": field.grid.d,
              "box_length": field.grid.box_length, "points_per_dim": field.grid.points_per_dim,
              "xd": [float(x) for x in field.xd], "shape": list(values.shape),
              "dtype": "complex64", "order": "C",
              "time_frequency": field.time_frequency, "config": _plain(config or {}),
              "metadata": _plain(field.metadata)}
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(FIELD_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(values.astype("<c8").tobytes())
    return path


def read_field_binary(path):
    """(header dict, complex64 sample array)."""
    data = Path(path).read_bytes()
    if data[:8] != FIELD_MAGIC:
        raise ValueError("not a field file")
    (n,) = struct.unpack("<I", data[8:12])
    header = json.loads(data[12:12 + n].decode("utf-8"))
    arr = np.frombuffer(data[12 + n:], dtype="<c8").reshape(header["shape"])
    return header, arr


def write_field_summary_csv(path, field, config: dict | None = None) -> Path:
    """Per normal slice: x_d, int |u|^2 dx', max |u|."""
    vals = np.abs(field.values())
    l2 = field.slice_l2_squared()
    rows = ((x, a, float(np.max(v))) for x, a, v in zip(field.xd, l2, vals))
    return write_csv(path, ["xd", "l2_squared", "max_abs"], rows, config)
