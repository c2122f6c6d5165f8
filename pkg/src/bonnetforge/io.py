"""Mesh, field and report serialization."""
from __future__ import annotations

import csv
import hashlib
import json

import numpy as np

from .grid import Form1, Form2Q, QuatField

REPORT_SCHEMA = "bonnetforge.report/1"


def triangles(nu, nv):
    """Two triangles per grid cell, always split along the (i,j)-(i+1,j+1) diagonal.

    Indices are 0-based into the row-major (u-major) vertex list.
    """
    i, j = np.meshgrid(np.arange(nu - 1), np.arange(nv - 1), indexing="ij")
    a = (i * nv + j).ravel()
    b = ((i + 1) * nv + j).ravel()
    c = ((i + 1) * nv + j + 1).ravel()
    d = (i * nv + j + 1).ravel()
    return np.stack([np.stack([a, b, c], -1), np.stack([a, c, d], -1)], 1).reshape(-1, 3)


def write_obj(path, field: QuatField):
    """OBJ with one vertex per sample and triangulated quads, 1-based faces."""
    g = field.grid
    pts = field.vec.reshape(-1, 3)
    tri = triangles(g.nu, g.nv) + 1
    with open(path, "w") as fh:
        fh.write(f"# bonnetforge mesh {g.nu}x{g.nv}\n")
        for x, y, z in pts:
            fh.write(f"v {float(x)!r} {float(y)!r} {float(z)!r}\n")
        for a, b, c in tri:
            fh.write(f"f {a} {b} {c}\n")


def read_obj(path):
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(x.split("/")[0]) for x in parts[1:4]])
    return np.array(verts), np.array(faces, dtype=int)


def write_csv(path, obj):
    """Dump a QuatField, Form1, Form2Q or a ``(grid, real array)`` pair, one sample per row."""
    if isinstance(obj, QuatField):
        g, cols, names = obj.grid, [obj.values], ["w", "x", "y", "z"]
    elif isinstance(obj, Form1):
        g, cols = obj.grid, [obj.a_u, obj.a_v]
        names = [f"{p}_{c}" for p in ("au", "av") for c in "wxyz"]
    elif isinstance(obj, Form2Q):
        g, cols, names = obj.grid, [obj.q], ["w", "x", "y", "z"]
    else:
        g, arr = obj
        cols, names = [np.asarray(arr, dtype=float)[..., None]], ["value"]
    U, V = g.mesh()
    data = np.concatenate([U[..., None], V[..., None]] + cols, axis=-1).reshape(-1, 2 + len(names))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v"] + names)
        for row in data:
            w.writerow([repr(float(x)) for x in row])


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if not np.isfinite(x):
            return repr(x)
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def payload_bytes(payload: dict) -> bytes:
    return json.dumps(_clean(payload), sort_keys=True, indent=2, allow_nan=False).encode()


def write_report(path, payload: dict, sidecar: dict | None = None):
    """Write a JSON report.

    ``payload`` is the comparable part, hashed into ``payload_sha256``;
    ``sidecar`` holds non-deterministic data (timestamps) and is excluded
    from the hash.
    """
    body = _clean(payload)
    digest = hashlib.sha256(payload_bytes(body)).hexdigest()
    doc = {"schema": REPORT_SCHEMA, "payload": body, "payload_sha256": digest,
           "sidecar": _clean(sidecar or {})}
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")
    return digest


def read_report(path):
    with open(path) as fh:
        return json.load(fh)
