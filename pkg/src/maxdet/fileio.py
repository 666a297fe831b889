"""File formats: matrices, point sets, graphs, and report objects.

Matrices are JSON objects {"d": .., "n": .., "columns": [[...], ...]}
with columns as n lists of d decimals (optionally a "meta" object);
plain CSV with d rows and n columns is accepted too.  Point sets use
{"points": [[...], ...]}.  Graphs are plain text: a "graph V E" header,
one "u v" pair per line, '#' comments; "# label v tag..." comments
carry provenance labels across pipeline steps.

Reports serialize with sorted keys and round-trip float repr, so
identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
import sys

import numpy as np

from .errors import DomainError
from .graphs import Graph
from .numerics import InstanceMatrix


def load_matrix(path):
    """Returns (InstanceMatrix, meta dict)."""
    if str(path).endswith(".csv"):
        with open(path, newline="") as fh:
            rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
        if not rows:
            raise DomainError(f"{path}: empty CSV matrix")
        return InstanceMatrix(np.array(rows)), {}
    with open(path) as fh:
        obj = json.load(fh)
    if "columns" not in obj:
        raise DomainError(f"{path}: missing 'columns' field")
    cols = np.array(obj["columns"], dtype=np.float64)
    if cols.ndim != 2:
        raise DomainError(f"{path}: columns must be an n-list of d-lists")
    inst = InstanceMatrix(cols.T)
    if "d" in obj and int(obj["d"]) != inst.d:
        raise DomainError(f"{path}: d={obj['d']} does not match columns")
    if "n" in obj and int(obj["n"]) != inst.n:
        raise DomainError(f"{path}: n={obj['n']} does not match columns")
    return inst, obj.get("meta", {})


def matrix_payload(instance: InstanceMatrix, meta=None):
    payload = {
        "d": instance.d,
        "n": instance.n,
        "columns": [[float(x) for x in col] for col in instance.columns],
    }
    if meta:
        payload["meta"] = meta
    return payload


def save_matrix(path, instance: InstanceMatrix, meta=None):
    write_report(matrix_payload(instance, meta), path)


def load_points(path):
    with open(path) as fh:
        obj = json.load(fh)
    if "points" not in obj:
        raise DomainError(f"{path}: missing 'points' field")
    pts = np.array(obj["points"], dtype=np.float64)
    if pts.ndim != 2:
        raise DomainError(f"{path}: points must be an n-list of d-lists")
    return pts, obj.get("meta", {})


def save_points(path, points, meta=None):
    payload = {"points": [[float(x) for x in p] for p in np.asarray(points)]}
    if meta:
        payload["meta"] = meta
    write_report(payload, path)


def load_graph(path):
    header = None
    edges = []
    labels = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts[:1] == ["label"] and len(parts) >= 3:
                    labels[int(parts[1])] = tuple(
                        int(p) if p.lstrip("-").isdigit() else p for p in parts[2:]
                    )
                continue
            parts = line.split()
            if header is None:
                if parts[0] != "graph" or len(parts) != 3:
                    raise DomainError(f"{path}:{lineno}: expected 'graph V E' header")
                header = (int(parts[1]), int(parts[2]))
                continue
            if len(parts) != 2:
                raise DomainError(f"{path}:{lineno}: expected 'u v'")
            edges.append((int(parts[0]), int(parts[1])))
    if header is None:
        raise DomainError(f"{path}: missing 'graph V E' header")
    nv, ne = header
    if len(edges) != ne:
        raise DomainError(f"{path}: header says {ne} edges, found {len(edges)}")
    label_tuple = None
    if labels:
        label_tuple = tuple(labels.get(v, ("orig", v)) for v in range(nv))
    return Graph(nv, tuple(edges), label_tuple)


def save_graph(path_or_fh, g: Graph):
    def emit(fh):
        fh.write(f"graph {g.vertex_count} {g.edge_count}\n")
        if g.labels is not None:
            for v, lab in enumerate(g.labels):
                fh.write("# label %d %s\n" % (v, " ".join(str(x) for x in lab)))
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")

    if isinstance(path_or_fh, (str, bytes)):
        with open(path_or_fh, "w") as fh:
            emit(fh)
    else:
        emit(path_or_fh)


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


def report_bytes(obj):
    return (
        json.dumps(_sanitize(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"
    ).encode()


def write_report(obj, out=None):
    data = report_bytes(obj)
    if out is None or out == "-":
        sys.stdout.write(data.decode())
        sys.stdout.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(data)
