"""Deterministic CSV/JSON artifact writers and readers.

Numbers go to CSV at 17 significant digits so they round-trip through
float parsing losslessly; JSON uses sorted keys and the shortest
round-trip float repr. NaN becomes null in JSON and "nan" in CSV.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import ParseError
from .graph import DirectedNetwork
from .ingest import FitnessData
from .models import FittedModel, ModelKind


def fmt(x) -> str:
    """17-significant-digit decimal form of a float (lossless round trip)."""
    return format(float(x), ".17g")


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(c) if isinstance(c, (float, np.floating)) else c
                             for c in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if math.isnan(x) else x
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Fitted models
# ---------------------------------------------------------------------------


def model_to_dict(model: FittedModel) -> dict:
    out = {"kind": model.kind.value, "params": _jsonable(model.params)}
    if model.fitness is not None:
        out["fitness"] = {
            "assets": _jsonable(model.fitness.assets),
            "liabilities": _jsonable(model.fitness.liabilities),
        }
    if model.report is not None:
        # wall-clock seconds stay out: fitted.json must be byte-reproducible
        out["report"] = {
            "iterations": model.report.iterations,
            "residual_norm": model.report.residual_norm,
            "converged": model.report.converged,
        }
    return out


def model_from_dict(data: dict) -> FittedModel:
    kind = ModelKind(data["kind"])
    params = dict(data["params"])
    fitness = None
    if "fitness" in data:
        fitness = FitnessData(
            assets=np.array(data["fitness"]["assets"], dtype=float),
            liabilities=np.array(data["fitness"]["liabilities"], dtype=float),
        )
    return FittedModel(kind, params, fitness=fitness)


def write_model(path, model: FittedModel) -> None:
    write_json(path, model_to_dict(model))


def read_model(path) -> FittedModel:
    return model_from_dict(read_json(path))


# ---------------------------------------------------------------------------
# Networks as edge lists (one nodes.csv per directory fixes N and labels)
# ---------------------------------------------------------------------------


def write_nodes(path, labels) -> None:
    write_csv(path, ["index", "label"], list(enumerate(labels)))


def read_nodes(path) -> list[str]:
    labels = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["index", "label"]:
            raise ParseError(f"bad nodes header in {path}", line=1)
        for row in reader:
            if row:
                labels.append(row[1])
    return labels


def write_network(path, net: DirectedNetwork) -> None:
    rows = []
    src, dst = np.nonzero(net.adjacency)
    w = net.weights if net.weights is not None else net.adjacency
    for i, j in zip(src.tolist(), dst.tolist()):
        rows.append([i, j, float(w[i, j])])
    write_csv(path, ["source", "target", "weight"], rows)


def read_network(path, n: int, labels=None) -> DirectedNetwork:
    w = np.zeros((n, n))
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["source", "target", "weight"]:
            raise ParseError(f"bad edge-list header in {path}", line=1)
        for row in reader:
            if not row:
                continue
            try:
                i, j, weight = int(row[0]), int(row[1]), float(row[2])
            except (ValueError, IndexError):
                raise ParseError(f"bad edge row {row!r}", line=reader.line_num) from None
            w[i, j] += weight
    return DirectedNetwork.from_weight_matrix(w, labels=labels)
