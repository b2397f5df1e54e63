"""JSON documents for instances and run reports (both carry ``schema_version``)."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

from gatx.model import (
    Instance,
    LspParams,
    Order,
    StructuralError,
    TimeDistanceMatrix,
    Vehicle,
    Waypoint,
)

SCHEMA_VERSION = 1
TIMING_KEYS = frozenset({"seconds", "init_seconds", "timing"})


def _wp(w: Waypoint) -> dict:
    return {"loc": w.loc, "st": w.st, "et": w.et, "service": w.service, "vol": w.vol}


def instance_to_dict(inst: Instance) -> dict:
    locs = [] if inst.locations is None else [
        {"id": k, "x": x, "y": y} for k, (x, y) in enumerate(inst.locations)
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "name": inst.name,
        "locations": locs,
        "matrix": {
            "times": inst.matrix.times.tolist(),
            "distances": inst.matrix.distances.tolist(),
        },
        "orders": [
            {"id": o.id, "owner": o.owner, "rev": o.rev, "pickup": _wp(o.pickup), "dropoff": _wp(o.dropoff)}
            for o in inst.orders
        ],
        "vehicles": [
            {"id": v.id, "cap": v.cap, "lspid": v.lspid, "depot": _wp(v.depot)} for v in inst.vehicles
        ],
        "lsps": [
            {"id": l.id, "alpha": l.alpha, "beta": l.beta, "fleet": list(l.fleet)} for l in inst.lsps
        ],
    }


def instance_from_dict(doc: dict) -> Instance:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise StructuralError(f"unsupported instance schema_version {version!r}")
    try:
        matrix = TimeDistanceMatrix(doc["matrix"]["times"], doc["matrix"]["distances"])
        orders = []
        for o in doc["orders"]:
            pick = Waypoint(order=o["id"], **o["pickup"])
            drop = Waypoint(order=o["id"], **o["dropoff"])
            orders.append(Order(o["id"], pick, drop, o["rev"], o["owner"]))
        vehicles = [Vehicle(v["id"], v["cap"], v["lspid"], Waypoint(**v["depot"])) for v in doc["vehicles"]]
        lsps = [LspParams(l["id"], l["alpha"], l["beta"], tuple(l["fleet"])) for l in doc["lsps"]]
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"malformed instance document: {exc!r}") from None
    locs = doc.get("locations") or None
    if locs is not None:
        if [p["id"] for p in locs] != list(range(len(locs))):
            raise StructuralError("location ids must be 0..n-1 in order")
        locs = tuple((p["x"], p["y"]) for p in locs)
    return Instance(matrix, tuple(orders), tuple(lsps), tuple(vehicles), locs, doc.get("name", ""))


def dump(doc: dict, path: Union[str, Path]):
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def save_instance(inst: Instance, path: Union[str, Path]):
    dump(instance_to_dict(inst), path)


def load_instance(path: Union[str, Path]) -> Instance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{path}: not valid JSON ({exc})") from None
    return instance_from_dict(doc)


def strip_timing(doc: Any) -> Any:
    """Copy of a report without wall-clock fields, for reproducibility checks."""
    if isinstance(doc, dict):
        return {k: strip_timing(v) for k, v in doc.items() if k not in TIMING_KEYS}
    if isinstance(doc, list):
        return [strip_timing(v) for v in doc]
    return doc
