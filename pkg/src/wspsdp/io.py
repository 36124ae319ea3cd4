"""Versioned JSON file formats for instances and solutions.

Instance document (``version`` 1)::

    {
      "version": 1,
      "name": "7-5-10-C",
      "nodes": [{"id": 0, "role": "warehouse", "x": 1.0, "y": 2.0}, ...],
      "distance": [[0.0, 3.0, ...], ...],          # dense, row-major
      "flows": [[i, j, q], ...],                   # sparse (factory, customer, flow)
      "warehouses": [{"id": 0, "capacity": 100.0, "unit_cost": 0.2}, ...],
      "vehicle_capacity": 60.0,
      "alpha": 0.001,
      "beta": 1.0
    }

Solution document (``version`` 1)::

    {
      "version": 1,
      "routes": [{"warehouse": 0, "kind": "collection",
                  "visits": [{"node": 3, "commodities": [[3, 5], [3, 6]]}]}],
      "assignment": [[i, j, m, n], ...]
    }
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .exceptions import InstanceFormatError
from .model import Instance, Node, Role, Route, RouteKind, Solution, SubNode

FORMAT_VERSION = 1


def _check_version(doc, what):
    if not isinstance(doc, dict):
        raise InstanceFormatError(f"{what} document must be a JSON object")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise InstanceFormatError(f"unsupported {what} version {version!r}")


def instance_to_dict(inst: Instance) -> dict:
    nodes = []
    for n in inst.nodes:
        rec = {"id": n.id, "role": n.role.value}
        if n.x is not None:
            rec["x"] = n.x
            rec["y"] = n.y
        if n.label is not None:
            rec["label"] = n.label
        nodes.append(rec)
    flows = [[i, j, float(inst.flow[i, j])] for i, j in inst.commodities]
    whs = [{"id": w, "capacity": inst.warehouse_capacity[w],
            "unit_cost": inst.warehouse_unit_cost[w]} for w in inst.warehouses]
    return {
        "version": FORMAT_VERSION,
        "name": inst.name,
        "nodes": nodes,
        "distance": inst.distance.tolist(),
        "flows": flows,
        "warehouses": whs,
        "vehicle_capacity": inst.vehicle_capacity,
        "alpha": inst.alpha,
        "beta": inst.beta,
    }


def instance_from_dict(doc: dict) -> Instance:
    _check_version(doc, "instance")
    try:
        nodes = []
        for rec in doc["nodes"]:
            x, y = rec.get("x"), rec.get("y")
            nodes.append(Node(int(rec["id"]), Role(rec["role"]),
                              None if x is None else float(x),
                              None if y is None else float(y),
                              rec.get("label")))
        n = len(nodes)
        dist = np.asarray(doc["distance"], dtype=float)
        if dist.shape != (n, n):
            raise InstanceFormatError(f"distance matrix shape {dist.shape} != ({n}, {n})")
        flow = np.zeros((n, n))
        for i, j, q in doc.get("flows", []):
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise InstanceFormatError(f"flow triple ({i}, {j}) outside node range")
            flow[i, j] = float(q)
        cap = {int(w["id"]): float(w["capacity"]) for w in doc["warehouses"]}
        cost = {int(w["id"]): float(w["unit_cost"]) for w in doc["warehouses"]}
        return Instance(nodes=tuple(nodes), distance=dist, flow=flow,
                        warehouse_capacity=cap, warehouse_unit_cost=cost,
                        vehicle_capacity=float(doc["vehicle_capacity"]),
                        alpha=float(doc["alpha"]), beta=float(doc["beta"]),
                        name=str(doc.get("name", "")))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(f"malformed instance: {exc}") from exc


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def write_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps(instance_to_dict(inst)))


def read_instance(path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc
    return instance_from_dict(doc)


def solution_to_dict(sol: Solution) -> dict:
    sol = sol.canonical()
    routes = []
    for r in sol.routes:
        routes.append({
            "warehouse": r.warehouse,
            "kind": r.kind.value,
            "visits": [{"node": s.node, "commodities": [list(c) for c in sorted(s.commodities)]}
                       for s in r.visits],
        })
    assignment = [[i, j, m, n] for (i, j), (m, n) in sorted(sol.assignment.items())]
    return {"version": FORMAT_VERSION, "routes": routes, "assignment": assignment}


def solution_from_dict(doc: dict) -> Solution:
    _check_version(doc, "solution")
    try:
        routes = []
        for r in doc["routes"]:
            w = int(r["warehouse"])
            visits = tuple(SubNode(int(v["node"]), w, frozenset(tuple(c) for c in v["commodities"]))
                           for v in r["visits"])
            routes.append(Route(w, RouteKind(r["kind"]), visits))
        assignment = {(int(i), int(j)): (int(m), int(n)) for i, j, m, n in doc["assignment"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"malformed solution: {exc}") from exc
    return Solution(routes=routes, assignment=assignment)


def write_solution(sol: Solution, path) -> None:
    Path(path).write_text(dumps(solution_to_dict(sol)))


def read_solution(path) -> Solution:
    doc = read_json(path)
    # solve output wraps the solution
    if isinstance(doc, dict) and "solution" in doc and "routes" not in doc:
        doc = doc["solution"]
    return solution_from_dict(doc)


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc
