"""Problem and solution data model, objective evaluation and feasibility checks.

Node ids are the positions ``0..n-1`` of the node list; every matrix is indexed
by node id. A commodity is a ``(factory, customer)`` pair with positive flow.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .exceptions import ModelInconsistencyError, ParameterError

CAPACITY_TOL = 1e-6
COST_RTOL = 1e-9


class Role(str, enum.Enum):
    FACTORY = "factory"
    CUSTOMER = "customer"
    WAREHOUSE = "warehouse"


class RouteKind(str, enum.Enum):
    COLLECTION = "collection"
    DELIVERY = "delivery"


class Variant(str, enum.Enum):
    WSPSDP = "wspsdp"
    WSPS_SA = "sa"
    WSPS_WI = "wi"


VARIANT_NAMES = tuple(v.value for v in Variant)


@dataclass(frozen=True)
class VariantConfig:
    variant: Variant = Variant.WSPSDP

    @classmethod
    def of(cls, value) -> "VariantConfig":
        """Coerce a VariantConfig, Variant or name ("wspsdp", "sa", "wi", "WSPS_SA", ...)."""
        if isinstance(value, VariantConfig):
            return value
        if value is None:
            return cls()
        if isinstance(value, Variant):
            return cls(value)
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "wspsdp": Variant.WSPSDP,
            "sa": Variant.WSPS_SA,
            "wsps_sa": Variant.WSPS_SA,
            "wi": Variant.WSPS_WI,
            "wsps_wi": Variant.WSPS_WI,
        }
        if key not in aliases:
            raise ParameterError(f"unknown variant {value!r}")
        return cls(aliases[key])

    @property
    def single_allocation(self) -> bool:
        return self.variant is Variant.WSPS_SA

    @property
    def no_transfers(self) -> bool:
        return self.variant is Variant.WSPS_WI


@dataclass(frozen=True)
class Node:
    id: int
    role: Role
    x: float | None = None
    y: float | None = None
    label: str | None = None


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable WSPSDP instance.

    ``flow[i, j]`` is the commodity flow from factory ``i`` to customer ``j``;
    ``warehouse_capacity`` and ``warehouse_unit_cost`` are keyed by warehouse id.
    """

    nodes: tuple
    distance: np.ndarray
    flow: np.ndarray
    warehouse_capacity: Mapping[int, float]
    warehouse_unit_cost: Mapping[int, float]
    vehicle_capacity: float
    alpha: float = 0.001
    beta: float = 1.0
    name: str = ""

    def __post_init__(self):
        dist = np.array(self.distance, dtype=float)
        flow = np.array(self.flow, dtype=float)
        dist.setflags(write=False)
        flow.setflags(write=False)
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "distance", dist)
        object.__setattr__(self, "flow", flow)
        object.__setattr__(self, "warehouse_capacity",
                           {int(k): float(v) for k, v in dict(self.warehouse_capacity).items()})
        object.__setattr__(self, "warehouse_unit_cost",
                           {int(k): float(v) for k, v in dict(self.warehouse_unit_cost).items()})
        object.__setattr__(self, "vehicle_capacity", float(self.vehicle_capacity))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def _ids(self, role):
        return tuple(n.id for n in self.nodes if n.role is role)

    @cached_property
    def factories(self) -> tuple:
        return self._ids(Role.FACTORY)

    @cached_property
    def customers(self) -> tuple:
        return self._ids(Role.CUSTOMER)

    @cached_property
    def warehouses(self) -> tuple:
        return self._ids(Role.WAREHOUSE)

    @cached_property
    def roles(self) -> dict:
        return {n.id: n.role for n in self.nodes}

    @cached_property
    def commodities(self) -> tuple:
        """Positive-flow ``(factory, customer)`` pairs in lexicographic order."""
        out = []
        for i in self.factories:
            for j in self.customers:
                if self.flow[i, j] > 0:
                    out.append((i, j))
        return tuple(out)

    @cached_property
    def node_demand(self) -> dict:
        """Total flow per factory (outgoing) or customer (incoming)."""
        dem = {}
        for i in self.factories:
            dem[i] = float(self.flow[i, list(self.customers)].sum()) if self.customers else 0.0
        for j in self.customers:
            dem[j] = float(self.flow[list(self.factories), j].sum()) if self.factories else 0.0
        return dem

    @property
    def total_demand(self) -> float:
        return float(sum(self.flow[i, j] for i, j in self.commodities))

    @cached_property
    def dist(self) -> list:
        """Distance matrix as nested lists (fast scalar access)."""
        return self.distance.tolist()

    def q(self, i, j) -> float:
        return float(self.flow[i, j])


# -- solutions ---------------------------------------------------------------

@dataclass(frozen=True)
class SubNode:
    node: int
    warehouse: int
    commodities: frozenset

    def __post_init__(self):
        object.__setattr__(self, "commodities",
                           frozenset((int(i), int(j)) for i, j in self.commodities))


@dataclass(frozen=True)
class Route:
    warehouse: int
    kind: RouteKind
    visits: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", RouteKind(self.kind))
        object.__setattr__(self, "visits", tuple(self.visits))

    @property
    def path(self) -> list:
        """Closed node sequence ``[w, v1, ..., vk, w]``."""
        return [self.warehouse, *(s.node for s in self.visits), self.warehouse]


@dataclass
class Solution:
    routes: list = field(default_factory=list)
    assignment: dict = field(default_factory=dict)  # (i, j) -> (m, n)

    def subnodes(self) -> Iterable[tuple]:
        for r in self.routes:
            for s in r.visits:
                yield r, s

    def used_warehouses(self) -> list:
        return sorted({r.warehouse for r in self.routes if r.visits})

    def canonical(self) -> "Solution":
        """Deterministically ordered copy (routes by warehouse, kind, first visit)."""
        routes = [r for r in self.routes if r.visits]
        routes.sort(key=lambda r: (r.warehouse, r.kind.value, [s.node for s in r.visits]))
        return Solution(routes=routes, assignment=dict(sorted(self.assignment.items())))


@dataclass(frozen=True)
class CostBreakdown:
    variable_cost: float
    local_tour_cost: float
    inter_warehouse_cost: float
    total: float

    @classmethod
    def from_parts(cls, variable, local, inter):
        return cls(variable, local, inter, variable + local + inter)


@dataclass
class Violation:
    constraint: str
    message: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def messages(self) -> list:
        return [v.message for v in self.violations]

    def add(self, constraint, message):
        self.violations.append(Violation(constraint, message))


class FeasibilityReport(ValidationReport):
    """Per-constraint feasibility outcome of a solution."""

    STRUCTURAL = ("6",)

    @property
    def feasible(self) -> bool:
        return self.ok

    def by_constraint(self, constraint) -> list:
        return [v for v in self.violations if v.constraint == constraint]


# -- operations --------------------------------------------------------------

def validate_instance(inst: Instance) -> ValidationReport:
    rep = ValidationReport()
    n = inst.n_nodes
    for pos, node in enumerate(inst.nodes):
        if node.id != pos:
            rep.add("ids", f"node ids must be 0..n-1 in order; position {pos} has id {node.id}")
    if inst.distance.shape != (n, n):
        rep.add("shape", f"distance matrix shape {inst.distance.shape} != ({n}, {n})")
        return rep
    if inst.flow.shape != (n, n):
        rep.add("shape", f"flow matrix shape {inst.flow.shape} != ({n}, {n})")
        return rep
    if not np.all(np.isfinite(inst.distance)):
        rep.add("distance", "non-finite distance")
    for i in range(n):
        if inst.distance[i, i] != 0:
            rep.add("distance", f"nonzero diagonal distance c[{i},{i}]")
    neg = np.argwhere(inst.distance < 0)
    for i, j in neg:
        rep.add("distance", f"negative distance c[{i},{j}]")
    roles = inst.roles
    for i, j in np.argwhere(inst.flow != 0):
        i, j = int(i), int(j)
        if inst.flow[i, j] < 0:
            rep.add("flow", f"negative flow q[{i},{j}]")
        elif not (roles.get(i) is Role.FACTORY and roles.get(j) is Role.CUSTOMER):
            rep.add("flow", f"flow outside F×C at q[{i},{j}]")
    if not inst.vehicle_capacity > 0:
        rep.add("vehicle", "nonpositive vehicle capacity")
    if inst.alpha < 0:
        rep.add("alpha", "negative alpha")
    if inst.beta < 0:
        rep.add("beta", "negative beta")
    whs = set(inst.warehouses)
    if set(inst.warehouse_capacity) != whs:
        rep.add("warehouses", "warehouse_capacity keys do not match warehouse nodes")
    if set(inst.warehouse_unit_cost) != whs:
        rep.add("warehouses", "warehouse_unit_cost keys do not match warehouse nodes")
    for w, cap in sorted(inst.warehouse_capacity.items()):
        if not cap > 0:
            rep.add("warehouses", f"nonpositive capacity at warehouse {w}")
    for w, a in sorted(inst.warehouse_unit_cost.items()):
        if a < 0:
            rep.add("warehouses", f"negative unit cost at warehouse {w}")
    return rep


def _check_node(inst, node):
    if not (isinstance(node, (int, np.integer)) and 0 <= node < inst.n_nodes):
        raise ModelInconsistencyError(f"node {node!r} is not in the instance")


def evaluate_objective(inst: Instance, sol: Solution) -> CostBreakdown:
    """Total cost split into origin-warehouse variable cost, local tours and transfers."""
    d = inst.dist
    variable = 0.0
    inter = 0.0
    for (i, j), (m, n) in sorted(sol.assignment.items()):
        for v in (i, j, m, n):
            _check_node(inst, v)
        q = float(inst.flow[i, j])
        if m not in inst.warehouse_unit_cost:
            raise ModelInconsistencyError(f"commodity ({i},{j}) uses non-warehouse {m}")
        variable += inst.warehouse_unit_cost[m] * q
        inter += inst.alpha * d[m][n] * q
    length = 0.0
    for r in sol.routes:
        if not r.visits:
            continue
        path = r.path
        for v in path:
            _check_node(inst, v)
        for a, b in zip(path, path[1:]):
            length += d[a][b]
    return CostBreakdown.from_parts(variable, inst.beta * length, inter)


def _subnode_load(inst, s: SubNode) -> float:
    tot = 0.0
    for i, j in sorted(s.commodities):
        _check_node(inst, i)
        _check_node(inst, j)
        tot += float(inst.flow[i, j])
    return tot


def route_load_profile(inst: Instance, route: Route, sol: Solution) -> list:
    """Vehicle load along ``route``.

    Collection: cumulative load after each visit. Delivery: load on board just
    before each visit.
    """
    if route not in sol.routes:
        raise ModelInconsistencyError("route is not part of the solution")
    loads = [_subnode_load(inst, s) for s in route.visits]
    if route.kind is RouteKind.COLLECTION:
        out, acc = [], 0.0
        for x in loads:
            acc += x
            out.append(acc)
        return out
    out, acc = [], 0.0
    for x in reversed(loads):
        acc += x
        out.append(acc)
    return out[::-1]


def count_multi_allocation_nodes(sol: Solution) -> int:
    seen = {}
    for r, s in sol.subnodes():
        seen.setdefault(s.node, set()).add(s.warehouse)
    return sum(1 for ws in seen.values() if len(ws) >= 2)


def warehouse_inbound(inst: Instance, assignment: Mapping) -> dict:
    """Inbound load per warehouse: collected flow plus transferred-in flow."""
    inbound = {w: 0.0 for w in inst.warehouses}
    for (i, j), (m, n) in sorted(assignment.items()):
        q = float(inst.flow[i, j])
        inbound[m] = inbound.get(m, 0.0) + q
        if n != m:
            inbound[n] = inbound.get(n, 0.0) + q
    return inbound


def validate_solution(inst: Instance, sol: Solution, cfg=None) -> FeasibilityReport:
    cfg = VariantConfig.of(cfg)
    rep = FeasibilityReport()
    roles = inst.roles
    n_nodes = inst.n_nodes
    whs = set(inst.warehouses)

    def known(v):
        return isinstance(v, (int, np.integer)) and 0 <= v < n_nodes

    # (2) every positive commodity has exactly one valid warehouse pair
    commodities = set(inst.commodities)
    assignment = {}
    for key, pair in sol.assignment.items():
        i, j = key
        m, n = pair
        if key not in commodities:
            rep.add("2", f"assignment for non-commodity ({i},{j})")
            continue
        if m not in whs or n not in whs:
            rep.add("2", f"commodity ({i},{j}) assigned to non-warehouse pair ({m},{n})")
            continue
        assignment[key] = (m, n)
    for c in inst.commodities:
        if c not in sol.assignment:
            rep.add("2", f"commodity {c} not served")

    # (9), (10), route ownership; gather sub-nodes
    seen = {}
    visited = set()
    for k, r in enumerate(sol.routes):
        if r.warehouse not in whs:
            rep.add("10", f"route {k} starts from non-warehouse {r.warehouse}")
            continue
        want = Role.FACTORY if r.kind is RouteKind.COLLECTION else Role.CUSTOMER
        for s in r.visits:
            if not known(s.node):
                rep.add("model", f"route {k} visits unknown node {s.node}")
                continue
            role = roles[s.node]
            if role is Role.WAREHOUSE:
                rep.add("10", f"route {k} visits warehouse {s.node}")
                continue
            if role is not want:
                rep.add("9", f"{r.kind.value} route {k} visits {role.value} {s.node}")
            if s.warehouse != r.warehouse:
                rep.add("9", f"sub-node ({s.node},{s.warehouse}) on route of warehouse {r.warehouse}")
            if not s.commodities:
                rep.add("7-8", f"sub-node ({s.node},{s.warehouse}) carries no commodities")
            key = (s.node, r.warehouse, r.kind)
            if key in seen:
                rep.add("5", f"node {s.node} linked to warehouse {r.warehouse} by more than one visit")
            seen[key] = s
            visited.add(s.node)

    # (4) nodes with positive flow visited
    for v, dem in sorted(inst.node_demand.items()):
        if dem > 0 and v not in visited:
            rep.add("4", f"node {v} with positive flow is never visited")

    # (7), (8) commodity/sub-node consistency in both directions
    for (i, j), (m, n) in sorted(assignment.items()):
        cs = seen.get((i, m, RouteKind.COLLECTION))
        if cs is None or (i, j) not in cs.commodities:
            rep.add("7", f"commodity ({i},{j}) collected at {m} without a matching sub-node")
        ds = seen.get((j, n, RouteKind.DELIVERY))
        if ds is None or (i, j) not in ds.commodities:
            rep.add("8", f"commodity ({i},{j}) delivered from {n} without a matching sub-node")
    for (v, w, kind), s in sorted(seen.items(), key=lambda t: (t[0][0], t[0][1], t[0][2].value)):
        for c in sorted(s.commodities):
            pair = assignment.get(c)
            end = c[0] if kind is RouteKind.COLLECTION else c[1]
            side = None if pair is None else (pair[0] if kind is RouteKind.COLLECTION else pair[1])
            if end != v or side != w:
                rep.add("7-8", f"sub-node ({v},{w}) carries commodity {c} not assigned to it")

    # (3) warehouse capacity
    for w, load in sorted(warehouse_inbound(inst, assignment).items()):
        cap = inst.warehouse_capacity.get(w, 0.0)
        if load > cap + CAPACITY_TOL:
            rep.add("3", f"warehouse {w} inbound {load:.6g} exceeds capacity {cap:.6g}")

    # (13) vehicle capacity
    for k, r in enumerate(sol.routes):
        load = 0.0
        for s in r.visits:
            for i, j in s.commodities:
                if known(i) and known(j):
                    load += float(inst.flow[i, j])
        if load > inst.vehicle_capacity + CAPACITY_TOL:
            rep.add("13", f"route {k} load {load:.6g} exceeds vehicle capacity {inst.vehicle_capacity:.6g}")

    # variants
    if cfg.single_allocation:
        per_node = {}
        for (v, w, _), _s in seen.items():
            per_node.setdefault(v, set()).add(w)
        for v, ws in sorted(per_node.items()):
            if len(ws) > 1:
                rep.add("SA", f"multi-allocated node {v}")
    if cfg.no_transfers:
        for (i, j), (m, n) in sorted(assignment.items()):
            if m != n:
                rep.add("WI", f"commodity ({i},{j}) transferred {m}->{n}")
    return rep


def is_feasible(inst, sol, cfg=None) -> bool:
    return validate_solution(inst, sol, cfg).feasible
