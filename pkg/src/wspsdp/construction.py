"""Two-phase initial solution: greedy node-to-warehouse assignment, then
nearest-neighbour tours per warehouse."""
from __future__ import annotations

from dataclasses import dataclass, field

from .exceptions import ConstructionError
from .model import (
    CAPACITY_TOL, Instance, Role, Route, RouteKind, Solution, SubNode, VariantConfig,
)

CHEAPEST = "cheapest-feasible"
NEAREST = "nearest"
FALLBACK = "fallback-split"
ORIGIN = "origin"
INSERTION = "insertion-fallback"
# randomized greedy restarts tried after the regret insertion fails
FALLBACK_ATTEMPTS = 200


@dataclass(frozen=True)
class AssignmentEvent:
    node: int
    warehouse: int
    reason: str
    commodities: tuple


@dataclass(frozen=True)
class RouteEvent:
    warehouse: int
    kind: RouteKind
    visits: tuple


@dataclass
class ConstructionTrace:
    assignments: list = field(default_factory=list)
    routes: list = field(default_factory=list)

    @property
    def pick_order(self) -> list:
        out = []
        for ev in self.assignments:
            if not out or out[-1] != ev.node:
                out.append(ev.node)
        return out

    def replay(self, inst: Instance) -> Solution:
        """Rebuild the solution recorded by this trace."""
        side = {}
        for ev in self.assignments:
            kind = RouteKind.COLLECTION if inst.roles[ev.node] is Role.FACTORY else RouteKind.DELIVERY
            for c in ev.commodities:
                side[(c, kind)] = ev.warehouse
        groups = {}
        for (c, kind), w in side.items():
            end = c[0] if kind is RouteKind.COLLECTION else c[1]
            groups.setdefault((end, w, kind), set()).add(c)
        routes = []
        for ev in self.routes:
            routes.append(Route(ev.warehouse, ev.kind, tuple(
                SubNode(v, ev.warehouse, frozenset(groups[(v, ev.warehouse, ev.kind)]))
                for v in ev.visits)))
        assignment = {c: (side[(c, RouteKind.COLLECTION)], side[(c, RouteKind.DELIVERY)])
                      for c in inst.commodities}
        return Solution(routes=routes, assignment=assignment)


class _Phase1:
    """Capacity bookkeeping while endpoints of commodities are assigned one by one.

    A commodity contributes its flow to the inbound load of each warehouse
    holding one of its assigned endpoints, counted once when both ends share
    a warehouse. This equals the final inbound load once both ends are fixed.
    """

    def __init__(self, inst: Instance):
        self.inst = inst
        self.coll = {}
        self.deliv = {}
        self.inbound = {w: 0.0 for w in inst.warehouses}
        self.subload = {}

    def delta(self, comms, role, w):
        other = self.deliv if role is Role.FACTORY else self.coll
        return sum(self.inst.flow[c] for c in comms if other.get(c) != w)

    def fits(self, node, comms, role, w):
        inst = self.inst
        d = self.delta(comms, role, w)
        if self.inbound[w] + d > inst.warehouse_capacity[w] + CAPACITY_TOL:
            return False
        load = self.subload.get((node, w), 0.0) + sum(inst.flow[c] for c in comms)
        return load <= inst.vehicle_capacity + CAPACITY_TOL

    def assign(self, node, comms, role, w):
        self.inbound[w] += self.delta(comms, role, w)
        side = self.coll if role is Role.FACTORY else self.deliv
        for c in comms:
            side[c] = w
        self.subload[(node, w)] = self.subload.get((node, w), 0.0) + sum(self.inst.flow[c] for c in comms)


def _node_commodities(inst, v):
    if inst.roles[v] is Role.FACTORY:
        return [c for c in inst.commodities if c[0] == v]
    return [c for c in inst.commodities if c[1] == v]


def construct_initial(inst: Instance, cfg=None, seed: int = 0):
    """Build a feasible starting solution; returns ``(solution, trace)``.

    The greedy two-phase rule runs first. If it gets stuck on capacity, a
    capacity-aware regret insertion from the empty solution is tried before
    giving up; that is the only place ``seed`` matters (insertion order ties).
    """
    cfg = VariantConfig.of(cfg)
    try:
        return _two_phase(inst, cfg)
    except ConstructionError as exc:
        sol = _insertion_fallback(inst, cfg, seed)
        if sol is None:
            raise exc
        trace = ConstructionTrace()
        for r in sol.routes:
            for sn in r.visits:
                trace.assignments.append(
                    AssignmentEvent(sn.node, r.warehouse, INSERTION, tuple(sorted(sn.commodities))))
            trace.routes.append(RouteEvent(r.warehouse, r.kind, tuple(sn.node for sn in r.visits)))
        return trace.replay(inst), trace


def _insertion_fallback(inst: Instance, cfg: VariantConfig, seed: int):
    # imported here: the search package itself depends on this module
    import random

    from .alnds.operators import LOCATION, PartialSolution, greedy_repair, regret_repair
    from .alnds.state import DELIV, Context, SearchState
    from .exceptions import RepairError

    ctx = Context(inst, cfg)
    items = []
    for v in sorted(ctx.kind):
        comms = tuple(k for k, c in enumerate(ctx.comms) if c[ctx.kind[v]] == v)
        if not comms or (cfg.no_transfers and ctx.kind[v] == DELIV):
            continue
        if cfg.single_allocation:
            items.append((ctx.kind[v], v, comms, -1))
        else:
            # one item per commodity so nodes may split across warehouses
            items.extend((ctx.kind[v], v, (k,), -1) for k in comms)
    rng = random.Random(seed)
    for repair in [regret_repair] + [greedy_repair] * FALLBACK_ATTEMPTS:
        part = PartialSolution(SearchState(ctx), pool=list(items), mode=LOCATION)
        try:
            return repair(part, rng).to_solution()
        except RepairError:
            continue
    return None


def _two_phase(inst: Instance, cfg: VariantConfig):
    roles = inst.roles
    d = inst.dist
    dem = inst.node_demand
    trace = ConstructionTrace()
    state = _Phase1(inst)

    by_cost = sorted(inst.warehouses, key=lambda w: (inst.warehouse_unit_cost[w], w))
    order = sorted((v for v in dem if dem[v] > 0), key=lambda v: (-dem[v], v))
    pending_wi = []

    for v in order:
        role = roles[v]
        comms = _node_commodities(inst, v)
        if role is Role.CUSTOMER and cfg.no_transfers:
            pending_wi.append(v)
            continue
        if role is Role.FACTORY:
            cands, reason = by_cost, CHEAPEST
        else:
            cands, reason = sorted(inst.warehouses, key=lambda w: (d[w][v], w)), NEAREST
        chosen = next((w for w in cands if state.fits(v, comms, role, w)), None)
        if chosen is not None:
            state.assign(v, comms, role, chosen)
            trace.assignments.append(AssignmentEvent(v, chosen, reason, tuple(comms)))
            continue
        if cfg.single_allocation:
            raise ConstructionError(f"node {v} (demand {dem[v]:.6g}) fits no single warehouse", node=v)
        # split the commodity set, largest first, over warehouses in preference order
        parts = {}
        for c in sorted(comms, key=lambda c: (-inst.flow[c], c)):
            w = next((w for w in cands if state.fits(v, [c], role, w)), None)
            if w is None:
                raise ConstructionError(f"node {v}: commodity {c} fits no warehouse", node=v)
            state.assign(v, [c], role, w)
            parts.setdefault(w, []).append(c)
        for w in cands:
            if w in parts:
                trace.assignments.append(AssignmentEvent(v, w, FALLBACK, tuple(sorted(parts[w]))))

    for v in pending_wi:
        parts = {}
        for c in _node_commodities(inst, v):
            parts.setdefault(state.coll[c], []).append(c)
        for w in sorted(parts):
            comms = parts[w]
            if not state.fits(v, comms, Role.CUSTOMER, w):
                raise ConstructionError(f"customer {v}: load from warehouse {w} exceeds vehicle capacity",
                                        node=v)
            state.assign(v, comms, Role.CUSTOMER, w)
            trace.assignments.append(AssignmentEvent(v, w, ORIGIN, tuple(comms)))

    # phase 2: nearest-neighbour tours per warehouse and kind
    groups = {}
    for ev in trace.assignments:
        kind = RouteKind.COLLECTION if roles[ev.node] is Role.FACTORY else RouteKind.DELIVERY
        groups.setdefault((ev.warehouse, kind), set()).add(ev.node)
    Qv = inst.vehicle_capacity
    for w in inst.warehouses:
        for kind in (RouteKind.COLLECTION, RouteKind.DELIVERY):
            pending = sorted(groups.get((w, kind), ()))
            while pending:
                cur, room, tour = w, Qv, []
                while True:
                    feas = [x for x in pending if state.subload[(x, w)] <= room + CAPACITY_TOL]
                    if not feas:
                        break
                    nxt = min(feas, key=lambda x: (d[cur][x], x))
                    tour.append(nxt)
                    pending.remove(nxt)
                    room -= state.subload[(nxt, w)]
                    cur = nxt
                if not tour:
                    raise ConstructionError(f"sub-node ({pending[0]},{w}) exceeds vehicle capacity",
                                            node=pending[0])
                trace.routes.append(RouteEvent(w, kind, tuple(tour)))

    return trace.replay(inst), trace
