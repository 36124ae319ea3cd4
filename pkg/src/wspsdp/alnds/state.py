"""Mutable working representation used inside the search loop.

Commodities are indexed ``0..K-1``; sub-nodes are keyed by ``(node, warehouse)``
(the node's role fixes the route kind); routes are plain node lists per
``(warehouse, kind)`` with kind 0 = collection, 1 = delivery. Warehouse
inbound loads follow the partial-assignment convention used throughout: a
commodity counts at each warehouse holding one of its assigned ends, once if
both ends share it.
"""
from __future__ import annotations

import numpy as np

from ..model import (
    CAPACITY_TOL, Instance, Role, Route, RouteKind, Solution, SubNode, VariantConfig,
)

COLL, DELIV = 0, 1
KINDS = (RouteKind.COLLECTION, RouteKind.DELIVERY)


class Context:
    """Per-run constants derived from the instance."""

    def __init__(self, inst: Instance, cfg: VariantConfig):
        self.inst = inst
        self.cfg = cfg
        self.single = cfg.single_allocation
        self.wi = cfg.no_transfers
        self.comms = list(inst.commodities)
        self.cidx = {c: k for k, c in enumerate(self.comms)}
        self.q = [float(inst.flow[c]) for c in self.comms]
        self.fac = [c[0] for c in self.comms]
        self.cus = [c[1] for c in self.comms]
        self.whs = list(inst.warehouses)
        self.a = dict(inst.warehouse_unit_cost)
        self.cap = {w: inst.warehouse_capacity[w] + CAPACITY_TOL for w in self.whs}
        self.Qv = inst.vehicle_capacity + CAPACITY_TOL
        self.alpha = inst.alpha
        self.beta = inst.beta
        self.d = inst.dist
        self.kind = {}
        for v, role in inst.roles.items():
            if role is Role.FACTORY:
                self.kind[v] = COLL
            elif role is Role.CUSTOMER:
                self.kind[v] = DELIV
        self.memo = {}
        self.symmetric = bool(np.array_equal(inst.distance, inst.distance.T))
        dmax = max((max(row) for row in self.d), default=0.0)
        self.dmax = dmax if dmax > 0 else 1.0


class SearchState:
    # ``dirty`` collects the (warehouse, kind) route groups changed since the
    # last copy, for route improvement
    __slots__ = ("ctx", "cw", "dw", "members", "load", "routes", "inbound", "dirty", "_rloads")

    def __init__(self, ctx: Context):
        self.ctx = ctx
        K = len(ctx.comms)
        self.cw = [-1] * K
        self.dw = [-1] * K
        self.members = {}
        self.load = {}
        self.routes = {(w, k): [] for w in ctx.whs for k in (COLL, DELIV)}
        self.inbound = {w: 0.0 for w in ctx.whs}
        self.dirty = set()
        self._rloads = {}

    def copy(self) -> "SearchState":
        s = SearchState.__new__(SearchState)
        s.ctx = self.ctx
        s.cw = self.cw[:]
        s.dw = self.dw[:]
        s.members = {k: set(v) for k, v in self.members.items()}
        s.load = self.load.copy()
        s.routes = {k: [r[:] for r in v] for k, v in self.routes.items()}
        s.inbound = self.inbound.copy()
        s.dirty = set()
        s._rloads = {k: v[:] for k, v in self._rloads.items()}
        return s

    # -- conversion ----------------------------------------------------------

    @classmethod
    def from_solution(cls, ctx: Context, sol: Solution) -> "SearchState":
        s = cls(ctx)
        for (i, j), (m, n) in sol.assignment.items():
            k = ctx.cidx[(i, j)]
            s.cw[k], s.dw[k] = m, n
        for r in sol.routes:
            if not r.visits:
                continue
            kind = COLL if r.kind is RouteKind.COLLECTION else DELIV
            nodes = []
            for sn in r.visits:
                key = (sn.node, r.warehouse)
                s.members[key] = {ctx.cidx[c] for c in sn.commodities}
                s.load[key] = s._sum_load(s.members[key])
                nodes.append(sn.node)
            s.routes[(r.warehouse, kind)].append(nodes)
        for k, q in enumerate(ctx.q):
            m, n = s.cw[k], s.dw[k]
            if m >= 0:
                s.inbound[m] += q
            if n >= 0 and n != m:
                s.inbound[n] += q
        return s

    def to_solution(self) -> Solution:
        ctx = self.ctx
        routes = []
        for (w, kind), rl in self.routes.items():
            for r in rl:
                routes.append(Route(w, KINDS[kind], tuple(
                    SubNode(v, w, frozenset(ctx.comms[c] for c in self.members[(v, w)])) for v in r)))
        assignment = {ctx.comms[k]: (self.cw[k], self.dw[k]) for k in range(len(ctx.comms))}
        return Solution(routes=routes, assignment=assignment).canonical()

    # -- evaluation ----------------------------------------------------------

    def _sum_load(self, members) -> float:
        q = self.ctx.q
        return sum(q[c] for c in sorted(members))

    def cost(self) -> float:
        ctx = self.ctx
        d = ctx.d
        length = 0.0
        for (w, _), rl in self.routes.items():
            for r in rl:
                prev = w
                for v in r:
                    length += d[prev][v]
                    prev = v
                length += d[prev][w]
        a, alpha, q = ctx.a, ctx.alpha, ctx.q
        lin = 0.0
        for k, m in enumerate(self.cw):
            n = self.dw[k]
            lin += q[k] * (a[m] + alpha * d[m][n])
        return ctx.beta * length + lin

    def route_load(self, w, r) -> float:
        load = self.load
        return sum(load[(v, w)] for v in r)

    def route_loads(self, key) -> list:
        """Loads of the routes in group ``(w, kind)``, cached until the group changes."""
        out = self._rloads.get(key)
        if out is None:
            w, load = key[0], self.load
            out = self._rloads[key] = [sum(load[(v, w)] for v in r) for r in self.routes[key]]
        return out

    def subnode_keys(self) -> list:
        return sorted(self.load)

    def open_warehouses(self) -> set:
        return {w for (w, _), rl in self.routes.items() if rl}

    def node_warehouses(self, node) -> list:
        return [w for w in self.ctx.whs if (node, w) in self.load]

    def find_route(self, node, w):
        for r in self.routes[(w, self.ctx.kind[node])]:
            if node in r:
                return r
        raise KeyError((node, w))

    def find_route_index(self, node, w) -> int:
        for ri, r in enumerate(self.routes[(w, self.ctx.kind[node])]):
            if node in r:
                return ri
        raise KeyError((node, w))

    # -- mutation ------------------------------------------------------------

    def _unassign_side(self, c, kind):
        """Clear one end of commodity ``c`` and update inbound loads."""
        q = self.ctx.q[c]
        if kind == COLL:
            m, n = self.cw[c], self.dw[c]
            if n != m:
                self.inbound[m] -= q
            self.cw[c] = -1
        else:
            m, n = self.cw[c], self.dw[c]
            if m != n:
                self.inbound[n] -= q
            self.dw[c] = -1

    def _drop_from_route(self, node, w):
        key = (w, self.ctx.kind[node])
        self.dirty.add(key)
        self._rloads.pop(key, None)
        rl = self.routes[key]
        for ri, r in enumerate(rl):
            if node in r:
                r.remove(node)
                if not r:
                    del rl[ri]
                return
        raise KeyError((node, w))

    def remove_subnode(self, node, w) -> list:
        """Remove sub-node ``(node, w)`` entirely; returns its commodity indices."""
        kind = self.ctx.kind[node]
        comms = sorted(self.members.pop((node, w)))
        del self.load[(node, w)]
        self._drop_from_route(node, w)
        for c in comms:
            self._unassign_side(c, kind)
        return comms

    def remove_commodities(self, node, w, comms) -> None:
        """Strip ``comms`` from sub-node ``(node, w)``; drops it when emptied."""
        kind = self.ctx.kind[node]
        key = (node, w)
        mem = self.members[key]
        for c in comms:
            mem.discard(c)
            self._unassign_side(c, kind)
        if mem:
            self.load[key] = self._sum_load(mem)
            self._rloads.pop((w, kind), None)
        else:
            del self.members[key]
            del self.load[key]
            self._drop_from_route(node, w)

    def assign(self, node, w, comms, kind, placement) -> None:
        """Attach ``comms`` to ``(node, w)``.

        ``placement`` is ``None`` for a merge into the existing sub-node,
        ``(route_index, position)`` for an insertion, or ``(-1, 0)`` to open
        a new route.
        """
        q = self.ctx.q
        key = (node, w)
        self._rloads.pop((w, kind), None)
        for c in comms:
            if kind == COLL:
                if self.dw[c] != w:
                    self.inbound[w] += q[c]
                self.cw[c] = w
            else:
                if self.cw[c] != w:
                    self.inbound[w] += q[c]
                self.dw[c] = w
        if key in self.members:
            self.members[key].update(comms)
        else:
            self.members[key] = set(comms)
            rl = self.routes[(w, kind)]
            self.dirty.add((w, kind))
            ri, pos = placement
            if ri < 0:
                rl.append([node])
            else:
                rl[ri].insert(pos, node)
        self.load[key] = self._sum_load(self.members[key])
