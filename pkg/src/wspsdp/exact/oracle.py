"""Exhaustive optimal solver for tiny instances.

Every commodity is routed through exactly one (collection, delivery) warehouse
pair. The search enumerates all collection-side and delivery-side
configurations; for each (warehouse, kind) the sub-nodes are partitioned
optimally into capacity-feasible tours by a subset DP whose blocks are solved
as TSPs by permutation enumeration. Both are memoised.

All variants share the same arithmetic for a given configuration, so the
optimum over a restricted variant is never below the unrestricted optimum.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..exceptions import EnumerationSizeError, InfeasibleError
from ..model import (
    CAPACITY_TOL, CostBreakdown, Instance, Route, RouteKind, Solution, SubNode,
    VariantConfig, evaluate_objective,
)

MAX_NODES = 6
MAX_WAREHOUSES = 3
MAX_PAIRS = 30_000_000
_TIE_RTOL = 1e-9
_MAX_TIES = 64
_CHUNK = 1 << 20


class _Router:
    """Memoised optimal capacitated routing from one depot."""

    def __init__(self, inst: Instance):
        self.d = inst.dist
        self.Q = inst.vehicle_capacity
        self._tsp = {}
        self._cvrp = {}

    def tsp(self, depot, nodes):
        key = (depot, nodes)
        hit = self._tsp.get(key)
        if hit is not None:
            return hit
        d = self.d
        best, best_order = math.inf, None
        for perm in itertools.permutations(nodes):
            cost = d[depot][perm[0]]
            for a, b in zip(perm, perm[1:]):
                cost += d[a][b]
            cost += d[perm[-1]][depot]
            if cost < best:
                best, best_order = cost, perm
        self._tsp[key] = (best, best_order)
        return best, best_order

    def cvrp(self, depot, items):
        """``items``: sorted tuple of ``(node, load)``. Returns ``(distance, tours)``."""
        key = (depot, items)
        hit = self._cvrp.get(key)
        if hit is not None:
            return hit
        n = len(items)
        Q = self.Q + CAPACITY_TOL
        if any(load > Q for _, load in items):
            res = (math.inf, None)
            self._cvrp[key] = res
            return res
        full = (1 << n) - 1
        loads = [0.0] * (1 << n)
        for mask in range(1, 1 << n):
            low = (mask & -mask).bit_length() - 1
            loads[mask] = loads[mask ^ (1 << low)] + items[low][1]
        best = [math.inf] * (1 << n)
        choice = [0] * (1 << n)
        best[0] = 0.0
        for mask in range(1, full + 1):
            low = mask & -mask
            rest = mask ^ low
            sub = rest
            while True:
                block = sub | low
                if loads[block] <= Q:
                    nodes = tuple(items[k][0] for k in range(n) if block >> k & 1)
                    cand = self.tsp(depot, nodes)[0] + best[mask ^ block]
                    if cand < best[mask]:
                        best[mask], choice[mask] = cand, block
                if sub == 0:
                    break
                sub = (sub - 1) & rest
        tours = []
        mask = full
        while mask:
            block = choice[mask]
            nodes = tuple(items[k][0] for k in range(n) if block >> k & 1)
            tours.append(self.tsp(depot, nodes)[1])
            mask ^= block
        res = (best[full], tours)
        self._cvrp[key] = res
        return res


def _side_configs(ends, n_w, single):
    """Per-commodity warehouse index arrays; ``single`` ties each node to one warehouse."""
    K = len(ends)
    if not single:
        return np.array(list(itertools.product(range(n_w), repeat=K)), dtype=np.int64).reshape(-1, K)
    nodes = sorted(set(ends))
    pos = [nodes.index(e) for e in ends]
    rows = [[choice[p] for p in pos] for choice in itertools.product(range(n_w), repeat=len(nodes))]
    return np.array(rows, dtype=np.int64).reshape(-1, K)


def _side_routing(cfgs, ends, qs, whs, router, beta):
    out = np.empty(len(cfgs))
    for r, row in enumerate(cfgs.tolist()):
        per_w = {}
        for c, k in enumerate(row):
            bucket = per_w.setdefault(k, {})
            bucket[ends[c]] = bucket.get(ends[c], 0.0) + qs[c]
        dist = 0.0
        for k in sorted(per_w):
            dist += router.cvrp(whs[k], tuple(sorted(per_w[k].items())))[0]
        out[r] = beta * dist
    return out


class _Problem:
    def __init__(self, inst: Instance, cfg: VariantConfig):
        self.inst = inst
        self.cfg = cfg
        self.comms = list(inst.commodities)
        self.whs = list(inst.warehouses)
        self.qs = [float(inst.flow[c]) for c in self.comms]
        self.router = _Router(inst)
        n_w = len(self.whs)
        fac = [c[0] for c in self.comms]
        cus = [c[1] for c in self.comms]
        self.fac, self.cus = fac, cus
        single = cfg.single_allocation
        self.Mc = _side_configs(fac, n_w, single)
        self.Md = self.Mc if cfg.no_transfers else _side_configs(cus, n_w, single)
        beta = inst.beta
        a = [inst.warehouse_unit_cost[w] for w in self.whs]
        self.Lc = np.zeros(len(self.Mc))
        for c, q in enumerate(self.qs):
            self.Lc += q * np.asarray(a)[self.Mc[:, c]]
        self.Rc = _side_routing(self.Mc, fac, self.qs, self.whs, self.router, beta)
        self.Rd = _side_routing(self.Md, cus, self.qs, self.whs, self.router, beta)
        self.D = np.asarray([[inst.dist[m][n] for n in self.whs] for m in self.whs])
        self.cap = np.asarray([inst.warehouse_capacity[w] for w in self.whs])

    def pair_totals(self, ai, bi):
        """Totals for index arrays ``ai``, ``bi`` (broadcastable); inf where infeasible."""
        inst = self.inst
        Mc, Md = self.Mc, self.Md
        total = (self.Lc[ai] + self.Rc[ai]) + self.Rd[bi]
        T = np.zeros(np.broadcast(ai, bi).shape)
        for c, q in enumerate(self.qs):
            T += (inst.alpha * q) * self.D[Mc[ai, c], Md[bi, c]]
        total = total + T
        ok = np.isfinite(total)
        for k in range(len(self.whs)):
            inbound = np.zeros(total.shape)
            for c, q in enumerate(self.qs):
                m_here = Mc[ai, c] == k
                n_here = Md[bi, c] == k
                inbound += q * (m_here | n_here)
            ok &= inbound <= self.cap[k] + CAPACITY_TOL
        return np.where(ok, total, np.inf)

    def build(self, a, b) -> Solution:
        inst = self.inst
        whs = self.whs
        mrow, nrow = self.Mc[a].tolist(), self.Md[b].tolist()
        assignment = {c: (whs[mrow[k]], whs[nrow[k]]) for k, c in enumerate(self.comms)}
        routes = []
        for kind, ends, row in ((RouteKind.COLLECTION, self.fac, mrow),
                                (RouteKind.DELIVERY, self.cus, nrow)):
            per_w = {}
            members = {}
            for k, wk in enumerate(row):
                w = whs[wk]
                bucket = per_w.setdefault(w, {})
                bucket[ends[k]] = bucket.get(ends[k], 0.0) + self.qs[k]
                members.setdefault((ends[k], w), set()).add(self.comms[k])
            for w in sorted(per_w):
                _, tours = self.router.cvrp(w, tuple(sorted(per_w[w].items())))
                for tour in tours:
                    routes.append(Route(w, kind, tuple(
                        SubNode(v, w, frozenset(members[(v, w)])) for v in tour)))
        return Solution(routes=routes, assignment=assignment).canonical()


def _check_size(inst, cfg, max_nodes, max_warehouses, max_pairs):
    n_nw = len(inst.factories) + len(inst.customers)
    if n_nw > max_nodes:
        raise EnumerationSizeError(f"{n_nw} factories+customers exceed the limit {max_nodes}")
    n_w = len(inst.warehouses)
    if n_w > max_warehouses:
        raise EnumerationSizeError(f"{n_w} warehouses exceed the limit {max_warehouses}")
    K = len(inst.commodities)
    if cfg.single_allocation:
        n_f = len({c[0] for c in inst.commodities})
        n_c = len({c[1] for c in inst.commodities})
        pairs = n_w ** (n_f + n_c)
    elif cfg.no_transfers:
        pairs = n_w ** K
    else:
        pairs = n_w ** (2 * K)
    if pairs > max_pairs:
        raise EnumerationSizeError(f"{pairs} configurations exceed the limit {max_pairs}")


def brute_force_solve(inst: Instance, cfg=None, *, max_nodes=MAX_NODES,
                      max_warehouses=MAX_WAREHOUSES, max_pairs=MAX_PAIRS):
    """Optimal ``(solution, cost)`` by exhaustive enumeration.

    Raises EnumerationSizeError above the size guard and InfeasibleError when
    no configuration satisfies the capacities.
    """
    cfg = VariantConfig.of(cfg)
    _check_size(inst, cfg, max_nodes, max_warehouses, max_pairs)
    if not inst.commodities:
        sol = Solution()
        return sol, evaluate_objective(inst, sol)
    if not inst.warehouses:
        raise InfeasibleError("no warehouses", binding="warehouse capacity")

    prob = _Problem(inst, cfg)
    nb = len(prob.Md)
    best_val = math.inf
    candidates = []  # (total, a, b)
    if cfg.no_transfers:
        idx = np.arange(len(prob.Mc))
        tot = prob.pair_totals(idx, idx)
        best_val = float(tot.min())
        if math.isfinite(best_val):
            lim = best_val + abs(best_val) * _TIE_RTOL
            for a in np.flatnonzero(tot <= lim)[:_MAX_TIES * 4]:
                candidates.append((float(tot[a]), int(a), int(a)))
    else:
        rows = np.flatnonzero(np.isfinite(prob.Lc + prob.Rc))
        step = max(1, _CHUNK // max(nb, 1))
        bidx = np.arange(nb)[None, :]
        for s in range(0, len(rows), step):
            ai = rows[s:s + step][:, None]
            tot = prob.pair_totals(ai, bidx)
            cmin = float(tot.min())
            if cmin > best_val + abs(best_val) * _TIE_RTOL and math.isfinite(best_val):
                continue
            if cmin < best_val:
                best_val = cmin
                lim = best_val + abs(best_val) * _TIE_RTOL
                candidates = [c for c in candidates if c[0] <= lim]
            lim = best_val + abs(best_val) * _TIE_RTOL
            hits = np.argwhere(tot <= lim)
            for r, b in hits[:_MAX_TIES * 4]:
                candidates.append((float(tot[r, b]), int(ai[r, 0]), int(b)))

    if not math.isfinite(best_val):
        single_ok = all(q <= inst.vehicle_capacity + CAPACITY_TOL for q in prob.qs)
        if not np.isfinite(prob.Rc).any() or not np.isfinite(prob.Rd).any() or not single_ok:
            raise InfeasibleError("no configuration fits the vehicle capacity",
                                  binding="vehicle capacity")
        raise InfeasibleError(
            f"no configuration fits the warehouse capacities "
            f"(total demand {inst.total_demand:.6g}, total capacity {float(prob.cap.sum()):.6g})",
            binding="warehouse capacity")

    candidates.sort()
    best = None
    for _, a, b in candidates[:_MAX_TIES]:
        sol = prob.build(a, b)
        cost = evaluate_objective(inst, sol)
        if best is None or cost.total < best[1].total:
            best = (sol, cost)
    return best


def optimum_total(inst, cfg=None, **kw) -> float:
    """Optimal total, or ``inf`` when the instance is infeasible for ``cfg``."""
    try:
        return brute_force_solve(inst, cfg, **kw)[1].total
    except InfeasibleError:
        return math.inf
