"""Destroy and repair operators.

A removed sub-node becomes an *item* ``(kind, node, commodities, origin)``
awaiting reinsertion on that side only; the other end of each commodity
stays where it is. Without transfers (WI) both ends of a commodity always
share a warehouse, so removal strips both ends and items are collection
groups whose customers are re-inserted alongside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..exceptions import ParameterError, RepairError
from ..model import Instance, Solution, VariantConfig
from .state import COLL, DELIV, Context, SearchState

LOCATION, ALLOCATION, ROUTING = "warehouse-location", "allocation", "routing"
SUBPROBLEMS = (LOCATION, ALLOCATION, ROUTING)

RANDOM, WORST, SHAW = "random_removal", "worst_removal", "shaw_removal"
WH_REMOVAL, WH_OPENING = "warehouse_removal", "warehouse_opening"
WH_EXCHANGE = "warehouse_exchange"
DUPLICATION, DEDUPLICATION = "duplication", "deduplication"
DESTROY_OPERATORS = (RANDOM, WORST, SHAW, WH_REMOVAL, WH_OPENING, WH_EXCHANGE, DUPLICATION,
                     DEDUPLICATION)

GREEDY, REGRET2 = "greedy_insertion", "regret2_insertion"
GREEDY_NOISE, REGRET2_NOISE = "greedy_insertion_noise", "regret2_insertion_noise"
REPAIR_OPERATORS = (GREEDY, REGRET2, GREEDY_NOISE, REGRET2_NOISE)
# noisy repairs perturb each insertion cost by U(-a, a), a = NOISE_LEVEL * beta * max distance
NOISE_LEVEL = 0.025

SUBPROBLEM_DESTROYS = {
    LOCATION: (WH_REMOVAL, WH_OPENING, WH_EXCHANGE),
    ALLOCATION: (RANDOM, WORST, SHAW, DUPLICATION, DEDUPLICATION),
    ROUTING: (RANDOM, WORST, SHAW),
}


def destroys_for(subproblem, cfg: VariantConfig) -> tuple:
    ops = SUBPROBLEM_DESTROYS[subproblem]
    if cfg.single_allocation:
        ops = tuple(o for o in ops if o != DUPLICATION)
    return ops


@dataclass
class PartialSolution:
    state: SearchState
    pool: list = field(default_factory=list)
    mode: str = ALLOCATION
    open: frozenset = frozenset()
    closed: frozenset = frozenset()
    noop: bool = False
    # (node, warehouse) pairs an item may not return to; duplication puts the
    # split-off half in a new sub-node, hence at another warehouse
    forbid: frozenset = frozenset()

    def allowed(self, item) -> list:
        origin = item[3]
        if self.mode == ROUTING:
            return [origin]
        whs = self.state.ctx.whs
        if self.mode == ALLOCATION:
            ws = [w for w in whs if w in self.open or w == origin]
        else:
            ws = [w for w in whs if w not in self.closed]
        if self.forbid:
            ws = [w for w in ws if (item[1], w) not in self.forbid]
        return ws


# -- destroy -------------------------------------------------------------------

def _n_remove(state, degree, floor=1):
    n = len(state.load)
    return min(n, max(floor, math.ceil(degree * n)))


def _remove(state: SearchState, node, w, removed: dict):
    """Remove sub-node ``(node, w)``; removed commodity indices are recorded in
    ``removed`` keyed by ``(kind, node, origin)``."""
    ctx = state.ctx
    kind = ctx.kind[node]
    if not ctx.wi:
        comms = state.remove_subnode(node, w)
        removed.setdefault((kind, node, w), []).extend(comms)
        return
    _strip_wi(state, node, w, list(state.members[(node, w)]), removed)


def _strip_wi(state, node, w, comms, removed):
    ctx = state.ctx
    kind = ctx.kind[node]
    state.remove_commodities(node, w, comms)
    for c in comms:
        if kind == COLL:
            state.remove_commodities(ctx.cus[c], state.dw[c], [c])
        else:
            state.remove_commodities(ctx.fac[c], state.cw[c], [c])
        removed.setdefault((COLL, ctx.fac[c], w), []).append(c)


def _items(removed: dict) -> list:
    return [(kind, node, tuple(sorted(comms)), w) for (kind, node, w), comms in sorted(removed.items())]


def _positions(state):
    """``(node, w) -> (prev, next)`` along its route."""
    out = {}
    for (w, _), rl in state.routes.items():
        for r in rl:
            for k, v in enumerate(r):
                out[(v, w)] = (r[k - 1] if k else w, r[k + 1] if k + 1 < len(r) else w)
    return out


def removal_gain(state: SearchState, node, w, pos=None) -> float:
    """Cost saved by deleting sub-node ``(node, w)``: tour detour plus the
    variable and transfer cost of its commodities."""
    ctx = state.ctx
    d, q = ctx.d, ctx.q
    prev, nxt = (pos or _positions(state))[(node, w)]
    gain = ctx.beta * (d[prev][node] + d[node][nxt] - d[prev][nxt])
    cw, dw = state.cw, state.dw
    if ctx.kind[node] == COLL:
        for c in state.members[(node, w)]:
            gain += q[c] * (ctx.a[cw[c]] + ctx.alpha * d[cw[c]][dw[c]])
    else:
        for c in state.members[(node, w)]:
            gain += q[c] * ctx.alpha * d[cw[c]][dw[c]]
    return gain


def destroy_state(state: SearchState, which, degree, rng, mode=None, min_removed=1) -> PartialSolution:
    """Apply destroy operator ``which`` to ``state`` in place.

    Count-based operators remove ``max(ceil(degree * n), min_removed)`` of the
    ``n`` sub-nodes (capped at ``n``).
    """
    ctx = state.ctx
    if mode is None:
        mode = next(sp for sp in SUBPROBLEMS if which in SUBPROBLEM_DESTROYS[sp])
    opened = frozenset(state.open_warehouses())
    part = PartialSolution(state, mode=mode, open=opened)
    removed = {}
    keys = state.subnode_keys()
    if not keys:
        part.noop = True
        return part

    if which == RANDOM:
        for node, w in rng.sample(keys, _n_remove(state, degree, min_removed)):
            if (node, w) in state.load:
                _remove(state, node, w, removed)
    elif which == WORST:
        pos = _positions(state)
        ranked = sorted(keys, key=lambda k: (-removal_gain(state, k[0], k[1], pos), k))
        for node, w in ranked[:_n_remove(state, degree, min_removed)]:
            if (node, w) in state.load:
                _remove(state, node, w, removed)
    elif which == SHAW:
        d = ctx.d
        seed = keys[int(rng.random() * len(keys))]
        s = seed[0]
        rel = lambda k: ((d[s][k[0]] + d[k[0]][s]) / (2 * ctx.dmax), k != seed, k)
        for node, w in sorted(keys, key=rel)[:_n_remove(state, degree, min_removed)]:
            if (node, w) in state.load:
                _remove(state, node, w, removed)
    elif which == WH_REMOVAL:
        cands = sorted(opened)
        w = cands[int(rng.random() * len(cands))]
        for node, ww in keys:
            if ww == w and (node, ww) in state.load:
                _remove(state, node, ww, removed)
        part.closed = frozenset([w])
    elif which == WH_OPENING:
        closed = [w for w in ctx.whs if w not in opened]
        if not closed:
            part.noop = True
            return part
        w = closed[int(rng.random() * len(closed))]
        d = ctx.d
        near = sorted(keys, key=lambda k: (d[w][k[0]] + d[k[0]][w], k))
        for node, ww in near[:_n_remove(state, degree, min_removed)]:
            if (node, ww) in state.load:
                _remove(state, node, ww, removed)
        part.open = opened | {w}
    elif which == WH_EXCHANGE:
        # empty two warehouses at once so their loads can trade places; a
        # one-warehouse solution pairs its warehouse with a closed one
        cands = sorted(opened)
        closed = [w for w in ctx.whs if w not in opened]
        if len(cands) >= 2:
            pair = rng.sample(cands, 2)
        elif cands and closed:
            pair = [cands[0], closed[int(rng.random() * len(closed))]]
        else:
            part.noop = True
            return part
        for node, w in keys:
            if w in pair and (node, w) in state.load:
                _remove(state, node, w, removed)
        part.open = opened | set(pair)
    elif which == DUPLICATION:
        if ctx.single:
            raise ParameterError("duplication is disabled under single allocation")
        cands = [k for k in keys if len(state.members[k]) >= 2]
        if not cands:
            part.noop = True
            return part
        node, w = cands[int(rng.random() * len(cands))]
        mem = sorted(state.members[(node, w)])
        rng.shuffle(mem)
        half = sorted(mem[:len(mem) // 2])
        if ctx.wi:
            _strip_wi(state, node, w, half, removed)
            part.forbid = frozenset((ctx.fac[c], w) for c in half)
        else:
            state.remove_commodities(node, w, half)
            removed[(ctx.kind[node], node, w)] = half
            part.forbid = frozenset([(node, w)])
    elif which == DEDUPLICATION:
        by_node = {}
        for node, w in keys:
            by_node.setdefault(node, []).append(w)
        multi = sorted(v for v, ws in by_node.items() if len(ws) >= 2)
        if not multi:
            part.noop = True
            return part
        node = multi[int(rng.random() * len(multi))]
        ws = by_node[node]
        _remove(state, node, ws[int(rng.random() * len(ws))], removed)
    else:
        raise ParameterError(f"unknown destroy operator {which!r}")

    part.pool = _items(removed)
    part.noop = not part.pool
    return part


# -- repair --------------------------------------------------------------------

def _route_insertion(state: SearchState, node, w, kind, qa, extra=None):
    """Cheapest ``(cost, placement)`` to host ``qa`` more load at ``(node, w)``.

    ``extra`` maps route indices of this group to load already promised to
    them by earlier calls (WI customer groups); it is updated in place.
    """
    ctx = state.ctx
    d, Qv = ctx.d, ctx.Qv
    loads = state.route_loads((w, kind))
    if (node, w) in state.load:
        ri = state.find_route_index(node, w)
        add = extra.get(ri, 0.0) if extra else 0.0
        if loads[ri] + add + qa > Qv:
            return None
        if extra is not None:
            extra[ri] = add + qa
        return 0.0, None
    if qa > Qv:
        return None
    dw = d[w]
    best = dw[node] + d[node][w]
    place = (-1, 0)
    best_ri = -1
    for ri, r in enumerate(state.routes[(w, kind)]):
        rl = loads[ri]
        if extra:
            rl += extra.get(ri, 0.0)
        if rl + qa > Qv:
            continue
        prev = w
        for pos, v in enumerate(r):
            delta = d[prev][node] + d[node][v] - d[prev][v]
            if delta < best:
                best, place, best_ri = delta, (ri, pos), ri
            prev = v
        delta = d[prev][node] + d[node][w] - d[prev][w]
        if delta < best:
            best, place, best_ri = delta, (ri, len(r)), ri
    if extra is not None and best_ri >= 0:
        extra[best_ri] = extra.get(best_ri, 0.0) + qa
    return ctx.beta * best, place


def evaluate_insertion(state: SearchState, item, w):
    """``(cost, plan)`` of inserting ``item`` at warehouse ``w``, or None if infeasible."""
    ctx = state.ctx
    kind, node, comms, _ = item
    q, d = ctx.q, ctx.d
    if ctx.single:
        for w2 in ctx.whs:
            if w2 != w and (node, w2) in state.load:
                return None
    # one pass: added load, capacity headroom used, variable and transfer cost
    qa = dcap = lin = 0.0
    alpha = ctx.alpha
    if kind == COLL:
        aw, dw, row = ctx.a[w], state.dw, d[w]
        for c in comms:
            qc = q[c]
            qa += qc
            n = dw[c]
            if n != w:
                dcap += qc
            lin += qc * (aw + alpha * row[n]) if n >= 0 else qc * aw
    else:
        cw = state.cw
        for c in comms:
            qc = q[c]
            qa += qc
            m = cw[c]
            if m != w:
                dcap += qc
            if m >= 0:
                lin += qc * alpha * d[m][w]
    if state.inbound[w] + dcap > ctx.cap[w]:
        return None
    ins = _route_insertion(state, node, w, kind, qa)
    if ins is None:
        return None
    if not ctx.wi:
        return lin + ins[0], ins[1]
    # without transfers the customers follow their factory to w
    extra = {}
    cost = lin + ins[0]
    for j, qj in _by_customer(ctx, comms):
        res = _route_insertion(state, j, w, DELIV, qj, extra)
        if res is None:
            return None
        cost += res[0]
    return cost, ins[1]


def _by_customer(ctx, comms):
    """``[(customer, load)]`` for a commodity group, memoised per run."""
    memo = ctx.memo
    out = memo.get(comms)
    if out is None:
        acc = {}
        for c in comms:
            acc.setdefault(ctx.cus[c], []).append(c)
        out = memo[comms] = [(j, sum(ctx.q[c] for c in cs)) for j, cs in sorted(acc.items())]
    return out


def apply_insertion(state: SearchState, item, w, placement) -> None:
    ctx = state.ctx
    kind, node, comms, _ = item
    state.assign(node, w, comms, kind, placement)
    if not ctx.wi:
        return
    acc = {}
    for c in comms:
        acc.setdefault(ctx.cus[c], []).append(c)
    for j, cs in sorted(acc.items()):
        res = _route_insertion(state, j, w, DELIV, sum(ctx.q[c] for c in cs))
        if res is None:
            raise RepairError(f"customer {j} cannot follow its factory to warehouse {w}")
        state.assign(j, w, cs, DELIV, res[1])


def _noise_fn(ctx, rng, noise):
    if not noise:
        return None
    amp = noise * ctx.beta * ctx.dmax
    return lambda cost: max(0.0, cost + amp * (2.0 * rng.random() - 1.0))


def _best_option(state, item, allowed, perturb=None):
    best = None
    for w in allowed:
        res = evaluate_insertion(state, item, w)
        if res is None:
            continue
        cost = res[0] if perturb is None else perturb(res[0])
        if best is None or cost < best[0]:
            best = (cost, w, res[1])
    return best


def greedy_repair(part: PartialSolution, rng, noise=0.0) -> SearchState:
    """Insert items one at a time, in random order, each at its cheapest feasible place."""
    state = part.state
    perturb = _noise_fn(state.ctx, rng, noise)
    order = list(part.pool)
    rng.shuffle(order)
    for item in order:
        best = _best_option(state, item, part.allowed(item), perturb)
        if best is None:
            raise RepairError(f"no feasible insertion for node {item[1]}")
        apply_insertion(state, item, best[1], best[2])
    part.pool = []
    return state


def regret_choice(option_costs) -> int:
    """Index of the item with the largest best/second-best cost gap.

    Items with a single option rank first; ties go to the lower best cost,
    then the lower index.
    """
    best_key, best_idx = None, None
    for idx, costs in enumerate(option_costs):
        cs = sorted(costs)
        regret = cs[1] - cs[0] if len(cs) > 1 else math.inf
        key = (-regret, cs[0], idx)
        if best_key is None or key < best_key:
            best_key, best_idx = key, idx
    return best_idx


def regret_repair(part: PartialSolution, rng, noise=0.0) -> SearchState:
    """Regret-2: insert first the item that loses most if its best option vanishes.

    Selection follows ``regret_choice``; the chosen item goes to its cheapest
    warehouse, ties to the lower id.
    """
    state = part.state
    perturb = _noise_fn(state.ctx, rng, noise)
    items = part.pool
    pending = list(range(len(items)))
    allowed = [part.allowed(it) for it in items]
    comm_sets = [set(it[2]) for it in items]
    cache = {}
    inf = math.inf
    while pending:
        best_key = best = None
        for idx in pending:
            c1 = c2 = inf
            opt = None
            for w in allowed[idx]:
                key = (idx, w)
                res = cache.get(key, cache)
                if res is cache:
                    res = evaluate_insertion(state, items[idx], w)
                    if res is not None and perturb is not None:
                        res = (perturb(res[0]), res[1])
                    cache[key] = res
                if res is None:
                    continue
                c = res[0]
                if c < c1:
                    c1, c2, opt = c, c1, (w, res[1])
                elif c < c2:
                    c2 = c
            if opt is None:
                raise RepairError(f"no feasible insertion for node {items[idx][1]}")
            k = (-(c2 - c1) if c2 < inf else -inf, c1, idx)
            if best_key is None or k < best_key:
                best_key, best = k, (idx, opt)
        idx, (w, plan) = best
        apply_insertion(state, items[idx], w, plan)
        pending.remove(idx)
        touched = comm_sets[idx]
        for key in list(cache):
            if key[1] == w or not touched.isdisjoint(comm_sets[key[0]]):
                del cache[key]
    part.pool = []
    return state


REPAIRS = {
    GREEDY: greedy_repair,
    REGRET2: regret_repair,
    GREEDY_NOISE: lambda part, rng: greedy_repair(part, rng, NOISE_LEVEL),
    REGRET2_NOISE: lambda part, rng: regret_repair(part, rng, NOISE_LEVEL),
}


def repair_state(part: PartialSolution, which, rng) -> SearchState:
    try:
        fn = REPAIRS[which]
    except KeyError:
        raise ParameterError(f"unknown repair operator {which!r}") from None
    return fn(part, rng)


# -- public wrappers on model solutions ------------------------------------------

def apply_destroy(sol: Solution, which, degree, rng, inst: Instance, cfg=None, mode=None):
    """Destroy a copy of ``sol``; returns ``(partial, removed_items)``.

    ``partial.noop`` is set when the operator does not apply.
    """
    ctx = Context(inst, VariantConfig.of(cfg))
    state = SearchState.from_solution(ctx, sol)
    part = destroy_state(state, which, degree, rng, mode)
    return part, list(part.pool)


def apply_repair(partial: PartialSolution, which, rng, inst: Instance = None, cfg=None) -> Solution:
    return repair_state(partial, which, rng).to_solution()
