"""Intra-route improvement applied to candidates after repair.

Only the visiting order inside a route changes, so assignments, loads and
capacities are untouched and feasibility carries over.
"""
from __future__ import annotations

from .state import SearchState

_EPS = 1e-9


def two_opt(d, w, route) -> bool:
    """First-improvement 2-opt on a closed tour ``w -> route -> w`` (symmetric ``d``)."""
    path = [w, *route, w]
    n = len(path)
    changed, improved = False, True
    while improved:
        improved = False
        for i in range(1, n - 2):
            a, b = path[i - 1], path[i]
            for j in range(i + 1, n - 1):
                c, e = path[j], path[j + 1]
                if d[a][c] + d[b][e] < d[a][b] + d[c][e] - _EPS:
                    path[i:j + 1] = path[j:i - 1:-1]
                    b = path[i]
                    improved = changed = True
    if changed:
        route[:] = path[1:-1]
    return changed


def relocate(d, w, route) -> bool:
    """Move single visits to their best position in the same tour while that helps."""
    changed = False
    improved = True
    while improved:
        improved = False
        for i in range(len(route)):
            v = route[i]
            prev = route[i - 1] if i else w
            nxt = route[i + 1] if i + 1 < len(route) else w
            gain = d[prev][v] + d[v][nxt] - d[prev][nxt]
            rest = route[:i] + route[i + 1:]
            best, pos = gain - _EPS, -1
            p = w
            for k, u in enumerate(rest + [w]):
                delta = d[p][v] + d[v][u] - d[p][u]
                if delta < best:
                    best, pos = delta, k
                p = u
            if pos >= 0:
                rest.insert(pos, v)
                route[:] = rest
                improved = changed = True
                break
    return changed


def improve_routes(state: SearchState) -> None:
    """Locally optimise every route in the groups marked dirty, then clear the marks."""
    ctx = state.ctx
    d = ctx.d
    for key in sorted(state.dirty):
        w = key[0]
        for r in state.routes[key]:
            if len(r) < 2:
                continue
            if not ctx.symmetric:
                relocate(d, w, r)
                continue
            # alternate until neither move helps
            while (two_opt(d, w, r) if len(r) > 2 else False) | relocate(d, w, r):
                pass
    state.dirty.clear()
