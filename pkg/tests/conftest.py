import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wspsdp import Instance, Node, Role, Route, RouteKind, Solution, SubNode

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

W, F, C = Role.WAREHOUSE, Role.FACTORY, Role.CUSTOMER

# acceptance results, printed once at the end of the session
CRITERIA = {}


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        CRITERIA[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])


def make_instance(roles, distance, flows, capacity, unit_cost, vehicle, alpha=0.001, beta=1.0,
                  name="test"):
    n = len(roles)
    flow = np.zeros((n, n))
    for (i, j), q in flows.items():
        flow[i, j] = q
    whs = [k for k, r in enumerate(roles) if r is W]
    cap = capacity if isinstance(capacity, dict) else {w: capacity for w in whs}
    cost = unit_cost if isinstance(unit_cost, dict) else {w: unit_cost for w in whs}
    return Instance(tuple(Node(k, r) for k, r in enumerate(roles)), np.asarray(distance, float),
                    flow, cap, cost, vehicle, alpha, beta, name)


def toy_instance(vehicle=20.0, q=10.0):
    """One warehouse (0), one factory (1), one customer (2)."""
    d = [[0, 3, 4],
         [3, 0, 5],
         [4, 5, 0]]
    return make_instance([W, F, C], d, {(1, 2): q}, 100.0, 0.2, vehicle, name="1-1-1-toy")


def toy_solution():
    c = (1, 2)
    return Solution(
        routes=[Route(0, RouteKind.COLLECTION, (SubNode(1, 0, {c}),)),
                Route(0, RouteKind.DELIVERY, (SubNode(2, 0, {c}),))],
        assignment={c: (0, 0)})


def two_warehouse_toy():
    """Warehouses 0 and 1 (5 apart); factory 2 next to 0, customer 3 next to 1."""
    d = [[0, 5, 3, 4],
         [5, 0, 6, 4],
         [3, 6, 0, 5],
         [4, 4, 5, 0]]
    return make_instance([W, W, F, C], d, {(2, 3): 10.0}, 100.0, 0.2, 20.0, name="2-1-1-toy")


@pytest.fixture
def toy():
    return toy_instance()


@pytest.fixture
def toy_sol():
    return toy_solution()
