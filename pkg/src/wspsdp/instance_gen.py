"""Network ingestion and seeded instance generation.

Instances are cut out of a network (the 81-city Turkish data set, or a
synthetic stand-in): warehouses are drawn from the candidate list, factories
and customers from the remaining nodes, and capacities/costs are sampled.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .exceptions import InstanceFormatError, ParameterError
from .model import Instance, Node, Role

CAPACITY_CLASSES = {"C": 0.3, "M": 0.5, "S": 0.7, "L": 2.0}
UNIT_COST_RANGE = (0.1, 0.3)
ALPHA = 0.001
BETA = 1.0
# 5-warehouse instances are drawn from the warehouses of the 7-warehouse one
BASE_WAREHOUSES = 7


@dataclass(frozen=True)
class NetworkData:
    distance: np.ndarray
    flow: np.ndarray
    candidates: tuple
    coords: np.ndarray | None = None

    @property
    def n_nodes(self) -> int:
        return self.distance.shape[0]


@dataclass(frozen=True)
class InstanceSpec:
    num_warehouses: int
    num_factories: int
    num_customers: int
    capacity_class: str = "M"
    seed: int = 0

    @property
    def name(self) -> str:
        return f"{self.num_warehouses}-{self.num_factories}-{self.num_customers}-{self.capacity_class}"

    @property
    def multiplier(self) -> float:
        try:
            return CAPACITY_CLASSES[self.capacity_class]
        except KeyError:
            raise ParameterError(f"unknown capacity class {self.capacity_class!r}") from None


def _read_matrix(path, what):
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in line.replace(",", " ").split()])
        except ValueError as exc:
            raise InstanceFormatError(f"{what}: line {lineno}: {exc}") from None
    n = len(rows)
    for r, row in enumerate(rows):
        if len(row) != n:
            raise InstanceFormatError(f"{what}: row {r} has {len(row)} columns, expected {n}")
    return np.array(rows, dtype=float).reshape(n, n)


def network_from_arrays(distance, flow, candidates, coords=None) -> NetworkData:
    """Validate raw arrays and wrap them as NetworkData."""
    distance = np.asarray(distance, dtype=float)
    flow = np.asarray(flow, dtype=float)
    n = distance.shape[0] if distance.ndim == 2 else -1
    if distance.ndim != 2 or distance.shape[1] != n:
        raise InstanceFormatError(f"distance matrix is not square: shape {distance.shape}")
    if flow.shape != (n, n):
        raise InstanceFormatError(f"flow matrix shape {flow.shape} does not match distance ({n}, {n})")
    for r, c in np.argwhere(distance < 0):
        raise InstanceFormatError(f"negative distance at row {r}, column {c}")
    for r, c in np.argwhere(flow < 0):
        raise InstanceFormatError(f"negative flow at row {r}, column {c}")
    for r in range(n):
        if flow[r, r] != 0:
            raise InstanceFormatError(f"flow on diagonal at row {r}, column {r}")
    cands = tuple(int(c) for c in candidates)
    for c in cands:
        if not 0 <= c < n:
            raise InstanceFormatError(f"candidate id {c} out of range for {n} nodes")
    if len(set(cands)) != len(cands):
        raise InstanceFormatError("duplicate candidate ids")
    return NetworkData(distance, flow, cands, None if coords is None else np.asarray(coords, float))


def load_network(distance_file, flow_file, candidates_file, *, one_based=False) -> NetworkData:
    """Read whitespace-delimited matrices and a candidate id list (0-based ids
    unless ``one_based``)."""
    dist = _read_matrix(distance_file, "distance")
    flow = _read_matrix(flow_file, "flow")
    toks = Path(candidates_file).read_text().replace(",", " ").split()
    try:
        ids = [int(t) - (1 if one_based else 0) for t in toks]
    except ValueError as exc:
        raise InstanceFormatError(f"candidates: {exc}") from None
    return network_from_arrays(dist, flow, ids)


def generate_synthetic_network(n: int, w: int, seed: int = 0, *, density: float = 0.5,
                               side: float = 1000.0, max_flow: int = 100) -> NetworkData:
    """Random Euclidean network: ``n`` nodes on a square, ``w`` candidate warehouses."""
    if n < 1:
        raise ParameterError("node count must be positive")
    if not 0 <= w <= n:
        raise ParameterError(f"candidate count {w} exceeds node count {n}")
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, side, size=(n, 2))
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    flow = np.where(mask, rng.integers(1, max_flow + 1, size=(n, n)), 0).astype(float)
    cands = tuple(sorted(int(c) for c in rng.choice(n, size=w, replace=False)))
    return NetworkData(dist, flow, cands, coords)


def generate_instance(net: NetworkData, spec: InstanceSpec) -> Instance:
    W, F, C = spec.num_warehouses, spec.num_factories, spec.num_customers
    if min(W, F, C) < 0 or W + F + C > net.n_nodes:
        raise ParameterError(f"{spec.name} needs {W + F + C} nodes, network has {net.n_nodes}")
    if W > len(net.candidates):
        raise ParameterError(f"{W} warehouses requested, only {len(net.candidates)} candidates")
    mult = spec.multiplier
    r_wh, r_nodes, r_cost, r_veh = (np.random.default_rng(s)
                                     for s in np.random.SeedSequence(spec.seed).spawn(4))

    base = max(W, min(BASE_WAREHOUSES, len(net.candidates)))
    base_ids = [int(v) for v in r_wh.choice(np.asarray(net.candidates), size=base, replace=False)]
    base_cost = r_cost.uniform(*UNIT_COST_RANGE, size=base)
    keep = sorted(int(k) for k in r_wh.choice(base, size=W, replace=False)) if W < base else range(base)
    wh = {base_ids[k]: float(base_cost[k]) for k in keep}

    cand = set(net.candidates)
    remaining = [v for v in range(net.n_nodes) if v not in cand]
    if len(remaining) < F + C:
        remaining = [v for v in range(net.n_nodes) if v not in set(base_ids)]
    if len(remaining) < F + C:
        remaining = [v for v in range(net.n_nodes) if v not in wh]
    picked = [int(v) for v in r_nodes.choice(np.asarray(remaining), size=F + C, replace=False)]
    factories, customers = sorted(picked[:F]), sorted(picked[F:])

    order = sorted(wh) + factories + customers
    roles = [Role.WAREHOUSE] * W + [Role.FACTORY] * F + [Role.CUSTOMER] * C
    nodes = []
    for k, (orig, role) in enumerate(zip(order, roles)):
        x = y = None
        if net.coords is not None:
            x, y = float(net.coords[orig, 0]), float(net.coords[orig, 1])
        nodes.append(Node(k, role, x, y, str(orig)))
    idx = np.asarray(order, dtype=int)
    dist = net.distance[np.ix_(idx, idx)]
    flow = np.zeros((len(order), len(order)))
    for a in range(W, W + F):
        for b in range(W + F, W + F + C):
            flow[a, b] = net.flow[order[a], order[b]]

    total = float(flow.sum())
    demands = list(flow.sum(axis=1)[W:W + F]) + list(flow.sum(axis=0)[W + F:])
    max_dem = float(max(demands, default=0.0))
    vehicle = float(r_veh.uniform(max_dem, total)) if total > max_dem else max(total, 1.0)
    cap = mult * total if total > 0 else 1.0
    return Instance(
        nodes=tuple(nodes), distance=dist, flow=flow,
        warehouse_capacity={k: cap for k in range(W)},
        warehouse_unit_cost={k: wh[order[k]] for k in range(W)},
        vehicle_capacity=vehicle, alpha=ALPHA, beta=BETA, name=spec.name,
    )


def scale_capacities(inst: Instance, multiplier: float, name: str | None = None) -> Instance:
    """Copy of ``inst`` with every warehouse capacity set to ``multiplier`` x total demand."""
    cap = multiplier * inst.total_demand
    return replace(inst, warehouse_capacity={w: cap for w in inst.warehouses},
                   name=inst.name if name is None else name)


def random_small_instance(seed: int, n_warehouses: int = 2, n_factories: int = 2,
                          n_customers: int = 2, *, capacity_class: str = "L",
                          density: float = 0.7, max_commodities: int | None = None) -> Instance:
    """Seeded synthetic instance small enough for the exhaustive oracle.

    Commodities beyond ``max_commodities`` are dropped at random; every
    factory/customer keeps at least one commodity where possible.
    """
    n = n_warehouses + n_factories + n_customers
    net = generate_synthetic_network(n, n_warehouses, seed, density=density)
    spec = InstanceSpec(n_warehouses, n_factories, n_customers, capacity_class, seed)
    inst = generate_instance(net, spec)
    flow = np.array(inst.flow)
    rng = np.random.default_rng([seed, 7])
    F, C = inst.factories, inst.customers
    # give isolated nodes one commodity so every node carries flow
    for i in F:
        if not any(flow[i, j] > 0 for j in C):
            flow[i, C[int(rng.integers(len(C)))]] = float(rng.integers(1, 101))
    for j in C:
        if not any(flow[i, j] > 0 for i in F):
            flow[F[int(rng.integers(len(F)))], j] = float(rng.integers(1, 101))
    if max_commodities is not None:
        comms = [(i, j) for i in F for j in C if flow[i, j] > 0]
        rng.shuffle(comms)
        count = len(comms)
        for i, j in comms:
            if count <= max_commodities:
                break
            # never strip a node's last commodity
            if np.count_nonzero(flow[i]) > 1 and np.count_nonzero(flow[:, j]) > 1:
                flow[i, j] = 0.0
                count -= 1
    total = float(flow.sum())
    dem = [flow[i].sum() for i in F] + [flow[:, j].sum() for j in C]
    mx = float(max(dem))
    vr = np.random.default_rng([seed, 11])
    vehicle = float(vr.uniform(mx, total)) if total > mx else total
    inst = replace(inst, flow=flow, vehicle_capacity=vehicle)
    return scale_capacities(inst, CAPACITY_CLASSES[capacity_class])
