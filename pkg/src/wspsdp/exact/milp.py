"""MILP export in LP text format, and certification of variable assignments.

Variable names (fixed):

    x_i_j_m      binary, vehicle of warehouse m travels arc (i, j); all i, j in N
    z_i_j_m_n    continuous >= 0, share of flow (i, j) routed via m then n
    u_i_m        continuous >= 0, collection load after visiting i on a route of m
    v_i_m        continuous >= 0, delivery load just before visiting i on a route of m
    y_i_m        binary, single-allocation only: node i is served by warehouse m

Row names carry their family as prefix: ``c2_i_j``, ``c3_m``, ``c4_i``,
``c5_i_m``, ``c6_i_m``, ``c7_i_m``, ``c8_i_m``, ``c9_m``, ``c10_m``,
``anchor_m``, ``c11_i_j_m``, ``c12_i_j_m``, ``c13_i_m``, plus ``sa1_i``,
``sax_i_m``, ``saf_i_j_m_n``, ``sac_i_j_m_n`` (single allocation) and
``wi_i_j_m_n`` (no transfers).

Departures from the published formulation:

* the delivery-load row (12) is written as
  ``v_jm + d_i - Q(1 - x_ijm) <= v_im`` so the big-M term relaxes it when the
  arc is unused and loads fall along the route;
* ``anchor_m`` forbids arcs touching another warehouse under index m, so a
  route indexed m really starts and ends at m;
* rows (2) and (4) are only emitted for commodities and nodes with positive
  flow, matching the solution model where idle nodes are never visited.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from ..exceptions import AssignmentError, InstanceFormatError
from ..model import Instance, RouteKind, Solution, VariantConfig, validate_instance

VIOLATION_TOL = 1e-6
_TERMS_PER_LINE = 6


@dataclass
class Row:
    name: str
    coeffs: dict
    sense: str  # "<=", ">=" or "="
    rhs: float

    @property
    def family(self) -> str:
        return self.name.split("_", 1)[0]

    def activity(self, values) -> float:
        return math.fsum(c * values[v] for v, c in self.coeffs.items())

    def slack(self, values) -> float:
        """Nonnegative when satisfied; equality rows report ``-|lhs - rhs|``."""
        lhs = self.activity(values)
        if self.sense == "<=":
            return self.rhs - lhs
        if self.sense == ">=":
            return lhs - self.rhs
        return -abs(lhs - self.rhs)


@dataclass
class MilpModel:
    name: str
    variables: list
    binaries: set
    objective: dict
    rows: list
    big_m: dict = field(default_factory=dict)

    def row(self, name) -> Row:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def family_counts(self) -> dict:
        out = {}
        for r in self.rows:
            out[r.family] = out.get(r.family, 0) + 1
        return out

    def objective_value(self, values) -> float:
        return math.fsum(c * values[v] for v, c in self.objective.items())

    def to_lp(self) -> str:
        return write_lp(self)


def x(i, j, m):
    return f"x_{i}_{j}_{m}"


def z(i, j, m, n):
    return f"z_{i}_{j}_{m}_{n}"


def u(i, m):
    return f"u_{i}_{m}"


def v(i, m):
    return f"v_{i}_{m}"


def y(i, m):
    return f"y_{i}_{m}"


def _add(coeffs, var, c):
    if c != 0:
        coeffs[var] = coeffs.get(var, 0.0) + c


def export_milp(inst: Instance, cfg=None) -> tuple:
    """Build the model for ``inst`` under ``cfg``; returns ``(model, lp_text)``."""
    cfg = VariantConfig.of(cfg)
    rep = validate_instance(inst)
    if not rep.ok:
        raise InstanceFormatError("; ".join(rep.messages()))
    N = list(range(inst.n_nodes))
    F, C, W = list(inst.factories), list(inst.customers), list(inst.warehouses)
    FC = F + C
    q = lambda i, j: float(inst.flow[i, j])
    d = inst.dist
    a = inst.warehouse_unit_cost
    Qv = float(inst.vehicle_capacity)
    dem = inst.node_demand
    M7, M8 = len(C), len(F)

    variables = [x(i, j, m) for i in N for j in N for m in W]
    variables += [z(i, j, m, n) for i in F for j in C for m in W for n in W]
    variables += [u(i, m) for i in N for m in W]
    variables += [v(i, m) for i in N for m in W]
    binaries = {x(i, j, m) for i in N for j in N for m in W}
    if cfg.single_allocation:
        ys = [y(i, m) for i in FC for m in W]
        variables += ys
        binaries.update(ys)

    obj = {}
    for i in F:
        for j in C:
            for m in W:
                for n in W:
                    _add(obj, z(i, j, m, n), q(i, j) * (a[m] + inst.alpha * d[m][n]))
    for i in N:
        for j in N:
            for m in W:
                _add(obj, x(i, j, m), inst.beta * d[i][j])

    rows = []

    def row(name, coeffs, sense, rhs):
        rows.append(Row(name, coeffs, sense, float(rhs)))

    for i in F:
        for j in C:
            if q(i, j) > 0:
                row(f"c2_{i}_{j}", {z(i, j, m, n): 1.0 for m in W for n in W}, "=", 1)
    for m in W:
        co = {}
        for i in F:
            for j in C:
                for n in W:
                    _add(co, z(i, j, m, n), q(i, j))
                    if n != m:
                        _add(co, z(i, j, n, m), q(i, j))
        row(f"c3_{m}", co, "<=", inst.warehouse_capacity[m])
    for i in FC:
        if dem.get(i, 0.0) > 0:
            row(f"c4_{i}", {x(i, j, m): 1.0 for j in N if j != i for m in W}, ">=", 1)
    for i in FC:
        for m in W:
            row(f"c5_{i}_{m}", {x(i, j, m): 1.0 for j in N if j != i}, "<=", 1)
    for i in N:
        for m in W:
            co = {}
            for j in N:
                _add(co, x(i, j, m), 1.0)
                _add(co, x(j, i, m), -1.0)
            row(f"c6_{i}_{m}", co, "=", 0)
    for i in F:
        for m in W:
            co = {x(i, j, m): float(M7) for j in N if j != i}
            for j in C:
                for n in W:
                    _add(co, z(i, j, m, n), -1.0)
            row(f"c7_{i}_{m}", co, ">=", 0)
    for i in C:
        for m in W:
            co = {x(i, j, m): float(M8) for j in N if j != i}
            for j in F:
                for n in W:
                    _add(co, z(j, i, n, m), -1.0)
            row(f"c8_{i}_{m}", co, ">=", 0)
    for m in W:
        co = {}
        for i in F:
            for j in C:
                _add(co, x(i, j, m), 1.0)
                _add(co, x(j, i, m), 1.0)
        row(f"c9_{m}", co, "=", 0)
    for m in W:
        row(f"c10_{m}", {x(n, h, m): 1.0 for n in W for h in W}, "=", 0)
    for m in W:
        co = {}
        for n in W:
            if n != m:
                for i in FC:
                    _add(co, x(n, i, m), 1.0)
                    _add(co, x(i, n, m), 1.0)
        row(f"anchor_{m}", co, "=", 0)
    # (11): u_im + sum_s q_js z_jsmn - Qv (1 - x_ijm) <= u_jm
    for i in N:
        for j in F:
            if j == i:
                continue
            for m in W:
                co = {}
                _add(co, u(i, m), 1.0)
                _add(co, u(j, m), -1.0)
                for s in C:
                    for n in W:
                        _add(co, z(j, s, m, n), q(j, s))
                _add(co, x(i, j, m), Qv)
                row(f"c11_{i}_{j}_{m}", co, "<=", Qv)
    # (12): v_jm + sum_s q_si z_sinm - Qv (1 - x_ijm) <= v_im
    for i in C:
        for j in N:
            if j == i:
                continue
            for m in W:
                co = {}
                _add(co, v(j, m), 1.0)
                _add(co, v(i, m), -1.0)
                for s in F:
                    for n in W:
                        _add(co, z(s, i, n, m), q(s, i))
                _add(co, x(i, j, m), Qv)
                row(f"c12_{i}_{j}_{m}", co, "<=", Qv)
    for i in FC:
        for m in W:
            row(f"c13_{i}_{m}", {v(i, m): 1.0, u(i, m): 1.0}, "<=", Qv)

    if cfg.single_allocation:
        for i in FC:
            row(f"sa1_{i}", {y(i, m): 1.0 for m in W}, "=", 1)
        for i in FC:
            for m in W:
                co = {x(i, j, m): 1.0 for j in N if j != i}
                co[y(i, m)] = -1.0
                row(f"sax_{i}_{m}", co, "<=", 0)
        for i in F:
            for j in C:
                for m in W:
                    for n in W:
                        row(f"saf_{i}_{j}_{m}_{n}", {z(i, j, m, n): 1.0, y(i, m): -1.0}, "<=", 0)
                        row(f"sac_{i}_{j}_{m}_{n}", {z(i, j, m, n): 1.0, y(j, n): -1.0}, "<=", 0)
    if cfg.no_transfers:
        for i in F:
            for j in C:
                for m in W:
                    for n in W:
                        if m != n:
                            row(f"wi_{i}_{j}_{m}_{n}", {z(i, j, m, n): 1.0}, "=", 0)

    name = f"{inst.name or 'wspsdp'}-{cfg.variant.value}"
    model = MilpModel(name, variables, binaries, obj, rows, {"7": M7, "8": M8})
    return model, write_lp(model)


def expected_counts(n_factories, n_customers, n_warehouses, *, n_nodes=None,
                    n_commodities=None, n_active=None, variant="wspsdp") -> dict:
    """Closed-form variable and row counts.

    ``n_nodes`` defaults to F + C + W; ``n_commodities`` (positive flows) to
    F * C; ``n_active`` (nodes with positive demand) to F + C.
    """
    cfg = VariantConfig.of(variant)
    F, C, W = n_factories, n_customers, n_warehouses
    N = F + C + W if n_nodes is None else n_nodes
    K = F * C if n_commodities is None else n_commodities
    A = F + C if n_active is None else n_active
    var = {"x": N * N * W, "z": F * C * W * W, "u": N * W, "v": N * W}
    rows = {"c2": K, "c3": W, "c4": A, "c5": (F + C) * W, "c6": N * W, "c7": F * W,
            "c8": C * W, "c9": W, "c10": W, "anchor": W, "c11": F * (N - 1) * W,
            "c12": C * (N - 1) * W, "c13": (F + C) * W}
    if cfg.single_allocation:
        var["y"] = (F + C) * W
        rows.update({"sa1": F + C, "sax": (F + C) * W, "saf": F * C * W * W, "sac": F * C * W * W})
    if cfg.no_transfers:
        rows["wi"] = F * C * W * (W - 1)
    # families with no rows do not appear in a model
    return {"variables": var, "rows": {k: n for k, n in rows.items() if n}}


def model_counts(model: MilpModel) -> dict:
    var = {}
    for name in model.variables:
        k = name.split("_", 1)[0]
        var[k] = var.get(k, 0) + 1
    return {"variables": var, "rows": model.family_counts()}


# -- LP text -------------------------------------------------------------------

def _num(c: float) -> str:
    return repr(float(c))


def _expr(coeffs: dict) -> list:
    terms = []
    for var, c in coeffs.items():
        sign = "-" if c < 0 else "+"
        terms.append(f"{sign} {_num(abs(c))} {var}")
    return [" ".join(terms[k:k + _TERMS_PER_LINE]) for k in range(0, len(terms), _TERMS_PER_LINE)]


def write_lp(model: MilpModel) -> str:
    out = [f"\\ {model.name}", f"\\ big-M: (7) {model.big_m.get('7')}, (8) {model.big_m.get('8')}",
           "Minimize"]
    lines = _expr(model.objective) if model.objective else ["0 " + model.variables[0]]
    out.append(" obj: " + lines[0])
    out.extend("   " + ln for ln in lines[1:])
    out.append("Subject To")
    for r in model.rows:
        if r.coeffs:
            lines = _expr(r.coeffs)
        else:
            lines = ["0 " + model.variables[0]]
        out.append(f" {r.name}: " + lines[0])
        out.extend("   " + ln for ln in lines[1:])
        out.append(f"   {r.sense} {_num(r.rhs)}")
    out.append("Bounds")
    for var in model.variables:
        if var not in model.binaries:
            out.append(f" {var} >= 0")
    out.append("Binaries")
    for var in model.variables:
        if var in model.binaries:
            out.append(f" {var}")
    out.append("End")
    return "\n".join(out) + "\n"


_TERM = re.compile(r"([+-])\s*([0-9.eE+-]+|inf|nan)\s+([A-Za-z_][\w.]*)")
_SECTIONS = {"minimize": "obj", "subject to": "rows", "bounds": "bounds",
             "binaries": "bin", "binary": "bin", "end": "end"}


def _parse_terms(text, where):
    coeffs = {}
    pos = 0
    text = text.strip()
    for mt in _TERM.finditer(text):
        if text[pos:mt.start()].strip():
            raise InstanceFormatError(f"{where}: cannot parse {text[pos:mt.start()]!r}")
        sign, num, var = mt.groups()
        coeffs[var] = coeffs.get(var, 0.0) + (-1.0 if sign == "-" else 1.0) * float(num)
        pos = mt.end()
    rest = text[pos:].strip()
    if rest and not re.fullmatch(r"0\s+[A-Za-z_][\w.]*", rest):
        raise InstanceFormatError(f"{where}: cannot parse {rest!r}")
    return coeffs


def read_lp(text: str) -> MilpModel:
    """Parse LP text produced by ``write_lp``."""
    name, big_m = "", {}
    section = None
    chunks = {"obj": [], "rows": []}
    variables, binaries = [], set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            body = line[1:].strip()
            mt = re.match(r"big-M: \(7\) (\S+), \(8\) (\S+)", body)
            if mt:
                big_m = {k: int(val) for k, val in zip(("7", "8"), mt.groups()) if val != "None"}
            elif not name:
                name = body
            continue
        key = line.lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            continue
        if section in ("obj", "rows"):
            if re.match(r"^[A-Za-z_][\w.]*:", line):
                chunks[section].append(line)
            elif chunks[section]:
                chunks[section][-1] += " " + line
            else:
                raise InstanceFormatError(f"LP: stray line {line!r}")
        elif section == "bounds":
            mt = re.fullmatch(r"([A-Za-z_][\w.]*)\s*>=\s*0", line)
            if not mt:
                raise InstanceFormatError(f"LP: unsupported bound {line!r}")
            variables.append(mt.group(1))
        elif section == "bin":
            variables.append(line)
            binaries.add(line)
        elif section == "end":
            break
        else:
            raise InstanceFormatError(f"LP: text outside any section: {line!r}")
    if len(chunks["obj"]) != 1:
        raise InstanceFormatError("LP: expected exactly one objective")
    objective = _parse_terms(chunks["obj"][0].split(":", 1)[1], "objective")
    rows = []
    for chunk in chunks["rows"]:
        rname, body = chunk.split(":", 1)
        mt = re.search(r"(<=|>=|=)\s*(\S+)\s*$", body)
        if not mt:
            raise InstanceFormatError(f"LP: row {rname} has no sense")
        rows.append(Row(rname.strip(), _parse_terms(body[:mt.start()], rname),
                        mt.group(1), float(mt.group(2))))
    return MilpModel(name, _restore_order(variables), binaries, objective, rows, big_m)


def _restore_order(names):
    # writer order: x, z, u, v, y families, indices ascending
    def key(s):
        head, *idx = s.split("_")
        return ({"x": 0, "z": 1, "u": 2, "v": 3, "y": 4}.get(head, 9),
                [int(t) if t.isdigit() else t for t in idx])
    return sorted(names, key=key)


# -- certification -------------------------------------------------------------

@dataclass
class MilpReport:
    objective: float
    slacks: dict
    violations: list
    bound_violations: list = field(default_factory=list)
    tol: float = VIOLATION_TOL

    @property
    def ok(self) -> bool:
        return not self.violations and not self.bound_violations

    def by_family(self) -> dict:
        out = {}
        for name, _ in self.violations:
            fam = name.split("_", 1)[0]
            out[fam] = out.get(fam, 0) + 1
        return out


def certify_milp_solution(model: MilpModel, values: dict, tol: float = VIOLATION_TOL) -> MilpReport:
    """Evaluate every row at ``values``; rows with slack below ``-tol`` are violations."""
    missing = [var for var in model.variables if var not in values]
    if missing:
        raise AssignmentError(f"{len(missing)} variables unassigned, e.g. {missing[:3]}")
    slacks, viol = {}, []
    for r in model.rows:
        s = r.slack(values)
        slacks[r.name] = s
        if s < -tol:
            viol.append((r.name, s))
    bounds = []
    for var in model.variables:
        val = values[var]
        if val < -tol:
            bounds.append((var, val))
        elif var in model.binaries and min(abs(val), abs(val - 1)) > tol:
            bounds.append((var, val))
    return MilpReport(model.objective_value(values), slacks, viol, bounds, tol)


def solution_to_values(inst: Instance, sol: Solution, cfg=None) -> dict:
    """Translate a solution into a full MILP assignment (every variable named).

    u is the cumulative collected load after each visit, v the load still on
    board before each delivery; both are zero at warehouses and elsewhere.
    """
    cfg = VariantConfig.of(cfg)
    N = range(inst.n_nodes)
    F, C, W = inst.factories, inst.customers, inst.warehouses
    vals = {x(i, j, m): 0.0 for i in N for j in N for m in W}
    vals.update({z(i, j, m, n): 0.0 for i in F for j in C for m in W for n in W})
    vals.update({u(i, m): 0.0 for i in N for m in W})
    vals.update({v(i, m): 0.0 for i in N for m in W})
    for (i, j), (m, n) in sol.assignment.items():
        vals[z(i, j, m, n)] = 1.0
    home = {}
    for r in sol.routes:
        if not r.visits:
            continue
        path = r.path
        m = r.warehouse
        for a_, b_ in zip(path, path[1:]):
            vals[x(a_, b_, m)] = 1.0
        loads = [math.fsum(float(inst.flow[c]) for c in sorted(s.commodities)) for s in r.visits]
        if r.kind is RouteKind.COLLECTION:
            acc = 0.0
            for s, load in zip(r.visits, loads):
                acc += load
                vals[u(s.node, m)] = acc
        else:
            rem = math.fsum(loads)
            for s, load in zip(r.visits, loads):
                vals[v(s.node, m)] = rem
                rem -= load
        for s in r.visits:
            home.setdefault(s.node, m)
    if cfg.single_allocation:
        for i in list(F) + list(C):
            for m in W:
                vals[y(i, m)] = 1.0 if home.get(i, W[0]) == m else 0.0
    return vals


__all__ = [
    "Row", "MilpModel", "MilpReport", "export_milp", "write_lp", "read_lp", "expected_counts",
    "model_counts", "certify_milp_solution", "solution_to_values", "VIOLATION_TOL",
]
