"""Replicated runs, gap metrics and report files.

Gap metrics (percent)::

    %S_UB = (UB - S_best) / UB * 100
    %S_SA = (S_SA_best - S_best) / S_SA_best * 100
    %S_WI = (S_WI_best - S_best) / S_WI_best * 100
    %R_SD = SD / S_ave * 100            (SD: population standard deviation)

Report files written by :func:`emit_report` into an output directory:

* ``metrics.csv`` / ``metrics.json``: one row per instance (full precision),
* ``swi_by_capacity.csv``: %S_WI per family in capacity order,
* ``timings.csv``: nodes, T_M and wall time per instance.

Only ``timings.csv`` depends on the clock; the other files are byte-identical
across runs of the same manifest.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .alnds import SearchParams, SolveResult, solve
from .exceptions import AggregationError, ConstructionError, InstanceFormatError, ParameterError
from .instance_gen import (
    CAPACITY_CLASSES, InstanceSpec, generate_instance, generate_synthetic_network, load_network,
)
from .io import read_instance
from .model import Instance, VariantConfig

log = logging.getLogger(__name__)

VARIANTS = ("wspsdp", "sa", "wi")
MANIFEST_VERSION = 1


@dataclass
class RunFailure:
    seed: int
    variant: str
    error: str


@dataclass
class MetricsRow:
    instance: str
    S_best: float
    S_ave: float
    SD: float
    pct_R_SD: float
    T_M: float = math.nan
    N_M: int = 0
    used_warehouses: list = field(default_factory=list)
    n_runs: int = 0
    failures: int = 0
    UB: float = math.nan
    pct_S_UB: float = math.nan
    S_SA_best: float = math.nan
    pct_S_SA: float = math.nan
    S_WI_best: float = math.nan
    pct_S_WI: float = math.nan
    family: str = ""
    capacity_class: str = ""
    n_nodes: int = 0


# columns that depend on the clock live in timings.csv only
TIMING_COLUMNS = ("T_M",)
METRIC_COLUMNS = tuple(f.name for f in fields(MetricsRow) if f.name not in TIMING_COLUMNS)


# -- replications --------------------------------------------------------------

def _one_run(args):
    inst, variant, params = args
    try:
        return solve(inst, variant, params)
    except ConstructionError as exc:
        return RunFailure(params.seed, VariantConfig.of(variant).variant.value, str(exc))


def run_replicated(inst: Instance, cfg=None, params: SearchParams | None = None,
                   replications: int = 10, *, jobs: int = 1, failures: list | None = None) -> list:
    """Solve with seeds ``params.seed + k`` for ``k < replications``.

    Returns the successful results ordered by seed. Failed replications are
    appended to ``failures`` when given.
    """
    if replications < 1:
        raise ParameterError("replications must be at least 1")
    params = params or SearchParams()
    cfg = VariantConfig.of(cfg)
    tasks = [(inst, cfg.variant.value, SearchParams.from_dict({**params.to_dict(), "seed": params.seed + k}))
             for k in range(replications)]
    if jobs > 1 and replications > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            outs = list(ex.map(_one_run, tasks))
    else:
        outs = [_one_run(t) for t in tasks]
    results = []
    for out in outs:
        if isinstance(out, RunFailure):
            log.warning("replication seed=%d variant=%s failed: %s", out.seed, out.variant, out.error)
            if failures is not None:
                failures.append(out)
        else:
            results.append(out)
    return results


# -- metrics -------------------------------------------------------------------

def _totals(results, what):
    if results is None:
        return None
    vals = [r.total if isinstance(r, SolveResult) else float(r) for r in results]
    if not vals:
        raise AggregationError(f"no {what} results to aggregate")
    if any(not math.isfinite(v) for v in vals):
        raise AggregationError(f"non-finite {what} total")
    return vals


def gap_percent(reference: float, value: float) -> float:
    """``(reference - value) / reference * 100``."""
    if reference == 0:
        raise AggregationError("gap against a zero reference")
    return (reference - value) / reference * 100.0


def compute_metrics(results, sa_results=None, wi_results=None, ub: float | None = None, *,
                    instance: str = "", failures: int = 0, family: str = "",
                    capacity_class: str = "", n_nodes: int = 0) -> MetricsRow:
    """Aggregate replication results (SolveResults or plain totals) into a row."""
    tot = _totals(results, "WSPSDP")
    sa = _totals(sa_results, "SA")
    wi = _totals(wi_results, "WI")
    s_best = min(tot)
    s_ave = math.fsum(tot) / len(tot)
    sd = math.sqrt(math.fsum((t - s_ave) ** 2 for t in tot) / len(tot))
    row = MetricsRow(instance=instance, S_best=s_best, S_ave=s_ave, SD=sd,
                     pct_R_SD=sd / s_ave * 100.0 if s_ave else 0.0, n_runs=len(tot),
                     failures=failures, family=family, capacity_class=capacity_class, n_nodes=n_nodes)
    solved = [r for r in results if isinstance(r, SolveResult)]
    if solved:
        best = min(solved, key=lambda r: (r.total, r.seed))
        row.T_M = best.time_to_best
        row.N_M = best.n_multi_allocation
        row.used_warehouses = best.best_solution.used_warehouses()
    if ub is not None:
        row.UB = float(ub)
        row.pct_S_UB = gap_percent(row.UB, s_best)
    if sa is not None:
        row.S_SA_best = min(sa)
        row.pct_S_SA = gap_percent(row.S_SA_best, s_best)
    if wi is not None:
        row.S_WI_best = min(wi)
        row.pct_S_WI = gap_percent(row.S_WI_best, s_best)
    return row


# -- report files --------------------------------------------------------------

def _cell(value):
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    if isinstance(value, list):
        return " ".join(str(v) for v in value)
    return str(value)


def _parse_cell(name, text):
    kind = {f.name: f.type for f in fields(MetricsRow)}[name]
    if kind == "float":
        return math.nan if text == "" else float(text)
    if kind == "int":
        return int(text)
    if kind == "list":
        return [int(t) for t in text.split()]
    return text


def emit_report(rows, out_dir, fmt: str = "csv", *, wall_times: dict | None = None) -> dict:
    """Write the report files; returns ``{kind: path}``."""
    if fmt not in ("csv", "json"):
        raise ParameterError(f"unknown report format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    if fmt == "csv":
        p = out / "metrics.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(METRIC_COLUMNS)
            for r in rows:
                w.writerow([_cell(getattr(r, c)) for c in METRIC_COLUMNS])
    else:
        p = out / "metrics.json"
        recs = [{c: (None if isinstance(getattr(r, c), float) and math.isnan(getattr(r, c))
                     else getattr(r, c)) for c in METRIC_COLUMNS} for r in rows]
        p.write_text(json.dumps({"version": 1, "rows": recs}, indent=2) + "\n")
    paths["metrics"] = p

    p = out / "swi_by_capacity.csv"
    with p.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["family", "capacity_class", "multiplier", "pct_S_WI"])
        for fam, cls, mult, val in capacity_series(rows):
            w.writerow([fam, cls, repr(mult), _cell(val)])
    paths["swi_by_capacity"] = p

    p = out / "timings.csv"
    with p.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance", "n_nodes", "T_M", "wall_seconds"])
        for r in rows:
            wall = (wall_times or {}).get(r.instance, math.nan)
            w.writerow([r.instance, r.n_nodes, _cell(r.T_M), _cell(float(wall))])
    paths["timings"] = p
    return paths


def capacity_series(rows) -> list:
    """``(family, class, multiplier, %S_WI)`` sorted by family then capacity."""
    out = []
    for r in rows:
        if r.capacity_class in CAPACITY_CLASSES:
            out.append((r.family, r.capacity_class, CAPACITY_CLASSES[r.capacity_class], r.pct_S_WI))
    return sorted(out, key=lambda t: (t[0], t[2]))


def read_report(out_dir, fmt: str = "csv") -> list:
    """Parse ``emit_report`` output back into MetricsRows (T_M from timings.csv)."""
    out = Path(out_dir)
    rows = []
    if fmt == "csv":
        with (out / "metrics.csv").open(newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append(MetricsRow(**{c: _parse_cell(c, rec[c]) for c in METRIC_COLUMNS}))
    else:
        doc = json.loads((out / "metrics.json").read_text())
        for rec in doc["rows"]:
            vals = {c: (math.nan if rec[c] is None else rec[c]) for c in METRIC_COLUMNS}
            rows.append(MetricsRow(**vals))
    tp = out / "timings.csv"
    if tp.exists():
        with tp.open(newline="") as fh:
            tm = {rec["instance"]: rec["T_M"] for rec in csv.DictReader(fh)}
        for r in rows:
            if r.instance in tm:
                r.T_M = _parse_cell("T_M", tm[r.instance])
    return rows


def format_table(rows) -> str:
    """Human-readable table, percentages to two decimals."""
    head = ["instance", "S_best", "S_ave", "N_M", "used", "%S_UB", "%S_SA", "%S_WI", "%R_SD"]
    fmt = lambda v, p=2: "-" if isinstance(v, float) and math.isnan(v) else f"{v:.{p}f}"
    lines = ["\t".join(head)]
    for r in rows:
        lines.append("\t".join([r.instance, fmt(r.S_best), fmt(r.S_ave), str(r.N_M),
                                ",".join(map(str, r.used_warehouses)) or "-", fmt(r.pct_S_UB),
                                fmt(r.pct_S_SA), fmt(r.pct_S_WI), fmt(r.pct_R_SD)]))
    return "\n".join(lines) + "\n"


# -- manifests -----------------------------------------------------------------

@dataclass
class Manifest:
    """Experiment description.

    JSON layout (``version`` 1)::

        {"version": 1,
         "output_dir": "results",
         "replications": 10,
         "variants": ["wspsdp", "sa", "wi"],
         "params": {"iterations": 25000, "seed": 0},
         "network": {"synthetic": {"n": 81, "w": 16, "seed": 0}}
                 or {"distance": "d.txt", "flow": "f.txt", "candidates": "c.txt", "one_based": true},
         "instances": [{"file": "inst.json"},
                       {"spec": {"num_warehouses": 5, "num_factories": 5, "num_customers": 5,
                                 "capacity_class": "C", "seed": 3}, "family": "5-5-5"}],
         "upper_bounds": {"5-5-5-C": 24398.95},
         "format": "csv",
         "jobs": 1}

    Relative paths resolve against the manifest's directory.
    """

    instances: list
    variants: tuple = VARIANTS
    params: dict = field(default_factory=dict)
    replications: int = 10
    network: dict | None = None
    upper_bounds: dict = field(default_factory=dict)
    output_dir: str = "results"
    format: str = "csv"
    jobs: int = 1
    base_dir: str = "."

    @classmethod
    def from_dict(cls, doc: dict, base_dir=".") -> "Manifest":
        if not isinstance(doc, dict) or doc.get("version") != MANIFEST_VERSION:
            raise InstanceFormatError(f"unsupported manifest version {doc.get('version') if isinstance(doc, dict) else None!r}")
        known = {f.name for f in fields(cls)} - {"base_dir"}
        extra = set(doc) - known - {"version"}
        if extra:
            raise InstanceFormatError(f"unknown manifest fields: {sorted(extra)}")
        if "instances" not in doc or not doc["instances"]:
            raise InstanceFormatError("manifest lists no instances")
        m = cls(**{k: v for k, v in doc.items() if k != "version"}, base_dir=str(base_dir))
        m.variants = tuple(VariantConfig.of(v).variant.value for v in m.variants)
        if "wspsdp" not in m.variants:
            raise InstanceFormatError("manifest variants must include wspsdp")
        SearchParams.from_dict(m.params)
        return m

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        d["variants"] = list(self.variants)
        return {"version": MANIFEST_VERSION, **d}

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else Path(self.base_dir) / p


def read_manifest(path) -> Manifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None
    return Manifest.from_dict(doc, base_dir=path.parent)


def _network(man: Manifest):
    net = man.network
    if net is None:
        return None
    if "synthetic" in net:
        s = net["synthetic"]
        return generate_synthetic_network(int(s["n"]), int(s["w"]), int(s.get("seed", 0)))
    return load_network(man.path(net["distance"]), man.path(net["flow"]), man.path(net["candidates"]),
                        one_based=bool(net.get("one_based", False)))


def manifest_instances(man: Manifest) -> list:
    """``(instance, family, capacity_class)`` for every manifest entry."""
    net = None
    out = []
    for k, entry in enumerate(man.instances):
        if "file" in entry:
            inst = read_instance(man.path(entry["file"]))
            out.append((inst, entry.get("family", ""), entry.get("capacity_class", "")))
        elif "spec" in entry:
            if net is None:
                net = _network(man)
                if net is None:
                    raise InstanceFormatError(f"instance {k}: spec entries need a network")
            spec = InstanceSpec(**entry["spec"])
            inst = generate_instance(net, spec)
            fam = entry.get("family", f"{spec.num_warehouses}-{spec.num_factories}-{spec.num_customers}")
            out.append((inst, fam, spec.capacity_class))
        else:
            raise InstanceFormatError(f"instance {k}: needs 'file' or 'spec'")
    return out


def run_manifest(man: Manifest, out_dir=None, *, jobs: int | None = None, fmt: str | None = None):
    """Run every (instance, variant) of ``man`` and write the report.

    Returns ``(rows, paths)``.
    """
    params = SearchParams.from_dict(man.params)
    jobs = man.jobs if jobs is None else jobs
    fmt = man.format if fmt is None else fmt
    out_dir = man.path(man.output_dir) if out_dir is None else Path(out_dir)
    rows, wall = [], {}
    for inst, family, cls in manifest_instances(man):
        t0 = time.perf_counter()
        per_variant, fails = {}, []
        for variant in man.variants:
            log.info("instance %s variant %s: %d replications", inst.name, variant, man.replications)
            per_variant[variant] = run_replicated(inst, variant, params, man.replications,
                                                  jobs=jobs, failures=fails)
        if not per_variant["wspsdp"]:
            raise AggregationError(f"{inst.name}: every WSPSDP replication failed")
        other = {v: (per_variant.get(v) or None) for v in ("sa", "wi")}
        for v in ("sa", "wi"):
            if v in per_variant and not per_variant[v]:
                log.warning("%s: every %s replication failed; gap left blank", inst.name, v)
        row = compute_metrics(per_variant["wspsdp"], other["sa"], other["wi"],
                              man.upper_bounds.get(inst.name), instance=inst.name,
                              failures=len(fails), family=family, capacity_class=cls,
                              n_nodes=inst.n_nodes)
        rows.append(row)
        wall[inst.name] = time.perf_counter() - t0
    return rows, emit_report(rows, out_dir, fmt, wall_times=wall)


__all__ = [
    "MetricsRow", "RunFailure", "Manifest", "run_replicated", "compute_metrics", "gap_percent",
    "emit_report", "read_report", "capacity_series", "format_table", "read_manifest",
    "manifest_instances", "run_manifest", "METRIC_COLUMNS",
]
