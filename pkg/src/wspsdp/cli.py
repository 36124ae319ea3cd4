"""Command-line entry point: ``wspsdp <subcommand> [flags]``.

Exit codes: 0 success; 1 the checked object is infeasible or violates the
model (``validate``, ``certify``, ``oracle``); 2 usage or input errors, which
print one ``error: <kind>: <message>`` line on standard error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .alnds import SearchParams, solve
from .exact import brute_force_solve, certify_milp_solution, export_milp, read_lp, solution_to_values
from .exceptions import InfeasibleError, WSPSError
from .instance_gen import (
    InstanceSpec, generate_instance, generate_synthetic_network, load_network, random_small_instance,
)
from .io import (
    dumps, instance_to_dict, read_instance, read_json, read_solution, solution_to_dict,
    write_instance,
)
from .model import VARIANT_NAMES, evaluate_objective, validate_instance, validate_solution

log = logging.getLogger("wspsdp")


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _params(args) -> SearchParams:
    doc = read_json(args.params) if getattr(args, "params", None) else {}
    if isinstance(doc, dict) and "params" in doc and "version" in doc:
        doc = doc["params"]
    doc = dict(doc)
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "iterations", None) is not None:
        doc["iterations"] = args.iterations
    return SearchParams.from_dict(doc)


def cmd_generate(args) -> int:
    if args.small:
        inst = random_small_instance(args.seed, args.warehouses, args.factories, args.customers,
                                     capacity_class=args.capacity_class)
    else:
        if args.distance:
            if not (args.flow and args.candidate_file):
                raise argparse.ArgumentTypeError("--distance needs --flow and --candidate-file")
            net = load_network(args.distance, args.flow, args.candidate_file, one_based=args.one_based)
        else:
            net = generate_synthetic_network(args.nodes, args.candidates, args.net_seed)
        spec = InstanceSpec(args.warehouses, args.factories, args.customers, args.capacity_class, args.seed)
        inst = generate_instance(net, spec)
    if args.out:
        write_instance(inst, args.out)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(dumps(instance_to_dict(inst)))
    return 0


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    res = solve(inst, args.variant, _params(args))
    doc = res.to_dict(trajectory=not args.no_trajectory)
    _emit(dumps(doc), args.out)
    log.info("%s %s seed=%d total=%.6f", inst.name, args.variant, res.seed, res.total)
    return 0


def cmd_bench(args) -> int:
    man = bench.read_manifest(args.manifest)
    rows, paths = bench.run_manifest(man, args.out, jobs=args.jobs, fmt=args.format)
    sys.stdout.write(bench.format_table(rows))
    for kind, p in paths.items():
        log.info("%s: %s", kind, p)
    return 0


def cmd_export(args) -> int:
    inst = read_instance(args.instance)
    _, text = export_milp(inst, args.variant)
    _emit(text, args.out)
    return 0


def cmd_certify(args) -> int:
    if args.lp:
        model = read_lp(Path(args.lp).read_text())
    else:
        if not args.instance:
            raise argparse.ArgumentTypeError("certify needs --lp or --instance")
        model, _ = export_milp(read_instance(args.instance), args.variant)
    if args.values:
        values = {k: float(v) for k, v in read_json(args.values).items()}
    else:
        if not (args.solution and args.instance):
            raise argparse.ArgumentTypeError("certify needs --values, or --solution with --instance")
        values = solution_to_values(read_instance(args.instance), read_solution(args.solution), args.variant)
    rep = certify_milp_solution(model, values)
    doc = {"objective": rep.objective, "rows": len(rep.slacks), "violations": len(rep.violations),
           "by_family": rep.by_family(), "violated_rows": [[n, s] for n, s in rep.violations],
           "bound_violations": [[n, v] for n, v in rep.bound_violations]}
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return 0 if rep.ok else 1


def cmd_oracle(args) -> int:
    inst = read_instance(args.instance)
    try:
        sol, cost = brute_force_solve(inst, args.variant)
    except InfeasibleError as exc:
        _emit(json.dumps({"feasible": False, "binding": exc.binding, "message": str(exc)}) + "\n", args.out)
        return 1
    doc = {"version": 1, "variant": args.variant, "feasible": True, "total": cost.total,
           "cost": {"variable": cost.variable_cost, "local_tour": cost.local_tour_cost,
                    "inter_warehouse": cost.inter_warehouse_cost},
           "solution": solution_to_dict(sol)}
    _emit(dumps(doc), args.out)
    return 0


def cmd_validate(args) -> int:
    inst = read_instance(args.instance)
    rep = validate_instance(inst)
    doc = {"instance": inst.name, "instance_ok": rep.ok, "instance_messages": rep.messages()}
    ok = rep.ok
    if args.solution and rep.ok:
        sol = read_solution(args.solution)
        frep = validate_solution(inst, sol, args.variant)
        doc.update({"variant": args.variant, "feasible": frep.feasible,
                    "violations": [[v.constraint, v.message] for v in frep.violations]})
        if frep.feasible:
            doc["total"] = evaluate_objective(inst, sol).total
        ok = ok and frep.feasible
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wspsdp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, instance=True, variant=True, out=True):
        if instance:
            sp.add_argument("--instance", required=instance == "required", help="instance JSON file")
        if variant:
            sp.add_argument("--variant", choices=VARIANT_NAMES, default="wspsdp")
        if out:
            sp.add_argument("--out", help="output file (default: standard output)")

    g = sub.add_parser("generate", help="write an instance file")
    g.add_argument("--warehouses", type=int, default=5)
    g.add_argument("--factories", type=int, default=5)
    g.add_argument("--customers", type=int, default=5)
    g.add_argument("--capacity-class", choices=["C", "M", "S", "L"], default="M")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--small", action="store_true", help="oracle-sized synthetic instance")
    g.add_argument("--nodes", type=int, default=81, help="synthetic network size")
    g.add_argument("--candidates", type=int, default=16, help="synthetic candidate warehouses")
    g.add_argument("--net-seed", type=int, default=0)
    g.add_argument("--distance", help="distance matrix file")
    g.add_argument("--flow", help="flow matrix file")
    g.add_argument("--candidate-file", help="candidate warehouse id list")
    g.add_argument("--one-based", action="store_true", help="candidate ids count from 1")
    common(g, instance=False, variant=False)
    g.set_defaults(fn=cmd_generate)

    s = sub.add_parser("solve", help="run the search once")
    common(s, instance="required")
    s.add_argument("--seed", type=int)
    s.add_argument("--params", help="SearchParams JSON file")
    s.add_argument("--iterations", type=int)
    s.add_argument("--no-trajectory", action="store_true", help="omit the per-iteration cost trajectory")
    s.set_defaults(fn=cmd_solve)

    b = sub.add_parser("bench", help="run a manifest and write metric tables")
    b.add_argument("--manifest", required=True)
    b.add_argument("--out", help="output directory (default: manifest output_dir)")
    b.add_argument("--jobs", type=int)
    b.add_argument("--format", choices=["csv", "json"])
    b.set_defaults(fn=cmd_bench)

    e = sub.add_parser("export-milp", help="write the MILP as LP text")
    common(e, instance="required")
    e.set_defaults(fn=cmd_export)

    c = sub.add_parser("certify", help="check a solution against the MILP rows")
    common(c)
    c.add_argument("--lp", help="LP file from export-milp")
    c.add_argument("--solution", help="solution, solve or oracle output file")
    c.add_argument("--values", help="JSON object of variable values")
    c.set_defaults(fn=cmd_certify)

    o = sub.add_parser("oracle", help="exhaustive optimum of a tiny instance")
    common(o, instance="required")
    o.set_defaults(fn=cmd_oracle)

    v = sub.add_parser("validate", help="instance and solution feasibility report")
    common(v, instance="required")
    v.add_argument("--solution")
    v.set_defaults(fn=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except argparse.ArgumentTypeError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
    except WSPSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
