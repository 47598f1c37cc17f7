"""Command-line interface: compile, explain, ce, robustness, flips, verify,
stats, and a synthetic forest generator.

Machine-readable output goes to stdout as JSON; all diagnostics go to
stderr.  Exit code 0 iff the command succeeded (for verify: iff every
check passed).  Flags beat FORET_* environment variables beat defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import compile as _compile
from . import explain as _explain
from . import oracle as _oracle
from . import reasons as _reasons
from .errors import ForetError, SchemaError
from .forest import classify, load_forest, save_forest
from .gen import gen_forest
from .sortnet import comparator_schedule

_ENV_PREFIX = "FORET_"


def _env(name, default, cast):
    raw = os.environ.get(_ENV_PREFIX + name)
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise SchemaError(f"bad value for {_ENV_PREFIX}{name}: {raw!r}") from None


def _setting(flag_value, name, default, cast=int):
    if flag_value is not None:
        return flag_value
    return _env(name, default, cast)


def _positive(value, what):
    if value is not None and value <= 0:
        raise SchemaError(f"{what} must be positive")
    return value


def _read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def _emit(data):
    json.dump(data, sys.stdout, indent=1)
    sys.stdout.write("\n")


def _load_instance(space, path):
    return space.parse_instance(_read_json(path))


def _budgets(args):
    node_budget = _positive(
        _setting(args.node_budget, "NODE_BUDGET", None), "node budget")
    time_budget = _positive(
        _setting(args.time_budget, "TIME_BUDGET", None, float), "time budget")
    return node_budget, time_budget


def _cmd_gen(args):
    forest = gen_forest(args.seed, args.features, args.states, args.trees,
                        args.depth, args.classes)
    payload = save_forest(forest)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
        _emit({"written": args.out, "trees": forest.n_trees,
               "classes": list(forest.classes)})
    else:
        sys.stdout.write(payload.decode("utf-8") + "\n")
    return 0


def _cmd_compile(args):
    forest = load_forest(_read_json(args.forest))
    cls = forest.class_index(args.class_name)
    node_budget, time_budget = _budgets(args)
    artifact = _compile.rf_class_formula(
        forest, cls, args.mode, presort=not args.no_presort_opt,
        node_budget=node_budget, time_budget=time_budget)
    if args.dump_schedule:
        n = forest.n_trees
        m = 1 << max(n - 1, 0).bit_length()
        width = m if forest.n_classes == 2 else 2 * m
        for layer, i, j in comparator_schedule(width):
            print(f"{layer} {i} {j}", file=sys.stderr)
    _write_json(args.out, artifact.to_json())
    report = _stats_entry(artifact)
    if args.stats:
        _write_json(args.stats, report)
    _emit({"written": args.out, **report})
    return 0


def _stats_entry(artifact):
    meta = artifact.meta
    return {"class": meta.get("class"), "mode": artifact.mode,
            "nodes": artifact.node_count(),
            "wall_time_s": round(meta.get("wall_time_s", 0.0), 3),
            "comparators": meta.get("comparators"),
            "n_trees": meta.get("n_trees"), "n_classes": meta.get("n_classes")}


def _cmd_stats(args):
    entries = []
    for path in args.artifacts:
        artifact = _compile.ClassFormulaArtifact.from_json(_read_json(path))
        entries.append({"artifact": path, **_stats_entry(artifact)})
    widths = {}
    columns = ("artifact", "class", "mode", "nodes", "wall_time_s")
    for col in columns:
        widths[col] = max([len(col)] + [len(str(e[col])) for e in entries])
    header = "  ".join(col.ljust(widths[col]) for col in columns)
    print(header, file=sys.stderr)
    for e in entries:
        print("  ".join(str(e[col]).ljust(widths[col]) for col in columns),
              file=sys.stderr)
    _emit({"artifacts": entries,
           "total_nodes": sum(e["nodes"] for e in entries)})
    return 0


def _pick_class(forest, instance, args):
    classes = classify(forest, instance)
    if args.class_name is not None:
        cls = forest.class_index(args.class_name)
        if cls not in classes:
            raise SchemaError(
                f"instance is not in class {args.class_name!r} "
                f"(it is in {sorted(forest.classes[c] for c in classes)})")
        return cls
    if len(classes) > 1 and args.tie_policy == "error":
        names = sorted(forest.classes[c] for c in classes)
        raise SchemaError(
            f"instance is tied between {names}; pass --class or "
            f"--tie-policy highest-ranked")
    # highest-ranked = first in the forest's class list
    return min(classes)


def _decision_reasons(forest, artifact, instance, cls):
    if artifact.mode == "nnf":
        raise SchemaError("explanations need a dg-conj or dg-full artifact")
    if artifact.class_index != cls:
        raise SchemaError(
            f"artifact is for class {artifact.meta.get('class')!r}, "
            f"not {forest.classes[cls]!r}")
    cr = _reasons.complete_reason(artifact, instance)
    gr = _reasons.general_reason(artifact, instance)
    return cr, gr


def _cmd_explain(args):
    forest = load_forest(_read_json(args.forest))
    artifact = _compile.ClassFormulaArtifact.from_json(_read_json(args.artifact))
    instance = _load_instance(forest.space, args.instance)
    cls = _pick_class(forest, instance, args)
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    known = {"sr", "nr", "robustness", "gnr", "flips"}
    unknown = set(kinds) - known
    if unknown:
        raise SchemaError(f"unknown kinds: {sorted(unknown)}")
    cap = _positive(_setting(args.cap, "RESULT_CAP", _explain.DEFAULT_RESULT_CAP),
                    "result cap")
    cr, gr = _decision_reasons(forest, artifact, instance, cls)
    space = forest.space
    out = {"instance": space.format_instance(instance),
           "class": forest.classes[cls]}
    rob = None
    if {"robustness", "gnr", "flips"} & set(kinds):
        rob = _explain.robustness(cr)
    if "sr" in kinds:
        out["sr"] = [t.to_json(space) for t in _explain.sufficient_reasons(cr, cap)]
    if "nr" in kinds:
        out["nr"] = [c.to_json(space) for c in _explain.necessary_reasons(cr, cap)]
    if "robustness" in kinds:
        out["robustness"] = rob.to_json(space)
    gnrs = None
    if {"gnr", "flips"} & set(kinds):
        gnrs = _explain.shortest_gnrs(gr, rob.varsets)
    if "gnr" in kinds:
        out["gnr"] = [c.to_json(space) for c in gnrs]
    if "flips" in kinds:
        flips = _explain.shortest_flips(space, instance, gnrs, cap)
        out["flips"] = [space.format_instance(w) for w in flips]
    _emit(out)
    return 0


def _cmd_ce(args):
    forest = load_forest(_read_json(args.forest))
    instance = _load_instance(forest.space, args.instance)
    target = forest.class_index(args.target)
    node_budget, time_budget = _budgets(args)
    cap = _positive(_setting(args.cap, "RESULT_CAP", _explain.DEFAULT_RESULT_CAP),
                    "result cap")
    ces = _explain.contrastive_explanations(
        forest, instance, target, presort=not args.no_presort_opt,
        node_budget=node_budget, time_budget=time_budget, cap=cap)
    _emit({"instance": forest.space.format_instance(instance),
           "target": args.target,
           "ce": [c.to_json(forest.space) for c in ces]})
    return 0


def _cmd_verify(args):
    forest = load_forest(_read_json(args.forest))
    node_budget, time_budget = _budgets(args)
    world_cap = _positive(
        _setting(args.world_cap, "WORLD_CAP", _oracle.ORACLE_WORLD_CAP),
        "world cap")
    workers = _setting(args.workers, "WORKERS", os.cpu_count() or 1)
    report = _oracle.run_verify(
        forest, seed=args.seed, trials=args.trials, world_cap=world_cap,
        node_budget=node_budget, time_budget=time_budget, workers=workers)
    for check in report["checks"]:
        if check["status"] != "pass":
            print(f"{check['status']}: {check['name']} {check['detail']}",
                  file=sys.stderr)
    _emit(report)
    return 0 if report["ok"] else 1


_SCHEMAS = """\
JSON schemas (state references are indices into the feature's state list):

  forest    {"features": [{"name": str, "states": [str, ...]}, ...],
             "classes": [str, ...],
             "trees": [{"node": {"var": int, "edges": [
                          {"states": [int, ...], "child": <tree>}]}}
                       | {"leaf": int}, ...]}
            Every node's edge state sets are disjoint and cover the feature.

  instance  {"<feature name>": "<state name>", ...}

  circuit   {"features": [...], "nodes": [{"op": "true"|"false"}
             | {"op": "lit", "var": int, "states": [int, ...]}
             | {"op": "and"|"or", "args": [int, ...]}, ...], "root": int}
            Nodes in topological order; args reference earlier indices.
            Decision graphs use {"op": "decision", "var": int, "edges":
            [{"states": [...], "child": int}, ...]} nodes instead.

  artifact  {"kind": "class-formula", "class_index": int,
             "mode": "nnf"|"dg-conj"|"dg-full", "meta": {...},
             "payload": <circuit> | [<graph>, ...] | <graph>}

Environment: FORET_NODE_BUDGET, FORET_TIME_BUDGET, FORET_RESULT_CAP,
FORET_WORLD_CAP, FORET_WORKERS (flags take precedence).
"""


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="foret",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Random-forest circuit compilation and formal explanations. "
                    "All subcommands write JSON to stdout; diagnostics go to "
                    "stderr.",
        epilog=_SCHEMAS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a deterministic synthetic forest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--features", type=int, required=True)
    p.add_argument("--states", type=int, default=2,
                   help="states per feature (default 2)")
    p.add_argument("--trees", type=int, required=True)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("compile", help="compile one class formula")
    p.add_argument("--forest", required=True)
    p.add_argument("--class", dest="class_name", required=True)
    p.add_argument("--mode", choices=_compile.MODES, default="nnf")
    p.add_argument("--no-presort-opt", action="store_true",
                   help="disable the first-layer omission for presorted pairs")
    p.add_argument("--out", required=True)
    p.add_argument("--stats", help="also write the size/time report here")
    p.add_argument("--node-budget", type=int)
    p.add_argument("--time-budget", type=float)
    p.add_argument("--dump-schedule", action="store_true",
                   help="print the comparator schedule (layer i j) to stderr")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("explain", help="explanations for one decision")
    p.add_argument("--forest", required=True)
    p.add_argument("--artifact", required=True,
                   help="dg-conj or dg-full artifact for the decision's class")
    p.add_argument("--instance", required=True)
    p.add_argument("--kinds", default="sr,nr,robustness,gnr,flips")
    p.add_argument("--class", dest="class_name")
    p.add_argument("--tie-policy", choices=("error", "highest-ranked"),
                   default="error")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=_cmd_explain)

    for name, kinds in (("robustness", "robustness"), ("flips", "gnr,flips")):
        p = sub.add_parser(name, help=f"shortcut for explain --kinds {kinds}")
        p.add_argument("--forest", required=True)
        p.add_argument("--artifact", required=True)
        p.add_argument("--instance", required=True)
        p.add_argument("--class", dest="class_name")
        p.add_argument("--tie-policy", choices=("error", "highest-ranked"),
                       default="error")
        p.add_argument("--cap", type=int)
        p.set_defaults(func=_cmd_explain, kinds=kinds)

    p = sub.add_parser("ce", help="contrastive explanations toward a target class")
    p.add_argument("--forest", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--no-presort-opt", action="store_true")
    p.add_argument("--node-budget", type=int)
    p.add_argument("--time-budget", type=float)
    p.add_argument("--cap", type=int)
    p.set_defaults(func=_cmd_ce)

    p = sub.add_parser("verify", help="run the brute-force cross-check battery")
    p.add_argument("--forest", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--world-cap", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--node-budget", type=int)
    p.add_argument("--time-budget", type=float)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("stats", help="size/time report for compiled artifacts")
    p.add_argument("artifacts", nargs="+")
    p.set_defaults(func=_cmd_stats)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ForetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
