"""Batch driver: run construction scripts, emit reports and exports.

Scripts are TOML files, versioned with `schema = 1`:

    schema = 1
    name = "base"

    [limits]            # optional
    horizon = 4096      # scan horizon for lazy-tier checks
    depth = 4           # stage gate depth
    validate_depth = 4  # per-stage axiom validation depth

    [[stages]]          # optional; no stages leaves the two-cylinder base
    branches = [["(0)*"]]          # grafts, one list of segment patterns each
    permutation = "identity"       # or "generic" (hitting-scheduled)
    hitting_depth = 4              # depth of the generic schedule
    override_unknown = false

    [[branches]]        # registry of named branches for checks
    name = "x"
    segments = ["(0)*"]

    [[checks]]
    kind = "coherence"  # axioms | coherence | properness | convergence
    branch = "x"        # registry name (all kinds except axioms)
    depth = 8
    # convergence only:
    points = { step = 1, offset = 0 }
    target = "top"      # or an ordinal literal such as "w+1"

Exit codes: 0 all requested checks verified, 1 usage or config error,
2 something refuted, 3 an unknown blocked a gated step.  The horizon
resolves in order: --horizon flag, [limits] horizon, TALAB_HORIZON
environment variable, built-in default.  Reports are JSON with sorted
keys; reruns are byte-identical apart from the timestamp field.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .omega_sets import DEFAULT_HORIZON, CylinderSet, parse_set_literal
from .ordinals import Ordinal, parse_ordinal
from .coherent import PeriodicBits, check_coherent, check_proper
from .stone_topology import AffinePoints, OrdinalSpace, converges
from .talgebra import Branch, BranchSequence, TTree, tree_dot, validate
from .construct import (
    ConstructionBlocked,
    ConstructionRefuted,
    staged_pipeline,
    extend,
)
from .generic_perm import (
    hitting_requirements,
    kill_requirements,
    schedule_requirements,
)

CHECK_KINDS = ("axioms", "coherence", "properness", "convergence")

EXIT_OK, EXIT_USAGE, EXIT_REFUTED, EXIT_UNKNOWN = 0, 1, 2, 3


class ConfigError(Exception):
    """Bad script or flags; reported with the offending key path."""


# ---------------------------------------------------------------------------
# script loading


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"missing key {key!r} in {where}")
    return table[key]


def _check_keys(table: dict, allowed: set, where: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")


def load_script(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from err
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"malformed TOML in {path}: {err}") from err
    _check_keys(data, {"schema", "name", "limits", "stages", "branches",
                       "checks", "overrides"}, "the script")
    if data.get("schema") != 1:
        raise ConfigError("script must declare schema = 1")
    limits = data.get("limits", {})
    _check_keys(limits, {"horizon", "depth", "validate_depth"}, "limits")
    for key, value in limits.items():
        if not isinstance(value, int) or value <= 0:
            raise ConfigError(f"limits.{key} must be a positive integer")
    for i, stage in enumerate(data.get("stages", [])):
        where = f"stages[{i}]"
        _check_keys(stage, {"branches", "permutation", "hitting_depth",
                            "override_unknown"}, where)
        _require(stage, "branches", where)
        perm = stage.get("permutation", "identity")
        if perm not in ("identity", "generic"):
            raise ConfigError(
                f"{where}.permutation must be 'identity' or 'generic', "
                f"got {perm!r}")
    for i, entry in enumerate(data.get("overrides", [])):
        where = f"overrides[{i}]"
        _check_keys(entry, {"node", "set"}, where)
        node = _require(entry, "node", where)
        _require(entry, "set", where)
        if not isinstance(node, str) or node.strip("01"):
            raise ConfigError(f"{where}.node must be a binary string")
    names = set()
    for i, entry in enumerate(data.get("branches", [])):
        where = f"branches[{i}]"
        _check_keys(entry, {"name", "segments"}, where)
        name = _require(entry, "name", where)
        _require(entry, "segments", where)
        if name in names:
            raise ConfigError(f"duplicate branch name {name!r}")
        names.add(name)
    for i, check in enumerate(data.get("checks", [])):
        where = f"checks[{i}]"
        _check_keys(check, {"kind", "branch", "depth", "points", "target"},
                    where)
        kind = _require(check, "kind", where)
        if kind not in CHECK_KINDS:
            raise ConfigError(f"{where}.kind must be one of "
                              f"{', '.join(CHECK_KINDS)}, got {kind!r}")
        if kind != "axioms":
            branch = _require(check, "branch", where)
            if branch not in names:
                raise ConfigError(
                    f"{where}.branch {branch!r} is not a registered branch")
    return data


def _parse_segments(segments) -> Branch:
    if isinstance(segments, str):
        segments = [segments]
    return Branch.from_segments([PeriodicBits.parse(str(s))
                                 for s in segments])


def build_tree(script: dict, depth: int, validate_depth: int,
               horizon: int) -> TTree:
    stages = []
    for stage in script.get("stages", []):
        if stage.get("permutation", "identity") == "generic":
            pi = schedule_requirements(hitting_requirements(
                CylinderSet.full(), int(stage.get("hitting_depth", depth))))
        else:
            pi = None
        stages.append({"branches": [_parse_segments(b)
                                    for b in stage["branches"]],
                       "permutation": pi,
                       "override_unknown": stage.get("override_unknown",
                                                     False)})
    tree = staged_pipeline(stages, name=script.get("name", "script"),
                           depth=depth, validate_depth=validate_depth,
                           horizon=horizon)
    if script.get("overrides"):
        tree = _patch_generators(tree, script["overrides"])
    return tree


def _patch_generators(tree: TTree, overrides: list) -> TTree:
    """Replace the generators at the named base-stage nodes.

    Overrides bypass the construction rules, so the patched tree is only
    as lawful as its checks prove it to be."""
    table = {}
    for i, entry in enumerate(overrides):
        try:
            table[entry["node"]] = parse_set_literal(entry["set"])
        except ValueError as err:
            raise ConfigError(f"overrides[{i}].set: {err}") from err

    def gen(t, node):
        if not node.grafts and node.tail in table:
            return table[node.tail]
        return tree.a(node)

    return TTree(tree.stages, gen,
                 lambda t, x, alpha, beta: tree.branch_witness(x, alpha, beta),
                 tree.name)


# ---------------------------------------------------------------------------
# checks


def _registry(script: dict) -> dict:
    return {entry["name"]: _parse_segments(entry["segments"])
            for entry in script.get("branches", [])}


def _witness_table(seq: BranchSequence) -> list:
    table = []
    levels = sorted(seq.materialized())
    for i, beta in enumerate(levels):
        for alpha in levels[:i + 1]:
            w = seq.witness(alpha, beta)
            table.append({"alpha": str(alpha), "beta": str(beta),
                          **w.to_json()})
    return table


def run_check(tree: TTree, check: dict, registry: dict, depth: int,
              horizon: int) -> dict:
    kind = check["kind"]
    depth = int(check.get("depth", depth))
    entry: dict = {"kind": kind, "depth": depth}
    if kind == "axioms":
        report = validate(tree, depth, (), horizon)
        entry["axioms"] = {name: v.to_json()
                           for name, v in sorted(report.axioms.items())}
        entry["verdict"] = report.verdict.to_json()
        return entry
    branch = registry[check["branch"]]
    entry["branch"] = check["branch"]
    seq = BranchSequence(tree, branch, horizon)
    if kind == "coherence":
        seq.materialize(depth * len(branch.segments))
        verdict = check_coherent(seq, seq.length, horizon)
        entry["witnesses"] = _witness_table(seq)
    elif kind == "properness":
        seq.materialize(depth)
        verdict = check_proper(seq, seq.length, horizon)
    else:
        points = check.get("points", {"step": 1, "offset": 0})
        target_text = str(check.get("target", "top"))
        seq.materialize(depth)
        space = OrdinalSpace(seq, horizon=horizon)
        target = space.top if target_text == "top" \
            else parse_ordinal(target_text)
        entry["points"] = f"{points.get('step', 1)}*n+{points.get('offset', 0)}"
        entry["target"] = str(target)
        verdict = converges(space, AffinePoints(int(points.get("step", 1)),
                                                int(points.get("offset", 0))),
                            target, depth, horizon)
    entry["verdict"] = verdict.to_json()
    return entry


def _exit_from_verdicts(entries: list) -> int:
    statuses = [entry["verdict"]["status"] for entry in entries]
    if any(s == "refuted" for s in statuses):
        return EXIT_REFUTED
    if any(s == "unknown" for s in statuses):
        return EXIT_UNKNOWN
    return EXIT_OK


# ---------------------------------------------------------------------------
# report plumbing


def _emit(report: dict, out_path, summary: str) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)


def _base_report(kind: str, name: str) -> dict:
    return {"schema": 1, "tool": "talab", "report": kind, "name": name,
            "timestamp": datetime.now(timezone.utc).isoformat()}


def _resolve_horizon(args, script: dict) -> int:
    if getattr(args, "horizon", None) is not None:
        value = args.horizon
    elif "horizon" in script.get("limits", {}):
        value = script["limits"]["horizon"]
    else:
        raw = os.environ.get("TALAB_HORIZON", "")
        try:
            value = int(raw) if raw else DEFAULT_HORIZON
        except ValueError:
            raise ConfigError(
                f"TALAB_HORIZON must be an integer, got {raw!r}") from None
    if value <= 0:
        raise ConfigError("horizon must be positive")
    return value


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    script = load_script(args.script)
    horizon = _resolve_horizon(args, script)
    limits = script.get("limits", {})
    depth = args.depth or limits.get("depth", 4)
    validate_depth = limits.get("validate_depth", 4)
    name = script.get("name", os.path.basename(args.script))
    report = _base_report("run", name)
    report["horizon"] = horizon

    registry = _registry(script)
    checks = list(script.get("checks", []))
    for kind in args.check or []:
        if kind not in CHECK_KINDS:
            raise ConfigError(f"--check must be one of "
                              f"{', '.join(CHECK_KINDS)}, got {kind!r}")
        if kind == "axioms":
            checks.append({"kind": "axioms", "depth": depth})
        else:
            if not registry:
                raise ConfigError(
                    f"--check {kind} needs a registered branch")
            checks.extend({"kind": kind, "branch": name_}
                          for name_ in sorted(registry))
    if args.depth:
        checks = [{**c, "depth": args.depth} for c in checks]

    try:
        tree = build_tree(script, depth, validate_depth, horizon)
    except (ConstructionRefuted, ConstructionBlocked) as err:
        report["error"] = str(err)
        code = EXIT_REFUTED if isinstance(err, ConstructionRefuted) \
            else EXIT_UNKNOWN
        _emit(report, args.out, f"construction failed: {err}")
        return code

    report["tree"] = tree.to_json()
    entries = []
    for i, check in enumerate(checks):
        try:
            entries.append(run_check(tree, check, registry, depth, horizon))
        except ValueError as err:
            raise ConfigError(f"checks[{i}]: {err}") from err
    report["checks"] = entries
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(tree_dot(tree, depth))
        report["dot"] = args.dot
    code = _exit_from_verdicts(entries)
    counts = {"verified": 0, "refuted": 0, "unknown": 0}
    detail = ""
    for entry in entries:
        counts[entry["verdict"]["status"]] += 1
        if not detail and entry["verdict"]["status"] == "refuted":
            verdict = entry["verdict"]
            detail = f"; refuted: {verdict.get('reason', '')}"
            if "counterexample" in verdict:
                detail += f" at {verdict['counterexample']}"
    _emit(report, args.out,
          f"{name}: {counts['verified']} verified, "
          f"{counts['refuted']} refuted, {counts['unknown']} unknown"
          + detail)
    return code


def cmd_export(args) -> int:
    script = load_script(args.script)
    horizon = _resolve_horizon(args, script)
    limits = script.get("limits", {})
    depth = args.depth or limits.get("depth", 4)
    tree = build_tree(script, depth, limits.get("validate_depth", 4),
                      horizon)
    with open(args.dot, "w", encoding="utf-8") as fh:
        fh.write(tree_dot(tree, depth))
    print(f"wrote {args.dot}")
    return EXIT_OK


def cmd_demo_kill(args) -> int:
    """Built-in scenario: a converging point family, then a permutation
    scheduled to spread its blocks across a twin pair, leaving the
    family with no limit in the extended algebra."""
    m, depth = args.m, args.depth
    horizon = _resolve_horizon(args, {})
    report = _base_report("demo-kill", "kill")
    report.update({"m": m, "depth": depth, "horizon": horizon})

    tree = TTree.base()
    x = Branch((), PeriodicBits.zeros())
    points = [Branch((), PeriodicBits.zeros_then_ones(n))
              for n in range(2 * m)]

    seq = BranchSequence(tree, x, horizon)
    seq.materialize(depth)
    before = converges(OrdinalSpace(seq, horizon=horizon),
                       AffinePoints(1, 0), seq.length, depth, horizon)
    report["before"] = before.to_json()

    plan = kill_requirements(tree, x, points, m)
    pi = schedule_requirements(
        list(plan) + hitting_requirements(CylinderSet.full(), 4), "kill")
    report["schedule"] = {"requirements": [req.name for req in plan],
                          "relevant_blocks": list(plan.relevant),
                          "excluded": [list(e) for e in plan.excluded]}
    extended = extend(tree, pi, [x], depth=4)
    x2 = Branch(x.chain, PeriodicBits.zeros())

    seq2 = BranchSequence(extended, x2, horizon)
    seq2.materialize(8)
    space2 = OrdinalSpace(seq2, horizon=horizon)
    new_level = Ordinal(1, 0)
    after = converges(space2, AffinePoints(1, 0), new_level, 4, horizon)
    report["after"] = after.to_json()

    in_wits, out_wits, blocked = [], [], []
    for n in range(3 * m + 20):
        member = space2.member(Ordinal.nat(n), new_level)
        (in_wits if member is True else
         out_wits if member is False else blocked).append(n)
    report["witnesses"] = {"inside": in_wits, "outside": out_wits,
                           "blocked": blocked}

    summary = (f"before: {before.status} to depth {depth}; "
               f"after: {after.status} with "
               f"{len(in_wits)}+{len(out_wits)} witnesses")
    _emit(report, args.out, summary)
    if blocked or before.is_unknown or after.is_unknown:
        return EXIT_UNKNOWN
    if (before.is_verified and after.is_refuted and
            len(in_wits) >= m and len(out_wits) >= m):
        return EXIT_OK
    return EXIT_REFUTED


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="talab",
        description="Run twinned-tree algebra constructions and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a script and its checks")
    run.add_argument("script", help="TOML script path (schema = 1)")
    run.add_argument("--check", action="append", metavar="KIND",
                     help="add a check over every registered branch "
                          f"({', '.join(CHECK_KINDS)})")
    run.add_argument("--depth", type=int, help="override check depth")
    run.add_argument("--horizon", type=int, help="lazy-tier scan horizon")
    run.add_argument("--out", help="write the JSON report here")
    run.add_argument("--dot", help="also export the tree as DOT")
    run.set_defaults(func=cmd_run)

    export = sub.add_parser("export", help="build a tree and export DOT")
    export.add_argument("script", help="TOML script path")
    export.add_argument("--dot", required=True, help="DOT output path")
    export.add_argument("--depth", type=int,
                        help="materialization depth of the diagram")
    export.add_argument("--horizon", type=int)
    export.set_defaults(func=cmd_export)

    demo = sub.add_parser(
        "demo-kill",
        help="kill a converging sequence by permutation scheduling")
    demo.add_argument("--m", type=int, default=20,
                      help="required witnesses per side (default 20)")
    demo.add_argument("--depth", type=int, default=12,
                      help="depth of the before-check (default 12)")
    demo.add_argument("--horizon", type=int)
    demo.add_argument("--out", help="write the JSON report here")
    demo.set_defaults(func=cmd_demo_kill)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"talab: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as err:
        print(f"talab: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
