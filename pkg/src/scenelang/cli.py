"""Command line interface.

Subcommands: ``generate`` (sample a question-answering dataset),
``eval`` (score a dataset and optionally write a JSON report with figures),
``trace`` (execute one program on one scene, step by step),
``typecheck`` (static check of one program), ``stats`` (dataset size and
composition), ``catalog`` (list the token catalog for a profile).

Exit codes: 0 success; 1 bad usage, unreadable input, or a parse failure;
2 a check that ran and came back negative (traced execution hit an error,
or the program failed the type check).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .datasets import load_dataset, records_from_items, write_dataset
from .errors import SceneLangError
from .executor import ERROR, execute, outcome_to_json, value_to_json
from .metrics import dataset_stats, evaluate
from .profiles import BUILTIN_PROFILES, DomainProfile, builtin_profile, load_profile
from .programs import (
    FAMILY_BOOLEAN,
    FAMILY_FILTER,
    FAMILY_QUERY,
    FAMILY_RELATE,
    FAMILY_SAME,
    FAMILY_SET,
    FAMILY_SOURCE,
    build_catalog,
    program_from_text,
    type_check,
)
from .scenes import scene_from_dict
from .templates import BUILTIN_TEMPLATE_PACKS, builtin_template_pack, generate_dataset, load_template_pack


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; reserve 2 for negative
    # check results and report usage problems as 1 instead
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _profile_arg(arg: str) -> DomainProfile:
    if arg in BUILTIN_PROFILES:
        return builtin_profile(arg)
    return load_profile(Path(arg).read_text("utf-8"))


def _templates_arg(arg: str, profile: DomainProfile):
    if arg in BUILTIN_TEMPLATE_PACKS:
        return builtin_template_pack(arg, profile)
    return load_template_pack(Path(arg).read_text("utf-8"), profile)


def _fmt(value) -> str:
    if value is ERROR:
        return "ERROR"
    return json.dumps(value_to_json(value), separators=(",", ":"))


def cmd_generate(args) -> int:
    profile = _profile_arg(args.profile)
    templates = _templates_arg(args.templates, profile)
    scenes = []
    items = []
    stream = generate_dataset(
        profile,
        templates,
        args.scenes,
        args.per_scene,
        args.seed,
        min_objects=args.min_objects,
        max_objects=args.max_objects,
    )
    for scene, qa_items in stream:
        scenes.append(scene)
        items.extend(records_from_items(qa_items, start_id=len(items)))
    summary = write_dataset(args.out, profile, templates, scenes, items)
    print(
        f"wrote {summary['scenes']} scenes, {summary['items']} items to {args.out} "
        f"({summary['bytes_compact']} compact scene bytes)"
    )
    return 0


def cmd_eval(args) -> int:
    dataset = load_dataset(args.dataset)
    metrics, records = evaluate(
        dataset,
        mode=args.mode,
        seed=args.seed,
        use_stored_programs=args.use_stored_programs,
    )
    print(
        f"items: {metrics.n_items}  overall: {metrics.overall:.4f}  "
        f"program: {metrics.program_accuracy:.4f}"
    )
    print(f"error rate: {metrics.error_rate:.4f}  fallback rate: {metrics.fallback_rate:.4f}")
    for family in sorted(metrics.per_family):
        print(
            f"  {family}: {metrics.per_family[family]:.4f} "
            f"({metrics.family_counts[family]} items)"
        )
    if args.report:
        doc = {"metrics": metrics.to_dict(), "items": records}
        Path(args.report).write_text(json.dumps(doc, indent=2) + "\n", "utf-8")
        print(f"report: {args.report}")
        if not args.no_figures:
            from .report import write_eval_figures

            for path in write_eval_figures(args.report, metrics):
                print(f"figure: {path}")
    return 0


def _resolve_scene_doc(args) -> tuple[dict, DomainProfile]:
    doc = json.loads(Path(args.scene).read_text("utf-8"))
    if isinstance(doc, dict) and "scenes" in doc:
        docs = doc["scenes"]
    elif isinstance(doc, list):
        docs = doc
    else:
        docs = [doc]
    if not docs or not 0 <= args.index < len(docs):
        raise SceneLangError(f"scene index {args.index} out of range (file holds {len(docs)})")
    raw = docs[args.index]
    if not isinstance(raw, dict):
        raise SceneLangError("scene document must be a JSON object")
    if args.profile:
        profile = _profile_arg(args.profile)
    else:
        name = raw.get("profile")
        if name in BUILTIN_PROFILES:
            profile = builtin_profile(name)
        else:
            raise SceneLangError(
                f"scene names profile '{name}' which is not builtin; pass --profile"
            )
    return raw, profile


def cmd_trace(args) -> int:
    raw, profile = _resolve_scene_doc(args)
    scene = scene_from_dict(raw, profile)
    catalog = build_catalog(profile)
    notation = "prefix" if args.prefix else "postfix"
    program = program_from_text(args.program, catalog, notation)
    seed = args.seed if args.mode == "permissive" else None
    outcome = execute(program, scene, profile, mode=args.mode, seed=seed)
    if args.json:
        print(json.dumps(outcome_to_json(outcome), indent=2))
    else:
        for i, step in enumerate(outcome.trace):
            inputs = ", ".join(_fmt(v) for v in step.inputs)
            print(f"{i:3d}  {step.token}({inputs}) -> {_fmt(step.output)}")
        print(
            f"answer: {_fmt(outcome.answer)}  error: {outcome.error}  "
            f"fallback: {outcome.fallback_used}"
        )
    return 2 if outcome.error else 0


def cmd_typecheck(args) -> int:
    profile = _profile_arg(args.profile)
    catalog = build_catalog(profile)
    notation = "prefix" if args.prefix else "postfix"
    program = program_from_text(args.program, catalog, notation)
    report = type_check(program, profile, coarse=args.coarse)
    print(report.describe())
    return 0 if report.ok else 2


def cmd_stats(args) -> int:
    datasets = [load_dataset(path) for path in args.dataset]
    stats = dataset_stats(datasets)
    for name in sorted(stats["profiles"]):
        section = stats["profiles"][name]
        print(
            f"{name}: {section['scenes']} scenes, {section['items']} items, "
            f"scene bytes mean {section['mean_scene_bytes']:.1f} / max {section['max_scene_bytes']}"
        )
        for family, n in section["family_histogram"].items():
            print(f"  {family}: {n}")
    if args.report:
        Path(args.report).write_text(json.dumps(stats, indent=2) + "\n", "utf-8")
        print(f"report: {args.report}")
        if not args.no_figures:
            from .report import write_stats_figures

            for path in write_stats_figures(args.report, stats):
                print(f"figure: {path}")
    return 0


def cmd_catalog(args) -> int:
    profile = _profile_arg(args.profile)
    catalog = build_catalog(profile)
    print(f"profile '{profile.name}': {len(catalog)} tokens")
    for family in (
        FAMILY_SOURCE,
        FAMILY_SET,
        FAMILY_BOOLEAN,
        FAMILY_QUERY,
        FAMILY_RELATE,
        FAMILY_SAME,
        FAMILY_FILTER,
    ):
        specs = catalog.by_family(family)
        if not specs:
            continue
        print(f"\n{family} ({len(specs)})")
        for spec in specs:
            signature = ", ".join(str(t) for t in spec.input_types)
            print(f"  {spec.name}({signature}) -> {spec.output_type}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="scenelang", description=__doc__.split("\n\n")[1])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="sample scenes and question-answer items")
    p.add_argument("--profile", required=True, help="builtin profile name or profile JSON path")
    p.add_argument("--templates", required=True, help="builtin pack name or template JSON path")
    p.add_argument("--scenes", type=int, required=True, help="number of scenes")
    p.add_argument("--per-scene", type=int, required=True, help="questions per scene")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--min-objects", type=int, default=3)
    p.add_argument("--max-objects", type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="score a dataset end to end")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--mode", choices=("strict", "permissive"), default="strict")
    p.add_argument("--seed", type=int, default=0, help="base seed for permissive fallbacks")
    p.add_argument(
        "--use-stored-programs",
        action="store_true",
        help="execute stored ground-truth programs instead of parsed questions",
    )
    p.add_argument("--report", default=None, help="write a JSON report here")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("trace", help="execute one program on one scene")
    p.add_argument("--program", required=True, help="program text (postfix token stream)")
    p.add_argument("--scene", required=True, help="scene JSON file (object, list, or {scenes: []})")
    p.add_argument("--index", type=int, default=0, help="scene index when the file holds several")
    p.add_argument("--profile", default=None, help="builtin name or profile JSON path")
    p.add_argument("--mode", choices=("strict", "permissive"), default="strict")
    p.add_argument("--seed", type=int, default=0, help="fallback seed in permissive mode")
    p.add_argument("--prefix", action="store_true", help="read the program as prefix notation")
    p.add_argument("--json", action="store_true", help="emit the full trace as JSON")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("typecheck", help="statically type check a program")
    p.add_argument("--program", required=True)
    p.add_argument("--profile", required=True, help="builtin name or profile JSON path")
    p.add_argument("--coarse", action="store_true", help="ignore entry attribute refinements")
    p.add_argument("--prefix", action="store_true", help="read the program as prefix notation")
    p.set_defaults(func=cmd_typecheck)

    p = sub.add_parser("stats", help="dataset size and composition statistics")
    p.add_argument(
        "--dataset",
        action="append",
        required=True,
        help="dataset directory (repeat for a multi-profile breakdown)",
    )
    p.add_argument("--report", default=None, help="write a JSON report here")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("catalog", help="list the token catalog of a profile")
    p.add_argument("--profile", required=True, help="builtin name or profile JSON path")
    p.set_defaults(func=cmd_catalog)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    try:
        return args.func(args)
    except SceneLangError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
