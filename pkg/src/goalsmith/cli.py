"""Command-line front door: headless runs with a report file, the HTTP
service, and standalone ruleset validation."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .session import (
    Session,
    SessionError,
    checked_ruleset,
    resolve_ruleset,
    resolve_scenario,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goalsmith",
        description="Rule-trained goal reasoning over a disaster-rescue simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario headless and report on it")
    run.add_argument("--scenario", default="test_city", help="packaged name or JSON file")
    run.add_argument("--ruleset", default=None, help="packaged name or .fs file (default: untrained)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--steps", type=int, default=None, help="default: the scenario's step budget")
    run.add_argument("--report", default=None, help="write the run report JSON here")
    run.add_argument("--emit-pddl", default=None, metavar="DIR", help="dump every planning problem generated")
    run.add_argument("--save-ruleset", default=None, metavar="FILE", help="write the final knowledge base here")

    serve = sub.add_parser("serve", help="serve the trainer HTTP API")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")

    validate = sub.add_parser("validate-ruleset", help="check a ruleset file and exit")
    validate.add_argument("file")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args.scenario)
    kb = resolve_ruleset(args.ruleset)
    steps = args.steps if args.steps is not None else scenario.step_budget
    session = Session(
        scenario, kb, seed=args.seed, sid="cli", pddl_dir=args.emit_pddl
    )
    session.step(steps)
    report = session.report()
    text = json.dumps(report, indent=2)
    if args.report:
        path = Path(args.report)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")
        goals = report["goals"]
        print(
            f"{scenario.name}: {report['steps']} steps, "
            f"{goals['created']} goals ({goals['finished']} finished, "
            f"{goals['dropped']} dropped), report -> {path}"
        )
    else:
        print(text)
    if args.save_ruleset:
        saved = session.save_ruleset(args.save_ruleset)
        print(f"ruleset -> {saved['path']} ({saved['bytes']} bytes)")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import app

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.file)
    if not path.exists():
        print(f"no such file: {path}", file=sys.stderr)
        return 2
    try:
        kb = checked_ruleset(path)
    except SessionError as err:
        print(str(err), file=sys.stderr)
        return 1
    except ValueError as err:  # parse or frame-validation failure
        print(f"ruleset {path.name} rejected: {err}", file=sys.stderr)
        return 1
    trees = kb.trees()
    print(f"{path.name}: ok ({len(list(kb))} frames; " + ", ".join(
        f"{name} tree {trees[name].size()} rules" for name in sorted(trees)
    ) + ")")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "serve": _cmd_serve, "validate-ruleset": _cmd_validate}
    try:
        return handler[args.command](args)
    except SessionError as err:
        print(str(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
