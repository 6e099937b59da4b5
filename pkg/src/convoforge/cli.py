"""Command-line entry point: serve, validate, experiment, replay.

Exit codes: 0 success, 1 validation/runtime error, 2 usage error. Errors go
to stderr as one-line JSON objects so scripts can parse them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import (
    DEFAULT_PORT,
    PORT_ENV_VAR,
    default_schema_text,
    default_task_text,
)
from .schema import SchemaError, parse_schema
from .sim import TaskError, load_task, validate_task_against_schema


def _fail(code: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": {"code": code, "message": message}}) + "\n")
    return 1


def _load_configs(schema_path: str | None, task_path: str | None):
    schema_text = (
        Path(schema_path).read_text("utf-8") if schema_path else default_schema_text()
    )
    task_text = Path(task_path).read_text("utf-8") if task_path else default_task_text()
    schema = parse_schema(schema_text)
    task = load_task(task_text)
    validate_task_against_schema(task, schema)
    return schema, task


def _cmd_validate(args) -> int:
    try:
        schema, task = _load_configs(args.schema, args.task)
    except (SchemaError, TaskError) as exc:
        return _fail("VALIDATION", str(exc))
    except OSError as exc:
        return _fail("IO", str(exc))
    print(
        f"ok: schema '{schema.name}' ({len(schema.dialogues)} dialogues, "
        f"{len(schema.catalogs)} catalogs, {len(schema.apis)} apis), "
        f"task ({len(task.areas)} areas, {len(task.items)} items, {len(task.steps)} steps)"
    )
    return 0


def _cmd_serve(args) -> int:
    try:
        schema, task = _load_configs(args.schema, args.task)
    except (SchemaError, TaskError) as exc:
        return _fail("VALIDATION", str(exc))
    except OSError as exc:
        return _fail("IO", str(exc))
    from .gateway import Gateway
    from .server import serve

    port = args.port if args.port is not None else int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT))
    print(f"serving schema '{schema.name}' on port {port}")
    try:
        serve(Gateway(schema, task), port=port, host=args.host)
    except OSError as exc:
        return _fail("BIND", str(exc))
    return 0


def _cmd_experiment(args) -> int:
    try:
        schema, task = _load_configs(args.schema, args.task)
    except (SchemaError, TaskError) as exc:
        return _fail("VALIDATION", str(exc))
    except OSError as exc:
        return _fail("IO", str(exc))
    from .harness import HarnessError, run_experiment

    try:
        summary, records = run_experiment(
            n_per_mode=args.n,
            error_rate=args.error_rate,
            base_seed=args.seed,
            out_csv=args.out,
            schema=schema,
            task=task,
            transcript_dir=args.transcript_dir,
        )
    except HarnessError as exc:
        return _fail("EXPERIMENT", str(exc))
    except OSError as exc:
        return _fail("IO", str(exc))
    print(f"wrote {args.out} ({len(records)} sessions)")
    print(json.dumps(summary.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_replay(args) -> int:
    from .harness import ReplayError, replay

    try:
        result = replay(args.transcript)
    except ReplayError as exc:
        return _fail("REPLAY", str(exc))
    print(result.rendered)
    print(
        f"total_time_s={result.total_time_s:.1f} steps_correct={result.steps_correct} "
        f"turns={result.turns}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convoforge",
        description="Conversational human-robot collaboration: serve, validate, experiment, replay.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the gateway HTTP service")
    p.add_argument("--schema", help="dialogue schema JSON path (default: shipped schema)")
    p.add_argument("--task", help="task config JSON path (default: shipped task)")
    p.add_argument("--port", type=int, default=None, help=f"port (default: ${PORT_ENV_VAR} or {DEFAULT_PORT})")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("validate", help="validate schema and task configs")
    p.add_argument("--schema", help="dialogue schema JSON path (default: shipped schema)")
    p.add_argument("--task", help="task config JSON path (default: shipped task)")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("experiment", help="run the comparative experiment")
    p.add_argument("--n", type=int, required=True, help="sessions per mode")
    p.add_argument("--error-rate", type=float, required=True, dest="error_rate")
    p.add_argument("--seed", type=int, required=True, help="base seed")
    p.add_argument("--out", required=True, help="metrics CSV output path")
    p.add_argument("--transcript-dir", default=None, help="transcript directory (default: <out>_transcripts)")
    p.add_argument("--schema", help="dialogue schema JSON path (default: shipped schema)")
    p.add_argument("--task", help="task config JSON path (default: shipped task)")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("replay", help="re-render and re-verify a session transcript")
    p.add_argument("transcript", help="transcript JSONL path")
    p.set_defaults(func=_cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
