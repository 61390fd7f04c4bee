"""CLI: render panels from engine CSVs.

Either ``render --spec panel.json`` (a JSON object or list of objects with
keys kind/inputs/output and optional log_scale/title/axis labels) or
positional CSVs with ``--kind`` and ``--out``. Exit 0 on success, 1 on
schema/validation problems.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .panels import PanelSpec, SchemaError, render


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SchemaError(message)


def _spec_from_dict(payload: dict) -> PanelSpec:
    unknown = set(payload) - {"kind", "inputs", "output", "log_scale",
                              "title", "xlabel", "ylabel"}
    if unknown:
        raise SchemaError(f"unknown panel-spec keys: {sorted(unknown)}")
    try:
        return PanelSpec(
            kind=payload["kind"],
            inputs=tuple(payload["inputs"]),
            output=payload["output"],
            log_scale=bool(payload.get("log_scale", True)),
            title=payload.get("title"),
            xlabel=payload.get("xlabel"),
            ylabel=payload.get("ylabel"),
        )
    except KeyError as exc:
        raise SchemaError(f"panel spec missing required key {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ptreadout-figures",
                     description="Render engine CSVs into figure panels")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render")
    p_render.add_argument("csvs", nargs="*", help="input CSV paths")
    p_render.add_argument("--spec", help="JSON panel spec (object or list)")
    p_render.add_argument("--kind", choices=("delta-omega-sweep", "transmission-pair"))
    p_render.add_argument("--out", help="output image path")
    p_render.add_argument("--title")
    p_render.add_argument("--linear", action="store_true",
                          help="linear power axis (default: log)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        specs: list[PanelSpec] = []
        if args.spec:
            payload = json.loads(Path(args.spec).read_text(encoding="utf-8"))
            entries = payload if isinstance(payload, list) else [payload]
            specs = [_spec_from_dict(entry) for entry in entries]
        else:
            if not args.csvs or not args.kind or not args.out:
                raise SchemaError("positional mode needs CSVs, --kind and --out")
            specs = [PanelSpec(kind=args.kind, inputs=tuple(args.csvs),
                               output=args.out, log_scale=not args.linear,
                               title=args.title)]
        for spec in specs:
            result = render(spec)
            print(f"{result.output}: {result.curves} curve(s)")
        return 0
    except (SchemaError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
