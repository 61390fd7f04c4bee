#!/usr/bin/env python3
"""Regenerate every figure-scenario output (sweeps, traces, EP reports).

Writes one CSV set + JSON summary per preset into --out-dir. The panel
renderer in figures/ consumes these files.
"""
import argparse
import sys
import time

from ptreadout import preset_catalog, run_scenario


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--only", nargs="*", default=None,
                        help="subset of preset names (default: all)")
    args = parser.parse_args()

    catalog = preset_catalog()
    names = args.only if args.only else list(catalog)
    unknown = [n for n in names if n not in catalog]
    if unknown:
        parser.error(f"unknown presets: {', '.join(unknown)}")

    for name in names:
        start = time.perf_counter()
        result = run_scenario(catalog[name], out_dir=args.out_dir,
                              threads=args.threads)
        wrote = ", ".join(result.files)
        print(f"{name:18s} [{time.perf_counter() - start:5.2f}s] {wrote}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
