"""Command-line interface.

Subcommands: run (full scenario with file output), spectrum (eigenvalues at
the configured point), transmit (transmission traces), ep-find (EP search
report), dynamics (time-domain integration + cross-check), list-presets.
Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .dynamics import DriveSpec, integrate, stability_classify
from .errors import NumericalError, ValidationError
from .experiment import (
    ProbeGrid,
    _fmt,
    _json_ready,
    _run_ep_find,
    _write_csv,
    preset_catalog,
    resolve_target,
    run_scenario,
)
from .hamiltonian import QubitBranch
from .spectrum import eigenvalues
from .transmission import s21


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are validation errors (exit 1)
        raise ValidationError(message)


def _parse_grid(spec: str) -> ProbeGrid:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValidationError("--grid expects START:STOP:COUNT")
    return ProbeGrid(start=float(parts[0]), stop=float(parts[1]), count=int(parts[2]))


def _parse_branches(spec: str) -> tuple[QubitBranch, ...]:
    try:
        return tuple(QubitBranch(b.strip().lower()) for b in spec.split(",") if b.strip())
    except ValueError as exc:
        raise ValidationError(f"unknown branch in {spec!r}") from exc


def _apply_overrides(cfg, args):
    if getattr(args, "grid", None):
        cfg = replace(cfg, probe=_parse_grid(args.grid))
    if getattr(args, "branches", None):
        cfg = replace(cfg, branches=_parse_branches(args.branches))
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ptreadout",
                     description="Cavity-chain readout simulator (rates in units of kappa_a)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, grid=True):
        p.add_argument("target", help="preset name or config-file path")
        if grid:
            p.add_argument("--grid", help="probe grid as START:STOP:COUNT")
        p.add_argument("--branches", help="comma list from {absent,ground,excited}")
        p.add_argument("--format", choices=("csv", "json"), default="json",
                       help="stdout encoding for ad-hoc results")

    p_run = sub.add_parser("run", help="execute a scenario and write CSV/JSON files")
    p_run.add_argument("target")
    p_run.add_argument("--out-dir", default=None)
    p_run.add_argument("--grid", help="probe grid as START:STOP:COUNT")
    p_run.add_argument("--branches")
    p_run.add_argument("--threads", type=int, default=None)

    p_spec = sub.add_parser("spectrum", help="labelled eigenvalues at the configured point")
    add_common(p_spec, grid=False)

    p_tr = sub.add_parser("transmit", help="transmission trace per branch")
    add_common(p_tr)
    p_tr.add_argument("--out-dir", default=None,
                      help="write trace CSVs here instead of printing")

    p_ep = sub.add_parser("ep-find", help="locate the exceptional point")
    p_ep.add_argument("target")
    p_ep.add_argument("--format", choices=("csv", "json"), default="json")

    p_dyn = sub.add_parser("dynamics", help="integrate the driven mean-field equations")
    p_dyn.add_argument("target")
    p_dyn.add_argument("--omega", type=float, default=None,
                       help="probe detuning (default: config crosscheck omega)")
    p_dyn.add_argument("--t-end", type=float, default=50.0)
    p_dyn.add_argument("--branches")
    p_dyn.add_argument("--out-dir", default=None)
    p_dyn.add_argument("--format", choices=("csv", "json"), default="json")

    sub.add_parser("list-presets", help="names of built-in scenarios")
    return parser


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(_json_ready(payload), indent=2, sort_keys=True))
    else:
        keys = list(payload)
        print(",".join(keys))
        print(",".join(_fmt(_scalar(payload[k])) for k in keys))


def _scalar(value):
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    return value


def _cmd_run(args) -> int:
    cfg = _apply_overrides(resolve_target(args.target), args)
    result = run_scenario(cfg, out_dir=args.out_dir, threads=args.threads)
    for f in result.files:
        print(f)
    return 0


def _cmd_spectrum(args) -> int:
    cfg = _apply_overrides(resolve_target(args.target), args)
    rows = []
    for branch in cfg.branches:
        spec = eigenvalues(cfg.params, branch)
        for lab, val in spec.by_label().items():
            rows.append({"branch": branch.value, "label": lab,
                         "re_omega": val.real, "im_omega": val.imag})
    if args.format == "json":
        print(json.dumps(rows, indent=2, sort_keys=True))
    else:
        print("branch,label,re_omega,im_omega")
        for r in rows:
            print(f"{r['branch']},{r['label']},{_fmt(r['re_omega'])},{_fmt(r['im_omega'])}")
    return 0


def _cmd_transmit(args) -> int:
    cfg = _apply_overrides(resolve_target(args.target), args)
    grid = cfg.probe.values()
    for branch in cfg.branches:
        trace = s21(cfg.params, branch, grid)
        rows = (
            (trace.omega[k], trace.s21[k].real, trace.s21[k].imag,
             trace.power[k], branch.value, bool(trace.near_singular[k]))
            for k in range(trace.omega.size)
        )
        header = ["omega", "re_s21", "im_s21", "power", "branch", "near_singular"]
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"{cfg.name}_trace_{branch.value}.csv"
            _write_csv(path, header, rows)
            print(path)
        elif args.format == "json":
            print(json.dumps({
                "branch": branch.value,
                "omega": trace.omega.tolist(),
                "power": trace.power.tolist(),
            }))
        else:
            print(",".join(header))
            for row in rows:
                print(",".join(_fmt(v) for v in row))
    return 0


def _cmd_ep_find(args) -> int:
    cfg = resolve_target(args.target)
    _emit(_run_ep_find(cfg), args.format)
    return 0


def _cmd_dynamics(args) -> int:
    cfg = resolve_target(args.target)
    if args.branches:
        cfg = replace(cfg, branches=_parse_branches(args.branches))
    branch = cfg.branches[0]
    omega = args.omega if args.omega is not None else cfg.crosscheck_omega
    stability = stability_classify(cfg.params, branch)
    trajectory = integrate(cfg.params, branch, DriveSpec(amplitude=1.0, omega=omega),
                           t_end=args.t_end)
    payload = {
        "branch": branch.value,
        "omega": omega,
        "stability": stability.classification,
        "max_growth_rate": stability.max_growth_rate,
        "converged": trajectory.converged,
        "residual": trajectory.residual,
        "steady_state": None if trajectory.steady_state is None
        else list(trajectory.steady_state),
    }
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        header = ["t"]
        for mode in ("a", "b", "c")[: cfg.params.n_cavities]:
            header.extend((f"re_{mode}", f"im_{mode}"))
        path = out / f"{cfg.name}_trajectory.csv"
        _write_csv(
            path, header,
            (
                [trajectory.times[k]]
                + [part
                   for mode in range(cfg.params.n_cavities)
                   for part in (trajectory.amplitudes[k, mode].real,
                                trajectory.amplitudes[k, mode].imag)]
                for k in range(trajectory.times.size)
            ),
        )
        print(path)
    print(json.dumps(_json_ready(payload), indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "list-presets":
            for name in preset_catalog():
                print(name)
            return 0
        handler = {
            "run": _cmd_run,
            "spectrum": _cmd_spectrum,
            "transmit": _cmd_transmit,
            "ep-find": _cmd_ep_find,
            "dynamics": _cmd_dynamics,
        }[args.command]
        return handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
