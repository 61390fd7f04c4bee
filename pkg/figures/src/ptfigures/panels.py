"""Panel definitions, CSV schema validation, and rendering."""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("delta-omega-sweep", "transmission-pair")

TRACE_COLUMNS = ("omega", "re_s21", "im_s21", "power", "branch", "near_singular")

_SWEEP_VALUE_COLUMN = re.compile(
    r"^(re|im)_omega_[a-z]+_(absent|ground|excited)$"
)
_DELTA_COLUMN = re.compile(r"^delta_omega_([a-z]+)$")


class SchemaError(ValueError):
    """A CSV does not match the engine's documented output schemas."""


@dataclass(frozen=True)
class PanelSpec:
    """One panel to render.

    delta-omega-sweep panels take a single sweep CSV and draw one curve per
    delta_omega_* column; transmission-pair panels take the ground and
    excited trace CSVs of one scenario and overlay their power spectra.
    Near-EP transmission contrast spans several decades, so trace panels
    default to a log power axis.
    """

    kind: str
    inputs: tuple[str, ...]
    output: str
    log_scale: bool = True
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown panel kind {self.kind!r}")
        expected = 1 if self.kind == "delta-omega-sweep" else 2
        if len(self.inputs) != expected:
            raise SchemaError(
                f"{self.kind} takes exactly {expected} input CSV(s), "
                f"got {len(self.inputs)}"
            )


@dataclass(frozen=True)
class RenderResult:
    output: str
    curves: int
    labels: tuple[str, ...] = field(default=())


def _read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"input CSV not found: {p}")
    with open(p, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{p}: empty file, expected a CSV header") from None
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{p}: no data rows")
    return header, rows


def _column(rows: list[list[str]], index: int, path, name: str) -> np.ndarray:
    try:
        return np.array([float(row[index]) for row in rows])
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: column {name!r} is not numeric") from exc


def load_sweep_table(path: str | Path) -> dict[str, np.ndarray]:
    """Sweep CSV: one sweep-axis column, eigenvalue columns, delta columns.

    Unknown columns are refused, not skipped: a schema drift in the engine
    must fail loudly here.
    """
    header, rows = _read_csv(path)
    axis = header[0]
    if not re.fullmatch(r"[a-z][a-z0-9_]*", axis) or axis.startswith(("re_", "im_", "delta_")):
        raise SchemaError(f"{path}: first column {axis!r} is not a sweep axis")
    deltas = []
    for name in header[1:]:
        if _DELTA_COLUMN.fullmatch(name):
            deltas.append(name)
        elif not _SWEEP_VALUE_COLUMN.fullmatch(name):
            raise SchemaError(f"{path}: unknown sweep column {name!r}")
    if not deltas:
        raise SchemaError(f"{path}: no delta_omega_* columns to plot")
    table = {"__axis__": axis}
    for index, name in enumerate(header):
        table[name] = _column(rows, index, path, name)
    return table


def load_trace_table(path: str | Path) -> dict[str, np.ndarray | str]:
    """Transmission trace CSV: the fixed six-column schema, exact order."""
    header, rows = _read_csv(path)
    if tuple(header) != TRACE_COLUMNS:
        raise SchemaError(
            f"{path}: trace header {header!r} does not match {list(TRACE_COLUMNS)}"
        )
    branches = {row[4] for row in rows}
    if len(branches) != 1 or not branches <= {"absent", "ground", "excited"}:
        raise SchemaError(f"{path}: expected a single valid branch, got {branches}")
    return {
        "omega": _column(rows, 0, path, "omega"),
        "power": _column(rows, 3, path, "power"),
        "branch": branches.pop(),
    }


def _render_sweep(spec: PanelSpec, ax) -> tuple[int, tuple[str, ...]]:
    table = load_sweep_table(spec.inputs[0])
    axis = table["__axis__"]
    styles = {"plus": "-", "minus": "--", "zero": "-."}
    labels = []
    for name in table:
        match = _DELTA_COLUMN.fullmatch(name)
        if not match:
            continue
        mode = match.group(1)
        ax.plot(table[axis], table[name], styles.get(mode, "-"),
                label=rf"$\Delta\Omega_\mathrm{{{mode}}}/\kappa_a$")
        labels.append(name)
    ax.axhline(0.0, color="0.8", lw=0.6, zorder=0)
    ax.set_xlabel(spec.xlabel or rf"${axis.replace('j1', 'J_1')}/\kappa_a$")
    ax.set_ylabel(spec.ylabel or r"$\Delta\Omega/\kappa_a$")
    return len(labels), tuple(labels)


def _render_pair(spec: PanelSpec, ax) -> tuple[int, tuple[str, ...]]:
    traces = [load_trace_table(path) for path in spec.inputs]
    if {t["branch"] for t in traces} != {"ground", "excited"}:
        raise SchemaError(
            "transmission-pair needs one ground and one excited trace, got "
            + ", ".join(str(t["branch"]) for t in traces)
        )
    colors = {"ground": "tab:red", "excited": "tab:blue"}
    labels = []
    for trace in sorted(traces, key=lambda t: t["branch"], reverse=True):
        branch = trace["branch"]
        power = trace["power"]
        finite = np.isfinite(power)
        ax.plot(trace["omega"][finite], power[finite], color=colors[branch],
                lw=1.0, label=branch)
        labels.append(branch)
    if spec.log_scale:
        ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel or r"$\omega/\kappa_a$")
    ax.set_ylabel(spec.ylabel or r"$|S_{21}|^2$")
    return len(labels), tuple(labels)


def render(spec: PanelSpec) -> RenderResult:
    """Draw the panel and write the image file; inputs are never modified."""
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    try:
        if spec.kind == "delta-omega-sweep":
            curves, labels = _render_sweep(spec, ax)
        else:
            curves, labels = _render_pair(spec, ax)
        if spec.title:
            ax.set_title(spec.title)
        ax.legend(frameon=False, fontsize=9)
        fig.tight_layout()
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, dpi=150)
    finally:
        plt.close(fig)
    return RenderResult(output=str(spec.output), curves=curves, labels=labels)
