"""Cavity-chain parameters, qubit-induced shift, and effective mode matrices.

A lossy readout cavity (a) holds a weakly coupled qubit and is chained to
up to two auxiliary cavities (b, c) that may carry gain. After the qubit is
adiabatically eliminated it survives only as a state-dependent complex
frequency shift on cavity a, so the whole system reduces to a 1x1, 2x2 or
3x3 complex-symmetric (non-Hermitian) mode matrix. Everything downstream
(spectra, transmission, dynamics) is built from that matrix.

All rates, couplings and detunings are interpreted in units of the passive
cavity loss rate ``kappa_a``; ``kappa_a`` itself is kept so physical-unit
inputs can be normalized on ingestion. hbar = 1, rotating frame at the
passive-cavity frequency: only detunings appear, never absolute frequencies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from enum import Enum

import numpy as np

from .errors import ValidationError

__all__ = [
    "QubitBranch",
    "SystemParams",
    "EffectiveHamiltonian",
    "PTSymmetryReport",
    "dispersive_shift",
    "build_hamiltonian",
    "pt_symmetry_check",
]


class QubitBranch(str, Enum):
    """Qubit state selecting the cavity-a frequency shift: none, -shift, +shift."""

    ABSENT = "absent"
    GROUND = "ground"
    EXCITED = "excited"


_NONNEGATIVE = ("kappa_b", "kappa_c", "gamma", "g", "j1", "j2", "kappa_i", "kappa_o")


@dataclass(frozen=True)
class SystemParams:
    """Rates, couplings and detunings of the cavity chain plus qubit.

    kappa_a    total loss rate of the passive cavity a (> 0, the unit rate;
               contains the port rates kappa_i and kappa_o by convention,
               which makes the empty-cavity |S21(0)|^2 = 1 baseline exact)
    kappa_b    gain rate of auxiliary cavity b (>= 0, enters as +i*kappa_b)
    kappa_c    gain rate of auxiliary cavity c (>= 0, used only for n = 3)
    gamma      qubit decay rate (>= 0)
    g          qubit-cavity coupling (>= 0)
    delta_q_detuning   qubit-cavity detuning omega_q - omega_a
    delta_b, delta_c   cavity detunings from cavity a
    j1         coupling between cavities a and b (>= 0)
    j2         coupling between cavities b and c (>= 0)
    kappa_i, kappa_o   input/output port rates of cavity a (>= 0)
    n_cavities 1, 2 or 3 chained cavities
    lossy_aux  validation-only toggle that flips the auxiliary rates to
               losses (-i*kappa_b, -i*kappa_c); used to check the stability
               classifier against an all-passive chain. Not a gain scenario.

    Negative gain-rate inputs are rejected rather than reinterpreted as
    losses, so sign-convention bugs cannot slip through silently; the
    ``lossy_aux`` flag is the one sanctioned path to a lossy auxiliary.
    """

    kappa_a: float = 1.0
    kappa_b: float = 0.0
    kappa_c: float = 0.0
    gamma: float = 0.0
    g: float = 0.0
    delta_q_detuning: float = 0.0
    delta_b: float = 0.0
    delta_c: float = 0.0
    j1: float = 0.0
    j2: float = 0.0
    kappa_i: float = 0.5
    kappa_o: float = 0.5
    n_cavities: int = 2
    lossy_aux: bool = False

    def __post_init__(self):
        for f in fields(self):
            if f.name in ("n_cavities", "lossy_aux"):
                continue
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValidationError(f"{f.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValidationError(f"{f.name} must be finite, got {value!r}")
        if self.kappa_a <= 0:
            raise ValidationError("kappa_a must be positive")
        for name in _NONNEGATIVE:
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")
        if self.n_cavities not in (1, 2, 3):
            raise ValidationError("n_cavities must be 1, 2 or 3")

    @property
    def aux_sign(self) -> int:
        """+1 for gain auxiliaries (standard), -1 under the lossy_aux toggle."""
        return -1 if self.lossy_aux else 1

    def normalized(self) -> "SystemParams":
        """Copy with every rate-like field rescaled so kappa_a = 1."""
        k = self.kappa_a
        scaled = {
            f.name: getattr(self, f.name) / k
            for f in fields(self)
            if f.name not in ("n_cavities", "lossy_aux")
        }
        return replace(self, **scaled)


def dispersive_shift(p: SystemParams, branch: QubitBranch) -> complex:
    """State-dependent complex frequency shift of cavity a.

    Excited: +g^2 / (delta_q - i*gamma); Ground: the exact negative;
    Absent: 0. The imaginary part of the Excited shift is positive for
    gamma > 0 (qubit decay adds loss to the cavity it dresses).
    """
    branch = QubitBranch(branch)
    if branch is QubitBranch.ABSENT:
        return 0j
    denominator = complex(p.delta_q_detuning, -p.gamma)
    if denominator == 0:
        raise ValidationError(
            "dispersive shift undefined: delta_q_detuning and gamma are both zero"
        )
    shift = p.g * p.g / denominator
    return shift if branch is QubitBranch.EXCITED else -shift


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Mode matrix of the reduced chain, with its provenance.

    ``matrix`` is complex-symmetric (equal to its transpose), generally not
    Hermitian: diagonal (shift - i*kappa_a, delta_b + i*kappa_b,
    delta_c + i*kappa_c), off-diagonals j1 (a-b) and j2 (b-c).
    """

    matrix: np.ndarray
    basis: tuple[str, ...]
    params: SystemParams
    branch: QubitBranch

    def __post_init__(self):
        self.matrix.flags.writeable = False


def build_hamiltonian(p: SystemParams, branch: QubitBranch) -> EffectiveHamiltonian:
    """Assemble the n x n effective mode matrix for the given qubit branch."""
    branch = QubitBranch(branch)
    n = p.n_cavities
    sign = p.aux_sign
    m = np.zeros((n, n), dtype=complex)
    m[0, 0] = dispersive_shift(p, branch) - 1j * p.kappa_a
    if n >= 2:
        m[1, 1] = p.delta_b + sign * 1j * p.kappa_b
        m[0, 1] = m[1, 0] = p.j1
    if n == 3:
        m[2, 2] = p.delta_c + sign * 1j * p.kappa_c
        m[1, 2] = m[2, 1] = p.j2
    return EffectiveHamiltonian(matrix=m, basis=("a", "b", "c")[:n], params=p, branch=branch)


@dataclass(frozen=True)
class PTSymmetryReport:
    satisfied: bool
    violations: tuple[tuple[str, float], ...]
    tolerance: float


def pt_symmetry_check(p: SystemParams, tolerance: float = 1e-12) -> PTSymmetryReport:
    """Check the balanced gain/loss conditions for the qubit-free chain.

    Two cavities: delta_b = 0 and kappa_b = kappa_a. Three cavities:
    delta_b = delta_c = 0, j1 = j2, kappa_b = 0 and kappa_c = kappa_a.
    ``tolerance`` is absolute, in units of kappa_a. The lossy_aux toggle is
    folded into the gain residuals, so an all-passive chain never passes.
    """
    if p.n_cavities == 1:
        raise ValidationError("PT-symmetry check needs at least one auxiliary cavity")
    tol = tolerance * p.kappa_a
    sign = p.aux_sign
    checks: list[tuple[str, float]] = [("delta_b", abs(p.delta_b))]
    if p.n_cavities == 2:
        checks.append(("kappa_b_balance", abs(sign * p.kappa_b - p.kappa_a)))
    else:
        checks.append(("delta_c", abs(p.delta_c)))
        checks.append(("coupling_match", abs(p.j1 - p.j2)))
        checks.append(("kappa_b_zero", abs(sign * p.kappa_b)))
        checks.append(("kappa_c_balance", abs(sign * p.kappa_c - p.kappa_a)))
    violations = tuple((name, residual) for name, residual in checks if residual > tol)
    return PTSymmetryReport(satisfied=not violations, violations=violations, tolerance=tol)
