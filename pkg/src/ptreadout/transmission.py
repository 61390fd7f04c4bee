"""Probe transmission of the passive cavity and readout contrast metrics.

Two independent routes compute the same S21: the closed form
2*sqrt(kappa_i*kappa_o) / (kappa_a + i*(shift - omega) + self_energy(omega))
and a direct linear solve of the steady-state mode equations. Their
agreement to 1e-12 is the module's central anti-bug contract; neither side
may be removed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    GridMismatchError,
    GridTooCoarseError,
    NumericalError,
    SingularSelfEnergyError,
    ValidationError,
)
from .hamiltonian import QubitBranch, SystemParams, build_hamiltonian, dispersive_shift

__all__ = [
    "TransmissionTrace",
    "Peak",
    "PeakSet",
    "DistinguishabilityMetrics",
    "self_energy",
    "s21_value",
    "s21",
    "s21_steady_state",
    "steady_state_amplitudes",
    "find_peaks",
    "distinguishability",
]

#: outer-denominator magnitudes below floor*kappa_a are flagged near-singular
NEAR_SINGULAR_FLOOR = 1e-9

_SINGULAR = 1e-300


def self_energy(p: SystemParams, omega: float) -> complex:
    """Frequency-dependent correction from the auxiliary chain.

    Two cavities: j1^2 / (-kappa_b + i*(delta_b - omega)). Three cavities:
    the same with the inner fraction j2^2 / (-kappa_c + i*(delta_c - omega))
    added to the denominator (continued-fraction form, inner part first).
    A single cavity, or j1 = 0, contributes nothing.
    """
    if p.n_cavities == 1 or p.j1 == 0:
        return 0j
    sign = p.aux_sign
    denominator = complex(-sign * p.kappa_b, p.delta_b - omega)
    if p.n_cavities == 3 and p.j2 != 0:
        inner = complex(-sign * p.kappa_c, p.delta_c - omega)
        if abs(inner) < _SINGULAR:
            raise SingularSelfEnergyError(omega, "cavity-c")
        denominator += p.j2 * p.j2 / inner
    if abs(denominator) < _SINGULAR:
        raise SingularSelfEnergyError(omega, "cavity-b")
    return p.j1 * p.j1 / denominator


def _port_numerator(p: SystemParams) -> float:
    return 2.0 * math.sqrt(p.kappa_i * p.kappa_o)


def s21_value(p: SystemParams, branch: QubitBranch, omega: float) -> complex:
    """Closed-form transmission coefficient at a single probe frequency."""
    denominator = p.kappa_a + 1j * (dispersive_shift(p, branch) - omega) + self_energy(p, omega)
    if denominator == 0:
        return complex(math.inf, 0.0)
    return _port_numerator(p) / denominator


@dataclass(frozen=True)
class TransmissionTrace:
    """|S21|^2 spectrum of one qubit branch over a probe-frequency grid.

    ``near_singular`` marks points where the response denominator fell
    below the configured floor (or vanished exactly); their huge values are
    retained, not discarded, because the amplifying neighbourhood of an EP
    is the interesting regime, not a fault.
    """

    omega: np.ndarray
    s21: np.ndarray
    power: np.ndarray
    near_singular: np.ndarray
    branch: QubitBranch
    params: SystemParams

    def __post_init__(self):
        for arr in (self.omega, self.s21, self.power, self.near_singular):
            arr.flags.writeable = False


def s21(
    p: SystemParams,
    branch: QubitBranch,
    omega_grid,
    near_singular_floor: float = NEAR_SINGULAR_FLOOR,
) -> TransmissionTrace:
    """Transmission trace over a strictly increasing probe grid.

    Self-energy singularities are propagated as flags with their limiting
    values (an infinite self-energy shorts the cavity, S21 -> 0; an
    infinite inner fraction decouples the chain, S21 -> bare-cavity value).
    """
    branch = QubitBranch(branch)
    omega = np.asarray(omega_grid, dtype=float)
    if omega.ndim != 1 or omega.size < 1 or not np.all(np.isfinite(omega)):
        raise ValidationError("probe grid must be a finite 1-d array")
    if omega.size > 1 and not np.all(np.diff(omega) > 0):
        raise ValidationError("probe grid must be strictly increasing")
    shift = dispersive_shift(p, branch)
    numerator = _port_numerator(p)
    floor = near_singular_floor * p.kappa_a
    values = np.empty(omega.size, dtype=complex)
    flags = np.zeros(omega.size, dtype=bool)
    for k, w in enumerate(omega):
        try:
            sigma = self_energy(p, float(w))
        except SingularSelfEnergyError as exc:
            flags[k] = True
            if exc.where == "cavity-b":
                values[k] = 0j
            else:
                values[k] = numerator / (p.kappa_a + 1j * (shift - w))
            continue
        denominator = p.kappa_a + 1j * (shift - w) + sigma
        mag = abs(denominator)
        if mag == 0.0:
            flags[k] = True
            values[k] = complex(math.inf, 0.0)
        else:
            if mag < floor:
                flags[k] = True
            values[k] = numerator / denominator
    return TransmissionTrace(
        omega=omega.copy(),
        s21=values,
        power=np.abs(values) ** 2,
        near_singular=flags,
        branch=branch,
        params=p,
    )


def steady_state_amplitudes(
    p: SystemParams, branch: QubitBranch, omega: float, a_in: complex = 1.0
) -> np.ndarray:
    """Mode amplitudes from the algebraic steady-state system.

    Solves i*(H_eff - omega*I) x = sqrt(2*kappa_i) * a_in * e_a, the
    Fourier-domain form of the mean-field equations of motion. This is the
    independent route against which the closed-form S21 is checked.
    """
    h = build_hamiltonian(p, branch).matrix
    m = 1j * (h - omega * np.eye(p.n_cavities))
    rhs = np.zeros(p.n_cavities, dtype=complex)
    rhs[0] = math.sqrt(2.0 * p.kappa_i) * a_in
    try:
        return np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"steady-state system singular at omega={omega!r}") from exc


def s21_steady_state(p: SystemParams, branch: QubitBranch, omega: float) -> complex:
    """Transmission via the linear steady-state solve (independent route)."""
    amplitudes = steady_state_amplitudes(p, branch, omega)
    return math.sqrt(2.0 * p.kappa_o) * complex(amplitudes[0])


@dataclass(frozen=True)
class Peak:
    center: float
    height: float
    fwhm: float
    unresolved: bool


@dataclass(frozen=True)
class PeakSet:
    peaks: tuple[Peak, ...]

    def __len__(self) -> int:
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)


def _half_crossing(omega, power, k, half, step):
    """Walk from index k in direction step until power drops below half."""
    j = k
    while 0 <= j + step < len(power):
        if power[j + step] < half:
            w0, w1 = omega[j], omega[j + step]
            p0, p1 = power[j], power[j + step]
            frac = (half - p0) / (p1 - p0)
            return w0 + frac * (w1 - w0), abs(j - k) + 1
        j += step
    return None, abs(j - k) + 1


def find_peaks(trace: TransmissionTrace, min_span: int = 5) -> PeakSet:
    """Local maxima of |S21|^2 with sub-grid centers and FWHM estimates.

    Centers are refined by parabolic interpolation on log-power; FWHM by
    linear interpolation of the half-height crossings. Peaks whose
    half-height crossings leave the grid (or with non-finite height) are
    flagged unresolved. A resolved peak spanning fewer than ``min_span``
    grid points means the grid cannot support the fit.
    """
    power = trace.power
    omega = trace.omega
    if omega.size < 3:
        raise GridTooCoarseError("need at least 3 grid points to search for peaks")
    peaks = []
    for k in range(1, omega.size - 1):
        if not (power[k] > power[k - 1] and power[k] > power[k + 1]):
            continue
        if not math.isfinite(power[k]):
            peaks.append(Peak(center=float(omega[k]), height=float(power[k]),
                              fwhm=math.inf, unresolved=True))
            continue
        center = float(omega[k])
        height = float(power[k])
        if power[k - 1] > 0 and power[k + 1] > 0:
            lo, ce, hi = math.log(power[k - 1]), math.log(power[k]), math.log(power[k + 1])
            curvature = lo - 2.0 * ce + hi
            if curvature < 0:
                offset = 0.5 * (lo - hi) / curvature
                center = float(omega[k] + offset * (omega[k + 1] - omega[k]))
                height = float(math.exp(ce - 0.25 * (lo - hi) * offset))
        half = height / 2.0
        left, span_left = _half_crossing(omega, power, k, half, -1)
        right, span_right = _half_crossing(omega, power, k, half, +1)
        unresolved = left is None or right is None
        fwhm = math.inf if unresolved else right - left
        if not unresolved and span_left + span_right - 1 < min_span:
            raise GridTooCoarseError(
                f"peak at omega={center:.6g} spans fewer than {min_span} grid points"
            )
        peaks.append(Peak(center=center, height=height, fwhm=fwhm, unresolved=unresolved))
    peaks.sort(key=lambda pk: pk.center)
    return PeakSet(peaks=tuple(peaks))


@dataclass(frozen=True)
class DistinguishabilityMetrics:
    """How far apart the ground and excited transmission spectra are.

    ``peak_shifts`` pairs peaks by sorted order; peaks without a partner in
    the other trace are reported separately rather than silently dropped.
    """

    max_abs_diff: float
    l2_diff: float
    peak_shifts: tuple[float, ...]
    unmatched_ground: tuple[Peak, ...]
    unmatched_excited: tuple[Peak, ...]


def distinguishability(
    trace_ground: TransmissionTrace, trace_excited: TransmissionTrace
) -> DistinguishabilityMetrics:
    """Contrast metrics between two traces on the same grid and parameters."""
    if trace_ground.omega.shape != trace_excited.omega.shape or not np.array_equal(
        trace_ground.omega, trace_excited.omega
    ):
        raise GridMismatchError("traces must share an identical probe grid")
    if trace_ground.params != trace_excited.params:
        raise ValidationError("traces must share identical system parameters")
    diff = trace_excited.power - trace_ground.power
    peaks_g = find_peaks(trace_ground).peaks
    peaks_e = find_peaks(trace_excited).peaks
    matched = min(len(peaks_g), len(peaks_e))
    return DistinguishabilityMetrics(
        max_abs_diff=float(np.max(np.abs(diff))),
        l2_diff=float(np.trapezoid(diff * diff, trace_ground.omega)),
        peak_shifts=tuple(
            peaks_e[i].center - peaks_g[i].center for i in range(matched)
        ),
        unmatched_ground=tuple(peaks_g[matched:]),
        unmatched_excited=tuple(peaks_e[matched:]),
    )
