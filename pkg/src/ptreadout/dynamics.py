"""Time-domain mean-field dynamics and the time/frequency cross-check.

The mode vector obeys x' = -i*(H_eff - omega*I) x + sqrt(2*kappa_i)*a_in*e_a
in the frame co-rotating with the probe, where the drive is constant and a
steady state is a genuine equilibrium. Integration is classic fixed-step
4th-order Runge-Kutta; for this linear constant-coefficient system the RK4
update collapses exactly to x -> Phi x + psi d with polynomial propagators
in dt*M, which is what the stepper applies.

Growth rates are read off the spectrum (modes evolve under -i*H_eff, so
Im[Omega] is the per-mode rate). Balanced gain/loss operating points are
marginal, not stable: their driven response grows secularly, so the
frequency-domain S21 there is a formal steady-state response and the
time-domain cross-check refuses them explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DivergenceError,
    NotSteadyStateSolvableError,
    NumericalError,
    StepSizeError,
)
from .hamiltonian import QubitBranch, SystemParams, build_hamiltonian
from .spectrum import eigenvalues
from .transmission import s21_value, steady_state_amplitudes

__all__ = [
    "DriveSpec",
    "StabilityReport",
    "TrajectoryResult",
    "CrosscheckReport",
    "stability_classify",
    "integrate",
    "crosscheck_s21",
]

STABILITY_MARGIN = 1e-9
DIVERGENCE_GUARD = 1e12
CONVERGENCE_RTOL = 1e-10
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class DriveSpec:
    """Constant probe drive: input amplitude and detuning from cavity a.

    The drive enters the cavity-a equation only, scaled by sqrt(2*kappa_i)
    with kappa_i taken from the system parameters.
    """

    amplitude: complex = 1.0
    omega: float = 0.0


@dataclass(frozen=True)
class StabilityReport:
    classification: str  # "stable" | "marginal" | "unstable"
    max_growth_rate: float


def stability_classify(p: SystemParams, branch: QubitBranch) -> StabilityReport:
    """Classify driven dynamics by the largest Im[Omega] of the spectrum."""
    max_im = max(v.imag for v in eigenvalues(p, branch).eigenvalues)
    margin = STABILITY_MARGIN * p.kappa_a
    if max_im < -margin:
        label = "stable"
    elif max_im > margin:
        label = "unstable"
    else:
        label = "marginal"
    return StabilityReport(classification=label, max_growth_rate=max_im)


@dataclass(frozen=True)
class TrajectoryResult:
    """Sampled co-rotating mode amplitudes from one integration run."""

    times: np.ndarray
    amplitudes: np.ndarray  # (n_samples, n_modes) complex
    converged: bool
    steady_state: np.ndarray | None
    residual: float

    def __post_init__(self):
        self.times.flags.writeable = False
        self.amplitudes.flags.writeable = False
        if self.steady_state is not None:
            self.steady_state.flags.writeable = False


def _rk4_propagators(m: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Phi and psi with x_{n+1} = Phi x_n + psi d, exactly one RK4 step."""
    n = m.shape[0]
    a = dt * m
    eye = np.eye(n, dtype=complex)
    a2 = a @ a
    a3 = a2 @ a
    phi = eye + a + a2 / 2.0 + a3 / 6.0 + (a3 @ a) / 24.0
    psi = dt * (eye + a / 2.0 + a2 / 6.0 + a3 / 24.0)
    return phi, psi


def integrate(
    p: SystemParams,
    branch: QubitBranch,
    drive: DriveSpec,
    t_end: float,
    dt: float | None = None,
    sample_every: int | None = None,
) -> TrajectoryResult:
    """Integrate from vacuum (all amplitudes zero) under a constant drive.

    dt must satisfy dt <= 0.01 / max(|Omega|, kappa_a); omitted, it is set
    to that bound. Convergence is declared once the amplitude change over
    one kappa_a^-1 falls below 1e-10 relative and the algebraic residual of
    the steady-state system is below 1e-8 * ||drive||. Amplitudes beyond
    1e12 abort with a divergence error (the expected outcome for unstable
    systems).
    """
    branch = QubitBranch(branch)
    if t_end <= 0:
        raise StepSizeError("t_end must be positive")
    spectral = max(abs(v) for v in eigenvalues(p, branch).eigenvalues)
    dt_bound = 0.01 / max(spectral, p.kappa_a)
    if dt is None:
        dt = dt_bound
    elif dt <= 0 or dt > dt_bound * (1.0 + 1e-12):
        raise StepSizeError(
            f"dt={dt!r} exceeds the bound 0.01/max(|Omega|, kappa_a)={dt_bound!r}"
        )

    n = p.n_cavities
    h = build_hamiltonian(p, branch).matrix
    m = -1j * (h - drive.omega * np.eye(n))
    d = np.zeros(n, dtype=complex)
    d[0] = math.sqrt(2.0 * p.kappa_i) * drive.amplitude
    drive_norm = float(np.linalg.norm(d))
    phi, psi = _rk4_propagators(m, dt)
    forcing = psi @ d

    total_steps = max(1, math.ceil(t_end / dt))
    chunk = max(1, round(1.0 / (p.kappa_a * dt)))
    if sample_every is None:
        sample_every = max(1, total_steps // 4000)

    x = np.zeros(n, dtype=complex)
    times = [0.0]
    samples = [x.copy()]
    converged = False
    residual = math.inf
    previous = x.copy()
    step = 0
    while step < total_steps:
        this_chunk = min(chunk, total_steps - step)
        for _ in range(this_chunk):
            x = phi @ x + forcing
            step += 1
            if step % sample_every == 0:
                times.append(step * dt)
                samples.append(x.copy())
        if np.max(np.abs(x)) > DIVERGENCE_GUARD:
            raise DivergenceError(
                f"amplitudes exceeded {DIVERGENCE_GUARD:.0e} at t={step * dt:.3g}"
            )
        change = float(np.linalg.norm(x - previous))
        scale = float(np.linalg.norm(x))
        if change <= CONVERGENCE_RTOL * scale or (change == 0.0 and scale == 0.0):
            residual = float(np.linalg.norm(m @ x + d))
            if residual <= RESIDUAL_RTOL * drive_norm:
                converged = True
                break
        previous = x.copy()
    if times[-1] != step * dt:
        times.append(step * dt)
        samples.append(x.copy())
    if not converged:
        residual = float(np.linalg.norm(m @ x + d))
    return TrajectoryResult(
        times=np.array(times),
        amplitudes=np.array(samples),
        converged=converged,
        steady_state=x.copy() if converged else None,
        residual=residual,
    )


@dataclass(frozen=True)
class CrosscheckReport:
    s21_time_domain: complex
    s21_frequency_domain: complex
    abs_error: float
    omega: float
    branch: QubitBranch


def crosscheck_s21(
    p: SystemParams,
    branch: QubitBranch,
    omega: float,
    amplitude: complex = 1.0,
    t_end: float | None = None,
    dt: float | None = None,
) -> CrosscheckReport:
    """Compare time-domain steady-state transmission against the closed form.

    Only dynamically stable systems are accepted: marginal ones (every
    exactly balanced gain/loss point) never reach a steady state under
    drive, and unstable ones diverge. For converged runs the two routes
    agree to better than 1e-6 by contract.
    """
    branch = QubitBranch(branch)
    report = stability_classify(p, branch)
    if report.classification != "stable":
        raise NotSteadyStateSolvableError(
            f"system is {report.classification} (max growth rate "
            f"{report.max_growth_rate:.3e}); the time-domain steady state is "
            "undefined there and the frequency-domain S21 is a formal response"
        )
    if t_end is None:
        decay = abs(report.max_growth_rate)
        t_end = min(50.0 / p.kappa_a + 35.0 / decay, 1e5 / p.kappa_a)
    trajectory = integrate(p, branch, DriveSpec(amplitude=amplitude, omega=omega),
                           t_end=t_end, dt=dt)
    if not trajectory.converged:
        raise NumericalError(
            f"time-domain integration did not converge by t={t_end:.3g}"
        )
    a_ss = complex(trajectory.steady_state[0])
    s_td = math.sqrt(2.0 * p.kappa_o) * a_ss / amplitude
    s_fd = s21_value(p, branch, omega)
    return CrosscheckReport(
        s21_time_domain=s_td,
        s21_frequency_domain=s_fd,
        abs_error=abs(s_td - s_fd),
        omega=omega,
        branch=branch,
    )


def algebraic_steady_state(
    p: SystemParams, branch: QubitBranch, drive: DriveSpec
) -> np.ndarray:
    """Steady state from the linear solve, scaled to the drive amplitude."""
    return steady_state_amplitudes(p, branch, drive.omega, a_in=drive.amplitude)
