"""Complex eigenfrequencies of the cavity chain and the readout observables.

The 2x2 spectrum comes from the closed-form quadratic formula and the 3x3
spectrum from Cardano's method with one round of Newton polishing; both
route every square root through :func:`principal_sqrt` so the branch
convention (theta in (-pi, pi], k = 0) is fixed in exactly one place. That
convention is load-bearing: with the alternative branch the J1 = 0 readout
difference comes out at twice its correct value.

Mode labels: the two-cavity eigenvalues are "plus"/"minus" by the sign in
front of the square root, never by sorting. The three-cavity labels are
obtained by matching against the qubit-free spectrum at the same coupling,
itself labelled through its closed form +/-sqrt(2*J1^2 - kappa_a^2), 0.
"""
from __future__ import annotations

import cmath
import itertools
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    LabelMismatchError,
    LadderTooCoarseError,
    RootPolishError,
    ValidationError,
)
from .hamiltonian import QubitBranch, SystemParams, build_hamiltonian

__all__ = [
    "ComplexSpectrum",
    "DeltaOmega",
    "EPReport",
    "SplittingFit",
    "ModeTrackingAmbiguityWarning",
    "principal_sqrt",
    "eigenvalues",
    "eigenvalues_2x2",
    "eigenvalues_3x3",
    "track_modes",
    "delta_omega",
    "delta_omega_sweep",
    "find_ep",
    "ep_splitting",
    "splitting_exponent",
]

LABELS_2 = ("plus", "minus")
LABELS_3 = ("plus", "minus", "zero")

#: eigenvalues closer than this (in units of kappa_a) count as coalesced
COALESCENCE_TOL = 1e-6


class ModeTrackingAmbiguityWarning(UserWarning):
    """Two label assignments are equally good: a degeneracy/EP was crossed."""


def principal_sqrt(z: complex) -> complex:
    """Square root sqrt(rho)*e^(i*theta/2) of z = rho*e^(i*theta), theta in (-pi, pi].

    The cut sits on the negative real axis with theta = pi included, so
    results always have non-negative real part, sqrt(-1) = +1j, and a point
    approached from below the cut (negative imaginary zero) maps onto the
    negative imaginary axis. cmath.sqrt implements exactly this branch,
    signed zeros included; keeping the single call here stops the
    convention from drifting between call sites.
    """
    return cmath.sqrt(complex(z))


@dataclass(frozen=True)
class ComplexSpectrum:
    """Labelled complex eigenfrequencies of one chain at one parameter point."""

    eigenvalues: tuple[complex, ...]
    labels: tuple[str, ...]
    branch: QubitBranch
    params: SystemParams

    def __post_init__(self):
        if len(self.eigenvalues) != len(self.labels):
            raise ValidationError("eigenvalues and labels must align")

    def by_label(self) -> dict[str, complex]:
        return dict(zip(self.labels, self.eigenvalues))

    def total(self) -> complex:
        return sum(self.eigenvalues)


@dataclass(frozen=True)
class DeltaOmega:
    """Re[Omega^(excited)] - Re[Omega^(ground)] per mode label."""

    values: dict[str, float]

    def __getitem__(self, label: str) -> float:
        return self.values[label]


def eigenvalues_2x2(p: SystemParams, branch: QubitBranch) -> ComplexSpectrum:
    """Closed-form spectrum of the two-cavity chain.

    plus/minus = (A + B)/2 +/- principal_sqrt(((A - B)/2)^2 + J1^2) with
    A, B the two diagonal entries. Under the balanced PT conditions this
    reduces to shift/2 +/- sqrt(J1^2 + (shift/2)^2 - kappa_a^2
    - i*kappa_a*shift).
    """
    if p.n_cavities != 2:
        raise ValidationError("eigenvalues_2x2 requires n_cavities = 2")
    m = build_hamiltonian(p, branch).matrix
    half_sum = complex(m[0, 0] + m[1, 1]) / 2
    root = principal_sqrt(
        (complex(m[0, 0] - m[1, 1]) / 2) ** 2 + complex(m[0, 1]) * complex(m[1, 0])
    )
    return ComplexSpectrum(
        eigenvalues=(half_sum + root, half_sum - root),
        labels=LABELS_2,
        branch=QubitBranch(branch),
        params=p,
    )


def _cbrt(z: complex) -> complex:
    rho, theta = cmath.polar(z)
    return cmath.rect(rho ** (1.0 / 3.0), theta / 3.0)


_CUBE_ROOT_OF_UNITY = complex(-0.5, 0.5 * math.sqrt(3.0))


def _cubic_roots(c2: complex, c1: complex, c0: complex, scale: float) -> tuple[complex, ...]:
    """Roots of x^3 + c2 x^2 + c1 x + c0 (complex coefficients).

    Cardano on the depressed cubic, picking the larger-magnitude cube-root
    argument to dodge cancellation, then Newton polishing each root. The
    q == 0 case is factored exactly so a traceless balanced chain keeps its
    zero eigenvalue at exactly 0. Residuals above 1e-9 on the natural cubic
    scale are an error, never silently accepted.
    """
    shift = c2 / 3.0
    pp = c1 - c2 * c2 / 3.0
    qq = c0 - c2 * c1 / 3.0 + 2.0 * c2 ** 3 / 27.0
    if qq == 0:
        root = principal_sqrt(-pp)
        ts = (0j, root, -root)
    elif pp == 0:
        u = _cbrt(-qq)
        ts = (u, u * _CUBE_ROOT_OF_UNITY, u * _CUBE_ROOT_OF_UNITY.conjugate())
    else:
        disc = principal_sqrt(qq * qq / 4.0 + pp ** 3 / 27.0)
        u3 = -qq / 2.0 + disc
        alt = -qq / 2.0 - disc
        if abs(alt) > abs(u3):
            u3 = alt
        u = _cbrt(u3)
        ts = tuple(
            uk - pp / (3.0 * uk)
            for uk in (u, u * _CUBE_ROOT_OF_UNITY, u * _CUBE_ROOT_OF_UNITY.conjugate())
        )
    roots = []
    tol = 1e-9 * scale ** 3
    for t in ts:
        x = t - shift
        for _ in range(2):
            f = ((x + c2) * x + c1) * x + c0
            fp = (3.0 * x + 2.0 * c2) * x + c1
            if fp == 0 or abs(f) <= tol * 1e-3:
                break
            x = x - f / fp
        residual = abs(((x + c2) * x + c1) * x + c0)
        if residual > tol:
            raise RootPolishError(
                f"cubic root residual {residual:.3e} exceeds {tol:.3e} after polishing"
            )
        roots.append(x)
    return tuple(roots)


def _matrix_cubic_roots(m: np.ndarray) -> tuple[complex, ...]:
    a, b, c = complex(m[0, 0]), complex(m[1, 1]), complex(m[2, 2])
    j1sq = complex(m[0, 1]) * complex(m[1, 0])
    j2sq = complex(m[1, 2]) * complex(m[2, 1])
    c2 = -(a + b + c)
    c1 = a * b + a * c + b * c - j1sq - j2sq
    c0 = -(a * b * c - a * j2sq - c * j1sq)
    scale = max(1.0, float(np.max(np.abs(m))))
    return _cubic_roots(c2, c1, c0, scale)


def _best_assignment(
    values: tuple[complex, ...], reference: dict[str, complex]
) -> tuple[dict[str, complex], float]:
    """Assign values to the reference labels with minimal total displacement.

    Returns the labelled assignment and the cost margin to the second-best
    permutation (0 when there is only one ordering).
    """
    labels = tuple(reference)
    best_cost = second_cost = math.inf
    best_perm = None
    for perm in itertools.permutations(range(len(values))):
        cost = sum(abs(values[perm[i]] - reference[lab]) for i, lab in enumerate(labels))
        if cost < best_cost:
            second_cost = best_cost
            best_cost, best_perm = cost, perm
        elif cost < second_cost:
            second_cost = cost
    assignment = {lab: values[best_perm[i]] for i, lab in enumerate(labels)}
    margin = second_cost - best_cost if math.isfinite(second_cost) else math.inf
    return assignment, margin


def _reference_labels_3(p: SystemParams) -> dict[str, complex]:
    root = principal_sqrt(2.0 * p.j1 * p.j1 - p.kappa_a * p.kappa_a)
    return {"plus": root, "minus": -root, "zero": 0j}


def eigenvalues_3x3(p: SystemParams, branch: QubitBranch) -> ComplexSpectrum:
    """Spectrum of the three-cavity chain from its characteristic cubic.

    There is no closed form once the qubit shift is present, so the cubic
    is solved numerically and every root checked against |det(H - x*I)|.
    Labels: the qubit-free roots at the same couplings are matched to the
    balanced-chain closed form (+root, -root, 0); a Ground/Excited spectrum
    is then matched to those labelled qubit-free roots by minimum total
    displacement in the complex plane.
    """
    if p.n_cavities != 3:
        raise ValidationError("eigenvalues_3x3 requires n_cavities = 3")
    branch = QubitBranch(branch)
    absent_roots = _matrix_cubic_roots(build_hamiltonian(p, QubitBranch.ABSENT).matrix)
    absent_labelled, _ = _best_assignment(absent_roots, _reference_labels_3(p))
    if branch is QubitBranch.ABSENT:
        labelled = absent_labelled
    else:
        roots = _matrix_cubic_roots(build_hamiltonian(p, branch).matrix)
        labelled, _ = _best_assignment(roots, absent_labelled)
    return ComplexSpectrum(
        eigenvalues=tuple(labelled[lab] for lab in LABELS_3),
        labels=LABELS_3,
        branch=branch,
        params=p,
    )


def eigenvalues(p: SystemParams, branch: QubitBranch) -> ComplexSpectrum:
    """Spectrum for any chain length (1x1 is the bare dressed cavity)."""
    if p.n_cavities == 2:
        return eigenvalues_2x2(p, branch)
    if p.n_cavities == 3:
        return eigenvalues_3x3(p, branch)
    m = build_hamiltonian(p, branch).matrix
    return ComplexSpectrum(
        eigenvalues=(complex(m[0, 0]),),
        labels=("solo",),
        branch=QubitBranch(branch),
        params=p,
    )


def track_modes(
    spectra: list[ComplexSpectrum], ambiguity_tol: float = 1e-12
) -> list[ComplexSpectrum]:
    """Relabel a parameter sweep so each label follows one continuous mode.

    The first spectrum keeps its native labels; every later one is matched
    to its predecessor by minimum total displacement (exhaustive over the
    <= 3! permutations). A margin below ``ambiguity_tol`` between the two
    best assignments signals a degeneracy or EP crossing and raises a
    :class:`ModeTrackingAmbiguityWarning`.
    """
    if not spectra:
        return []
    labels = spectra[0].labels
    n = spectra[0].params.n_cavities
    branch = spectra[0].branch
    for s in spectra[1:]:
        if s.labels != labels or s.params.n_cavities != n or s.branch != branch:
            raise ValidationError("track_modes needs a homogeneous sweep")
    tracked = [spectra[0]]
    previous = spectra[0].by_label()
    for index, s in enumerate(spectra[1:], start=1):
        assignment, margin = _best_assignment(s.eigenvalues, previous)
        if margin <= ambiguity_tol:
            warnings.warn(
                f"ambiguous mode assignment at sweep index {index} "
                f"(margin {margin:.3e}): degeneracy or EP crossing",
                ModeTrackingAmbiguityWarning,
                stacklevel=2,
            )
        tracked.append(
            ComplexSpectrum(
                eigenvalues=tuple(assignment[lab] for lab in labels),
                labels=labels,
                branch=s.branch,
                params=s.params,
            )
        )
        previous = assignment
    return tracked


def delta_omega(excited: ComplexSpectrum, ground: ComplexSpectrum) -> DeltaOmega:
    """Per-label real-part differences between the two qubit branches."""
    if excited.labels != ground.labels:
        raise LabelMismatchError(
            f"label sets differ: {excited.labels} vs {ground.labels}"
        )
    return DeltaOmega(
        values={
            lab: e.real - g.real
            for lab, e, g in zip(excited.labels, excited.eigenvalues, ground.eigenvalues)
        }
    )


def delta_omega_sweep(
    p: SystemParams, j1_values, tie_j2: bool = False
) -> list[DeltaOmega]:
    """Readout observables over a coupling sweep.

    ``tie_j2`` moves j2 together with j1 (keeps a balanced three-cavity
    chain balanced along the sweep).
    """
    out = []
    for j in j1_values:
        pj = replace(p, j1=float(j), j2=float(j) if tie_j2 else p.j2)
        out.append(
            delta_omega(
                eigenvalues(pj, QubitBranch.EXCITED),
                eigenvalues(pj, QubitBranch.GROUND),
            )
        )
    return out


@dataclass(frozen=True)
class EPReport:
    """Location and order of an exceptional point on the coupling axis.

    ``found`` is False when no coalescence occurs in the scanned interval;
    the report then carries the minimal-gap coupling instead.
    """

    j_ep: float
    order: int
    coalesced_value: complex
    gap: float
    found: bool
    method: str


def _min_gap(values: tuple[complex, ...]) -> float:
    return min(
        abs(a - b) for i, a in enumerate(values) for b in values[i + 1 :]
    )


def _coalescence_cluster(values: tuple[complex, ...], tol: float) -> tuple[int, complex]:
    """Size and centroid of the largest group of mutually close eigenvalues."""
    best_size, best_centroid = 1, values[0]
    for seed in values:
        cluster = [v for v in values if abs(v - seed) <= tol]
        if len(cluster) > best_size:
            best_size = len(cluster)
            best_centroid = sum(cluster) / len(cluster)
    return best_size, best_centroid


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def find_ep(
    p: SystemParams,
    j_start: float = 0.0,
    j_stop: float | None = None,
    grid_step: float | None = None,
    tie_j2: bool | None = None,
) -> EPReport:
    """Locate the coupling at which qubit-free eigenvalues coalesce.

    For a balanced two-cavity chain the answer is analytic (j1 = kappa_a).
    Otherwise the minimum of the pairwise eigenvalue gap is bracketed on a
    dense grid over [j_start, j_stop] (default [0, 3*kappa_a], step
    1e-3*kappa_a) and refined by golden-section search to an interval below
    1e-9*kappa_a. ``order`` counts eigenvalues within 1e-6*kappa_a of each
    other at the minimum; a largest cluster of one means no EP was found
    and the minimal-gap coupling is reported instead.
    """
    from .hamiltonian import pt_symmetry_check  # local to avoid cycle noise

    if p.n_cavities == 1:
        raise ValidationError("EP search needs at least one auxiliary cavity")
    if tie_j2 is None:
        tie_j2 = p.n_cavities == 3
    if j_stop is None:
        j_stop = 3.0 * p.kappa_a
    if grid_step is None:
        grid_step = 1e-3 * p.kappa_a
    if p.n_cavities == 2 and pt_symmetry_check(p).satisfied:
        return EPReport(
            j_ep=p.kappa_a, order=2, coalesced_value=0j, gap=0.0, found=True,
            method="analytic",
        )

    def gap_at(j: float) -> float:
        pj = replace(p, j1=j, j2=j if tie_j2 else p.j2)
        return _min_gap(eigenvalues(pj, QubitBranch.ABSENT).eigenvalues)

    grid = np.arange(j_start, j_stop + grid_step / 2, grid_step)
    gaps = np.array([gap_at(float(j)) for j in grid])
    k = int(np.argmin(gaps))
    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, len(grid) - 1)])
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = gap_at(c), gap_at(d)
    for _ in range(90):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = gap_at(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = gap_at(d)
    j_ep = (lo + hi) / 2.0
    pj = replace(p, j1=j_ep, j2=j_ep if tie_j2 else p.j2)
    values = eigenvalues(pj, QubitBranch.ABSENT).eigenvalues
    order, centroid = _coalescence_cluster(values, COALESCENCE_TOL * p.kappa_a)
    return EPReport(
        j_ep=float(j_ep),
        order=order,
        coalesced_value=complex(centroid),
        gap=float(_min_gap(values)),
        found=order >= 2,
        method="scan",
    )


@dataclass(frozen=True)
class SplittingFit:
    exponent: float
    epsilons: tuple[float, ...]
    splittings: tuple[float, ...]


def _perturbed_roots(m: np.ndarray, eps: float) -> tuple[complex, ...]:
    mm = m.copy()
    mm[0, 0] += eps
    if mm.shape[0] == 2:
        half_sum = (mm[0, 0] + mm[1, 1]) / 2
        root = principal_sqrt(((mm[0, 0] - mm[1, 1]) / 2) ** 2 + mm[0, 1] * mm[0, 1])
        return (half_sum + root, half_sum - root)
    return _matrix_cubic_roots(mm)


def ep_splitting(p: SystemParams, eps: float) -> float:
    """Largest pairwise eigenvalue distance after adding eps to entry (a, a)."""
    m = build_hamiltonian(p, QubitBranch.ABSENT).matrix
    roots = _perturbed_roots(m, eps)
    if len(roots) == 1:
        return 0.0
    return max(abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1 :])


def splitting_exponent(p: SystemParams, epsilons=None) -> SplittingFit:
    """Least-squares slope of log(splitting) vs log(eps) at an EP.

    The chain must sit exactly at its EP (qubit-free spectrum coalesced to
    within 1e-6*kappa_a). The ladder needs at least 4 points spanning at
    least 3 decades, all small against kappa_a. Expected slopes: 1/2 at a
    two-fold EP, 1/3 at a three-fold EP.
    """
    if epsilons is None:
        epsilons = np.geomspace(1e-8, 1e-4, 13) * p.kappa_a
    eps = np.asarray(sorted(float(e) for e in epsilons))
    if len(eps) < 4:
        raise LadderTooCoarseError("perturbation ladder needs at least 4 points")
    if eps[0] <= 0:
        raise LadderTooCoarseError("perturbation magnitudes must be positive")
    if eps[-1] / eps[0] < 1e3:
        raise LadderTooCoarseError("perturbation ladder must span >= 3 decades")
    if eps[-1] > 1e-2 * p.kappa_a:
        raise ValidationError("perturbations must stay small against kappa_a")
    if ep_splitting(p, 0.0) > COALESCENCE_TOL * p.kappa_a:
        raise ValidationError("system is not tuned to an exceptional point")
    splittings = np.array([ep_splitting(p, float(e)) for e in eps])
    slope = float(np.polyfit(np.log(eps), np.log(splittings), 1)[0])
    return SplittingFit(
        exponent=slope,
        epsilons=tuple(float(e) for e in eps),
        splittings=tuple(float(s) for s in splittings),
    )
