"""Concurrence, negativity, PPT separability and entanglement sudden death times."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from esdlab.channels import DephasingRates, evolve_x_state
from esdlab.qmat import PSD_FLOOR, XState, as_matrix, eigenvalues, hermitize

ZERO_CONCURRENCE = 1e-12
IMAG_TOL = 1e-9
# smallest eigenvalue of rho below which the spin-flip product is treated as near-defective
WELL_CONDITIONED = 1e-6

# sigma_y (x) sigma_y in the standard basis: anti-diagonal (-1, 1, 1, -1).
SPIN_FLIP = np.fliplr(np.diag([-1.0, 1.0, 1.0, -1.0])).astype(complex)


@dataclass(frozen=True)
class ConcurrenceResult:
    """Wootters concurrence and the spectrum it came from.

    ``lambdas`` are the eigenvalues of ``rho (sy x sy) rho* (sy x sy)`` in
    decreasing order, clamped at zero. ``branch`` is ``"w"`` or ``"z"`` when
    the value came from the standard-form formula and the state is entangled.
    """

    value: float
    lambdas: tuple[float, float, float, float]
    branch: str | None = None

    @property
    def sqrt_lambdas(self) -> tuple[float, ...]:
        return tuple(math.sqrt(v) for v in self.lambdas)

    def __float__(self) -> float:
        return self.value


def _spin_flip_spectrum(m: np.ndarray) -> np.ndarray:
    zeta = m @ SPIN_FLIP @ m.conj() @ SPIN_FLIP
    return eigenvalues(zeta)


def _singular_value_spectrum(m: np.ndarray) -> np.ndarray:
    # sqrt(lambda_i) are the singular values of sqrt(rho) sqrt(rho~), and
    # sqrt(rho~) = Y sqrt(rho)* Y; singular values carry no sqrt amplification
    # of rounding near zero.
    vals, vecs = np.linalg.eigh(hermitize(m))
    root = (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T
    flipped_root = SPIN_FLIP @ root.conj() @ SPIN_FLIP
    sv = np.linalg.svd(root @ flipped_root, compute_uv=False)
    return (sv ** 2).astype(complex)


def concurrence_general(rho) -> ConcurrenceResult:
    """Wootters concurrence of an arbitrary two-qubit density matrix.

    For well-conditioned ``rho`` the eigenvalues of the non-Hermitian
    ``rho rho~`` come straight from the general eigensolver. When ``rho`` is
    close to singular that product is close to defective and its small
    eigenvalues lose about half their digits, so the square roots of the
    spectrum are taken instead as singular values of ``sqrt(rho) sqrt(rho~)``.
    """
    m = as_matrix(rho)
    vals = None
    if np.min(np.linalg.eigvalsh(hermitize(m))) > WELL_CONDITIONED:
        vals = _spin_flip_spectrum(m)
        if np.max(np.abs(vals.imag)) > IMAG_TOL or np.min(vals.real) < PSD_FLOOR:
            vals = None
    if vals is None:
        vals = _singular_value_spectrum(m)
    lambdas = np.sort(np.clip(vals.real, 0.0, None))[::-1]
    roots = np.sqrt(lambdas)
    value = max(0.0, float(roots[0] - roots[1] - roots[2] - roots[3]))
    return ConcurrenceResult(min(value, 1.0), tuple(float(v) for v in lambdas))


def _branch_excess(x: XState) -> dict[str, float]:
    return {
        "w": abs(x.w) - math.sqrt(x.b * x.c),
        "z": abs(x.z) - math.sqrt(x.a * x.d),
    }


def concurrence_x_state(x: XState) -> ConcurrenceResult:
    """Closed-form concurrence ``2 max(0, |w| - sqrt(bc), |z| - sqrt(ad))``."""
    excess = _branch_excess(x)
    branch = max(excess, key=excess.get)
    value = 2 * max(0.0, excess[branch])
    sad, sbc = math.sqrt(x.a * x.d), math.sqrt(x.b * x.c)
    roots = sorted(
        [sad + abs(x.w), abs(sad - abs(x.w)), sbc + abs(x.z), abs(sbc - abs(x.z))],
        reverse=True)
    return ConcurrenceResult(
        value, tuple(r * r for r in roots), branch if value > 0 else None)


def partial_transpose(rho) -> np.ndarray:
    """Partial transpose over qubit B."""
    m = as_matrix(rho).reshape(2, 2, 2, 2)
    return m.transpose(0, 3, 2, 1).reshape(4, 4)


def is_separable(rho) -> bool:
    """PPT test, exact for two qubits."""
    return bool(np.min(eigenvalues(partial_transpose(rho)).real) >= PSD_FLOOR)


def negativity(rho) -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose."""
    vals = eigenvalues(partial_transpose(rho)).real
    return float(-np.sum(vals[vals < 0]))


class EsdClass(str, enum.Enum):
    ALREADY_SEPARABLE = "AlreadySeparable"
    FINITE_DEATH = "FiniteDeath"
    ASYMPTOTIC_ONLY = "AsymptoticOnly"


@dataclass(frozen=True)
class EsdReport:
    classification: EsdClass
    t_c: float | None = None
    binding_branch: str | None = None

    def __post_init__(self):
        finite = self.classification is EsdClass.FINITE_DEATH
        if finite != (self.t_c is not None):
            raise ValueError("t_c must be given exactly for FiniteDeath")
        if finite and not self.t_c > 0:
            raise ValueError(f"death time must be positive, got {self.t_c}")

    @property
    def finite(self) -> bool:
        return self.classification is EsdClass.FINITE_DEATH


def esd_time_global(x: XState, gamma: float) -> EsdReport:
    """Sudden-death time under collective dephasing.

    Only states with ``z = 0`` are accepted: the ``z`` coherence does not decay
    under a collective field, so that branch never dies.
    """
    if x.z != 0:
        raise ValueError(
            "z != 0: the |+-><-+| coherence is decoherence-free under global noise")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    w, bc = abs(x.w), x.b * x.c
    root = math.sqrt(bc)
    if w <= root:
        return EsdReport(EsdClass.ALREADY_SEPARABLE, binding_branch="w")
    if bc == 0:
        return EsdReport(EsdClass.ASYMPTOTIC_ONLY, binding_branch="w")
    return EsdReport(EsdClass.FINITE_DEATH, math.log(w / root) / (2 * gamma), "w")


def esd_time_local(x: XState, gamma_a: float, gamma_b: float) -> EsdReport:
    """Sudden-death time under independent dephasing of the two qubits.

    Both coherences decay as ``exp(-(gamma_a + gamma_b) t / 2)``. Entanglement
    ends when the last entangled branch crosses its threshold; a branch with a
    zero threshold (``bc = 0`` for ``w``, ``ad = 0`` for ``z``) only decays
    asymptotically.
    """
    if not (gamma_a >= 0 and gamma_b >= 0 and gamma_a + gamma_b > 0):
        raise ValueError("rates must be non-negative with a positive sum")
    branches = {
        "w": (abs(x.w), math.sqrt(x.b * x.c)),
        "z": (abs(x.z), math.sqrt(x.a * x.d)),
    }
    entangled = {k: v for k, v in branches.items() if v[0] > v[1]}
    if not entangled:
        return EsdReport(EsdClass.ALREADY_SEPARABLE)
    for name, (_, threshold) in entangled.items():
        if threshold == 0:
            return EsdReport(EsdClass.ASYMPTOTIC_ONLY, binding_branch=name)
    times = {k: math.log(c / th) for k, (c, th) in entangled.items()}
    branch = max(times, key=times.get)
    return EsdReport(EsdClass.FINITE_DEATH, 2 * times[branch] / (gamma_a + gamma_b), branch)


def esd_time(x: XState, rates: DephasingRates) -> EsdReport:
    if rates.model == "global":
        return esd_time_global(x, rates.gamma)
    return esd_time_local(x, rates.gamma_a, rates.gamma_b)


Curve = Callable[[float], Union[ConcurrenceResult, float]]


def esd_time_numeric(curve: Curve, t_max: float, tol: float,
                     zero_tol: float = ZERO_CONCURRENCE) -> EsdReport:
    """Locate the death time of a non-increasing concurrence curve by bisection.

    If the concurrence is still positive at ``t_max`` the curve is reported as
    AsymptoticOnly (within that horizon). Otherwise the returned ``t_c`` is the
    first time with concurrence at most ``zero_tol``, to within ``tol``.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")

    def evaluate(t):
        r = curve(t)
        if isinstance(r, ConcurrenceResult):
            return r.value, r.branch
        return float(r), None

    c0, branch = evaluate(0.0)
    if c0 <= zero_tol:
        return EsdReport(EsdClass.ALREADY_SEPARABLE)
    c_end, end_branch = evaluate(t_max)
    if c_end > 0:
        return EsdReport(EsdClass.ASYMPTOTIC_ONLY, binding_branch=end_branch or branch)

    lo, hi = 0.0, t_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        c, b = evaluate(mid)
        if c <= zero_tol:
            hi = mid
        else:
            lo, branch = mid, b or branch
    return EsdReport(EsdClass.FINITE_DEATH, 0.5 * (lo + hi), branch)


def concurrence_curve(x: XState, rates: DephasingRates) -> Callable[[float], ConcurrenceResult]:
    """Closed-form concurrence of ``x`` evolved to time ``t``."""
    return lambda t: concurrence_x_state(evolve_x_state(x, t, rates))
