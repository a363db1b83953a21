"""Small dense matrices, two-qubit density matrices and X-states.

All matrices are ``numpy`` arrays of dtype ``complex128``: shape ``(2, 2)`` for
single-qubit operators and ``(4, 4)`` for two-qubit operators. The two-qubit
basis is fixed everywhere as

    |1> = |++>,  |2> = |+->,  |3> = |-+>,  |4> = |-->

i.e. qubit A is the most significant index, so ``np.kron(p, q)`` places ``p``
on qubit A and ``q`` on qubit B.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from esdlab.errors import EigenvalueConvergenceError, NonPhysicalStateError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_FLOOR = -1e-10
XSTATE_TOL = 1e-12

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Positions of the standard-form entries; everything else is zero.
_X_MASK = np.array(
    [[1, 0, 0, 1],
     [0, 1, 1, 0],
     [0, 1, 1, 0],
     [1, 0, 0, 1]], dtype=bool)


def as_matrix(m, shape: tuple[int, int] = (4, 4)) -> np.ndarray:
    """Coerce ``m`` to a finite complex array of the given shape."""
    arr = np.asarray(m, dtype=complex)
    if arr.shape != shape:
        raise ValueError(f"expected a {shape[0]}x{shape[1]} matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonPhysicalStateError("matrix has non-finite entries", "finite")
    return arr


def tensor_product(p, q) -> np.ndarray:
    """Kronecker product of two 2x2 matrices, ``p`` acting on qubit A."""
    return np.kron(as_matrix(p, (2, 2)), as_matrix(q, (2, 2)))


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def eigenvalues(m) -> np.ndarray:
    """All four eigenvalues of a 4x4 complex matrix.

    Hermitian input (to within 1e-12 elementwise) goes through the Hermitian
    solver and comes back with exactly zero imaginary parts. Anything else uses
    the general shifted-QR solver. Eigenvalues are returned sorted by
    decreasing real part.

    Raises
    ------
    EigenvalueConvergenceError
        If LAPACK reports that the QR iteration failed to converge.
    """
    arr = as_matrix(m)
    try:
        if np.max(np.abs(arr - arr.conj().T)) <= HERMITIAN_TOL:
            vals = np.linalg.eigvalsh(hermitize(arr)).astype(complex)
        else:
            vals = np.linalg.eigvals(arr)
    except np.linalg.LinAlgError as exc:
        raise EigenvalueConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise EigenvalueConvergenceError("eigensolver returned non-finite values")
    return vals[np.argsort(-vals.real, kind="stable")]


@dataclass(frozen=True)
class ValidityReport:
    """Physicality diagnostics of a candidate density matrix."""

    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    finite: bool = True

    @property
    def valid(self) -> bool:
        return (
            self.finite
            and self.hermiticity_defect <= HERMITIAN_TOL
            and self.trace_defect <= TRACE_TOL
            and self.min_eigenvalue >= PSD_FLOOR
        )

    def defect(self) -> str | None:
        """Short description of the first violated invariant, or None."""
        if not self.finite:
            return "non-finite entries"
        if self.hermiticity_defect > HERMITIAN_TOL:
            return f"not Hermitian (max |m - m^H| = {self.hermiticity_defect:.3g})"
        if self.trace_defect > TRACE_TOL:
            return f"trace differs from 1 by {self.trace_defect:.3g}"
        if self.min_eigenvalue < PSD_FLOOR:
            return f"negative eigenvalue {self.min_eigenvalue:.3g}"
        return None


def validate_density(m) -> ValidityReport:
    """Check Hermiticity, unit trace and positivity without raising."""
    arr = np.asarray(m, dtype=complex)
    if arr.shape != (4, 4) or not np.all(np.isfinite(arr)):
        nan = float("nan")
        return ValidityReport(nan, nan, nan, finite=False)
    herm = float(np.max(np.abs(arr - arr.conj().T)))
    trace = float(abs(np.trace(arr) - 1.0))
    try:
        min_eig = float(np.min(np.linalg.eigvalsh(hermitize(arr))))
    except np.linalg.LinAlgError:
        min_eig = float("-inf")
    return ValidityReport(herm, trace, min_eig)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated, read-only two-qubit density matrix."""

    m: np.ndarray

    def __post_init__(self):
        arr = np.array(as_matrix(self.m), copy=True)
        report = validate_density(arr)
        if not report.valid:
            branch = "positivity" if report.min_eigenvalue < PSD_FLOOR else (
                "hermiticity" if report.hermiticity_defect > HERMITIAN_TOL else "normalization")
            raise NonPhysicalStateError(f"not a density matrix: {report.defect()}", branch)
        arr.setflags(write=False)
        object.__setattr__(self, "m", arr)

    def __getitem__(self, index):
        return self.m[index]

    def __array__(self, dtype=None, copy=None):
        return self.m if dtype is None else self.m.astype(dtype)

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.m - np.asarray(other))) <= atol)


@dataclass(frozen=True)
class XState:
    """Two-qubit state in standard form.

    Populations ``a, b, c, d`` sit on the diagonal; ``w`` is the
    ``|++><--|`` coherence and ``z`` the ``|+-><-+|`` coherence.
    """

    a: float
    b: float
    c: float
    d: float
    w: complex = 0j
    z: complex = 0j

    def __post_init__(self):
        for name in "abcd":
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise NonPhysicalStateError(f"{name} is not finite", "finite")
            object.__setattr__(self, name, value)
        for name in "wz":
            value = complex(getattr(self, name))
            if not cmath.isfinite(value):
                raise NonPhysicalStateError(f"{name} is not finite", "finite")
            object.__setattr__(self, name, value)

        a, b, c, d = self.a, self.b, self.c, self.d
        if min(a, b, c, d) < 0:
            raise NonPhysicalStateError("populations must be non-negative", "normalization")
        if abs(a + b + c + d - 1.0) > XSTATE_TOL:
            raise NonPhysicalStateError(
                f"populations sum to {a + b + c + d!r}, not 1", "normalization")
        if abs(self.w) ** 2 > a * d + XSTATE_TOL:
            raise NonPhysicalStateError("|w|^2 exceeds a*d", "positivity")
        if abs(self.z) ** 2 > b * c + XSTATE_TOL:
            raise NonPhysicalStateError("|z|^2 exceeds b*c", "positivity")

    def replace(self, **changes) -> XState:
        fields = dict(a=self.a, b=self.b, c=self.c, d=self.d, w=self.w, z=self.z)
        fields.update(changes)
        return XState(**fields)


def x_state(a: float, b: float, c: float, d: float, w: complex = 0j, z: complex = 0j) -> XState:
    """Build a standard-form state, raising NonPhysicalStateError if invalid."""
    return XState(a, b, c, d, w, z)


def x_matrix(x: XState) -> np.ndarray:
    """Raw 4x4 array of an XState (no validation)."""
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0], m[1, 1], m[2, 2], m[3, 3] = x.a, x.b, x.c, x.d
    m[0, 3], m[3, 0] = x.w, x.w.conjugate()
    m[1, 2], m[2, 1] = x.z, x.z.conjugate()
    return m


def embed(x: XState) -> DensityMatrix:
    return DensityMatrix(x_matrix(x))


def as_x_state(rho) -> XState | None:
    """Return the XState form of ``rho`` if every non-X entry is exactly zero."""
    m = np.asarray(rho, dtype=complex)
    if np.any(m[~_X_MASK] != 0):
        return None
    return XState(m[0, 0].real, m[1, 1].real, m[2, 2].real, m[3, 3].real, m[0, 3], m[1, 2])


BellKind = Literal["phi+", "phi-", "psi+", "psi-"]


def bell_state(kind: BellKind) -> XState:
    """One of the four Bell states, e.g. ``bell_state("psi-")``."""
    key = kind.lower().replace("φ", "phi").replace("ψ", "psi")
    if key == "phi+":
        return XState(0.5, 0.0, 0.0, 0.5, w=0.5)
    if key == "phi-":
        return XState(0.5, 0.0, 0.0, 0.5, w=-0.5)
    if key == "psi+":
        return XState(0.0, 0.5, 0.5, 0.0, z=0.5)
    if key == "psi-":
        return XState(0.0, 0.5, 0.5, 0.0, z=-0.5)
    raise ValueError(f"unknown Bell state {kind!r}")


def werner_state(p: float) -> XState:
    """``p |psi-><psi-| + (1 - p) I/4``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner weight must lie in [0, 1], got {p}")
    return XState((1 - p) / 4, (1 + p) / 4, (1 + p) / 4, (1 - p) / 4, w=0j, z=-p / 2)


def random_x_state(rng: np.random.Generator) -> XState:
    """Random valid XState.

    Populations are uniform on the simplex; ``|w|`` and ``|z|`` are uniform in
    ``[0, sqrt(ad)]`` and ``[0, sqrt(bc)]`` with uniform phases.
    """
    a, b, c, d = rng.dirichlet(np.ones(4))
    w = rng.uniform(0, math.sqrt(a * d)) * cmath.exp(2j * math.pi * rng.uniform())
    z = rng.uniform(0, math.sqrt(b * c)) * cmath.exp(2j * math.pi * rng.uniform())
    return XState(a, b, c, d, w, z)


def random_density_matrix(rng: np.random.Generator, rank: int = 4) -> DensityMatrix:
    """Random full density matrix from the Ginibre ensemble."""
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    m = g @ g.conj().T
    m = hermitize(m / np.trace(m).real)
    return DensityMatrix(m)


def random_unitary2(rng: np.random.Generator) -> np.ndarray:
    """Haar-random single-qubit unitary."""
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
