"""Kraus operators and exact evolution under global and local dephasing.

All Kraus operators here are real and diagonal, so the operator-sum form
``sum_k K^H rho K`` and the conventional ``sum_k K rho K^H`` coincide.
``apply_channel`` implements the conventional one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from esdlab.qmat import DensityMatrix, XState, as_matrix, hermitize

COMPLETENESS_TOL = 1e-12

# Bit of qubit A / qubit B for each basis index |++>, |+->, |-+>, |-->.
_BIT_A = np.array([0, 0, 1, 1])
_BIT_B = np.array([0, 1, 0, 1])

Model = Literal["global", "local"]


def _check_nonneg(**values: float) -> None:
    for name, value in values.items():
        if not (value >= 0 and math.isfinite(value)):
            raise ValueError(f"{name} must be a finite non-negative number, got {value!r}")


@dataclass(frozen=True)
class DephasingRates:
    """Dephasing rates of either noise model.

    Use ``DephasingRates.global_(gamma)`` or ``DephasingRates.local(gamma_a, gamma_b)``.
    A zero rate means no dephasing and an infinite T2.
    """

    model: Model
    gamma: float = 0.0
    gamma_a: float = 0.0
    gamma_b: float = 0.0

    def __post_init__(self):
        if self.model not in ("global", "local"):
            raise ValueError(f"unknown noise model {self.model!r}")
        _check_nonneg(gamma=self.gamma, gamma_a=self.gamma_a, gamma_b=self.gamma_b)
        if self.model == "global" and (self.gamma_a or self.gamma_b):
            raise ValueError("global model takes a single rate")
        if self.model == "local" and self.gamma:
            raise ValueError("local model takes gamma_a and gamma_b")

    @classmethod
    def global_(cls, gamma: float) -> DephasingRates:
        return cls("global", gamma=gamma)

    @classmethod
    def local(cls, gamma_a: float, gamma_b: float) -> DephasingRates:
        return cls("local", gamma_a=gamma_a, gamma_b=gamma_b)

    @staticmethod
    def _t2(rate: float) -> float:
        return math.inf if rate == 0 else 1.0 / rate

    @property
    def t2(self) -> float:
        return self._t2(self.gamma)

    @property
    def t2_a(self) -> float:
        return self._t2(self.gamma_a)

    @property
    def t2_b(self) -> float:
        return self._t2(self.gamma_b)

    @property
    def reference_rate(self) -> float:
        """Rate used to make times dimensionless: gamma, or max(gamma_a, gamma_b)."""
        return self.gamma if self.model == "global" else max(self.gamma_a, self.gamma_b)

    def kraus(self, t: float) -> KrausSet:
        if self.model == "global":
            return global_kraus(t, self.gamma)
        return local_kraus(t, self.gamma_a, self.gamma_b)


@dataclass(frozen=True)
class GlobalKrausParameters:
    gamma: float
    omega1: float
    omega2: float
    omega3: float


@dataclass(frozen=True)
class LocalKrausParameters:
    gamma_a: float
    gamma_b: float
    omega_a: float
    omega_b: float


def global_parameters(t: float, gamma: float) -> GlobalKrausParameters:
    _check_nonneg(t=t, gamma=gamma)
    decay = math.exp(-gamma * t)
    omega1 = math.sqrt(-math.expm1(-gamma * t))
    return GlobalKrausParameters(
        gamma=math.exp(-gamma * t / 2),
        omega1=omega1,
        omega2=-omega1 * decay,
        omega3=omega1 ** 2 * math.sqrt(1 + decay),
    )


def _single_qubit_parameters(t: float, rate: float) -> tuple[float, float]:
    return math.exp(-rate * t / 2), math.sqrt(-math.expm1(-rate * t))


def local_parameters(t: float, gamma_a: float, gamma_b: float) -> LocalKrausParameters:
    _check_nonneg(t=t, gamma_a=gamma_a, gamma_b=gamma_b)
    g_a, w_a = _single_qubit_parameters(t, gamma_a)
    g_b, w_b = _single_qubit_parameters(t, gamma_b)
    return LocalKrausParameters(g_a, g_b, w_a, w_b)


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Ordered Kraus operators of a channel at time ``t``."""

    ops: tuple[np.ndarray, ...]
    model: str = "custom"
    t: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.ops)
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "ops", ops)

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def completeness_defect(self) -> float:
        """Max elementwise deviation of ``sum K^H K`` from the identity."""
        total = sum(k.conj().T @ k for k in self.ops)
        return float(np.max(np.abs(total - np.eye(4))))


def global_kraus(t: float, gamma: float) -> KrausSet:
    """The three Kraus operators of collective dephasing at time ``t``."""
    p = global_parameters(t, gamma)
    ops = (
        np.diag([p.gamma, 1.0, 1.0, p.gamma]),
        np.diag([p.omega1, 0.0, 0.0, p.omega2]),
        np.diag([0.0, 0.0, 0.0, p.omega3]),
    )
    return KrausSet(ops, "global", t, {"parameters": p})


def single_qubit_factors(t: float, rate: float) -> tuple[np.ndarray, np.ndarray]:
    """The two 2x2 dephasing Kraus factors ``diag(1, g)`` and ``diag(0, w)``."""
    g, w = _single_qubit_parameters(t, rate)
    return np.diag([1.0, g]).astype(complex), np.diag([0.0, w]).astype(complex)


def local_kraus(t: float, gamma_a: float, gamma_b: float) -> KrausSet:
    """The four composite Kraus operators ``E_mu F_nu`` of independent dephasing.

    Order: E1F1, E1F2, E2F1, E2F2, with E acting on qubit A and F on qubit B.
    """
    p = local_parameters(t, gamma_a, gamma_b)
    e1, e2 = single_qubit_factors(t, gamma_a)
    f1, f2 = single_qubit_factors(t, gamma_b)
    eye = np.eye(2)
    es = (np.kron(e1, eye), np.kron(e2, eye))
    fs = (np.kron(eye, f1), np.kron(eye, f2))
    ops = tuple(e @ f for e in es for f in fs)
    return KrausSet(ops, "local", t, {"parameters": p})


def apply_channel(k: KrausSet, rho) -> DensityMatrix:
    """Operator-sum evolution ``sum K rho K^H``.

    Raises ValueError when the Kraus set is not trace preserving to 1e-12.
    """
    defect = k.completeness_defect()
    if defect > COMPLETENESS_TOL:
        raise ValueError(f"Kraus set is not complete (defect {defect:.3g})")
    m = np.asarray(rho, dtype=complex)
    out = sum(op @ m @ op.conj().T for op in k.ops)
    return DensityMatrix(hermitize(out))


def global_decay(t: float, gamma: float) -> float:
    """Decay factor of the ``|++><--|`` coherence under collective noise."""
    _check_nonneg(t=t, gamma=gamma)
    return math.exp(-2 * gamma * t)


def evolve_global_closed_form(x: XState, t: float, gamma: float) -> XState:
    """Collective dephasing of a standard-form state.

    Only ``w`` decays, by ``exp(-2 gamma t)``; ``z`` lives in a
    decoherence-free subspace and is left untouched.
    """
    return x.replace(w=global_decay(t, gamma) * x.w)


def local_factor_matrix(t: float, gamma_a: float, gamma_b: float) -> np.ndarray:
    """Elementwise multiplier of rho under independent dephasing."""
    p = local_parameters(t, gamma_a, gamma_b)
    flip_a = _BIT_A[:, None] != _BIT_A[None, :]
    flip_b = _BIT_B[:, None] != _BIT_B[None, :]
    return np.where(flip_a, p.gamma_a, 1.0) * np.where(flip_b, p.gamma_b, 1.0)


def evolve_local_closed_form(rho, t: float, gamma_a: float, gamma_b: float) -> DensityMatrix:
    """Independent dephasing of an arbitrary two-qubit state.

    Populations are unchanged, coherences flipping one qubit pick up that
    qubit's ``exp(-gamma t / 2)`` and ``rho14``, ``rho23`` pick up both.
    """
    m = np.asarray(rho, dtype=complex)
    return DensityMatrix(m * local_factor_matrix(t, gamma_a, gamma_b))


def evolve_local_x_state(x: XState, t: float, gamma_a: float, gamma_b: float) -> XState:
    """Closed form of independent dephasing restricted to standard-form states."""
    _check_nonneg(t=t, gamma_a=gamma_a, gamma_b=gamma_b)
    decay = math.exp(-(gamma_a + gamma_b) * t / 2)
    return x.replace(w=decay * x.w, z=decay * x.z)


def evolve_x_state(x: XState, t: float, rates: DephasingRates) -> XState:
    if rates.model == "global":
        return evolve_global_closed_form(x, t, rates.gamma)
    return evolve_local_x_state(x, t, rates.gamma_a, rates.gamma_b)


def evolve(rho, t: float, rates: DephasingRates) -> DensityMatrix:
    """Exact evolution of any density matrix under either model."""
    if rates.model == "local":
        return evolve_local_closed_form(rho, t, rates.gamma_a, rates.gamma_b)
    return apply_channel(rates.kraus(t), rho)
