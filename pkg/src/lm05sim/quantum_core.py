"""Exact single-qubit state algebra.

States are kept as pure two-amplitude vectors; global phase is never
tracked, so equality checks go through :func:`same_state`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-9
UNITARY_TOL = 1e-6

_SQRT1_2 = 1.0 / math.sqrt(2.0)


class Basis(enum.IntEnum):
    Z = 0
    X = 1


@dataclass(frozen=True)
class StateVector:
    a0: complex
    a1: complex

    def __post_init__(self) -> None:
        norm = abs(self.a0) ** 2 + abs(self.a1) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm!r})")

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1], dtype=complex)


@dataclass(frozen=True)
class Unitary2:
    """2x2 complex matrix, checked unitary on construction."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("Unitary2 needs a 2x2 matrix")
        residual = np.max(np.abs(m.conj().T @ m - np.eye(2)))
        if residual > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (residual {residual:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: "Unitary2") -> "Unitary2":
        return Unitary2(self.matrix @ other.matrix)


@dataclass(frozen=True)
class JointState:
    """Qubit (x) ancilla, amplitudes ordered |q a> = |00>, |01>, |10>, |11>."""

    amplitudes: tuple[complex, complex, complex, complex]

    def __post_init__(self) -> None:
        norm = sum(abs(a) ** 2 for a in self.amplitudes)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"joint state is not normalized (norm {norm!r})")

    def as_array(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=complex)


I = Unitary2(np.eye(2))
X = Unitary2(np.array([[0, 1], [1, 0]]))
Y = Unitary2(np.array([[0, -1j], [1j, 0]]))
Z = Unitary2(np.array([[1, 0], [0, -1]]))
# iY = ZX: Alice's logical-1 encoding
IY = Unitary2(np.array([[0, 1], [-1, 0]]))

PAULI = {Basis.Z: Z, Basis.X: X}


def prepare(basis: Basis, bit: int) -> StateVector:
    """Eigenstate of ``basis`` labelled by ``bit`` (|0>,|1> or |+>,|->)."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    if basis == Basis.Z:
        return StateVector(1.0 + 0j, 0j) if bit == 0 else StateVector(0j, 1.0 + 0j)
    sign = 1.0 if bit == 0 else -1.0
    return StateVector(complex(_SQRT1_2), complex(sign * _SQRT1_2))


def apply_unitary(u: Unitary2, s: StateVector) -> StateVector:
    m = u.matrix
    a0 = m[0, 0] * s.a0 + m[0, 1] * s.a1
    a1 = m[1, 0] * s.a0 + m[1, 1] * s.a1
    return StateVector(complex(a0), complex(a1))


def outcome_probability(s: StateVector, basis: Basis, bit: int) -> float:
    """Born probability of reading ``bit`` when measuring ``s`` in ``basis``."""
    if basis == Basis.Z:
        a = s.a0 if bit == 0 else s.a1
        return a.real * a.real + a.imag * a.imag
    a = s.a0 + s.a1 if bit == 0 else s.a0 - s.a1
    return 0.5 * (a.real * a.real + a.imag * a.imag)


def measure_with(s: StateVector, basis: Basis, u: float) -> tuple[int, StateVector]:
    """Projective measurement driven by a single uniform variate ``u`` in [0, 1)."""
    bit = 0 if u < outcome_probability(s, basis, 0) else 1
    return bit, prepare(basis, bit)


def measure(s: StateVector, basis: Basis, rng: np.random.Generator) -> tuple[int, StateVector]:
    return measure_with(s, basis, rng.random())


def same_state(s1: StateVector, s2: StateVector, tol: float = NORM_TOL) -> bool:
    """Equality up to global phase: |<s1|s2>| == 1."""
    overlap = s1.a0.conjugate() * s2.a0 + s1.a1.conjugate() * s2.a1
    return abs(abs(overlap) - 1.0) <= tol
