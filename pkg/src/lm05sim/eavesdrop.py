"""Individual incoherent attack: closed-form predictions and a Monte Carlo oracle.

Eve attaches a fresh ancilla on each leg.  The interaction leaves the
eigenstates of the attack basis untouched and correlates them with two
ancilla states of overlap ``cos phi``::

    |b_k>|e>  ->  |b_k>|e_k>,      <e_0|e_1> = cos(phi)

The oracle simulates exactly this (qubit (x) ancilla state vectors),
lets Eve measure each ancilla with the minimum-error two-state measurement,
and guesses Alice's bit as the parity of her two leg guesses.  It shares no
code with the closed forms below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel_noise import AttackSpec, PHI_MAX
from .protocol import compose_qab
from .quantum_core import Basis, JointState, StateVector, prepare

_SQRT1_2 = 1.0 / math.sqrt(2.0)


def _check_phi(phi: float) -> None:
    if not (0.0 <= phi <= PHI_MAX):
        raise ValueError(f"attack angle {phi!r} outside [0, pi/2]")


def qber_from_angle(phi: float) -> float:
    """Conjugate-basis error rate caused by an attack with ancilla overlap cos(phi)."""
    _check_phi(phi)
    # (1 - cos phi)/2 without the cancellation at small phi
    return math.sin(0.5 * phi) ** 2


def eve_error_rate(q1: float, q2: float) -> float:
    """Eve's error on Alice's bit given the disturbed-basis partial QBERs."""
    for q in (q1, q2):
        if not (0.0 <= q <= 0.5):
            raise ValueError(f"partial QBER {q!r} outside [0, 0.5]")
    return 0.5 - 2.0 * math.sqrt(q1 * q2 * (1.0 - q1) * (1.0 - q2))


def compose_qbe(q_ab: float, q_ae: float) -> float:
    """Bob-Eve error rate: Q_AB + Q_AE - 2 Q_AB Q_AE (exact 0.5 fixed point)."""
    return 0.5 - 2.0 * (q_ab - 0.5) * (q_ae - 0.5)


def qab_per_encoding(phi_forward: float, phi_backward: float) -> tuple[float, float]:
    """Disturbed-basis round-trip QBER for encodings I and iY."""
    _check_phi(phi_forward)
    _check_phi(phi_backward)
    return (math.sin(0.5 * (phi_forward + phi_backward)) ** 2,
            math.sin(0.5 * (phi_forward - phi_backward)) ** 2)


@dataclass(frozen=True)
class EvePrediction:
    q1z: float
    q1x: float
    q2z: float
    q2x: float
    q_ae: float
    q_be_z: float
    q_be_x: float

    @property
    def qab_z(self) -> float:
        return compose_qab(self.q1z, self.q2z)

    @property
    def qab_x(self) -> float:
        return compose_qab(self.q1x, self.q2x)


def predict(attack: AttackSpec) -> EvePrediction:
    """All closed-form error rates for a given attack.

    The attack axis's own basis is undisturbed; the conjugate basis sees
    ``qber_from_angle`` on each leg.
    """
    q_f = qber_from_angle(attack.phi_forward)
    q_b = qber_from_angle(attack.phi_backward)
    if attack.axis is None:
        q1z = q1x = q2z = q2x = 0.0
        q_ae = 0.5
    elif attack.axis == Basis.Z:
        q1z, q2z, q1x, q2x = 0.0, 0.0, q_f, q_b
        q_ae = eve_error_rate(q_f, q_b)
    else:
        q1x, q2x, q1z, q2z = 0.0, 0.0, q_f, q_b
        q_ae = eve_error_rate(q_f, q_b)
    return EvePrediction(
        q1z=q1z, q1x=q1x, q2z=q2z, q2x=q2x, q_ae=q_ae,
        q_be_z=compose_qbe(compose_qab(q1z, q2z), q_ae),
        q_be_x=compose_qbe(compose_qab(q1x, q2x), q_ae),
    )


@dataclass(frozen=True)
class AncillaPair:
    e0: np.ndarray
    e1: np.ndarray

    @classmethod
    def for_angle(cls, phi: float) -> "AncillaPair":
        c, s = math.cos(0.5 * phi), math.sin(0.5 * phi)
        return cls(np.array([c, s], dtype=complex), np.array([c, -s], dtype=complex))

    @property
    def overlap(self) -> complex:
        return complex(np.vdot(self.e0, self.e1))

    def helstrom_basis(self) -> np.ndarray:
        """Rows are the projectors' vectors; row 0 signals e0.

        Eigenvectors of |e0><e0| - |e1><e1| with positive / negative eigenvalue.
        """
        gamma = np.outer(self.e0, self.e0.conj()) - np.outer(self.e1, self.e1.conj())
        _, vecs = np.linalg.eigh(gamma)
        return np.array([vecs[:, 1], vecs[:, 0]])


def helstrom_error(overlap: float) -> float:
    """Minimum error for two equiprobable pure states with the given overlap."""
    return 0.5 * (1.0 - math.sqrt(max(0.0, 1.0 - abs(overlap) ** 2)))


def _invariant_basis(axis: Basis) -> np.ndarray:
    if Basis(axis) == Basis.Z:
        return np.eye(2, dtype=complex)
    return np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex)


def _interact(qubits: np.ndarray, phi: float, axis: Basis) -> np.ndarray:
    """Batched isometry: (n, 2) qubit amplitudes -> (n, 2, 2) joint [qubit, ancilla]."""
    b = _invariant_basis(axis)  # rows: |b_0>, |b_1>
    pair = AncillaPair.for_angle(phi)
    coeff = qubits @ b.conj().T  # <b_k|psi>
    return (np.einsum("nk,kq,a->nqa", coeff[:, :1], b[:1], pair.e0)
            + np.einsum("nk,kq,a->nqa", coeff[:, 1:], b[1:], pair.e1))


def attack_interaction(s: StateVector, phi: float, axis: Basis) -> JointState:
    _check_phi(phi)
    joint = _interact(s.as_array()[None, :], phi, axis)[0]
    return JointState(tuple(complex(a) for a in joint.reshape(4)))


def _eve_measures(joint: np.ndarray, phi: float, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Measure the ancilla; returns (Eve's guesses, normalized post-measurement qubits)."""
    h = AncillaPair.for_angle(phi).helstrom_basis()
    branch0 = joint @ h[0].conj()
    branch1 = joint @ h[1].conj()
    p0 = np.sum(np.abs(branch0) ** 2, axis=1)
    guess = (u >= p0).astype(np.int8)
    post = np.where(guess[:, None] == 0, branch0, branch1)
    post /= np.linalg.norm(post, axis=1)[:, None]
    return guess, post


def eve_oracle(phi_forward: float, phi_backward: float, axis: Basis, trials: int,
               seed: Optional[int] = 0, prep_basis: Optional[Basis] = None,
               batch: int = 1 << 16) -> float:
    """Monte Carlo error rate of Eve's guess of Alice's encoding.

    Bob's preparation is uniform over the four states, or over the two
    eigenstates of ``prep_basis`` when given.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _check_phi(phi_forward)
    _check_phi(phi_backward)
    rng = np.random.default_rng(seed)
    iy = np.array([[0, 1], [-1, 0]], dtype=complex)
    bases = list(Basis) if prep_basis is None else [Basis(prep_basis)]
    states = np.array([prepare(b, k).as_array() for b in bases for k in (0, 1)])
    errors = 0
    for start in range(0, trials, batch):
        n = min(batch, trials - start)
        qubits = states[rng.integers(0, len(states), n)]
        encoding = rng.integers(0, 2, n).astype(np.int8)
        g1, qubits = _eve_measures(_interact(qubits, phi_forward, axis), phi_forward, rng.random(n))
        qubits = np.where(encoding[:, None] == 1, qubits @ iy.T, qubits)
        g2, _ = _eve_measures(_interact(qubits, phi_backward, axis), phi_backward, rng.random(n))
        errors += int(np.count_nonzero((g1 ^ g2) != encoding))
    return errors / trials
