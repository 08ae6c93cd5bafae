"""NumPy implementation of the round kernel (fallback when the extension is absent).

Mirrors ``_kernels.pyx`` operation for operation so both produce identical
records from identical uniforms.
"""
from __future__ import annotations

import math

import numpy as np

from . import _layout as L

_SQRT1_2 = 1.0 / math.sqrt(2.0)


def _prep(basis: np.ndarray, bit: np.ndarray) -> list[np.ndarray]:
    z = basis == 0
    one = bit == 1
    a0r = np.where(z, np.where(one, 0.0, 1.0), _SQRT1_2)
    a1r = np.where(z, np.where(one, 1.0, 0.0), np.where(one, -_SQRT1_2, _SQRT1_2))
    zeros = np.zeros_like(a0r)
    return [a0r, zeros, a1r, zeros.copy()]


def _prob0(q: list[np.ndarray], basis: np.ndarray) -> np.ndarray:
    a0r, a0i, a1r, a1i = q
    pz = a0r * a0r + a0i * a0i
    sr = a0r + a1r
    si = a0i + a1i
    px = 0.5 * (sr * sr + si * si)
    return np.where(basis == 0, pz, px)


def _where(mask: np.ndarray, new: list[np.ndarray], old: list[np.ndarray]) -> list[np.ndarray]:
    return [np.where(mask, n, o) for n, o in zip(new, old)]


def _x(q):
    a0r, a0i, a1r, a1i = q
    return [a1r, a1i, a0r, a0i]


def _y(q):
    a0r, a0i, a1r, a1i = q
    return [a1i, -a1r, -a0i, a0r]


def _iy(q):
    a0r, a0i, a1r, a1i = q
    return [a1r, a1i, -a0r, -a0i]


def _attack(q, axis: int, c: float, s: float):
    a0r, a0i, a1r, a1i = q
    if axis == 1:
        return [c * a0r - s * a0i, c * a0i + s * a0r, c * a1r + s * a1i, c * a1i - s * a1r]
    return [c * a0r - s * a1i, c * a0i + s * a1r, c * a1r - s * a0i, c * a1i + s * a0r]


def _leg(q, u: np.ndarray, axis: int, phi: float, kick: float, flip: float):
    if axis != 0:
        q = _attack(q, axis, math.cos(0.5 * phi), math.sin(0.5 * phi))
    q = _where(u[:, 0] < kick, _x(q), q)
    q = _where(u[:, 1] < kick, _y(q), q)
    q = _where(u[:, 2] < flip, _y(q), q)
    return q


def _readout(bit: np.ndarray, xi: float, u: np.ndarray) -> np.ndarray:
    return np.where(u[:, 0] < xi, (u[:, 1] >= 0.5).astype(np.int8), bit)


def simulate_rounds(u: np.ndarray, params: np.ndarray) -> np.ndarray:
    u = np.ascontiguousarray(u, dtype=np.float64)
    params = np.asarray(params, dtype=np.float64)
    if u.ndim != 2 or u.shape[1] != L.N_UNIFORMS:
        raise ValueError("expected 16 uniforms per round")
    if params.shape != (L.N_PARAMS,):
        raise ValueError("expected 9 kernel parameters")
    n = u.shape[0]
    axis = int(params[L.P_AXIS])
    kick = 0.5 * params[L.P_DELTA]
    xi = params[L.P_XI]
    xi_all = params[L.P_XI_ALL] != 0.0

    pb = (u[:, L.U_PREP_BASIS] >= 0.5).astype(np.int8)
    bit = (u[:, L.U_PREP_BIT] >= 0.5).astype(np.int8)
    q = _prep(pb, bit)
    q = _leg(q, u[:, L.U_FWD:L.U_FWD + 3], axis, params[L.P_PHI_F], kick, params[L.P_FLIP_F])

    cm = u[:, L.U_MODE] < params[L.P_CONTROL]
    choice = (u[:, L.U_ALICE_CHOICE] >= 0.5).astype(np.int8)
    # control mode: measure in Alice's basis, then re-prepare the recorded outcome
    outcome = (u[:, L.U_ALICE_MEAS] >= _prob0(q, choice)).astype(np.int8)
    if xi_all:
        outcome = _readout(outcome, xi, u[:, L.U_ALICE_READOUT:L.U_ALICE_READOUT + 2])
    q_cm = _prep(choice, outcome)
    # encoding mode: iY for logical 1
    q_em = _where(choice == 1, _iy(q), q)
    q = _where(cm, q_cm, q_em)

    q = _leg(q, u[:, L.U_BWD:L.U_BWD + 3], axis, params[L.P_PHI_B], kick, params[L.P_FLIP_B])
    bob = (u[:, L.U_BOB_MEAS] >= _prob0(q, pb)).astype(np.int8)
    noisy = _readout(bob, xi, u[:, L.U_BOB_READOUT:L.U_BOB_READOUT + 2])
    bob = noisy if xi_all else np.where(cm, bob, noisy)

    out = np.empty((n, L.N_COLUMNS), dtype=np.int8)
    out[:, L.C_PREP_BASIS] = pb
    out[:, L.C_PREP_BIT] = bit
    out[:, L.C_MODE] = np.where(cm, 0, 1)
    out[:, L.C_ALICE_BASIS] = np.where(cm, choice, -1)
    out[:, L.C_ALICE_OUTCOME] = np.where(cm, outcome, -1)
    out[:, L.C_ENCODING] = np.where(cm, -1, choice)
    out[:, L.C_BOB_OUTCOME] = bob
    return out


def tally(records: np.ndarray) -> np.ndarray:
    """Per preparation basis: [sifted CM, q1 errors, q2 errors, EM, decode errors]."""
    r = np.asarray(records)
    if r.ndim != 2 or r.shape[1] != L.N_COLUMNS:
        raise ValueError("records must have shape (n, 7)")
    pb = r[:, L.C_PREP_BASIS]
    bit = r[:, L.C_PREP_BIT]
    bob = r[:, L.C_BOB_OUTCOME]
    ao = r[:, L.C_ALICE_OUTCOME]
    cm = r[:, L.C_MODE] == 0
    sifted = cm & (r[:, L.C_ALICE_BASIS] == pb)
    em = ~cm
    decode_err = (bob ^ bit) != r[:, L.C_ENCODING]
    counts = np.zeros((2, 5), dtype=np.int64)
    for b in (0, 1):
        s = sifted & (pb == b)
        e = em & (pb == b)
        counts[b] = (
            np.count_nonzero(s),
            np.count_nonzero(s & (ao != bit)),
            np.count_nonzero(s & (bob != ao)),
            np.count_nonzero(e),
            np.count_nonzero(e & decode_err),
        )
    return counts
