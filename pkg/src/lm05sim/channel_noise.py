"""Channel model: simulated eavesdropping rotations plus setup imperfections.

Each leg of the round trip applies, in this order:

1. the attack rotation ``cos(phi/2) I + i sin(phi/2) P`` about the attack axis,
2. an X kick with probability ``delta/2`` and an independent Y kick with
   probability ``delta/2``,
3. a polarization flip (Y, which flips the label of all four preparation
   states alike) with the leg's baseline misalignment probability.

Background counts (``xi``) act at the detectors only, see :func:`detector_readout`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .quantum_core import PAULI, X, Y, Basis, StateVector, Unitary2, apply_unitary

PHI_MAX = math.pi / 2
_ANGLE_SLOP = 1e-12


class Leg(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class XiScope(enum.Enum):
    """Which detections suffer background noise.

    ``ENCODING``: only Bob's read-out of encoding-mode rounds (the round-trip
    coincidences used for Q_AB).  ``ALL``: Alice's control-mode detector and
    every read-out by Bob.
    """

    ENCODING = "encoding"
    ALL = "all"


def _check_angle(phi: float) -> float:
    if not (-_ANGLE_SLOP <= phi <= PHI_MAX + _ANGLE_SLOP) or math.isnan(phi):
        raise ValueError(f"attack angle {phi!r} outside [0, pi/2]")
    return min(max(phi, 0.0), PHI_MAX)


def _check_prob(name: str, p: float, upper: float = 1.0) -> None:
    if not (0.0 <= p <= upper):
        raise ValueError(f"{name} = {p!r} outside [0, {upper}]")


@dataclass(frozen=True)
class AttackSpec:
    """Eve's interaction: ``axis`` is the basis left undisturbed (None = no Eve)."""

    axis: Optional[Basis] = None
    phi_forward: float = 0.0
    phi_backward: float = 0.0

    def __post_init__(self) -> None:
        if self.axis is not None:
            object.__setattr__(self, "axis", Basis(self.axis))
        object.__setattr__(self, "phi_forward", _check_angle(float(self.phi_forward)))
        object.__setattr__(self, "phi_backward", _check_angle(float(self.phi_backward)))

    def angle(self, leg: Leg) -> float:
        return self.phi_forward if leg is Leg.FORWARD else self.phi_backward


@dataclass(frozen=True)
class NoiseModel:
    attack: AttackSpec = field(default_factory=AttackSpec)
    delta: float = 0.0
    xi: float = 0.0
    baseline_flip_forward: float = 0.0
    baseline_flip_backward: float = 0.0
    xi_scope: XiScope = XiScope.ENCODING

    def __post_init__(self) -> None:
        _check_prob("delta", self.delta)
        _check_prob("xi", self.xi)
        _check_prob("baseline_flip_forward", self.baseline_flip_forward, 0.5)
        _check_prob("baseline_flip_backward", self.baseline_flip_backward, 0.5)
        object.__setattr__(self, "xi_scope", XiScope(self.xi_scope))

    def baseline_flip(self, leg: Leg) -> float:
        if leg is Leg.FORWARD:
            return self.baseline_flip_forward
        return self.baseline_flip_backward


def attack_unitary(axis: Basis, phi: float) -> Unitary2:
    """Rotation reproducing the attack's disturbance for ancilla-overlap angle ``phi``.

    The half angle is applied internally, so conjugate-basis eigenstates flip
    with probability ``(1 - cos phi) / 2``.
    """
    if not (0.0 <= phi <= PHI_MAX):
        raise ValueError(f"attack angle {phi!r} outside [0, pi/2]")
    half = 0.5 * phi
    pauli = PAULI[Basis(axis)].matrix
    return Unitary2(math.cos(half) * np.eye(2) + 1j * math.sin(half) * pauli)


def apply_leg_with(s: StateVector, m: NoiseModel, leg: Leg, u: Sequence[float]) -> StateVector:
    """Deterministic leg map; ``u`` holds three uniforms (X kick, Y kick, baseline flip)."""
    axis = m.attack.axis
    if axis is not None:
        s = apply_unitary(attack_unitary(axis, m.attack.angle(leg)), s)
    kick = 0.5 * m.delta
    if u[0] < kick:
        s = apply_unitary(X, s)
    if u[1] < kick:
        s = apply_unitary(Y, s)
    if u[2] < m.baseline_flip(leg):
        s = apply_unitary(Y, s)
    return s


def apply_leg(s: StateVector, m: NoiseModel, leg: Leg, rng: np.random.Generator) -> StateVector:
    return apply_leg_with(s, m, leg, rng.random(3))


def readout_with(true_bit: int, xi: float, u_replace: float, u_coin: float) -> int:
    if u_replace < xi:
        return int(u_coin >= 0.5)
    return true_bit


def detector_readout(true_bit: int, xi: float, rng: np.random.Generator) -> int:
    """With probability ``xi`` the click is background: the bit becomes a fair coin."""
    _check_prob("xi", xi)
    u = rng.random(2)
    return readout_with(true_bit, xi, u[0], u[1])
