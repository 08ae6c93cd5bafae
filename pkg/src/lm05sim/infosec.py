"""Mutual-information curves, the one-way secrecy margin and the crossing threshold."""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.optimize import bisect

from .channel_noise import PHI_MAX, AttackSpec
from .eavesdrop import compose_qbe, eve_error_rate, qber_from_angle
from .protocol import compose_qab
from .quantum_core import Basis


class Averaging(enum.Enum):
    """How Eve's two attack axes enter the averaged information.

    ACTUAL_ATTACK: only the axis in force counts.  FIFTY_FIFTY: Eve picks the
    Z- or X-attack at random per round with the same angles, so both bases
    are disturbed half the time.
    """

    ACTUAL_ATTACK = "actual"
    FIFTY_FIFTY = "fifty-fifty"


def binary_entropy(x: float) -> float:
    """H(x) = -x log2 x - (1-x) log2(1-x), with 0 log 0 = 0."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"probability {x!r} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def _info(q: float) -> float:
    # clamp float slop just outside [0, 1]
    return 1.0 - binary_entropy(min(max(q, 0.0), 1.0))


@dataclass(frozen=True)
class InfoReport:
    i_ab: float
    i_ae: float
    i_be: float
    q_ab_s: float
    averaging_convention: Averaging

    @property
    def margin(self) -> float:
        return self.i_ab - min(self.i_ae, self.i_be)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["averaging_convention"] = self.averaging_convention.value
        d["margin"] = self.margin
        return d


def info_from_partials(q1_dist: float, q2_dist: float, q1_inv: float = 0.0, q2_inv: float = 0.0,
                       convention: Averaging = Averaging.ACTUAL_ATTACK) -> InfoReport:
    """Information curves from partial QBERs.

    ``*_dist`` are the partial QBERs of the basis the attack disturbs,
    ``*_inv`` those of the basis it leaves alone (zero for an ideal attack).
    """
    convention = Averaging(convention)
    qab_dist = compose_qab(q1_dist, q2_dist)
    qab_inv = compose_qab(q1_inv, q2_inv)
    q_ae = eve_error_rate(min(q1_dist, 0.5), min(q2_dist, 0.5))
    i_ae = _info(q_ae)
    i_be = 0.5 * (_info(compose_qbe(qab_inv, q_ae)) + _info(compose_qbe(qab_dist, q_ae)))
    if convention is Averaging.ACTUAL_ATTACK:
        i_ab = 0.5 * (_info(qab_inv) + _info(qab_dist))
    else:
        # each basis is the disturbed one half of the time
        i_ab = _info(0.5 * (qab_inv + qab_dist))
    return InfoReport(i_ab=i_ab, i_ae=i_ae, i_be=i_be,
                      q_ab_s=0.5 * (qab_inv + qab_dist), averaging_convention=convention)


def info_curves(attack: AttackSpec, convention: Averaging = Averaging.ACTUAL_ATTACK) -> InfoReport:
    if attack.axis is None:
        return info_from_partials(0.0, 0.0, convention=convention)
    return info_from_partials(qber_from_angle(attack.phi_forward),
                              qber_from_angle(attack.phi_backward),
                              convention=convention)


def symmetric_attack(phi: float, axis: Basis = Basis.Z) -> AttackSpec:
    return AttackSpec(axis, phi, phi)


@dataclass(frozen=True)
class ThresholdResult:
    convention: Averaging
    q_star: Optional[float]
    phi_star: Optional[float]
    bracket: tuple[float, float]
    gap_at_bracket: tuple[float, float]
    monotone: bool
    iterations: Optional[int]

    @property
    def crossed(self) -> bool:
        return self.q_star is not None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["convention"] = self.convention.value
        return d


def _gap(phi: float, convention: Averaging) -> float:
    r = info_curves(symmetric_attack(phi), convention)
    return r.i_ab - r.i_ae


def find_threshold(convention: Averaging = Averaging.ACTUAL_ATTACK, xtol: float = 1e-6,
                   grid: int = 257) -> ThresholdResult:
    """Q_AB^s where the Alice-Bob and Alice-Eve curves cross, symmetric Z-attack sweep."""
    convention = Averaging(convention)
    phis = np.linspace(0.0, PHI_MAX, grid)
    reports = [info_curves(symmetric_attack(p), convention) for p in phis]
    i_ab = np.array([r.i_ab for r in reports])
    i_ae = np.array([r.i_ae for r in reports])
    monotone = bool(np.all(np.diff(i_ab) < 0) and np.all(np.diff(i_ae) > 0))

    lo, hi = 0.0, PHI_MAX
    g_lo, g_hi = _gap(lo, convention), _gap(hi, convention)
    if not monotone or g_lo * g_hi > 0:
        return ThresholdResult(convention, None, None, (lo, hi), (g_lo, g_hi), monotone, None)
    phi_star, info = bisect(_gap, lo, hi, args=(convention,), xtol=xtol, full_output=True)
    q_star = info_curves(symmetric_attack(phi_star), convention).q_ab_s
    return ThresholdResult(convention, q_star, phi_star, (lo, hi), (g_lo, g_hi), monotone,
                           info.iterations)


def curve_table(phis, convention: Averaging = Averaging.ACTUAL_ATTACK, axis: Basis = Basis.Z):
    """Rows (phi, q_ab_s, i_ab, i_ae, i_be, margin) for symmetric attacks."""
    rows = []
    for phi in phis:
        r = info_curves(symmetric_attack(float(phi), axis), convention)
        rows.append((float(phi), r.q_ab_s, r.i_ab, r.i_ae, r.i_be, r.margin))
    return rows
