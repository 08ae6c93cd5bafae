import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lm05sim.channel_noise import AttackSpec
from lm05sim.eavesdrop import (
    AncillaPair, attack_interaction, compose_qbe, eve_error_rate, eve_oracle, helstrom_error,
    predict, qab_per_encoding, qber_from_angle,
)
from lm05sim.protocol import compose_qab
from lm05sim.quantum_core import Basis, StateVector, prepare

from conftest import three_sigma

angles = st.floats(0, math.pi / 2)
partials = st.floats(0, 0.5)


class TestClosedForms:
    @pytest.mark.parametrize("phi,q", [(0, 0), (math.pi / 2, 0.5), (math.pi / 3, 0.25)])
    def test_qber_from_angle(self, phi, q):
        assert qber_from_angle(phi) == pytest.approx(q, abs=1e-15)

    def test_qber_domain(self):
        with pytest.raises(ValueError):
            qber_from_angle(2.0)

    @pytest.mark.parametrize("q1,q2,expected", [(0, 0, 0.5), (0.5, 0.5, 0.0), (0.25, 0.25, 0.125)])
    def test_eve_error_rate(self, q1, q2, expected):
        assert eve_error_rate(q1, q2) == pytest.approx(expected, abs=1e-15)

    def test_eve_error_rate_domain(self):
        with pytest.raises(ValueError):
            eve_error_rate(0.6, 0.1)

    @given(partials, partials, partials)
    def test_eve_error_rate_monotone(self, a, b, other):
        lo, hi = sorted((a, b))
        assert eve_error_rate(hi, other) <= eve_error_rate(lo, other) + 1e-15
        assert eve_error_rate(other, hi) <= eve_error_rate(other, lo) + 1e-15

    @given(angles, angles)
    def test_eve_error_is_helstrom_parity(self, a, b):
        # (1 - s1 s2)/2 with s = 2 sqrt(q(1-q)) = sin(phi)
        assert eve_error_rate(qber_from_angle(a), qber_from_angle(b)) == pytest.approx(
            (1 - math.sin(a) * math.sin(b)) / 2, abs=1e-12)

    @given(st.floats(0, 1))
    def test_compose_qbe_identities(self, q):
        assert compose_qbe(0, q) == pytest.approx(q, abs=1e-15)
        assert compose_qbe(0.5, q) == 0.5

    def test_compose_qbe_example(self):
        assert compose_qbe(0.26, 0.125) == pytest.approx(0.32)

    @given(angles, angles)
    def test_encoding_average_identity(self, a, b):
        q_i, q_iy = qab_per_encoding(a, b)
        mean = (q_i + q_iy) / 2
        assert mean == pytest.approx((1 - math.cos(a) * math.cos(b)) / 2, abs=1e-15)
        assert mean == pytest.approx(compose_qab(qber_from_angle(a), qber_from_angle(b)), abs=1e-15)

    @given(angles, angles)
    def test_axis_symmetry(self, a, b):
        z = predict(AttackSpec(Basis.Z, a, b))
        x = predict(AttackSpec(Basis.X, a, b))
        assert (z.q1z, z.q1x, z.q2z, z.q2x) == (x.q1x, x.q1z, x.q2x, x.q2z)
        assert z.q_ae == x.q_ae
        assert (z.q_be_z, z.q_be_x) == (x.q_be_x, x.q_be_z)

    def test_no_eavesdropper(self):
        p = predict(AttackSpec())
        assert p.q_ae == 0.5 and p.q_be_z == 0.5 and p.qab_x == 0

    @given(angles, angles)
    def test_prediction_ranges(self, a, b):
        p = predict(AttackSpec(Basis.Z, a, b))
        for v in (p.q1z, p.q1x, p.q2z, p.q2x, p.q_be_z, p.q_be_x):
            assert 0 <= v <= 1
        assert -1e-15 <= p.q_ae <= 0.5


def _reduced_flip(joint, basis, bit):
    """Probability that the qubit of a joint state reads 1 - bit in ``basis``."""
    amp = joint.as_array().reshape(2, 2)  # [qubit, ancilla]
    if basis == Basis.X:
        h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
        amp = h @ amp
    return float(np.sum(np.abs(amp[1 - bit]) ** 2))


class TestInteraction:
    @given(angles)
    def test_ancilla_overlap(self, phi):
        pair = AncillaPair.for_angle(phi)
        assert pair.overlap.real == pytest.approx(math.cos(phi), abs=1e-12)
        assert abs(pair.overlap.imag) < 1e-15
        assert np.linalg.norm(pair.e0) == pytest.approx(1.0)

    @given(angles)
    def test_invariant_state_is_product(self, phi):
        joint = attack_interaction(prepare(Basis.Z, 0), phi, Basis.Z).as_array()
        expected = np.kron([1, 0], AncillaPair.for_angle(phi).e0)
        assert np.allclose(joint, expected, atol=1e-12)

    @given(angles, st.sampled_from(list(Basis)), st.integers(0, 1))
    def test_conjugate_disturbance(self, phi, axis, bit):
        conj = Basis.X if axis == Basis.Z else Basis.Z
        joint = attack_interaction(prepare(conj, bit), phi, axis)
        assert _reduced_flip(joint, conj, bit) == pytest.approx((1 - math.cos(phi)) / 2, abs=1e-12)
        joint = attack_interaction(prepare(axis, bit), phi, axis)
        assert _reduced_flip(joint, axis, bit) == pytest.approx(0, abs=1e-12)

    @given(angles, st.sampled_from(list(Basis)), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
    def test_isometry(self, phi, axis, theta, lam):
        s = StateVector(complex(math.cos(theta / 2)),
                        complex(math.sin(theta / 2)) * complex(math.cos(lam), math.sin(lam)))
        joint = attack_interaction(s, phi, axis).as_array()
        assert abs(np.linalg.norm(joint) - 1) < 1e-9

    @given(angles)
    def test_helstrom_measurement(self, phi):
        pair = AncillaPair.for_angle(phi)
        h = pair.helstrom_basis()
        err = 0.5 * (abs(np.vdot(h[1], pair.e0)) ** 2 + abs(np.vdot(h[0], pair.e1)) ** 2)
        assert err == pytest.approx((1 - math.sin(phi)) / 2, abs=1e-12)
        # sqrt(1 - cos^2) cancels at small phi
        assert err == pytest.approx(helstrom_error(math.cos(phi)), abs=1e-8)


class TestOracle:
    def test_no_information(self):
        n = 100_000
        assert abs(eve_oracle(0, 0, Basis.Z, n, seed=1) - 0.5) <= three_sigma(0.5, n)

    @pytest.mark.parametrize("axis", list(Basis))
    def test_perfect_information(self, axis):
        assert eve_oracle(math.pi / 2, math.pi / 2, axis, 10_000, seed=2) == 0.0

    def test_symmetric_example(self):
        n = 1_000_000
        p = eve_error_rate(0.25, 0.25)
        assert abs(eve_oracle(math.pi / 3, math.pi / 3, Basis.Z, n, seed=1016) - p) <= three_sigma(p, n)

    @pytest.mark.parametrize("prep", list(Basis))
    @pytest.mark.parametrize("axis", list(Basis))
    def test_independent_of_preparation_basis(self, prep, axis):
        n = 100_000
        a, b = 0.4, 1.2
        p = eve_error_rate(qber_from_angle(a), qber_from_angle(b))
        assert abs(eve_oracle(a, b, axis, n, seed=4, prep_basis=prep) - p) <= three_sigma(p, n)

    def test_seeded(self):
        assert eve_oracle(0.5, 0.9, Basis.X, 5000, seed=7) == eve_oracle(0.5, 0.9, Basis.X, 5000, seed=7)

    def test_trials_validated(self):
        with pytest.raises(ValueError):
            eve_oracle(0, 0, Basis.Z, 0)
