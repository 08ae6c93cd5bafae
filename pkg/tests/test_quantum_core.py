import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lm05sim.quantum_core import (
    I, IY, X, Y, Z, Basis, StateVector, Unitary2, apply_unitary, measure, measure_with,
    outcome_probability, prepare, same_state,
)
from lm05sim.channel_noise import attack_unitary

from conftest import three_sigma

R = 1 / math.sqrt(2)


@st.composite
def states(draw):
    theta = draw(st.floats(0, math.pi))
    phase = draw(st.floats(0, 2 * math.pi))
    g = draw(st.floats(0, 2 * math.pi))
    return StateVector(complex(math.cos(theta / 2)) * complex(math.cos(g), math.sin(g)),
                       complex(math.sin(theta / 2)) * complex(math.cos(phase), math.sin(phase)))


@st.composite
def unitaries(draw):
    a, b, c = (draw(st.floats(-math.pi, math.pi)) for _ in range(3))
    rz = lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    ry = np.array([[math.cos(b / 2), -math.sin(b / 2)], [math.sin(b / 2), math.cos(b / 2)]])
    return Unitary2(rz(a) @ ry @ rz(c))


class TestPrepare:
    @pytest.mark.parametrize("basis,bit,expected", [
        (Basis.Z, 0, (1, 0)),
        (Basis.Z, 1, (0, 1)),
        (Basis.X, 0, (R, R)),
        (Basis.X, 1, (R, -R)),
    ])
    def test_eigenstates(self, basis, bit, expected):
        s = prepare(basis, bit)
        assert (s.a0, s.a1) == pytest.approx(expected, abs=1e-15)

    def test_bad_bit(self):
        with pytest.raises(ValueError):
            prepare(Basis.Z, 2)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            StateVector(1, 1)


class TestUnitaries:
    def test_identity(self):
        s = prepare(Basis.X, 1)
        assert same_state(apply_unitary(I, s), s)

    def test_iy_flips_zero(self):
        assert same_state(apply_unitary(IY, prepare(Basis.Z, 0)), prepare(Basis.Z, 1))

    def test_iy_flips_plus(self):
        # ZX (1, 1)/sqrt2 = (1, -1)/sqrt2
        out = apply_unitary(IY, prepare(Basis.X, 0))
        assert (out.a0, out.a1) == pytest.approx((R, -R))
        assert same_state(out, prepare(Basis.X, 1))

    def test_iy_is_zx(self):
        assert np.allclose(IY.matrix, (Z @ X).matrix)
        assert np.allclose(IY.matrix, 1j * Y.matrix)

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            Unitary2(np.array([[1, 0], [0, 1.01]]))

    @settings(max_examples=200)
    @given(unitaries(), states())
    def test_norm_preserved(self, u, s):
        out = apply_unitary(u, s)
        assert abs(abs(out.a0) ** 2 + abs(out.a1) ** 2 - 1) < 1e-9

    @given(unitaries(), states(), states(), st.floats(-2, 2), st.floats(-2, 2))
    def test_linearity(self, u, s1, s2, a, b):
        v = a * s1.as_array() + b * s2.as_array()
        assert np.allclose(u.matrix @ v, a * apply_unitary(u, s1).as_array()
                           + b * apply_unitary(u, s2).as_array())


class TestBorn:
    def test_plus_in_z(self):
        assert outcome_probability(prepare(Basis.X, 0), Basis.Z, 0) == pytest.approx(0.5)

    def test_zero_in_z(self):
        assert outcome_probability(prepare(Basis.Z, 0), Basis.Z, 1) == 0.0

    def test_half_angle_rotation(self):
        s = apply_unitary(attack_unitary(Basis.Z, math.pi / 2), prepare(Basis.X, 0))
        assert outcome_probability(s, Basis.X, 1) == pytest.approx(math.sin(math.pi / 4) ** 2)
        assert outcome_probability(s, Basis.X, 1) == pytest.approx(0.5)

    @given(states(), st.sampled_from(list(Basis)))
    def test_completeness(self, s, basis):
        total = outcome_probability(s, basis, 0) + outcome_probability(s, basis, 1)
        assert abs(total - 1) < 1e-12

    @given(states(), st.sampled_from(list(Basis)), st.floats(0, 1, exclude_max=True))
    def test_idempotent(self, s, basis, u):
        bit, post = measure_with(s, basis, u)
        assert outcome_probability(post, basis, bit) == pytest.approx(1.0, abs=1e-12)


class TestMeasure:
    def test_deterministic_cases(self, rng):
        for _ in range(100):
            assert measure(prepare(Basis.Z, 0), Basis.Z, rng)[0] == 0
            assert measure(prepare(Basis.X, 1), Basis.X, rng)[0] == 1

    def test_plus_in_z_frequency(self, rng):
        n = 100_000
        ones = sum(measure(prepare(Basis.X, 0), Basis.Z, rng)[0] for _ in range(n))
        assert abs(ones / n - 0.5) <= three_sigma(0.5, n)

    @pytest.mark.parametrize("theta", [0.3, 1.1, 2.5])
    def test_empirical_matches_born(self, rng, theta):
        s = StateVector(complex(math.cos(theta / 2)), complex(math.sin(theta / 2)) * 1j)
        p = outcome_probability(s, Basis.X, 1)
        n = 100_000
        ones = sum(measure_with(s, Basis.X, u)[0] for u in rng.random(n))
        assert abs(ones / n - p) <= three_sigma(p, n)


def test_same_state_ignores_phase():
    s = prepare(Basis.X, 0)
    t = StateVector(1j * s.a0, 1j * s.a1)
    assert same_state(s, t)
    assert not same_state(s, prepare(Basis.X, 1))
