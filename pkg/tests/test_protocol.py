import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lm05sim.channel_noise import AttackSpec, NoiseModel, XiScope
from lm05sim.protocol import (
    Mode, QberReport, Rate, RoundRecord, SessionConfig, SessionLog, compose_qab,
    round_from_uniforms, run_round, run_session, sift_and_estimate,
)
from lm05sim.quantum_core import Basis
from lm05sim import _layout as L

from conftest import three_sigma

rates = st.floats(0, 1)


def uniforms(**slots):
    u = np.full(L.N_UNIFORMS, 0.99)
    for name, value in slots.items():
        u[getattr(L, name)] = value
    return u


class TestComposeQab:
    def test_examples(self):
        assert compose_qab(0, 0) == 0
        assert compose_qab(0.1, 0.2) == pytest.approx(0.26)

    @given(rates)
    def test_saturation(self, q):
        assert compose_qab(0.5, q) == 0.5
        assert compose_qab(q, 0.5) == 0.5

    @given(rates, rates)
    def test_symmetric(self, a, b):
        assert compose_qab(a, b) == compose_qab(b, a)


class TestRunRound:
    def test_noiseless_em_flip(self):
        # prep (Z, 0), EM, encoding 1
        u = uniforms(U_PREP_BASIS=0.1, U_PREP_BIT=0.1, U_MODE=0.9, U_ALICE_CHOICE=0.7)
        rec = round_from_uniforms(u, NoiseModel(), 0.5)
        assert rec.mode is Mode.EM and rec.encoding == 1
        assert rec.bob_outcome == 1

    def test_noiseless_cm_match(self):
        u = uniforms(U_PREP_BASIS=0.7, U_PREP_BIT=0.1, U_MODE=0.1, U_ALICE_CHOICE=0.7)
        rec = round_from_uniforms(u, NoiseModel(), 0.5)
        assert rec.mode is Mode.CM and rec.alice_cm_basis == Basis.X
        assert rec.alice_cm_outcome == 0 and rec.bob_outcome == 0

    def test_record_invariants(self, rng):
        cfg = SessionConfig(10)
        noise = NoiseModel(AttackSpec(Basis.Z, 1, 1), delta=0.3, xi=0.3)
        for _ in range(500):
            rec = run_round(cfg, noise, rng)
            if rec.mode is Mode.CM:
                assert rec.encoding is None and rec.alice_cm_basis is not None
            else:
                assert rec.alice_cm_basis is None and rec.alice_cm_outcome is None

    def test_inconsistent_record_rejected(self):
        with pytest.raises(ValueError):
            RoundRecord(Basis.Z, 0, Mode.CM, None, None, 1, 0)

    def test_full_disturbance_in_cm(self):
        cfg = SessionConfig(100_000, seed=5)
        log = run_session(cfg, NoiseModel(AttackSpec(Basis.Z, math.pi / 2, 0)))
        r = log.records
        m = (r[:, L.C_MODE] == 0) & (r[:, L.C_PREP_BASIS] == 1) & (r[:, L.C_ALICE_BASIS] == 1)
        freq = np.mean(r[m, L.C_ALICE_OUTCOME] != r[m, L.C_PREP_BIT])
        assert abs(freq - 0.5) <= three_sigma(0.5, int(m.sum()))


class TestSession:
    def test_config_validation(self):
        for bad in ({"n_rounds": 0}, {"n_rounds": 10, "control_prob": 1.0},
                    {"n_rounds": 10, "seed": -1}):
            with pytest.raises(ValueError):
                SessionConfig(**bad)

    def test_deterministic(self):
        cfg = SessionConfig(1000, seed=1234)
        noise = NoiseModel(AttackSpec(Basis.X, 0.5, 0.9), delta=0.1, xi=0.1)
        assert run_session(cfg, noise) == run_session(cfg, noise)
        assert run_session(cfg, noise) != run_session(SessionConfig(1000, seed=1235), noise)

    def test_control_fraction(self):
        n = 100_000
        log = run_session(SessionConfig(n, control_prob=0.5, seed=2), NoiseModel())
        frac = np.mean(log.column(L.C_MODE) == 0)
        assert abs(frac - 0.5) <= three_sigma(0.5, n)

    def test_noiseless_session_is_error_free(self):
        log = run_session(SessionConfig(20_000, seed=3), NoiseModel())
        for rec in log:
            if rec.mode is Mode.EM:
                assert rec.bob_outcome ^ rec.prep_bit == rec.encoding
            elif rec.alice_cm_basis == rec.prep_basis:
                assert rec.alice_cm_outcome == rec.prep_bit == rec.bob_outcome

    def test_csv_round_trip(self):
        log = run_session(SessionConfig(300, seed=9), NoiseModel(xi=0.2))
        buf = io.StringIO()
        log.write_csv(buf)
        text = buf.getvalue()
        assert text.splitlines()[0] == "round,prep_basis,prep_bit,mode,alice_basis,alice_outcome,encoding,bob_outcome"
        assert "\r" not in text
        buf.seek(0)
        assert SessionLog.read_csv(buf) == log


class TestEstimate:
    def test_noiseless_rates_zero(self):
        rep = sift_and_estimate(run_session(SessionConfig(10_000, seed=1), NoiseModel()))
        for name in ("q1z", "q1x", "q2z", "q2x", "qab_z", "qab_x"):
            assert getattr(rep, name).value == 0
        assert rep.qab_m == 0 and rep.qab_s == 0

    def test_empty_strata_are_absent(self):
        rec = RoundRecord(Basis.Z, 0, Mode.EM, None, None, 1, 1)
        rep = sift_and_estimate(SessionLog.from_records([rec]))
        assert rep.qab_z == Rate(0, 1)
        assert rep.q1z is None and rep.qab_x is None
        assert rep.qab_m is None and rep.qab_s is None

    def test_empty_log_rejected(self):
        with pytest.raises(ValueError):
            sift_and_estimate(SessionLog(np.zeros((0, 7), dtype=np.int8)))

    def test_mismatched_cm_rounds_excluded(self):
        recs = [RoundRecord(Basis.Z, 0, Mode.CM, Basis.X, 1, None, 1),
                RoundRecord(Basis.Z, 0, Mode.CM, Basis.Z, 1, None, 0)]
        rep = sift_and_estimate(SessionLog.from_records(recs))
        assert rep.q1z == Rate(1, 1)
        assert rep.q2z == Rate(1, 1)

    def test_rate_statistics(self):
        r = Rate(25, 100)
        assert r.value == 0.25
        assert r.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
        assert not r.low_confidence and Rate(1, 99).low_confidence

    def test_z_attack_example(self):
        # q1x = (1 - cos pi/3)/2 = 0.25, Q_ABx = (1 - cos^2 pi/3)/2 = 0.375
        phi = math.pi / 3
        rep = sift_and_estimate(run_session(SessionConfig(100_000, seed=77),
                                            NoiseModel(AttackSpec(Basis.Z, phi, phi))))
        assert rep.q1z.value == 0 and rep.qab_z.value == 0
        assert abs(rep.q1x.value - 0.25) <= three_sigma(0.25, rep.q1x.trials)
        assert abs(rep.qab_x.value - 0.375) <= three_sigma(0.375, rep.qab_x.trials)

    def test_baseline_flips(self):
        rep = sift_and_estimate(run_session(
            SessionConfig(100_000, seed=2005),
            NoiseModel(baseline_flip_forward=0.0205, baseline_flip_backward=0.0205)))
        expected = compose_qab(0.0205, 0.0205)
        n = rep.qab_z.trials + rep.qab_x.trials
        assert abs(rep.qab_m - expected) <= three_sigma(expected, n)
        assert abs(rep.qab_m - 0.0402) <= three_sigma(0.0402, n)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_composition_consistency(self, seed):
        rng = np.random.default_rng(seed)
        noise = NoiseModel(AttackSpec(Basis.X, *rng.uniform(0, math.pi / 2, 2)),
                           baseline_flip_forward=0.03)
        rep = sift_and_estimate(run_session(SessionConfig(100_000, seed=seed), noise))
        for b in Basis:
            diff, se = rep.composition_residual(b)
            assert abs(diff) <= 3 * se + 1e-12

    def test_xi_monotone(self):
        n = 100_000
        noise0 = NoiseModel(AttackSpec(Basis.Z, 0.8, 0.8))
        reports = [sift_and_estimate(run_session(SessionConfig(n, seed=21), NoiseModel(noise0.attack, xi=xi)))
                   for xi in (0.0, 0.03, 0.06)]
        qab = [r.qab_m for r in reports]
        se = [math.hypot(r.qab_z.stderr, r.qab_x.stderr) / 2 for r in reports]
        for a, b, s in zip(qab, qab[1:], se[1:]):
            assert b >= a - 3 * s

    def test_xi_scope(self):
        # background noise at Alice's detector shows up in q1 only with scope ALL
        n = 100_000
        for scope, expected in ((XiScope.ENCODING, 0.0), (XiScope.ALL, 0.05)):
            rep = sift_and_estimate(run_session(SessionConfig(n, seed=4), NoiseModel(xi=0.1, xi_scope=scope)))
            for r in (rep.q1z, rep.q1x, rep.q2z, rep.q2x):
                assert abs(r.value - expected) <= three_sigma(expected, r.trials) + 1e-12
            assert abs(rep.qab_m - 0.05) <= three_sigma(0.05, rep.qab_z.trials + rep.qab_x.trials)

    def test_em_decoding_ignores_control_fields(self):
        # scrambling CM-only columns on EM rows cannot change the EM estimate
        log = run_session(SessionConfig(5000, seed=6), NoiseModel(AttackSpec(Basis.Z, 1, 1)))
        rec = log.records.copy()
        em = rec[:, L.C_MODE] == 1
        rec[em, L.C_ALICE_BASIS] = 1
        rec[em, L.C_ALICE_OUTCOME] = 0
        a, b = sift_and_estimate(log), sift_and_estimate(SessionLog(rec))
        assert (a.qab_z, a.qab_x) == (b.qab_z, b.qab_x)
