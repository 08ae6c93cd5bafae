"""LM05 round state machine, session transcripts and QBER estimation.

A round: Bob prepares one of |0>,|1>,|+>,|-> and sends it to Alice
(forward leg).  With probability ``c`` Alice runs control mode (measure in a
random basis, re-prepare the recorded outcome); otherwise she encodes a bit
with I or iY.  The qubit returns (backward leg) and Bob measures in his
preparation basis.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _layout as L
from . import kernels
from .channel_noise import Leg, NoiseModel, XiScope, apply_leg_with, readout_with
from .quantum_core import IY, Basis, apply_unitary, measure_with, prepare

LOW_CONFIDENCE_EVENTS = 100
CHUNK_ROUNDS = 1 << 16

CSV_COLUMNS = (
    "round", "prep_basis", "prep_bit", "mode",
    "alice_basis", "alice_outcome", "encoding", "bob_outcome",
)


class Mode(enum.IntEnum):
    CM = 0
    EM = 1


@dataclass(frozen=True)
class SessionConfig:
    n_rounds: int
    control_prob: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.n_rounds) != self.n_rounds or self.n_rounds < 1:
            raise ValueError(f"n_rounds must be a positive integer, got {self.n_rounds!r}")
        if not (0.0 < self.control_prob < 1.0):
            raise ValueError(f"control_prob must lie in (0, 1), got {self.control_prob!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True)
class RoundRecord:
    prep_basis: Basis
    prep_bit: int
    mode: Mode
    alice_cm_basis: Optional[Basis]
    alice_cm_outcome: Optional[int]
    encoding: Optional[int]
    bob_outcome: int

    def __post_init__(self) -> None:
        cm_fields = (self.alice_cm_basis, self.alice_cm_outcome)
        if self.mode is Mode.CM:
            ok = None not in cm_fields and self.encoding is None
        else:
            ok = cm_fields == (None, None) and self.encoding is not None
        if not ok:
            raise ValueError(f"inconsistent {self.mode.name} record: {self!r}")

    def to_row(self) -> tuple[int, ...]:
        def opt(v):
            return -1 if v is None else int(v)

        return (int(self.prep_basis), self.prep_bit, int(self.mode),
                opt(self.alice_cm_basis), opt(self.alice_cm_outcome),
                opt(self.encoding), self.bob_outcome)

    @classmethod
    def from_row(cls, row: Sequence[int]) -> "RoundRecord":
        def opt(v, wrap=int):
            return None if v < 0 else wrap(v)

        return cls(
            prep_basis=Basis(int(row[L.C_PREP_BASIS])),
            prep_bit=int(row[L.C_PREP_BIT]),
            mode=Mode(int(row[L.C_MODE])),
            alice_cm_basis=opt(int(row[L.C_ALICE_BASIS]), Basis),
            alice_cm_outcome=opt(int(row[L.C_ALICE_OUTCOME])),
            encoding=opt(int(row[L.C_ENCODING])),
            bob_outcome=int(row[L.C_BOB_OUTCOME]),
        )


class SessionLog:
    """Round transcript stored column-wise as an (n, 7) int8 array."""

    def __init__(self, records: np.ndarray):
        records = np.asarray(records, dtype=np.int8)
        if records.ndim != 2 or records.shape[1] != L.N_COLUMNS:
            raise ValueError("records must have shape (n, 7)")
        self.records = records

    @classmethod
    def from_records(cls, rounds: Sequence[RoundRecord]) -> "SessionLog":
        return cls(np.array([r.to_row() for r in rounds], dtype=np.int8).reshape(-1, L.N_COLUMNS))

    def __len__(self) -> int:
        return self.records.shape[0]

    def __getitem__(self, i: int) -> RoundRecord:
        return RoundRecord.from_row(self.records[i])

    def __iter__(self) -> Iterator[RoundRecord]:
        for row in self.records:
            yield RoundRecord.from_row(row)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SessionLog) and np.array_equal(self.records, other.records)

    def column(self, index: int) -> np.ndarray:
        return self.records[:, index]

    def write_csv(self, fh: io.TextIOBase) -> None:
        """Basis columns as Z/X, mode as CM/EM, empty cells where not applicable."""
        basis = {0: "Z", 1: "X", -1: ""}
        mode = {0: "CM", 1: "EM"}
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i, row in enumerate(self.records.tolist()):
            pb, bit, m, ab, ao, enc, bob = row
            writer.writerow((
                i, basis[pb], bit, mode[m], basis[ab],
                "" if ao < 0 else ao, "" if enc < 0 else enc, bob,
            ))

    @classmethod
    def read_csv(cls, fh: io.TextIOBase) -> "SessionLog":
        basis = {"Z": 0, "X": 1, "": -1}
        rows = []
        for rec in csv.DictReader(line for line in fh if not line.startswith("#")):
            rows.append((
                basis[rec["prep_basis"]], int(rec["prep_bit"]),
                0 if rec["mode"] == "CM" else 1, basis[rec["alice_basis"]],
                int(rec["alice_outcome"] or -1), int(rec["encoding"] or -1),
                int(rec["bob_outcome"]),
            ))
        return cls(np.array(rows, dtype=np.int8).reshape(-1, L.N_COLUMNS))


def kernel_params(noise: NoiseModel, control_prob: float) -> np.ndarray:
    p = np.zeros(L.N_PARAMS)
    axis = noise.attack.axis
    p[L.P_AXIS] = 0 if axis is None else (1 if axis == Basis.Z else 2)
    p[L.P_PHI_F] = noise.attack.phi_forward
    p[L.P_PHI_B] = noise.attack.phi_backward
    p[L.P_DELTA] = noise.delta
    p[L.P_XI] = noise.xi
    p[L.P_FLIP_F] = noise.baseline_flip_forward
    p[L.P_FLIP_B] = noise.baseline_flip_backward
    p[L.P_CONTROL] = control_prob
    p[L.P_XI_ALL] = 1.0 if noise.xi_scope is XiScope.ALL else 0.0
    return p


def round_from_uniforms(u: Sequence[float], noise: NoiseModel, control_prob: float) -> RoundRecord:
    """Scalar reference implementation of one round on explicit state vectors."""
    prep_basis = Basis.Z if u[L.U_PREP_BASIS] < 0.5 else Basis.X
    prep_bit = 0 if u[L.U_PREP_BIT] < 0.5 else 1
    state = prepare(prep_basis, prep_bit)
    state = apply_leg_with(state, noise, Leg.FORWARD, u[L.U_FWD:L.U_FWD + 3])

    xi_all = noise.xi_scope is XiScope.ALL
    alice_basis = alice_outcome = encoding = None
    if u[L.U_MODE] < control_prob:
        mode = Mode.CM
        alice_basis = Basis.Z if u[L.U_ALICE_CHOICE] < 0.5 else Basis.X
        alice_outcome, _ = measure_with(state, alice_basis, u[L.U_ALICE_MEAS])
        if xi_all:
            alice_outcome = readout_with(alice_outcome, noise.xi, *u[L.U_ALICE_READOUT:L.U_ALICE_READOUT + 2])
        state = prepare(alice_basis, alice_outcome)
    else:
        mode = Mode.EM
        encoding = 0 if u[L.U_ALICE_CHOICE] < 0.5 else 1
        if encoding:
            state = apply_unitary(IY, state)

    state = apply_leg_with(state, noise, Leg.BACKWARD, u[L.U_BWD:L.U_BWD + 3])
    bob, _ = measure_with(state, prep_basis, u[L.U_BOB_MEAS])
    if xi_all or mode is Mode.EM:
        bob = readout_with(bob, noise.xi, *u[L.U_BOB_READOUT:L.U_BOB_READOUT + 2])
    return RoundRecord(prep_basis, prep_bit, mode, alice_basis, alice_outcome, encoding, bob)


def run_round(cfg: SessionConfig, noise: NoiseModel, rng: np.random.Generator) -> RoundRecord:
    return round_from_uniforms(rng.random(L.N_UNIFORMS), noise, cfg.control_prob)


def run_session(cfg: SessionConfig, noise: NoiseModel, backend: Optional[str] = None) -> SessionLog:
    """Simulate ``cfg.n_rounds`` rounds; the log depends only on (cfg, noise).

    Uniforms are drawn in fixed-size chunks from one PCG64 stream; chunking
    does not change the sequence, so the result equals ``n_rounds``
    consecutive :func:`run_round` calls on ``default_rng(cfg.seed)``.
    """
    simulate = kernels.simulate_rounds if backend is None else kernels.BACKENDS[backend]
    rng = np.random.default_rng(cfg.seed)
    params = kernel_params(noise, cfg.control_prob)
    out = np.empty((cfg.n_rounds, L.N_COLUMNS), dtype=np.int8)
    for start in range(0, cfg.n_rounds, CHUNK_ROUNDS):
        stop = min(start + CHUNK_ROUNDS, cfg.n_rounds)
        out[start:stop] = simulate(rng.random((stop - start, L.N_UNIFORMS)), params)
    return SessionLog(out)


@dataclass(frozen=True)
class Rate:
    """Binomial error-rate estimate with a Wald standard error."""

    errors: int
    trials: int

    @property
    def value(self) -> float:
        return self.errors / self.trials

    @property
    def stderr(self) -> float:
        p = self.value
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def low_confidence(self) -> bool:
        return self.trials < LOW_CONFIDENCE_EVENTS

    def to_dict(self) -> dict:
        return {"rate": self.value, "errors": self.errors, "trials": self.trials,
                "stderr": self.stderr, "low_confidence": self.low_confidence}


def _rate(errors: np.ndarray) -> Optional[Rate]:
    if errors.size == 0:
        return None
    return Rate(int(np.count_nonzero(errors)), int(errors.size))


def compose_qab(q1: float, q2: float) -> float:
    """Round-trip error rate for independent forward/backward flips.

    Equal to ``q1 + q2 - 2 q1 q2``; written around 1/2 so that a fully
    randomized leg gives exactly 0.5.
    """
    return 0.5 - 2.0 * (q1 - 0.5) * (q2 - 0.5)


def _mean(values: Sequence[Optional[float]]) -> Optional[float]:
    if any(v is None for v in values):
        return None
    return sum(values) / len(values)


@dataclass(frozen=True)
class QberReport:
    q1z: Optional[Rate]
    q1x: Optional[Rate]
    q2z: Optional[Rate]
    q2x: Optional[Rate]
    qab_z: Optional[Rate]
    qab_x: Optional[Rate]

    def partial(self, leg: int, basis: Basis) -> Optional[Rate]:
        name = f"q{leg}{'z' if basis == Basis.Z else 'x'}"
        return getattr(self, name)

    def qab(self, basis: Basis) -> Optional[Rate]:
        return self.qab_z if basis == Basis.Z else self.qab_x

    @property
    def q1_avg(self) -> Optional[float]:
        return _mean([None if r is None else r.value for r in (self.q1z, self.q1x)])

    @property
    def q2_avg(self) -> Optional[float]:
        return _mean([None if r is None else r.value for r in (self.q2z, self.q2x)])

    @property
    def qab_m(self) -> Optional[float]:
        """Measured round-trip QBER averaged over the preparations."""
        return _mean([None if r is None else r.value for r in (self.qab_z, self.qab_x)])

    def qab_composed(self, basis: Basis) -> Optional[float]:
        q1, q2 = self.partial(1, basis), self.partial(2, basis)
        if q1 is None or q2 is None:
            return None
        return compose_qab(q1.value, q2.value)

    @property
    def qab_s(self) -> Optional[float]:
        """Round-trip QBER composed from the control-mode partials, averaged."""
        return _mean([self.qab_composed(Basis.Z), self.qab_composed(Basis.X)])

    def composition_residual(self, basis: Basis) -> Optional[tuple[float, float]]:
        """(measured - composed, joint standard error) for one preparation basis."""
        q1, q2, qab = self.partial(1, basis), self.partial(2, basis), self.qab(basis)
        if q1 is None or q2 is None or qab is None:
            return None
        var = (qab.stderr ** 2
               + ((1 - 2 * q2.value) * q1.stderr) ** 2
               + ((1 - 2 * q1.value) * q2.stderr) ** 2)
        return qab.value - compose_qab(q1.value, q2.value), math.sqrt(var)

    def to_dict(self) -> dict:
        d = {}
        for name in ("q1z", "q1x", "q2z", "q2x", "qab_z", "qab_x"):
            r = getattr(self, name)
            d[name] = None if r is None else r.to_dict()
        for name in ("q1_avg", "q2_avg", "qab_m", "qab_s"):
            d[name] = getattr(self, name)
        return d


def sift_and_estimate(log: SessionLog) -> QberReport:
    """Estimate partial and total QBERs from a transcript.

    Control-mode rounds count only when Alice's basis matches Bob's
    preparation; q1 compares Alice's outcome to Bob's bit, q2 compares
    Bob's outcome to what Alice re-prepared.  Encoding-mode rounds give
    Q_AB from Bob's decoded bit (outcome XOR prepared bit) vs Alice's bit.
    """
    if len(log) == 0:
        raise ValueError("cannot estimate QBERs from an empty log")
    return report_from_counts(kernels.tally(log.records))


def _count_rate(errors: int, trials: int) -> Optional[Rate]:
    return Rate(int(errors), int(trials)) if trials else None


def report_from_counts(counts: np.ndarray) -> QberReport:
    """Build a report from the (2, 5) tally of :func:`kernels.tally`."""
    fields = {}
    for b, tag in ((0, "z"), (1, "x")):
        sifted, q1_err, q2_err, em, qab_err = counts[b].tolist()
        fields[f"q1{tag}"] = _count_rate(q1_err, sifted)
        fields[f"q2{tag}"] = _count_rate(q2_err, sifted)
        fields[f"qab_{tag}"] = _count_rate(qab_err, em)
    return QberReport(**fields)


def qab_by_encoding(log: SessionLog, basis: Basis) -> dict[int, Optional[Rate]]:
    """Round-trip error rate split by Alice's encoding (0 -> I, 1 -> iY)."""
    r = log.records
    em_b = (r[:, L.C_MODE] == Mode.EM) & (r[:, L.C_PREP_BASIS] == basis)
    err = (r[:, L.C_BOB_OUTCOME] ^ r[:, L.C_PREP_BIT]) != r[:, L.C_ENCODING]
    enc = r[:, L.C_ENCODING]
    return {e: _rate(err[em_b & (enc == e)]) for e in (0, 1)}
