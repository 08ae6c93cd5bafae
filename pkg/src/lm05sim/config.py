"""Experiment configuration: a line-oriented ``section.key = value`` text format.

Example::

    # attacked session with mild imperfections
    session.n_rounds = 100000
    session.seed = 42
    noise.axis = Z
    noise.phi_forward = pi/3
    noise.delta = 0.015
    noise.xi = 0.03

Angles are radians and may be written as arithmetic on ``pi``.  Unknown keys
are rejected.
"""
from __future__ import annotations

import ast
import hashlib
import math
import operator
from dataclasses import dataclass, field, replace
from typing import Optional

from .channel_noise import AttackSpec, NoiseModel, XiScope
from .infosec import Averaging
from .protocol import SessionConfig
from .quantum_core import Basis


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepGrid:
    start: float = 0.0
    stop: float = math.pi / 2
    steps: int = 21
    rounds: int = 100_000

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("sweep.steps must be >= 1")
        if self.rounds < 1:
            raise ValueError("sweep.rounds must be >= 1")

    def angles(self) -> list[float]:
        if self.steps == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.steps - 1)
        return [self.start + i * step for i in range(self.steps)]


@dataclass(frozen=True)
class BandSpec:
    delta_max: float = 0.03
    xi_max: float = 0.06
    n_trials: int = 500_000
    rounds_per_trial: int = 1000

    def __post_init__(self) -> None:
        if not (0.0 <= self.delta_max <= 1.0 and 0.0 <= self.xi_max <= 1.0):
            raise ValueError("band.delta_max and band.xi_max must lie in [0, 1]")
        if self.n_trials < 1 or self.rounds_per_trial < 1:
            raise ValueError("band.n_trials and band.rounds_per_trial must be >= 1")


FORMATS = ("csv", "json")


@dataclass(frozen=True)
class ExperimentConfig:
    session: SessionConfig = field(default_factory=lambda: SessionConfig(100_000))
    noise: NoiseModel = field(default_factory=NoiseModel)
    sweep: Optional[SweepGrid] = None
    band: Optional[BandSpec] = None
    output_path: str = "out"
    output_format: str = "csv"
    eve_averaging: Averaging = Averaging.ACTUAL_ATTACK

    def __post_init__(self) -> None:
        if self.output_format not in FORMATS:
            raise ValueError(f"output.format must be one of {FORMATS}")

    def digest(self) -> str:
        # where results land does not change them
        body = serialize(replace(self, output_path="out"))
        return hashlib.sha256(body.encode()).hexdigest()[:16]


# --- value parsing -----------------------------------------------------------

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def _eval_number(text: str) -> float:
    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(text)

    try:
        return float(ev(ast.parse(text, mode="eval").body))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def _int(text: str) -> int:
    stripped = text.strip().replace("_", "")
    if stripped.lstrip("+-").isdigit():
        # exact, seeds can exceed float precision
        return int(stripped)
    value = _eval_number(text)
    if value != int(value):
        raise ConfigError(f"not an integer: {text!r}")
    return int(value)


def _axis(text: str) -> Optional[Basis]:
    t = text.strip().upper()
    if t in ("NONE", ""):
        return None
    if t in ("Z", "X"):
        return Basis[t]
    raise ConfigError(f"noise.axis must be Z, X or none, got {text!r}")


def _axis_str(axis: Optional[Basis]) -> str:
    return "none" if axis is None else axis.name


# key -> (section, field, parser)
_KEYS = {
    "session.n_rounds": _int,
    "session.control_prob": _eval_number,
    "session.seed": _int,
    "noise.axis": _axis,
    "noise.phi_forward": _eval_number,
    "noise.phi_backward": _eval_number,
    "noise.delta": _eval_number,
    "noise.xi": _eval_number,
    "noise.xi_scope": lambda t: XiScope(t.strip().lower()),
    "noise.baseline_flip_forward": _eval_number,
    "noise.baseline_flip_backward": _eval_number,
    "sweep.start": _eval_number,
    "sweep.stop": _eval_number,
    "sweep.steps": _int,
    "sweep.rounds": _int,
    "band.delta_max": _eval_number,
    "band.xi_max": _eval_number,
    "band.n_trials": _int,
    "band.rounds_per_trial": _int,
    "output.path": str.strip,
    "output.format": lambda t: t.strip().lower(),
    "analysis.eve_averaging": lambda t: Averaging(t.strip().lower().replace("_", "-")),
}


def parse(text: str) -> ExperimentConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _KEYS[key](value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return build(values)


def build(values: dict) -> ExperimentConfig:
    def section(prefix: str) -> dict:
        return {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith(prefix + ".")}

    try:
        session = SessionConfig(**{"n_rounds": 100_000, **section("session")})
        noise_kw = section("noise")
        attack = AttackSpec(
            noise_kw.pop("axis", None),
            noise_kw.pop("phi_forward", 0.0),
            noise_kw.pop("phi_backward", 0.0),
        )
        noise = NoiseModel(attack=attack, **noise_kw)
        sweep = SweepGrid(**section("sweep")) if section("sweep") else None
        band = BandSpec(**section("band")) if section("band") else None
        out = section("output")
        analysis = section("analysis")
        return ExperimentConfig(
            session=session, noise=noise, sweep=sweep, band=band,
            output_path=out.get("path", "out"),
            output_format=out.get("format", "csv"),
            eve_averaging=analysis.get("eve_averaging", Averaging.ACTUAL_ATTACK),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def serialize(cfg: ExperimentConfig) -> str:
    """Canonical text form; ``parse(serialize(c)) == c``."""
    s, n, a = cfg.session, cfg.noise, cfg.noise.attack
    lines = [
        f"session.n_rounds = {s.n_rounds}",
        f"session.control_prob = {s.control_prob!r}",
        f"session.seed = {s.seed}",
        f"noise.axis = {_axis_str(a.axis)}",
        f"noise.phi_forward = {a.phi_forward!r}",
        f"noise.phi_backward = {a.phi_backward!r}",
        f"noise.delta = {n.delta!r}",
        f"noise.xi = {n.xi!r}",
        f"noise.xi_scope = {n.xi_scope.value}",
        f"noise.baseline_flip_forward = {n.baseline_flip_forward!r}",
        f"noise.baseline_flip_backward = {n.baseline_flip_backward!r}",
    ]
    if cfg.sweep is not None:
        g = cfg.sweep
        lines += [f"sweep.start = {g.start!r}", f"sweep.stop = {g.stop!r}",
                  f"sweep.steps = {g.steps}", f"sweep.rounds = {g.rounds}"]
    if cfg.band is not None:
        b = cfg.band
        lines += [f"band.delta_max = {b.delta_max!r}", f"band.xi_max = {b.xi_max!r}",
                  f"band.n_trials = {b.n_trials}", f"band.rounds_per_trial = {b.rounds_per_trial}"]
    lines += [f"output.path = {cfg.output_path}", f"output.format = {cfg.output_format}",
              f"analysis.eve_averaging = {cfg.eve_averaging.value}"]
    return "\n".join(lines) + "\n"


def load(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None


def with_overrides(cfg: ExperimentConfig, *, seed=None, out=None, fmt=None,
                   averaging=None) -> ExperimentConfig:
    try:
        if seed is not None:
            cfg = replace(cfg, session=replace(cfg.session, seed=seed))
        if out is not None:
            cfg = replace(cfg, output_path=out)
        if fmt is not None:
            cfg = replace(cfg, output_format=fmt)
        if averaging is not None:
            cfg = replace(cfg, eve_averaging=Averaging(averaging))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg
