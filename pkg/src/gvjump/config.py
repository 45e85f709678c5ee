"""Flat ``key = value`` experiment configuration.

Lines are ``key = value``; ``#`` starts a comment. Every key must be known;
list values are comma separated. The resolved configuration (defaults,
file, then command-line overrides) is what gets echoed next to the outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .kernels import EpsilonSchedule, GaussianJumpKernel, BouncyKernel, zigzag_kernels
from .potential import QuadraticPotential
from .refresh import RefreshSpec


class ConfigError(ValueError):
    """Unknown key, malformed line or invalid value."""


def _floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _opt_float(text: str):
    return None if text.strip().lower() in ("", "none") else float(text)


def _opt_int(text: str):
    return None if text.strip().lower() in ("", "none") else int(float(text))


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default, help)
KEYS: dict[str, tuple[Any, str, str]] = {
    "potential.kind": (str, "quadratic", "target potential; only 'quadratic' is built in"),
    "potential.lambda": (float, "1", "asymmetry (eigenvalue ratio) of the quadratic, >= 1"),
    "potential.dim": (int, "2", "dimension"),
    "kernel.kind": (str, "gaussian", "gaussian, bouncy or zigzag"),
    "epsilon.kind": (str, "constant", "constant, proportional or saturating"),
    "epsilon.values": (_floats, "1", "eps0 values; one run (or grid column) per value"),
    "refresh.kind": (str, "none", "none, full or partial"),
    "refresh.rate": (float, "1", "refresh rate eta"),
    "refresh.p": (float, "0", "memory of partial refreshment"),
    "sim.x0": (_floats, "1,0", "initial position"),
    "sim.v0": (_floats, "1,1", "initial velocity"),
    "sim.horizon": (_opt_float, "none", "physical time horizon"),
    "sim.budget": (_opt_int, "none", "force-evaluation budget per run"),
    "sim.seed": (int, "0", "master seed; replica r uses stream r"),
    "sim.replicas": (int, "1", "independent replicas per run"),
    "sim.workers": (int, "1", "worker threads for replicas"),
    "sim.event_cap": (int, "100000000", "maximum candidate events per trajectory"),
    "sim.log_ghosts": (_bool, "false", "record ghost events in trajectory CSVs"),
    "reference.step": (_opt_float, "none", "Verlet step; enables the reference trajectory"),
    "mixing.lambdas": (_floats, "1,1.05,5", "asymmetry values of the mixing grid"),
    "bench.ms": (_floats, "-6,-4,-3,-2,-1.5,-1,-0.5,-0.1,0,0.5,1,3,6", "m values for the proposal benchmark"),
    "bench.samples": (int, "20000", "samples per (m, proposal) cell"),
}


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    @classmethod
    def defaults(cls) -> "ExperimentConfig":
        cfg = cls()
        for key, (_, default, _) in KEYS.items():
            cfg.set(key, default)
        return cfg

    def set(self, key: str, text: str) -> None:
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        parser = KEYS[key][0]
        try:
            self.values[key] = parser(text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None
        self.raw[key] = text.strip()

    def update_from_text(self, text: str, source: str = "<config>") -> None:
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
            key, value = (p.strip() for p in line.split("=", 1))
            try:
                self.set(key, value)
            except ConfigError as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from None

    def resolved_text(self) -> str:
        return "".join(f"{key} = {self.raw[key]}\n" for key in KEYS)

    def write(self, path: Path) -> None:
        Path(path).write_text(self.resolved_text())

    # builders

    def potential(self, lambda_asym: float | None = None):
        if self["potential.kind"] != "quadratic":
            raise ConfigError(f"unknown potential.kind {self['potential.kind']!r}")
        lam = self["potential.lambda"] if lambda_asym is None else lambda_asym
        return QuadraticPotential(lam, dim=self["potential.dim"])

    def kernels(self, potential, eps0: float):
        kind = self["kernel.kind"]
        if kind == "gaussian":
            return [GaussianJumpKernel(potential, EpsilonSchedule(self["epsilon.kind"], eps0))]
        if kind == "bouncy":
            return [BouncyKernel(potential)]
        if kind == "zigzag":
            return zigzag_kernels(potential)
        raise ConfigError(f"unknown kernel.kind {kind!r}")

    def refresh(self):
        kind = self["refresh.kind"]
        if kind == "none":
            return None
        try:
            return RefreshSpec(kind, self["refresh.rate"], self["refresh.p"] if kind == "partial" else 0.0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def initial(self):
        from .engine import KineticState

        x0 = np.array(self["sim.x0"])
        v0 = np.array(self["sim.v0"])
        d = self["potential.dim"]
        if len(x0) != d or len(v0) != d:
            raise ConfigError(f"sim.x0 and sim.v0 must have {d} entries")
        return KineticState.at(x0, v0)


def load_config(path=None, overrides=()) -> ExperimentConfig:
    """Defaults, then the file at ``path``, then ``key=value`` overrides."""
    cfg = ExperimentConfig.defaults()
    if path is not None:
        cfg.update_from_text(Path(path).read_text(), str(path))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, value = item.split("=", 1)
        cfg.set(key.strip(), value)
    return cfg
