"""Run configuration shared by the pipeline and the command line."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Mapping

import numpy as np

from .clifford import GateSet, builtin_gateset


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to plan, execute and solve one characterization run.

    ``n_twirls = 0`` runs the circuits untwirled, the way hardware runs are
    usually done; ``backend`` is ``"simulator"`` or ``"ingest"``.  When no
    ``noise_model`` file is given the simulator draws a random model of
    ``noise_strength`` from the master seed.
    """

    n_qubits: int = 2
    gateset: str = "builtin"
    m_half: int = 4
    m_prime: int = 6
    n_circuits: int = 5
    n_twirls: int = 10
    shots_per_circuit: int = 100_000
    seed: int = 0
    backend: str = "simulator"
    noise_model: str | None = None
    noise_strength: float = 0.01
    ingest_dir: str | None = None
    out_dir: str = "aces_run"
    max_weight: int = 2
    max_attempts: int = 200
    max_condition: float | None = 1e3

    def __post_init__(self):
        for name in ("n_qubits", "n_circuits", "shots_per_circuit", "max_attempts"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be positive")
        for name in ("m_half", "m_prime", "n_twirls", "seed"):
            if int(getattr(self, name)) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.backend not in ("simulator", "ingest"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if not 0 <= self.noise_strength < 0.5:
            raise ConfigError("noise_strength must lie in [0, 0.5)")
        if self.max_condition is not None and self.max_condition < 1:
            raise ConfigError("max_condition must be >= 1 (or null to disable)")
        if self.max_weight not in (1, 2):
            raise ConfigError("max_weight must be 1 or 2")

    def load_gateset(self) -> GateSet:
        if self.gateset == "builtin":
            return builtin_gateset()
        try:
            return GateSet.load(self.gateset)
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot load gate set {self.gateset!r}: {exc}") from exc

    def rng(self, *stream: int) -> np.random.Generator:
        """Independent generator for a named stream under the master seed."""
        return np.random.default_rng(np.random.SeedSequence([self.seed, *stream]))

    def replace(self, **changes) -> RunConfig:
        data = asdict(self)
        data.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**dict(d))
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> RunConfig:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)
