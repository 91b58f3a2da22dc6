"""System parameters shared by the simulator and the closed-form analysis."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml


@dataclass(frozen=True)
class SystemConfig:
    """Scalar model parameters.

    Distances are in metres, ``lambda_b`` in BSs per square metre.  With
    ``sigma2 = 0`` every SIR statistic is invariant to ``c_pl`` and ``p_t``.
    """

    lambda_b: float = 2.8e-5
    m_antennas: int = 100
    k_users: int = 10
    delta: float = 3            # pilot reuse factor; integer for simulation
    alpha: float = 4.0          # path-loss exponent
    epsilon: float = 0.5        # power-control compensation fraction
    delta_ref: float = 1.0      # near-field clamp distance
    c_pl: float = 1.0
    p_t: float = 1.0
    sigma2: float = 0.0
    guard_radius: float | None = None   # derived as 2 R sqrt(delta) if None
    cell_radius: float | None = None    # hexagon inradius R; derived from lambda_b if None
    window_radius: float | None = None  # derived if None
    t_coherence: int = 200
    t_max_db: float = 21.0
    alzer_n: int = 5
    # "k" uses the literal K factor in A, B and Q2; "k_minus_1" swaps in K-1
    interference_users: str = "k"
    # "theorem": B grouped as in the coverage formula; "appendix": the conditional-form grouping
    b_coefficient: str = "theorem"

    def __post_init__(self):
        if not self.lambda_b > 0:
            raise ValueError(f"lambda_b must be positive, got {self.lambda_b}")
        if not self.alpha > 2:
            raise ValueError(f"alpha must exceed 2, got {self.alpha}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.m_antennas < 1 or self.k_users < 1:
            raise ValueError("m_antennas and k_users must be positive")
        if not self.delta >= 1:
            raise ValueError(f"delta must be >= 1, got {self.delta}")
        if self.delta_ref < 0 or self.c_pl <= 0 or self.p_t <= 0 or self.sigma2 < 0:
            raise ValueError("need delta_ref >= 0, c_pl > 0, p_t > 0, sigma2 >= 0")
        if not 1 <= self.alzer_n <= 12:
            raise ValueError(f"alzer_n must be in [1, 12], got {self.alzer_n}")
        if self.interference_users not in ("k", "k_minus_1"):
            raise ValueError(f"unknown interference_users {self.interference_users!r}")
        if self.b_coefficient not in ("theorem", "appendix"):
            raise ValueError(f"unknown b_coefficient {self.b_coefficient!r}")
        if self.guard_radius is not None and self.guard_radius < 0:
            raise ValueError("guard_radius must be non-negative")

    @property
    def inradius(self) -> float:
        """Hexagon inradius R, chosen so that 2*sqrt(3)*R^2 = 1/lambda_b."""
        if self.cell_radius is not None:
            return float(self.cell_radius)
        return 1.0 / math.sqrt(2.0 * math.sqrt(3.0) * self.lambda_b)

    @property
    def guard(self) -> float:
        """Guard-region radius D."""
        if self.guard_radius is not None:
            return float(self.guard_radius)
        return 2.0 * self.inradius * math.sqrt(self.delta)

    @property
    def window(self) -> float:
        if self.window_radius is not None:
            return float(self.window_radius)
        return max(6.0 / math.sqrt(math.pi * self.lambda_b), 3.0 * self.guard)

    @property
    def t_max(self) -> float:
        return db_to_linear(self.t_max_db)

    @property
    def k_factor(self) -> int:
        return self.k_users if self.interference_users == "k" else self.k_users - 1

    @property
    def int_delta(self) -> int:
        if float(self.delta) != int(self.delta):
            raise ValueError(f"simulation needs an integer delta, got {self.delta}")
        return int(self.delta)

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def check_throughput(self, delta: float | None = None) -> None:
        d = self.delta if delta is None else delta
        if self.k_users * d >= self.t_coherence:
            raise ValueError(
                f"K*delta = {self.k_users * d} must be below t_coherence = {self.t_coherence}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def db_to_linear(db):
    out = 10.0 ** (np.asarray(db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


FIELD_NAMES = {f.name for f in dataclasses.fields(SystemConfig)}


def load_config(path: str | Path | None = None, **overrides) -> SystemConfig:
    """Read a flat YAML key/value file; keyword overrides win over file values."""
    values: dict = {}
    if path is not None:
        with open(path) as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f"{path}: expected a flat mapping of key: value")
        values.update(loaded)
    values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = set(values) - FIELD_NAMES
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return SystemConfig(**values)
