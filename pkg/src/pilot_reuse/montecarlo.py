"""Drop-based simulation of the typical user's uplink SINR."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .channel import (draw_channels, effective_sinr, exclusion_ball_links,
                      instantaneous_sinr, link_budget)
from .config import SystemConfig, linear_to_db
from .geometry import (Deployment, DeploymentModel, build_hexagonal,
                       build_ppp_deployment, drop_users)
from .numerics import rng_stream


class SinrMode(str, Enum):
    INSTANTANEOUS = "instantaneous"
    EFFECTIVE = "effective"


class Interference(str, Enum):
    VORONOI = "voronoi"                 # explicit cells and users
    EXCLUSION_BALL = "exclusion_ball"   # annulus PPP of interfering cells


@dataclass
class SinrSampleSet:
    samples: np.ndarray
    config: SystemConfig
    model: DeploymentModel
    sinr_mode: SinrMode
    seed: int
    n_drops: int
    interference: Interference = Interference.VORONOI

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        self.model = DeploymentModel(self.model)
        self.sinr_mode = SinrMode(self.sinr_mode)
        self.interference = Interference(self.interference)

    @property
    def samples_db(self) -> np.ndarray:
        return linear_to_db(self.samples)

    def label(self) -> str:
        c = self.config
        return f"{self.model.value} M={c.m_antennas} eps={c.epsilon:g} delta={c.delta:g}"


@dataclass
class CcdfCurve:
    thresholds: np.ndarray          # linear, ascending
    coverage: np.ndarray
    provenance: str = "empirical"   # or "analytic"
    label: str = ""
    stderr: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.thresholds = np.asarray(self.thresholds, dtype=float)
        self.coverage = np.asarray(self.coverage, dtype=float)
        if self.provenance not in ("empirical", "analytic"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if np.any(np.diff(self.thresholds) < 0):
            raise ValueError("thresholds must be ascending")

    @property
    def thresholds_db(self) -> np.ndarray:
        return linear_to_db(self.thresholds)


def empirical_ccdf(samples, thresholds, label: str = "") -> CcdfCurve:
    """Fraction of samples strictly above each threshold (+inf counts everywhere)."""
    s = np.asarray(samples, dtype=float)
    t = np.asarray(thresholds, dtype=float)
    if s.size == 0:
        raise ValueError("cannot build a CCDF from an empty sample set")
    if np.any(np.diff(t) < 0):
        raise ValueError("thresholds must be ascending")
    ordered = np.sort(s)
    cov = 1.0 - np.searchsorted(ordered, t, side="right") / s.size
    stderr = np.sqrt(cov * (1.0 - cov) / s.size)
    return CcdfCurve(t, cov, "empirical", label, stderr)


def uplink_sinr_sample(links, config: SystemConfig, mode: SinrMode,
                       rng: np.random.Generator | None = None, block=None) -> float:
    """SINR of the typical user for one large-scale realisation.

    Instantaneous mode needs either a drawn ``block`` or an ``rng`` to draw
    one; effective mode is a function of the large-scale state only.
    """
    mode = SinrMode(mode)
    if mode is SinrMode.EFFECTIVE:
        return effective_sinr(links, config.m_antennas, config.sigma2)
    if block is None:
        if rng is None:
            raise ValueError("instantaneous SINR needs a channel block or an rng")
        block = draw_channels(links, config.m_antennas, rng)
    return instantaneous_sinr(block, config.sigma2)


def simulate_drop(config: SystemConfig, model: DeploymentModel, seed: int, index: int,
                  mode: SinrMode = SinrMode.INSTANTANEOUS,
                  interference: Interference = Interference.VORONOI,
                  lattice: Deployment | None = None) -> float:
    rng = rng_stream(seed, index)
    model = DeploymentModel(model)
    if Interference(interference) is Interference.EXCLUSION_BALL:
        if model is DeploymentModel.HEXAGONAL:
            raise ValueError("the exclusion-ball process applies to PPP models only")
        d = config.guard if model is DeploymentModel.GUARD_REGION else 0.0
        links = exclusion_ball_links(config, rng, d_guard=d)
    else:
        if model is DeploymentModel.HEXAGONAL:
            dep = lattice if lattice is not None else build_hexagonal(config)
        else:
            dep = build_ppp_deployment(config, model, rng)
        users = drop_users(dep, config.k_users, rng)
        links = link_budget(dep, users, config)
    return uplink_sinr_sample(links, config, mode, rng=rng)


def _run_chunk(args):
    config, model, seed, start, stop, mode, interference = args
    lattice = build_hexagonal(config) if model is DeploymentModel.HEXAGONAL else None
    return [simulate_drop(config, model, seed, i, mode, interference, lattice)
            for i in range(start, stop)]


def run_drops(config: SystemConfig, model, n_drops: int, seed: int,
              mode=SinrMode.INSTANTANEOUS, interference=Interference.VORONOI,
              workers: int = 1) -> SinrSampleSet:
    """Simulate ``n_drops`` independent drops.

    Drop i always uses stream (seed, i), so the samples do not depend on
    ``workers``.  The hexagonal lattice and its colouring are fixed; only users
    and fading are redrawn.
    """
    if n_drops < 1:
        raise ValueError("n_drops must be >= 1")
    model = DeploymentModel.parse(model) if isinstance(model, str) else model
    mode, interference = SinrMode(mode), Interference(interference)
    config.int_delta
    if model is DeploymentModel.HEXAGONAL:
        build_hexagonal(config)         # surface invalid cluster sizes early
    if workers <= 1:
        samples = _run_chunk((config, model, seed, 0, n_drops, mode, interference))
    else:
        size = math.ceil(n_drops / workers)
        chunks = [(config, model, seed, s, min(s + size, n_drops), mode, interference)
                  for s in range(0, n_drops, size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = [x for part in pool.map(_run_chunk, chunks) for x in part]
    return SinrSampleSet(np.array(samples), config, model, mode, seed, n_drops, interference)
