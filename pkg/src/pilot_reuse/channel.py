"""Path loss, fractional power control, Rayleigh fading and correlator
channel estimation for the typical uplink user.

Only the links that form the channel estimate (the typical user and its
pilot-sharing users in colliding cells) are materialised as M-vectors.  Every
other channel is independent of the estimate ``h_hat``, so its MRC projection
``h_hat^H h_j`` is exactly CN(0, beta_j * ||h_hat||^2) given ``h_hat`` and is
drawn as a scalar.  ``draw_channels(..., materialize=True)`` builds all
vectors instead and is used to check that shortcut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .geometry import Deployment, UserDrop, exclusion_ball_interferers


def path_loss(r, c_pl: float = 1.0, alpha: float = 4.0, delta_ref: float = 1.0):
    """Large-scale gain C * max(r, delta_ref)^-alpha."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("distances must be non-negative")
    eff = np.maximum(r, delta_ref)
    if np.any(eff == 0):
        raise ValueError("zero distance with delta_ref = 0 gives infinite gain")
    out = c_pl * eff ** (-alpha)
    return float(out) if out.ndim == 0 else out


def tx_power(beta_serving, epsilon: float, p_t: float = 1.0):
    """Fractional power control P_t * beta^-epsilon (no maximum-power clip)."""
    beta = np.asarray(beta_serving, dtype=float)
    if np.any(beta <= 0):
        raise ValueError("serving gain must be positive")
    out = p_t * beta ** (-epsilon)
    return float(out) if out.ndim == 0 else out


def sample_fading(m_antennas: int, rng: np.random.Generator, size=()) -> np.ndarray:
    """i.i.d. CN(0, 1) entries, shape ``size + (m_antennas,)``."""
    shape = ((size,) if isinstance(size, (int, np.integer)) else tuple(size)) + (m_antennas,)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * math.sqrt(0.5)


def estimate_channel(channels: np.ndarray, powers: np.ndarray,
                     collision_flags: np.ndarray) -> np.ndarray:
    """Correlator estimate of row 0 of ``channels``.

    Rows 1.. are candidate contaminating channels; a row enters the estimate
    with weight sqrt(power) when its flag is set.  No normalisation.
    """
    channels = np.atleast_2d(channels)
    powers = np.asarray(powers, dtype=float)
    flags = np.asarray(collision_flags, dtype=bool)
    if flags.shape != (channels.shape[0] - 1,):
        raise ValueError("need one collision flag per contaminating channel")
    h_hat = math.sqrt(powers[0]) * channels[0]
    if flags.any():
        h_hat = h_hat + np.sqrt(powers[1:][flags]) @ channels[1:][flags]
    return h_hat


@dataclass
class LinkBudget:
    """Large-scale quantities of one drop, seen from the typical BS.

    Row 0 of ``beta_own`` is the typical user.  ``beta_cross[i, j]`` is the
    gain from user j of interfering cell i to the typical BS and
    ``p_cross[i, j]`` that user's transmit power; user 0 of every cell shares
    the typical user's pilot index.
    """

    beta_own: np.ndarray      # (K,)
    p_own: np.ndarray         # (K,)
    beta_cross: np.ndarray    # (n_cells, K)
    p_cross: np.ndarray       # (n_cells, K)
    collided: np.ndarray      # (n_cells,) bool

    def estimate_set(self):
        """Gains and powers of the links forming h_hat, desired link first."""
        beta = np.concatenate([self.beta_own[:1], self.beta_cross[self.collided, 0]])
        p = np.concatenate([self.p_own[:1], self.p_cross[self.collided, 0]])
        return beta, p

    def independent_set(self):
        """Gains and powers of all links independent of h_hat."""
        mask = np.ones(self.beta_cross.shape, dtype=bool)
        mask[self.collided, 0] = False
        beta = np.concatenate([self.beta_own[1:], self.beta_cross[mask]])
        p = np.concatenate([self.p_own[1:], self.p_cross[mask]])
        return beta, p


def link_budget(deployment: Deployment, users: UserDrop, config: SystemConfig) -> LinkBudget:
    """Large-scale gains and powers from explicit BS and user positions."""
    t = deployment.typical_index
    others = np.delete(np.arange(deployment.n_bs), t)
    pos = users.positions
    own_dist = np.linalg.norm(pos - deployment.bs_positions[:, None, :], axis=2)
    to_origin = np.linalg.norm(pos - deployment.bs_positions[t], axis=2)
    pl = dict(c_pl=config.c_pl, alpha=config.alpha, delta_ref=config.delta_ref)
    beta_serv = path_loss(own_dist, **pl)
    power = tx_power(beta_serv, config.epsilon, config.p_t)
    return LinkBudget(
        beta_own=beta_serv[t],
        p_own=power[t],
        beta_cross=np.atleast_2d(path_loss(to_origin[others], **pl)).reshape(len(others), -1),
        p_cross=power[others].reshape(len(others), -1),
        collided=deployment.collided[others],
    )


def exclusion_ball_links(config: SystemConfig, rng: np.random.Generator,
                         d_guard: float | None = None) -> LinkBudget:
    """Analysis-matched drop: interfering cells form a PPP outside radius D.

    Typical-cell link distances and every user's own-cell distance are
    Rayleigh with density ``lambda_b``; users of an interfering cell sit at its
    annulus point; each interfering cell collides with probability 1/delta.
    """
    k = config.k_users
    d = config.guard if d_guard is None else d_guard
    scale = 1.0 / math.sqrt(2.0 * math.pi * config.lambda_b)
    pl = dict(c_pl=config.c_pl, alpha=config.alpha, delta_ref=config.delta_ref)
    own = path_loss(rng.rayleigh(scale, k), **pl)
    cells = exclusion_ball_interferers(config.lambda_b, d, config.window, rng)
    n = len(cells)
    r_cell = np.linalg.norm(cells, axis=1)
    serv = path_loss(rng.rayleigh(scale, (n, k)), **pl).reshape(n, k)
    collided = rng.random(n) < 1.0 / config.delta
    return LinkBudget(
        beta_own=np.atleast_1d(own),
        p_own=np.atleast_1d(tx_power(own, config.epsilon, config.p_t)),
        beta_cross=np.repeat(np.atleast_1d(path_loss(r_cell, **pl))[:, None], k, axis=1),
        p_cross=np.atleast_2d(tx_power(serv, config.epsilon, config.p_t)).reshape(n, k),
        collided=collided,
    )


@dataclass
class ChannelBlock:
    """Small-scale realisation for one drop.

    ``h`` holds the estimate-forming channels (row 0 is the typical user's),
    ``h_hat`` the correlator estimate.  ``proj_est`` are ``h_hat^H h`` for
    those rows and ``proj_other`` the same projections for independent links.
    """

    beta_est: np.ndarray
    p_est: np.ndarray
    h: np.ndarray
    h_hat: np.ndarray
    proj_est: np.ndarray
    beta_other: np.ndarray
    p_other: np.ndarray
    proj_other: np.ndarray


def draw_channels(links: LinkBudget, m_antennas: int, rng: np.random.Generator,
                  materialize: bool = False) -> ChannelBlock:
    beta_e, p_e = links.estimate_set()
    beta_o, p_o = links.independent_set()
    h = sample_fading(m_antennas, rng, size=len(beta_e)) * np.sqrt(beta_e)[:, None]
    flags = np.ones(len(beta_e) - 1, dtype=bool)
    h_hat = estimate_channel(h, p_e, flags)
    proj_est = h.conj() @ h_hat
    proj_est = proj_est.conj()
    if materialize:
        h_o = sample_fading(m_antennas, rng, size=len(beta_o)) * np.sqrt(beta_o)[:, None]
        proj_other = (h_o.conj() @ h_hat).conj()
    else:
        norm2 = float(np.vdot(h_hat, h_hat).real)
        z = sample_fading(1, rng, size=len(beta_o))[:, 0] if len(beta_o) else np.zeros(0, complex)
        proj_other = z * np.sqrt(beta_o * norm2)
    return ChannelBlock(beta_e, p_e, h, h_hat, proj_est, beta_o, p_o, proj_other)


def instantaneous_sinr(block: ChannelBlock, sigma2: float = 0.0) -> float:
    """MRC output SINR of one fading realisation (+inf if nothing interferes)."""
    gains = np.abs(block.proj_est) ** 2
    signal = block.p_est[0] * gains[0]
    interference = (np.dot(block.p_est[1:], gains[1:])
                    + np.dot(block.p_other, np.abs(block.proj_other) ** 2))
    noise = sigma2 * float(np.vdot(block.h_hat, block.h_hat).real)
    den = interference + noise
    return math.inf if den == 0 else float(signal / den)


def effective_sinr(links: LinkBudget, m_antennas: int, sigma2: float = 0.0) -> float:
    """Use-and-forget SINR: mean correlator gain over the conditional power of
    everything else, both evaluated exactly given the large-scale state."""
    m = float(m_antennas)
    beta_e, p_e = links.estimate_set()
    beta_o, p_o = links.independent_set()
    b0, p0 = beta_e[0], p_e[0]
    bc, pc = beta_e[1:], p_e[1:]
    s = float(np.dot(pc, bc))
    g = p0 * b0 + s                     # E||h_hat||^2 / M
    signal = p0 * (math.sqrt(p0) * b0 * m) ** 2
    self_var = p0 * (p0 * b0 ** 2 * m + s * b0 * m)
    independent = m * g * float(np.dot(p_o, beta_o))
    contam = float(np.sum(pc * (pc * bc ** 2 * (m * m + m) + bc * m * (g - pc * bc))))
    noise = sigma2 * m * g
    den = self_var + independent + contam + noise
    return math.inf if den == 0 else float(signal / den)
