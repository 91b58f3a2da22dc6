"""Closed-form uplink SINR coverage under the guard-region model, the
minimum-reuse solver and the rate / cell-throughput pipeline.

Coverage is an alternating Alzer sum over n = 1..N of

    exp(-eta*T*n/M) * int_0^inf Z(x) f(x) L(x)^(K-1) dx

where f is the Rayleigh density of the serving distance, Z carries the
inter-cell interference and pilot-contamination moments, and L averages the
intra-cell interference over the other users' distances.  All integrals go
through the vectorised quadrature in :mod:`pilot_reuse.numerics`; the whole
threshold grid, all Alzer terms and all inner integrals are evaluated in one
pass.

Two conventions differ from the formulas as usually printed:

* the annulus moments ``I_w`` use the positive integral value
  ``2*pi*lambda*D^(2-w*alpha)/(w*alpha-2)``;
* the normalised moments ``B_w`` of the reuse-factor form use the exponent
  ``w*alpha/2 - 1``, which is what the substitution t = pi*lambda*x^2 yields,
  and ``Q2`` enters with the sign that makes ``exp(-Q2) = Z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import SystemConfig
from .numerics import (QuadratureSpec, adaptive_quad, gamma_fn,
                       integrate_weighted_semiinfinite)

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class AlzerTerms:
    n_order: int
    eta: float
    weights: np.ndarray   # (-1)^(n+1) * binom(N, n), n = 1..N

    @property
    def n(self) -> np.ndarray:
        return np.arange(1, self.n_order + 1)


def alzer_terms(n_order: int) -> AlzerTerms:
    if n_order < 1:
        raise ValueError(f"Alzer order must be >= 1, got {n_order}")
    eta = n_order * math.factorial(n_order) ** (-1.0 / n_order)
    weights = np.array([(-1) ** (n + 1) * math.comb(n_order, n)
                        for n in range(1, n_order + 1)], dtype=float)
    return AlzerTerms(n_order, eta, weights)


def p_omega(omega: int, lambda_b: float, alpha: float, epsilon: float) -> float:
    """E[R^(omega*alpha*epsilon)] for a Rayleigh serving distance R."""
    s = alpha * epsilon * omega / 2.0
    return (lambda_b * math.pi) ** (-s) * gamma_fn(s + 1.0)


def i_omega(omega: int, lambda_b: float, alpha: float, d_guard: float) -> float:
    """2*pi*lambda * int_D^inf x^(1 - omega*alpha) dx."""
    if not d_guard > 0:
        raise ValueError("I_omega diverges for D = 0")
    e = omega * alpha - 2.0
    if not e > 0:
        raise ValueError(f"I_omega needs omega*alpha > 2, got {omega * alpha}")
    return 2.0 * math.pi * lambda_b * d_guard ** (-e) / e


def normalized_guard_area(delta: float) -> float:
    """pi*lambda*D^2 when D = 2R*sqrt(delta) and 2*sqrt(3)*R^2 = 1/lambda."""
    return 2.0 * math.pi * delta / SQRT3


def b_omega(omega: int, alpha: float, epsilon: float, guard_area: float) -> float:
    """P_w * I_w * (pi*lambda)^(-w*alpha*(1-eps)/2), a density-free moment.

    ``guard_area`` is pi*lambda*D^2; see :func:`normalized_guard_area`.
    """
    e = omega * alpha / 2.0 - 1.0
    return gamma_fn(omega * alpha * epsilon / 2.0 + 1.0) * guard_area ** (-e) / e


@dataclass(frozen=True)
class AnalyticIntermediates:
    """Constants of the coverage formula for one configuration."""

    lambda_b: float
    alpha: float
    epsilon: float
    delta: float
    m: int
    k: int
    p1: float
    p2: float
    i1: float
    i2: float
    a_coef: float
    b_coef: float
    alzer: AlzerTerms = field(repr=False)

    @classmethod
    def from_config(cls, config: SystemConfig, d_guard: float | None = None):
        d = config.guard if d_guard is None else d_guard
        lam, alpha, eps, delta = config.lambda_b, config.alpha, config.epsilon, config.delta
        p1, p2 = (p_omega(w, lam, alpha, eps) for w in (1, 2))
        i1, i2 = (i_omega(w, lam, alpha, d) for w in (1, 2))
        pi1 = p1 * i1
        m, kf = config.m_antennas, config.k_factor
        a = pi1 / delta + kf * pi1 + config.sigma2
        if config.b_coefficient == "theorem":
            b = ((m + 1) * p2 * i2 + pi1 * a - pi1 ** 2) / delta
        else:
            b = ((kf * pi1 + config.sigma2) * pi1 + (m + 1) * p2 * i2) / delta
        return cls(lam, alpha, eps, delta, m, config.k_users, p1, p2, i1, i2, a, b,
                   alzer_terms(config.alzer_n))

    @property
    def exponent(self) -> float:
        """alpha * (1 - epsilon): power of x in the normalised interference."""
        return self.alpha * (1.0 - self.epsilon)

    def f(self, x):
        lam = self.lambda_b
        return 2.0 * math.pi * lam * x * np.exp(-math.pi * lam * x * x)

    def scale(self, t_threshold, n):
        """eta * T * n / M."""
        return self.alzer.eta * np.asarray(t_threshold) * n / self.m

    def n_script(self, t_threshold, n):
        return -self.scale(t_threshold, n) * (math.pi * self.lambda_b) ** (self.exponent / 2.0)

    def c1(self, x, nn):
        y = np.asarray(x) ** self.exponent
        return nn * (y + self.p1 * self.i1 * y * y)

    def c2(self, x, nn):
        return nn * np.asarray(x) ** self.exponent

    def z(self, x, t_threshold, n):
        y = np.asarray(x) ** self.exponent
        return np.exp(-self.scale(t_threshold, n) * (self.a_coef * y + self.b_coef * y * y))

    def l(self, x, t_threshold, n, spec: QuadratureSpec | None = None):
        nn = self.n_script(t_threshold, n)
        return mixture_integral(self.c1(x, nn), self.c2(x, nn), self.delta,
                                self.exponent / 2.0, spec)


def mixture_integral(c1, c2, delta: float, power: float,
                     spec: QuadratureSpec | None = None) -> np.ndarray:
    """int_0^inf [exp(c1 u^-p)/delta + (1 - 1/delta) exp(c2 u^-p)] e^-u du.

    ``c1`` and ``c2`` are non-positive arrays of equal shape; the integral is
    computed for every element at once.
    """
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    shape = np.broadcast_shapes(c1.shape, c2.shape)
    c1 = np.broadcast_to(c1, shape).ravel()
    c2 = np.broadcast_to(c2, shape).ravel()
    w_out = 1.0 - 1.0 / delta

    def integrand(u):
        s = u[:, None] ** (-power)
        return np.exp(c1[None, :] * s) / delta + w_out * np.exp(c2[None, :] * s)

    res = integrate_weighted_semiinfinite(integrand, spec or _inner_spec())
    return np.asarray(res.value).reshape(shape)


def _inner_spec():
    return QuadratureSpec(rtol=1e-8, atol=1e-13)


def _outer_spec():
    return QuadratureSpec(rtol=1e-6, atol=1e-10)


def ccdf_theorem1(t_threshold, config: SystemConfig, d_guard: float | None = None,
                  spec: QuadratureSpec | None = None):
    """P[SINR > T] from the closed form, for a scalar or an array of linear T.

    The outer integral runs over the serving distance x in metres, up to the
    point where the Rayleigh tail weight falls below exp(-truncation).
    """
    t = np.atleast_1d(np.asarray(t_threshold, dtype=float))
    if np.any(t < 0):
        raise ValueError("thresholds must be non-negative (linear scale)")
    spec = spec or _outer_spec()
    terms = AnalyticIntermediates.from_config(config, d_guard)
    az = terms.alzer
    n = az.n[:, None]                                   # (N, 1)
    scale = terms.scale(t[None, :], n)                  # (N, nT)
    nn = terms.n_script(t[None, :], n)
    weights = (az.weights[:, None] * np.exp(-scale))    # (N, nT)
    k_minus_1 = config.k_users - 1
    p = terms.exponent

    def outer(x):
        y = x[:, None, None] ** p                       # (nx, 1, 1)
        z = np.exp(-scale * (terms.a_coef * y + terms.b_coef * y * y))
        if k_minus_1:
            c1 = nn * (y + terms.p1 * terms.i1 * y * y)
            c2 = nn * y
            lx = mixture_integral(c1, c2, terms.delta, p / 2.0)
            z = z * lx ** k_minus_1
        return np.einsum("xnt,nt->xt", z, weights) * terms.f(x)[:, None]

    x_max = math.sqrt(spec.truncation / (math.pi * config.lambda_b))
    res = adaptive_quad(outer, 0.0, x_max, spec)
    out = np.clip(res.value, 0.0, 1.0)
    return float(out[0]) if np.ndim(t_threshold) == 0 else out


def y_of_delta(delta: float, t_threshold, config: SystemConfig,
               spec: QuadratureSpec | None = None):
    """Coverage as a function of the reuse factor with D = 2R*sqrt(delta).

    Evaluated in the density-free variable t = pi*lambda*x^2 against the
    e^-t weight.  Noise has no density-free form, so sigma2 > 0 is routed
    through :func:`ccdf_theorem1`.
    """
    cfg = config.replace(delta=delta, guard_radius=None)
    if cfg.sigma2 > 0:
        return ccdf_theorem1(t_threshold, cfg, spec=spec)
    t_thr = np.atleast_1d(np.asarray(t_threshold, dtype=float))
    if np.any(t_thr < 0):
        raise ValueError("thresholds must be non-negative (linear scale)")
    spec = spec or _outer_spec()
    az = alzer_terms(cfg.alzer_n)
    area = math.pi * cfg.lambda_b * (2.0 * cfg.inradius) ** 2 * delta
    b1 = b_omega(1, cfg.alpha, cfg.epsilon, area)
    b2 = b_omega(2, cfg.alpha, cfg.epsilon, area)
    m, kf, k = cfg.m_antennas, cfg.k_factor, cfg.k_users
    if cfg.b_coefficient == "theorem":
        quad_coef = ((m + 1) * b2 + (kf + 1.0 / delta - 1.0) * b1 ** 2) / delta
    else:
        quad_coef = ((m + 1) * b2 + kf * b1 ** 2) / delta
    lin_coef = (kf + 1.0 / delta) * b1
    p = cfg.alpha * (1.0 - cfg.epsilon)
    scale = az.eta * t_thr[None, :] * az.n[:, None] / m      # (N, nT)
    weights = az.weights[:, None] * np.exp(-scale)

    def integrand(t):
        th = t[:, None, None] ** (p / 2.0)
        q2 = scale * (lin_coef * th + quad_coef * th * th)
        val = np.exp(-q2)
        if k > 1:
            q1 = mixture_integral(-scale * (th + b1 * th * th), -scale * th, delta, p / 2.0)
            val = val * q1 ** (k - 1)
        return np.einsum("xnt,nt->xt", val, weights)

    res = integrate_weighted_semiinfinite(integrand, spec)
    out = np.clip(res.value, 0.0, 1.0)
    return float(out[0]) if np.ndim(t_threshold) == 0 else out


@dataclass(frozen=True)
class MinDeltaResult:
    feasible: bool
    delta_real: float | None
    delta_int: int | None
    y_at_delta: float | None
    monotone: bool = True


def solve_min_delta(gamma: float, t_threshold: float, config: SystemConfig,
                    delta_max: float = 20.0, grid_points: int = 39,
                    xtol: float = 1e-4) -> MinDeltaResult:
    """Smallest real delta in [1, delta_max] with y(delta) >= gamma.

    y is scanned on a coarse grid first; when the scan is non-decreasing the
    first feasible grid cell is bisected, otherwise the smallest feasible grid
    point is returned with ``monotone=False``.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if delta_max < 1:
        raise ValueError("delta_max must be >= 1")

    def y(d):
        return y_of_delta(d, t_threshold, config)

    grid = np.linspace(1.0, delta_max, grid_points) if delta_max > 1 else np.array([1.0])
    vals = np.array([y(d) for d in grid])
    monotone = bool(np.all(np.diff(vals) >= -1e-9))
    feasible = np.nonzero(vals >= gamma)[0]
    if feasible.size == 0:
        return MinDeltaResult(False, None, None, float(vals[-1]), monotone)
    first = int(feasible[0])
    if not monotone or first == 0:
        d = float(grid[first])
        return MinDeltaResult(True, d, math.ceil(d - 1e-12), float(vals[first]), monotone)
    lo, hi = float(grid[first - 1]), float(grid[first])
    y_hi = float(vals[first])
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        y_mid = y(mid)
        if y_mid >= gamma:
            hi, y_hi = mid, y_mid
        else:
            lo = mid
    return MinDeltaResult(True, hi, math.ceil(hi - 1e-12), y_hi, monotone)


def spectral_efficiency(ccdf, t_max: float, spec: QuadratureSpec | None = None) -> float:
    """Average user spectral efficiency (1/ln 2) int_0^Tmax P_C(T)/(1+T) dT.

    ``ccdf`` is either a callable taking an array of linear thresholds or a
    :class:`~pilot_reuse.montecarlo.CcdfCurve`.  Both are integrated in
    v = ln(1+T), where dT/(1+T) = dv: adaptively for callables, by the
    trapezoid rule on the curve's own grid otherwise (flat extrapolation
    beyond the grid ends).
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    v_max = math.log1p(t_max)
    if callable(ccdf):
        res = adaptive_quad(lambda v: np.asarray(ccdf(np.expm1(v)), dtype=float), 0.0, v_max,
                            spec or QuadratureSpec(rtol=1e-6, atol=1e-9))
        return float(res.value) / math.log(2.0)
    t = np.asarray(ccdf.thresholds, dtype=float)
    cov = np.asarray(ccdf.coverage, dtype=float)
    v = np.log1p(np.clip(t, 0.0, None))
    inner = (v > 0) & (v < v_max)
    grid = np.concatenate([[0.0], v[inner], [v_max]])
    vals = np.interp(grid, v, cov)
    return float(np.trapezoid(vals, grid)) / math.log(2.0)


def cell_throughput(k_users: int, delta: float, t_coherence: float, tau_0: float) -> float:
    """K * (1 - K*delta/T_C) * tau_0."""
    if k_users * delta > t_coherence:
        raise ValueError(
            f"pilot overhead K*delta = {k_users * delta} exceeds T_C = {t_coherence}")
    return k_users * (1.0 - k_users * delta / t_coherence) * tau_0


@dataclass(frozen=True)
class ThroughputResult:
    delta_star: int
    deltas: np.ndarray
    tau_0: np.ndarray
    tau_s: np.ndarray


def optimal_delta_throughput(config: SystemConfig, delta_range,
                             tau0_fn: Callable[[float], float] | None = None) -> ThroughputResult:
    """Cell throughput over integer reuse factors; ties go to the smaller delta.

    ``tau0_fn(delta)`` defaults to the analytic spectral efficiency with
    D = 2R*sqrt(delta).
    """
    deltas = np.asarray(list(delta_range), dtype=int)
    if deltas.size == 0:
        raise ValueError("empty delta range")
    if tau0_fn is None:
        def tau0_fn(d):
            cfg = config.replace(delta=int(d), guard_radius=None)
            return spectral_efficiency(lambda t: ccdf_theorem1(t, cfg), cfg.t_max)
    tau0 = np.array([tau0_fn(int(d)) for d in deltas], dtype=float)
    tau_s = np.array([cell_throughput(config.k_users, int(d), config.t_coherence, t0)
                      for d, t0 in zip(deltas, tau0)])
    best = int(np.argmax(tau_s))        # first maximum, i.e. smallest delta
    return ThroughputResult(int(deltas[best]), deltas, tau0, tau_s)
