"""Characteristic functions of the star problem.

``omega`` is the 3x3 determinant built from the initial-value solutions at
the central vertex, expanded as

    omega = phi1' phi2 phi3 + phi1 phi2' phi3 + phi1 phi2 phi3'   (at x = pi).

``omega0`` is its leading model for large real k,

    -(3/2) alpha1 k cos(k pi) [sin 2k pi + 3 beta sin 2k(pi - d) + beta sin 2kd],

which is exact when every q_j = 0, every h_j = 0 and b = 0.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import polygamma

from .model import PI, CharTrace, EdgeSpec, JumpSpec, Spectrum, StarProblem, beta_of
from .propagate import DEFAULT_SETTINGS, IntegratorSettings, edge_boundary, propagate_edge1


class TrustRegionError(ValueError):
    """Raised when a truncated product is evaluated too far out."""


def boundary_data(problem: StarProblem, lam, settings: IntegratorSettings = DEFAULT_SETTINGS):
    e1, e2, e3 = problem.edges
    return (propagate_edge1(e1, problem.jump, lam, settings),
            edge_boundary(e2, lam, settings),
            edge_boundary(e3, lam, settings))


def omega_scaled(problem: StarProblem, lam, settings: IntegratorSettings = DEFAULT_SETTINGS):
    """(mantissa, log_scale) with omega = mantissa * exp(log_scale).

    Only deep negative lam ever has a nonzero log scale; the sign of the
    mantissa is always the sign of omega.
    """
    b1, b2, b3 = boundary_data(problem, lam, settings)
    m = (b1.dphi_end * b2.phi_end * b3.phi_end
         + b1.phi_end * b2.dphi_end * b3.phi_end
         + b1.phi_end * b2.phi_end * b3.dphi_end)
    return m, b1.log_scale + b2.log_scale + b3.log_scale


def omega(problem: StarProblem, lam, settings: IntegratorSettings = DEFAULT_SETTINGS):
    m, logs = omega_scaled(problem, lam, settings)
    return m * np.exp(logs)


def omega_det(problem: StarProblem, lam, settings: IntegratorSettings = DEFAULT_SETTINGS):
    """omega from the literal 3x3 determinant (cross-check of the expansion)."""
    b1, b2, b3 = boundary_data(problem, lam, settings)
    s1, s2, s3 = (np.exp(b.log_scale) for b in (b1, b2, b3))
    p1, p2, p3 = b1.phi_end * s1, b2.phi_end * s2, b3.phi_end * s3
    d1, d2, d3 = b1.dphi_end * s1, b2.dphi_end * s2, b3.dphi_end * s3
    z = np.zeros_like(p1)
    mat = np.stack([np.stack([p1, -p2, z], -1),
                    np.stack([p1, z, -p3], -1),
                    np.stack([d1, d2, d3], -1)], -2)
    return np.linalg.det(mat)


def _bracket(k, jump: JumpSpec):
    beta = beta_of(jump)
    d = jump.d
    return np.sin(2 * k * PI) + 3 * beta * np.sin(2 * k * (PI - d)) + beta * np.sin(2 * k * d)


def omega0(jump: JumpSpec, lam):
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("omega0 is only used on the real k axis (lam >= 0)")
    k = np.sqrt(lam)
    return -1.5 * jump.alpha1 * k * np.cos(k * PI) * _bracket(k, jump)


def omega_residual(problem: StarProblem, lam, settings: IntegratorSettings = DEFAULT_SETTINGS):
    return omega(problem, lam, settings) - omega0(problem.jump, lam)


def dirichlet_charfn(edge: EdgeSpec, lam, settings: IntegratorSettings = DEFAULT_SETTINGS):
    """phi_i(pi, lam); its zeros form the Dirichlet spectrum of the edge."""
    b = edge_boundary(edge, lam, settings)
    return b.phi_end * np.exp(b.log_scale)


def omega_trace(problem: StarProblem, k, settings: IntegratorSettings = DEFAULT_SETTINGS) -> CharTrace:
    k = np.asarray(k, dtype=float)
    return CharTrace(k, omega(problem, k * k, settings), "forward-solve",
                     {"rtol": settings.rtol, "step": settings.step})


def omega0_trace(jump: JumpSpec, k) -> CharTrace:
    k = np.asarray(k, dtype=float)
    return CharTrace(k, omega0(jump, k * k), "model-omega0", {})


# -- Hadamard rebuild ---------------------------------------------------------

def model_zeros_k(jump: JumpSpec, k_lo: float, k_hi: float) -> np.ndarray:
    """Positive-k zeros of omega0 in [k_lo, k_hi), repeated by multiplicity.

    cos(k pi) contributes every half-integer.  When 4|beta| < 1 the bracket
    changes sign across each (j/2 - 1/4, j/2 + 1/4), j >= 1, and has exactly
    one zero there; otherwise a fine scan is used.
    """
    out = [m - 0.5 for m in range(max(1, math.ceil(k_lo + 0.5)), math.ceil(k_hi + 0.5) + 1)
           if k_lo <= m - 0.5 < k_hi]
    f = lambda k: float(_bracket(k, jump))
    if 4 * abs(beta_of(jump)) < 1:
        j0 = max(1, math.floor(2 * (k_lo - 0.25)))
        j1 = math.ceil(2 * (k_hi + 0.25))
        for j in range(j0, j1 + 1):
            lo, hi = j / 2 - 0.25, j / 2 + 0.25
            r = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            if k_lo <= r < k_hi:
                out.append(r)
    else:
        grid = np.arange(max(k_lo, 1e-9), k_hi + 0.005, 0.005) + 0.0021
        vals = _bracket(grid, jump)
        for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
            r = brentq(f, grid[i], grid[i + 1], xtol=1e-15)
            if k_lo <= r < k_hi:
                out.append(r)
    return np.sort(np.asarray(out, dtype=float))


def model_tail(jump: JumpSpec, lam, k_cut: float, k_far: float | None = None):
    """prod over model zeros with sqrt(mu) >= k_cut of (1 - lam/mu).

    Explicit up to ``k_far``; beyond it the zeros are taken on the identity
    pattern (one per integer, two per half-integer) and summed with
    polygamma remainders.
    """
    lam = np.asarray(lam, dtype=float)
    k_far = math.ceil(k_far or max(8.0 * k_cut, 200.0))
    mu = model_zeros_k(jump, k_cut, k_far) ** 2
    fac = 1.0 - lam[..., None] / mu
    sign = np.prod(np.sign(fac), axis=-1)
    with np.errstate(divide="ignore"):
        log_t = np.sum(np.log(np.abs(fac)), axis=-1)
    # integers m >= k_far and (double) half-integers m + 1/2 >= k_far
    M = k_far
    s2 = float(polygamma(1, M) + 2 * polygamma(1, M + 0.5))
    s4 = float((polygamma(3, M) + 2 * polygamma(3, M + 0.5)) / 6.0)
    log_t -= lam * s2 + 0.5 * lam * lam * s4
    return sign * np.exp(log_t)


def _window_entries(spectrum: Spectrum):
    n = spectrum.truncation
    if n <= 0:
        raise ValueError("spectrum has no truncation index")
    bound = (n + 0.25) ** 2
    return [e for e in spectrum.entries if e.lam < bound]


def hadamard_product(spectrum: Spectrum, lam, jump_model: JumpSpec | None = None,
                     zero_tol: float = 1e-10):
    """Unnormalized product lam^m0 prod (1 - lam/lam_n)^mult times the model tail."""
    lam = np.asarray(lam, dtype=float)
    n = spectrum.truncation
    if np.any(np.sqrt(np.abs(lam)) >= 0.5 * n):
        raise TrustRegionError(f"sqrt(lambda) must stay below {0.5 * n} for truncation N={n}")
    jump_model = jump_model or JumpSpec(1.0, 0.0, 1.0, declared=False)
    out = np.ones_like(lam)
    for e in _window_entries(spectrum):
        if abs(e.lam) < zero_tol:
            out = out * lam ** e.multiplicity
        else:
            out = out * (1.0 - lam / e.lam) ** e.multiplicity
    return out * model_tail(jump_model, lam, n + 0.25)


def hadamard_normalization(spectrum: Spectrum, omega_ref: float, lam_ref: float = -1.0,
                           jump_model: JumpSpec | None = None) -> float:
    """Constant making the rebuild agree with ``omega_ref`` at ``lam_ref``."""
    base = float(hadamard_product(spectrum, lam_ref, jump_model))
    if base == 0.0:
        raise ValueError("reference point is a zero of the product")
    return omega_ref / base


def hadamard_rebuild(spectrum: Spectrum, normalization: float, lam,
                     jump_model: JumpSpec | None = None):
    return normalization * hadamard_product(spectrum, lam, jump_model)


def hadamard_trace(spectrum: Spectrum, normalization: float, k,
                   jump_model: JumpSpec | None = None) -> CharTrace:
    k = np.asarray(k, dtype=float)
    vals = hadamard_rebuild(spectrum, normalization, k * k, jump_model)
    return CharTrace(k, vals, "hadamard-product",
                     {"truncation": spectrum.truncation, "lambda_ref": -1.0,
                      "normalization": normalization})
