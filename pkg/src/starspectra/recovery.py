"""Recovery of the jump data from characteristic-function traces.

The tools are T-averaged oscillatory moments

    M_p[f; w](A, T) = T**-p * integral_A^T f(k) w(k) dk,

taken against a small family of trigonometric weights.  Against the leading
model -(3/2) alpha1 k cos(k pi) [sin 2k pi + 3 beta sin 2k(pi-d) + beta sin 2kd]
they converge to

    M_2[omega; cos k pi sin 2k pi]           -> -(3/16) alpha1
    M_2[rest;  cos k pi sin 2k(pi - dhat)]   -> -(15/32) alpha1 beta   at dhat = d != pi/2
                                                -(3/8)  alpha1 beta   at dhat = d  = pi/2

and, for a = 1, the b term (b/2) cos k(pi - 2d) cos^2 k pi of a trace
difference gives M_1[diff; cos k(pi-2d) cos^2 k pi] -> (3/32)(b - b~).
Every other contribution is O(1/T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar

from .charfn import omega_trace
from .model import PI, CharTrace, EdgeSpec, PotentialSpec, StarProblem, a_from_beta
from .propagate import DEFAULT_SETTINGS, IntegratorSettings, propagate_edge1, solve_edge
from .spectrum import check_disjoint, enumerate_dirichlet, enumerate_eigenvalues

# calibration constants (see module docstring); pinned by the identity-jump tests
ALPHA1_PER_MOMENT = -16.0 / 3.0
BETA_PER_MOMENT = -32.0 / 15.0
BETA_PER_MOMENT_HALF_PI = -8.0 / 3.0
B_PER_MOMENT = 32.0 / 3.0

# 10 samples per period of the fastest component (3 pi in k) of omega
MAX_TRACE_SPACING = (2.0 / 3.0) / 10.0
DEFAULT_DK = 1.0 / 40.0


class GridTooCoarseError(ValueError):
    pass


class RegimeError(ValueError):
    pass


class HypothesisError(ValueError):
    pass


# -- weights and moments ------------------------------------------------------

WEIGHTS = {
    "cos_pi_sin_2pi": lambda k, d: np.cos(k * PI) * np.sin(2 * k * PI),
    "cos_pi_sin_pi": lambda k, d: np.cos(k * PI) * np.sin(k * PI),
    "cos_pi_sin_2(pi-d)": lambda k, d: np.cos(k * PI) * np.sin(2 * k * (PI - d)),
    "cos_pi_sin_2d": lambda k, d: np.cos(k * PI) * np.sin(2 * k * d),
    "xi": lambda k, d: np.cos(k * (PI - 2 * d)) * np.cos(k * PI) ** 2,
}


@dataclass(frozen=True)
class MomentSpec:
    weight: str
    p: int = 2
    A: float = 1.0
    T: float = 300.0
    d_hat: float | None = None

    def __post_init__(self):
        if self.weight not in WEIGHTS:
            raise ValueError(f"unknown weight {self.weight!r}")
        if self.p not in (1, 2):
            raise ValueError("normalization power must be 1 or 2")
        if not (self.A > 0 and self.T > self.A):
            raise ValueError("need 0 < A < T")
        if self.weight in ("cos_pi_sin_2(pi-d)", "cos_pi_sin_2d", "xi") and self.d_hat is None:
            raise ValueError(f"weight {self.weight!r} needs d_hat")

    @property
    def converges(self) -> bool:
        """Whether (A, T) is in the range where limits are meaningful."""
        return self.A >= 1.0 and self.T / self.A >= 10.0

    def w(self, k):
        return WEIGHTS[self.weight](k, self.d_hat)


def _quad_weights(x: np.ndarray) -> np.ndarray:
    """Composite Simpson weights on a uniform grid, trapezoid otherwise."""
    n = x.size
    h = np.diff(x)
    if n >= 3 and np.allclose(h, h[0], rtol=1e-9, atol=0):
        w = np.zeros(n)
        m = n if n % 2 == 1 else n - 1
        w[:m:2] = 2.0
        w[1:m:2] = 4.0
        w[0] = 1.0
        w[m - 1] = 1.0
        w[:m] *= h[0] / 3.0
        if m < n:
            w[-2:] += 0.5 * h[0]
        return w
    w = np.zeros(n)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def trace_grid(A: float, T: float, dk: float = DEFAULT_DK) -> np.ndarray:
    """Uniform k-grid from A to T inclusive with spacing <= dk."""
    n = math.ceil((T - A) / dk)
    return np.linspace(A, T, n + 1)


def _window(trace: CharTrace, A: float, T: float):
    k, v = trace.k, trace.values
    if k[0] > A + 1e-12 or k[-1] < T - 1e-12:
        raise ValueError(f"trace covers [{k[0]}, {k[-1]}], moment needs [{A}, {T}]")
    inside = (k >= A - 1e-12) & (k <= T + 1e-12)
    kk, vv = k[inside], v[inside]
    if kk.size < 3 or np.max(np.diff(kk)) > MAX_TRACE_SPACING:
        raise GridTooCoarseError(
            f"trace spacing {np.max(np.diff(kk)) if kk.size > 1 else np.inf:.4g} exceeds "
            f"{MAX_TRACE_SPACING:.4g} (10 samples per period of 3 pi)")
    return kk, vv


def moment(trace, spec: MomentSpec, dk: float = DEFAULT_DK) -> float:
    """T**-p * integral_A^T f(k) w(k) dk for a CharTrace or a callable f(k)."""
    if callable(trace):
        k = trace_grid(spec.A, spec.T, dk)
        f = np.asarray(trace(k), dtype=float)
    else:
        k, f = _window(trace, spec.A, spec.T)
    return float(np.dot(_quad_weights(k), f * spec.w(k)) / spec.T ** spec.p)


# -- the trigonometric moment oracle -----------------------------------------

def _gauss_panels(f, A, T, panel=0.05, order=8):
    nodes, wts = leggauss(order)
    n = max(1, math.ceil((T - A) / panel))
    edges = np.linspace(A, T, n + 1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * wts[None, :]).ravel()
    return float(np.dot(w, f(x)))


def trig_moment_limit(a: float, b1: float, b2: float, tol: float = 1e-12) -> float:
    """Limit of T**-2 int_A^T x cos^2(ax) sin(b1 x) sin(b2 x) dx as T -> infinity.

    Each vanishing frequency of the product-to-sum expansion contributes its
    coefficient times 1/2; for a != 0 this is the familiar four-case rule
    1/8 [b1=b2] - 1/8 [b1=-b2] + 1/16 [(2a)^2=(b1-b2)^2] - 1/16 [(2a)^2=(b1+b2)^2].
    """
    z = lambda v: abs(v) <= tol
    out = 0.125 * z(b1 - b2) - 0.125 * z(b1 + b2)
    out += 0.0625 * (z(2 * a + b1 - b2) + z(2 * a - b1 + b2))
    out -= 0.0625 * (z(2 * a + b1 + b2) + z(2 * a - b1 - b2))
    return float(out)


def trig_moment_oracle(a: float, b1: float, b2: float, A: float, T: float):
    """(numerical moment by Gauss-Legendre panels, analytic limit)."""
    if not T > A >= 1.0:
        raise ValueError("need T > A >= 1")
    f = lambda x: x * np.cos(a * x) ** 2 * np.sin(b1 * x) * np.sin(b2 * x)
    fastest = 2 * abs(a) + abs(b1) + abs(b2)
    panel = min(0.25, 1.0 / (1.0 + fastest))
    return _gauss_panels(f, A, T, panel) / T ** 2, trig_moment_limit(a, b1, b2)


def moment_error_envelope(a: float, b1: float, b2: float, A: float, T: float,
                          samples: int = 64) -> float:
    """Fitted c in |numeric - limit| <= c/T: max of x |err(x)| over x in [T/2, T]."""
    fastest = 2 * abs(a) + abs(b1) + abs(b2)
    panel = min(0.25, 1.0 / (1.0 + fastest))
    f = lambda x: x * np.cos(a * x) ** 2 * np.sin(b1 * x) * np.sin(b2 * x)
    lim = trig_moment_limit(a, b1, b2)
    xs = np.linspace(max(A, T / 2), T, samples)
    # cumulative integral from A through the sample points
    parts = [_gauss_panels(f, lo, hi, panel) for lo, hi in zip(np.r_[A, xs[:-1]], xs)]
    cum = np.cumsum(parts)
    return float(np.max(xs * np.abs(cum / xs ** 2 - lim)))


def oracle_draws(rng: np.random.Generator, n: int = 20, lo: float = 0.5, hi: float = 3.0,
                 min_gap: float = 0.5):
    """(a, b1, b2) triples: one per coincidence pattern, the rest generic.

    Nonzero frequencies of the product-to-sum expansion are kept at least
    ``min_gap`` from zero; the error constant scales like 1/frequency, so
    near-coincidences would need far larger T.
    """
    def freqs(a, b1, b2):
        return [b1 - b2, b1 + b2, 2 * a + b1 - b2, 2 * a - b1 + b2, 2 * a + b1 + b2, 2 * a - b1 - b2]

    def ok(t):
        return all(abs(f) < 1e-12 or abs(f) >= min_gap for f in freqs(*t))

    patterns = [
        lambda a, x, y: (a, x, x),              # b1 = b2
        lambda a, x, y: (a, x, -x),             # b1 = -b2
        lambda a, x, y: (a, x + 2 * a, x),      # (2a)^2 = (b1 - b2)^2
        lambda a, x, y: (a, x, 2 * a - x),      # (2a)^2 = (b1 + b2)^2
        lambda a, x, y: (a, a, a),              # b1 = b2 and 2a = b1 + b2
        lambda a, x, y: (a, -a, a),             # b1 = -b2 and 2a = b2 - b1
    ]
    out = []
    while len(out) < n:
        a, x, y = rng.uniform(lo, hi, 3)
        pat = patterns[len(out)] if len(out) < len(patterns) else (lambda a, x, y: (a, x, y))
        t = tuple(float(v) for v in pat(a, x, y))
        if ok(t):
            out.append(t)
    return out


# -- parameter recovery -------------------------------------------------------

@dataclass
class RecoveryResult:
    C_hat: float
    alpha1_hat: float
    a_hat: float
    beta_hat: float
    d_hat: float | None
    b_moment: float | None = None
    T_sweep: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "C_hat": self.C_hat, "alpha1_hat": self.alpha1_hat, "a_hat": self.a_hat,
            "beta_hat": self.beta_hat, "d_hat": self.d_hat, "b_moment": self.b_moment,
            "T_sweep": self.T_sweep, "flags": self.flags, "constants": self.constants,
        }


def alpha1_moment(trace: CharTrace, A: float, T: float) -> float:
    return moment(trace, MomentSpec("cos_pi_sin_2pi", 2, A, T))


def recover_C_alpha1(trace: CharTrace, ref_trace: CharTrace | None, A: float = 1.0,
                     T: float = 300.0, noise_floor: float = 1e-8):
    """(C_hat, alpha1_hat); C_hat compares against ``ref_trace`` (1.0 without one)."""
    m = alpha1_moment(trace, A, T)
    if abs(m) < noise_floor:
        raise ValueError("alpha1 moment below noise floor; trace carries no leading term")
    alpha1 = ALPHA1_PER_MOMENT * m
    if ref_trace is None:
        return 1.0, alpha1
    m_ref = alpha1_moment(ref_trace, A, T)
    if abs(m_ref) < noise_floor:
        raise ValueError("reference alpha1 moment below noise floor")
    return alpha1 / (ALPHA1_PER_MOMENT * m_ref), alpha1


def _d_scan(kk, wq, g, d_vals, T, chunk=256):
    """m(dhat) = T^-2 sum_k wq g sin 2k(pi - dhat) for many dhat at once."""
    out = np.empty(d_vals.size)
    gw = wq * g
    for s in range(0, d_vals.size, chunk):
        dv = d_vals[s:s + chunk]
        out[s:s + chunk] = np.sin(2.0 * np.outer(PI - dv, kk)) @ gw
    return out / T ** 2


def recover_beta_d(trace: CharTrace, alpha1_hat: float, d_grid=None, A: float = 1.0,
                   T: float = 300.0, beta_floor: float | None = None, ambiguity_rel: float = 0.1):
    """(beta_hat, d_hat, info).  d_hat is None when beta_hat is below the noise floor.

    The leading alpha1 term is subtracted first; the moment of what remains
    against cos k pi sin 2k(pi - dhat) peaks in modulus at dhat = d.  The
    default dhat grid samples the peak (width ~ 1/(2T)) at 8 points per
    width and is polished by a bounded scalar search.
    """
    kk, v = _window(trace, A, T)
    wq = _quad_weights(kk)
    rest = v + 1.5 * alpha1_hat * kk * np.cos(kk * PI) * np.sin(2 * kk * PI)
    g = rest * np.cos(kk * PI)
    if d_grid is None:
        d_grid = np.arange(0.05, PI - 0.05, 1.0 / (16.0 * T))
    d_grid = np.asarray(d_grid, dtype=float)
    m = _d_scan(kk, wq, g, d_grid, T)
    absm = np.abs(m)
    i = int(np.argmax(absm))
    spacing = d_grid[1] - d_grid[0] if d_grid.size > 1 else 1e-3
    lo, hi = d_grid[max(i - 1, 0)], d_grid[min(i + 1, d_grid.size - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -abs(_d_scan(kk, wq, g, np.array([x]), T)[0]),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-7})
        d_hat, m_peak = float(res.x), float(_d_scan(kk, wq, g, np.array([res.x]), T)[0])
    else:
        d_hat, m_peak = float(d_grid[i]), float(m[i])

    # other local maxima within ambiguity_rel of the peak, well separated from it
    locmax = np.flatnonzero((absm[1:-1] >= absm[:-2]) & (absm[1:-1] >= absm[2:])) + 1
    rivals = [float(d_grid[j]) for j in locmax
              if absm[j] >= (1 - ambiguity_rel) * absm[i] and abs(d_grid[j] - d_hat) > 10 * spacing]
    if rivals:
        # prefer the candidate below pi/2
        cands = sorted([d_hat] + rivals, key=lambda x: (x >= PI / 2, -abs(
            _d_scan(kk, wq, g, np.array([x]), T)[0])))
        if cands[0] != d_hat:
            d_hat = cands[0]
            m_peak = float(_d_scan(kk, wq, g, np.array([d_hat]), T)[0])

    half_pi = abs(d_hat - PI / 2) < max(4 * spacing, 2.0 / T)
    const = BETA_PER_MOMENT_HALF_PI if half_pi else BETA_PER_MOMENT
    beta = const * m_peak / alpha1_hat
    if beta_floor is None:
        beta_floor = max(0.01, 1.0 / T)
    info = {"peak_moment": m_peak, "rivals": rivals, "ambiguous": bool(rivals),
            "beta_floor": beta_floor, "half_pi_branch": half_pi, "beta_constant": const}
    if abs(beta) < beta_floor:
        info.update(no_amplitude_jump=True, ambiguous=False, rivals=[])
        return 0.0, None, info
    info["no_amplitude_jump"] = False
    return float(beta), d_hat, info


def a_from_alpha1(alpha1: float, beta_sign: float) -> float:
    """Root of (a + 1/a)/2 = alpha1 on the side picked by sign(beta)."""
    alpha1 = max(alpha1, 1.0)
    r = alpha1 + math.sqrt(alpha1 * alpha1 - 1.0)
    return r if beta_sign >= 0 else 1.0 / r


def recover(trace: CharTrace, ref_trace: CharTrace | None = None, A: float = 1.0,
            T: float = 300.0, T_sweep=None) -> RecoveryResult:
    """Full pipeline: alpha1 and C, then (beta, d), then a; with a T sweep."""
    if T_sweep is None:
        T_sweep = [t for t in (25, 50, 100, 150, 200, 250, 300, 400, 500, 750, 1000) if A < t < T] + [T]
    sweep = []
    res = None
    for t in T_sweep:
        C, alpha1 = recover_C_alpha1(trace, ref_trace, A, t)
        beta, d_hat, info = recover_beta_d(trace, alpha1, A=A, T=t)
        a_hat = a_from_beta(beta) if beta else 1.0
        sweep.append({"T": t, "alpha1": alpha1, "C": C, "beta": beta, "d": d_hat, "a": a_hat})
        res = RecoveryResult(C, alpha1, a_hat, beta, d_hat, None,
                             flags={"no_amplitude_jump": info["no_amplitude_jump"],
                                    "ambiguous_d": info["ambiguous"], "rivals": info["rivals"],
                                    "d_undefined": d_hat is None,
                                    "a_from_alpha1": a_from_alpha1(alpha1, beta)},
                             constants={"alpha1_per_moment": ALPHA1_PER_MOMENT,
                                        "beta_per_moment": info["beta_constant"],
                                        "b_per_moment": B_PER_MOMENT, "A": A, "T": t,
                                        "beta_floor": info["beta_floor"]})
    res.T_sweep = sweep
    return res


def detect_b(trace: CharTrace, ref_trace: CharTrace, d_hat: float, A: float = 1.0,
             T: float = 300.0, alpha1_tol: float = 0.05) -> float:
    """Estimate b - b~ from the xi-moment of the trace difference (a = a~ = 1 only)."""
    if not d_hat < PI / 2:
        raise RegimeError("b detection needs d < pi/2 to isolate the b coefficient")
    for tr, name in ((trace, "trace"), (ref_trace, "reference")):
        alpha1 = ALPHA1_PER_MOMENT * alpha1_moment(tr, A, T)
        if abs(alpha1 - 1.0) > alpha1_tol:
            raise RegimeError(f"{name} has alpha1 ~ {alpha1:.4f}; b detection presumes a = 1")
    diff = trace - ref_trace
    return B_PER_MOMENT * moment(diff, MomentSpec("xi", 1, A, T, d_hat))


# -- Green's identity and the mean identities ---------------------------------

def _same_on(q: PotentialSpec, qt: PotentialSpec, lo: float, hi: float, tol=1e-12) -> bool:
    xs = np.linspace(lo, hi, 401)[1:-1]
    return bool(np.max(np.abs(q(xs) - qt(xs))) <= tol)


def _check_matching(p: StarProblem, pt: StarProblem):
    if p.jump.a != pt.jump.a:
        raise HypothesisError(f"a={p.jump.a} differs from a~={pt.jump.a}")
    if p.jump.d != pt.jump.d:
        raise HypothesisError(f"d={p.jump.d} differs from d~={pt.jump.d}")
    if not _same_on(p.edges[0].q, pt.edges[0].q, PI / 2, PI):
        raise HypothesisError("q1 and q1~ differ on (pi/2, pi)")


def green_identity_check(p: StarProblem, pt: StarProblem, lam: float,
                         settings: IntegratorSettings = DEFAULT_SETTINGS, order: int = 10):
    """(lhs, rhs) of the edge-1 Wronskian identity at x = pi.

    lhs = (h1 - h1~) + a (b - b~) phi1(d-0) phi1~(d-0) + int_0^{pi/2} (q1 - q1~) phi1 phi1~,
    rhs = phi1'(pi) phi1~(pi) - phi1(pi) phi1~'(pi).
    """
    _check_matching(p, pt)
    e, et = p.edges[0], pt.edges[0]
    jump, jt = p.jump, pt.jump
    b1, bt = propagate_edge1(e, jump, lam, settings), propagate_edge1(et, jt, lam, settings)
    s, st = math.exp(float(b1.log_scale)), math.exp(float(bt.log_scale))
    rhs = float(b1.dphi_end * s * bt.phi_end * st - b1.phi_end * s * bt.dphi_end * st)

    dq = e.q - et.q
    cuts = sorted({0.0, PI / 2, *(x for x in dq.breakpoints if x < PI / 2),
                   *([jump.d] if jump.d < PI / 2 else [])})
    k = math.sqrt(abs(lam))
    panel = min(0.1, 1.0 / (1.0 + k))
    nodes, wts = leggauss(order)
    xs, ws = [], []
    for lo, hi in zip(cuts, cuts[1:]):
        n = max(1, math.ceil((hi - lo) / panel))
        edges = np.linspace(lo, hi, n + 1)
        for x0, x1 in zip(edges, edges[1:]):
            xs.append(0.5 * (x0 + x1) + 0.5 * (x1 - x0) * nodes)
            ws.append(0.5 * (x1 - x0) * wts)
    xs, ws = np.concatenate(xs), np.concatenate(ws)
    y, _ = solve_edge(e, lam, xs, jump, settings)
    yt, _ = solve_edge(et, lam, xs, jt, settings)
    integral = float(np.dot(ws, dq(xs) * y * yt))
    ym = float(b1.phi_at_d_minus * math.exp(float(b1.log_scale_d)))
    ytm = float(bt.phi_at_d_minus * math.exp(float(bt.log_scale_d)))
    lhs = (e.h - et.h) + jump.a * (jump.b - jt.b) * ym * ytm + integral
    return lhs, rhs


def mean_identity_predictions(p: StarProblem, pt: StarProblem):
    """Predicted (b - b~, h1 - h1~) from the q1 difference alone.

    b - b~   = -(a^2 - a^-2)/(2a) * int_d^{pi/2} dq
    h1 - h1~ = -(1/2) int_0^d dq - 1/(2 a^2) int_d^{pi/2} dq
    """
    a, d = p.jump.a, p.jump.d
    dq = p.edges[0].q - pt.edges[0].q
    i_left = dq.integrate(0.0, d)
    i_mid = dq.integrate(d, PI / 2)
    coef = (a * a - 1.0 / (a * a)) / (2.0 * a)
    b_gap = -coef * i_mid if coef != 0.0 else 0.0
    h_gap = -0.5 * i_left - i_mid / (2.0 * a * a)
    return b_gap, h_gap


# -- uniqueness direction -----------------------------------------------------

def bump(lo: float, hi: float, height: float = 1.0) -> PotentialSpec:
    """Quadratic bump of the given peak height supported on [lo, hi]."""
    c = 4.0 * height / (hi - lo) ** 2
    bp = [0.0, lo, hi, PI] if hi < PI else [0.0, lo, PI]
    rows = [[0.0], [0.0, c * (hi - lo), -c]] + ([[0.0]] if hi < PI else [])
    if lo == 0.0:
        bp, rows = bp[1:], rows[1:]
    return PotentialSpec.piecewise(bp, rows)


def perturb(base: StarProblem, kind: str, amount: float) -> StarProblem:
    e1 = base.edges[0]
    if kind == "q1":
        return base.replace_edge(0, EdgeSpec(e1.q + bump(0.2, 1.4, amount), e1.h))
    if kind == "h1":
        return base.replace_edge(0, EdgeSpec(e1.q, e1.h + amount))
    if kind in ("a", "b", "d"):
        return base.with_jump(**{kind: getattr(base.jump, kind) + amount})
    raise ValueError(f"unknown perturbation {kind!r}")


def first_eigenvalues(problem: StarProblem, count: int, settings=DEFAULT_SETTINGS) -> np.ndarray:
    k_max = count / 3.0 + 2.0
    spec = enumerate_eigenvalues(problem, k_max, settings=settings, strict=False)
    lams = spec.expanded()
    if lams.size < count:
        raise RuntimeError(f"only {lams.size} eigenvalues below k={k_max}")
    return lams[:count]


@lru_cache(maxsize=16)
def _base_data(base: StarProblem, k_max: float, gap_tol: float, settings: IntegratorSettings):
    omega_spec = enumerate_eigenvalues(base, k_max, settings=settings, strict=False)
    clashes = []
    for j in (1, 2):
        sig = enumerate_dirichlet(base.edges[j], k_max, settings=settings)
        clashes += check_disjoint(omega_spec, sig, gap_tol)
    return omega_spec, tuple(clashes)


def uniqueness_experiment(base: StarProblem, perturbation: tuple[str, float], n_eigs: int = 30,
                          gap_tol: float = 1e-6, settings=DEFAULT_SETTINGS) -> dict:
    """Max eigenvalue displacement caused by one parameter perturbation."""
    kind, amount = perturbation
    k_max = n_eigs / 3.0 + 2.0
    omega_spec, clashes = _base_data(base, k_max, gap_tol, settings)
    hyp = {"d_below_half_pi": base.jump.d < PI / 2, "disjoint": not clashes,
           "clashes": list(clashes)}
    lam0 = omega_spec.expanded()[:n_eigs]
    lam1 = first_eigenvalues(perturb(base, kind, amount), n_eigs, settings)
    disp = float(np.max(np.abs(lam1 - lam0)))
    return {"kind": kind, "amount": amount, "displacement": disp, "hypotheses": hyp,
            "n_eigs": n_eigs}


def forward_trace(problem: StarProblem, A: float = 1.0, T: float = 300.0,
                  dk: float = DEFAULT_DK, settings=DEFAULT_SETTINGS) -> CharTrace:
    return omega_trace(problem, trace_grid(A, T, dk), settings)
