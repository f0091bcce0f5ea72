"""Initial-value solutions phi_j(x, lam) with y(0) = 1, y'(0) = h.

The first-order system Y' = [[0, 1], [q - lam, 0]] Y is advanced with the
fourth-order two-point Gauss Magnus step.  Its exponent is traceless, so the
step matrix is evaluated in closed form (cosh/sinh or cos/sin) and has
determinant one exactly; for a constant potential the step is the exact
propagator, so constant pieces take a single step regardless of lam.

All routines accept scalar or array ``lam`` and broadcast over it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .model import PI, EdgeSpec, JumpSpec

_GAUSS_OFF = math.sqrt(3.0) / 6.0
_MAGNUS_C = math.sqrt(3.0) / 12.0
# per-step exponent bound; keeps cosh from overflowing inside one step
_MAX_GROWTH = 30.0
_RESCALE_AT = 1e100


class IntegratorError(RuntimeError):
    def __init__(self, message, lam=None, x=None):
        super().__init__(f"{message} (lambda={lam}, x={x})")
        self.lam = lam
        self.x = x


@dataclass(frozen=True)
class IntegratorSettings:
    """Step control.  ``rtol`` sets the smooth-piece step as ``rtol**(1/4)``."""

    rtol: float = 1e-10
    max_step: float | None = None

    @property
    def step(self) -> float:
        if self.max_step is not None:
            return self.max_step
        return min(0.05, 2.0 * self.rtol ** 0.25)


DEFAULT_SETTINGS = IntegratorSettings()


@dataclass(frozen=True)
class SolutionState:
    """(y, y') at x; true values are ``y * exp(log_scale)``."""

    x: float
    y: np.ndarray
    yp: np.ndarray
    lam: np.ndarray
    log_scale: np.ndarray | float = 0.0

    def unscaled(self) -> tuple[np.ndarray, np.ndarray]:
        s = np.exp(self.log_scale)
        return self.y * s, self.yp * s


@dataclass(frozen=True)
class BoundaryData:
    phi_end: np.ndarray
    dphi_end: np.ndarray
    phi_at_d_minus: np.ndarray | None = None
    log_scale: np.ndarray | float = 0.0
    log_scale_d: np.ndarray | float = 0.0


def _step_coeffs(mu):
    """cosh(sqrt(mu)) and sinh(sqrt(mu))/sqrt(mu), continued to mu < 0."""
    r = np.sqrt(np.abs(mu))
    pos = mu > 0
    cval = np.where(pos, np.cosh(np.where(pos, r, 0.0)), np.cos(r))
    small = r < 1e-6
    safe_r = np.where(small, 1.0, r)
    sval = np.where(pos, np.sinh(np.where(pos, safe_r, 0.0)), np.sin(safe_r)) / safe_r
    sval = np.where(small, 1.0 + mu / 6.0, sval)
    return cval, sval


def _piece_index(q, x0):
    bp = q.breakpoints
    return min(max(int(np.searchsorted(bp, x0, side="right")) - 1, 0), len(q.coeffs) - 1)


def _intervals(edge: EdgeSpec, points, lam_min, settings):
    """Mesh intervals [(x0, x1, nsub, row, offset)] covering [0, max(points)].

    Breakpoints of q and all requested points are forced mesh nodes.
    """
    end = max(points)
    nodes = sorted({0.0, *[b for b in edge.q.breakpoints if b < end], *points})
    out = []
    for x0, x1 in zip(nodes, nodes[1:]):
        if x1 - x0 <= 0:
            continue
        i = _piece_index(edge.q, 0.5 * (x0 + x1))
        row = np.asarray(edge.q.coeffs[i], dtype=float)
        bp = edge.q.breakpoints[i]
        length = x1 - x0
        n = 1 if row.size == 1 or np.all(row[1:] == 0) else math.ceil(length / settings.step)
        grid = np.linspace(x0 - bp, x1 - bp, 9)
        vmax = float(np.max(P.polyval(grid, row))) - lam_min
        if vmax > 0:
            n = max(n, math.ceil(length * math.sqrt(vmax) / _MAX_GROWTH))
        out.append((x0, x1, n, row, bp))
    return out


def _march(edge: EdgeSpec, lam, y, yp, logs, x_from, x_to, intervals, record=None):
    for x0, x1, n, row, bp in intervals:
        if x1 <= x_from or x0 >= x_to:
            continue
        h = (x1 - x0) / n
        for s in range(n):
            xa = x0 + s * h
            loc = xa - bp
            q1 = P.polyval(loc + h * (0.5 - _GAUSS_OFF), row)
            q2 = P.polyval(loc + h * (0.5 + _GAUSS_OFF), row)
            c = _MAGNUS_C * h * h * (q1 - q2)
            vbar = 0.5 * (q1 + q2) - lam
            mu = c * c + h * h * vbar
            cv, sv = _step_coeffs(mu)
            # exp(Omega) = cv I + sv Omega,  Omega = [[c, h], [h vbar, -c]]
            y, yp = (cv + sv * c) * y + sv * h * yp, sv * h * vbar * y + (cv - sv * c) * yp
            big = np.maximum(np.abs(y), np.abs(yp))
            if np.any(big > _RESCALE_AT):
                f = np.where(big > _RESCALE_AT, big, 1.0)
                y, yp, logs = y / f, yp / f, logs + np.log(f)
        if record is not None:
            record(x1, y, yp, logs)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(yp))):
        bad = np.flatnonzero(~(np.isfinite(y) & np.isfinite(yp)))
        raise IntegratorError("non-finite solution", lam=np.atleast_1d(lam)[bad[0]], x=x_to)
    return y, yp, logs


def _initial(edge, lam):
    lam = np.asarray(lam, dtype=float)
    one = np.ones_like(lam)
    return lam, one, edge.h * one, np.zeros_like(lam)


def propagate_edge(edge: EdgeSpec, lam, stop_at: float = PI,
                   settings: IntegratorSettings = DEFAULT_SETTINGS) -> SolutionState:
    """Solve -y'' + q y = lam y, y(0)=1, y'(0)=h, and return the state at ``stop_at``."""
    if not 0.0 <= stop_at <= PI:
        raise ValueError("stop_at must lie in [0, pi]")
    lam, y, yp, logs = _initial(edge, lam)
    if stop_at == 0.0:
        return SolutionState(0.0, y, yp, lam, logs)
    iv = _intervals(edge, [stop_at], float(np.min(lam)), settings)
    y, yp, logs = _march(edge, lam, y, yp, logs, 0.0, stop_at, iv)
    return SolutionState(stop_at, y, yp, lam, logs)


def apply_jump(state: SolutionState, jump: JumpSpec, tol: float = 1e-12) -> SolutionState:
    """Transmission map (y, y') -> (a y, y'/a + b y) at x = d."""
    if abs(state.x - jump.d) > 1e-12:
        raise ValueError(f"jump applied at x={state.x}, expected d={jump.d}")
    a, b = jump.a, jump.b
    m = np.array([[a, 0.0], [b, 1.0 / a]])
    det = np.linalg.det(m)
    assert abs(det - 1.0) < tol, f"transfer determinant {det} != 1"
    return SolutionState(state.x, a * state.y, state.yp / a + b * state.y, state.lam, state.log_scale)


def solve_edge(edge: EdgeSpec, lam, xs, jump: JumpSpec | None = None,
               settings: IntegratorSettings = DEFAULT_SETTINGS):
    """Dense output: (y, y') at each x in ``xs`` (ascending), shape (len(xs),) + lam.shape.

    With ``jump`` given, the transmission conditions are applied at jump.d; a
    sample exactly at d returns the d+0 state.  Values are unscaled.
    """
    xs = np.asarray(xs, dtype=float)
    if np.any(np.diff(xs) < 0) or xs.size and (xs[0] < 0 or xs[-1] > PI):
        raise ValueError("xs must be ascending in [0, pi]")
    lam, y, yp, logs = _initial(edge, lam)
    pts = list(xs) + ([jump.d] if jump is not None else [])
    if not pts or max(pts) == 0.0:
        pts.append(PI)
    iv = _intervals(edge, pts, float(np.min(lam)), settings)
    shape = (xs.size,) + lam.shape
    ys, yps = np.empty(shape), np.empty(shape)
    wanted = {}
    for i, x in enumerate(xs):
        wanted.setdefault(float(x), []).append(i)

    state = {"y": y, "yp": yp, "logs": logs}

    def store(x, y, yp, logs):
        for i in wanted.get(x, ()):
            s = np.exp(logs)
            ys[i], yps[i] = y * s, yp * s

    store(0.0, y, yp, logs)
    x = 0.0
    stops = sorted({*xs.tolist(), *(([jump.d]) if jump is not None else []), max(pts)})
    for stop in stops:
        if stop == 0.0:
            continue
        seg = [iv_ for iv_ in iv if iv_[0] >= x and iv_[1] <= stop]
        y, yp, logs = _march(edge, lam, state["y"], state["yp"], state["logs"], x, stop, seg)
        x = stop
        if jump is not None and stop == jump.d:
            st = apply_jump(SolutionState(x, y, yp, lam, logs), jump)
            y, yp = st.y, st.yp
        state.update(y=y, yp=yp, logs=logs)
        store(x, y, yp, logs)
    return ys, yps


def propagate_edge1(edge: EdgeSpec, jump: JumpSpec, lam,
                    settings: IntegratorSettings = DEFAULT_SETTINGS) -> BoundaryData:
    """phi_1 and phi_1' at x = pi, with the jump applied at d; also phi_1(d-0)."""
    lam, y, yp, logs = _initial(edge, lam)
    iv = _intervals(edge, [jump.d, PI], float(np.min(lam)), settings)
    y, yp, logs = _march(edge, lam, y, yp, logs, 0.0, jump.d, [i for i in iv if i[1] <= jump.d])
    y_dm, logs_d = y, logs
    st = apply_jump(SolutionState(jump.d, y, yp, lam, logs), jump)
    y, yp, logs = _march(edge, lam, st.y, st.yp, logs, jump.d, PI, [i for i in iv if i[0] >= jump.d])
    return BoundaryData(y, yp, y_dm, logs, logs_d)


def edge_boundary(edge: EdgeSpec, lam, settings: IntegratorSettings = DEFAULT_SETTINGS) -> BoundaryData:
    st = propagate_edge(edge, lam, PI, settings)
    return BoundaryData(st.y, st.yp, None, st.log_scale)


def _cos_sin_k(x, lam):
    """cos(kx) and sin(kx)/k for k = sqrt(lam), continued analytically to lam <= 0."""
    lam = np.asarray(lam, dtype=float)
    cv, sv = _step_coeffs(-lam * x * x)
    return cv, sv * x


def phi0(x, lam, jump: JumpSpec):
    """Unperturbed jump solution (q = 0, h = 0, b = 0) on [0, 2 pi].

    cos(kx) for x < d; a cos k(x-d) cos kd - (1/a) sin k(x-d) sin kd for x > d.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(x < 0) or np.any(x > 2 * PI):
        raise ValueError("phi0 is defined for x in [0, 2 pi]")
    a, d = jump.a, jump.d
    c_x, _ = _cos_sin_k(x, lam)
    c_d, s_d = _cos_sin_k(d, lam)
    c_xd, s_xd = _cos_sin_k(x - d, lam)
    # sin k(x-d) sin kd = lam * (sin k(x-d)/k) (sin kd/k)
    right = a * c_xd * c_d - (1.0 / a) * lam * s_xd * s_d
    return np.where(x < d, c_x, right)
