"""Independent reference computations shared by the tests."""

import numpy as np
from scipy.integrate import solve_ivp


def reference_solution(edge, lam, x_end, jump=None):
    """Independent DOP853 integration with the jump applied in between."""
    def rhs(x, y):
        return [y[1], (edge.q(x) - lam) * y[0]]

    opts = dict(method="DOP853", rtol=1e-13, atol=1e-13)
    bps = sorted({0.0, *[b for b in edge.q.breakpoints if b < x_end], x_end}
                 | ({jump.d} if jump is not None and jump.d < x_end else set()))
    y = np.array([1.0, edge.h])
    for x0, x1 in zip(bps, bps[1:]):
        y = solve_ivp(rhs, (x0, x1), y, **opts).y[:, -1]
        if jump is not None and x1 == jump.d:
            y = np.array([jump.a * y[0], y[1] / jump.a + jump.b * y[0]])
    return y


def closed_form_edge1(x, lam, a, b, d, h):
    """q = 0 solution with Robin data h, jump (a, b) at d; complex k covers lam < 0."""
    k = np.sqrt(complex(lam))
    if abs(k) < 1e-12:
        c = lambda t: 1.0
        s = lambda t: t
        cp = lambda t: 0.0
    else:
        c = lambda t: np.cos(k * t)
        s = lambda t: np.sin(k * t) / k
        cp = lambda t: -k * np.sin(k * t)
    y = lambda t: c(t) + h * s(t)
    yp = lambda t: cp(t) + h * c(t)
    if x < d:
        return y(x).real, yp(x).real
    Y, Yp = a * y(d), yp(d) / a + b * y(d)
    t = x - d
    return (Y * c(t) + Yp * s(t)).real, (Y * cp(t) + Yp * c(t)).real
