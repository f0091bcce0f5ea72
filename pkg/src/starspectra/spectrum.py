"""Eigenvalue enumeration on the real axis.

All zeros of the characteristic function are real, so the spectrum is found
by scanning a lambda grid: sign changes give simple zeros, and local minima
of |omega| without a sign change are examined as candidate double zeros
(these occur exactly for symmetric configurations).  Counting windows,
3n zeros below k = n - 1/4 and 3n + 1 below k = n + 1/4, are the
self-check: a mismatch triggers grid refinement before anything is
reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charfn import dirichlet_charfn, omega_scaled
from .model import (CLASSES, EdgeSpec, Spectrum, SpectrumEntry, StarProblem,
                    counting_hypothesis_holds)
from .propagate import DEFAULT_SETTINGS, IntegratorSettings


class CountMismatchError(RuntimeError):
    def __init__(self, n, expected, found, reason):
        super().__init__(f"window n={n}: expected {expected} zeros, found {found} ({reason})")
        self.n, self.expected, self.found, self.reason = n, expected, found, reason


@dataclass(frozen=True)
class CountingWindow:
    n: int
    k_bound: float
    expected_count: int
    found: int = -1

    @property
    def ok(self) -> bool:
        return self.found == self.expected_count


@dataclass(frozen=True)
class AsymptoticResidual:
    n: int
    cls: str
    residual: float


@dataclass
class ScanConfig:
    dk: float = 0.05
    refinements: int = 2
    double_tol: float = 1e-7
    fd_rel: float = 1e-5
    # grid offset (fraction of dk) so half-integers never sit on a node
    offset: float = 0.37
    meta: dict = field(default_factory=dict)


def default_lambda_min(problem: StarProblem) -> float:
    qmax = max(e.q.max_abs() for e in problem.edges)
    hmax = max(abs(e.h) for e in problem.edges)
    return -(1.0 + qmax + hmax + abs(problem.jump.b)) ** 2


# -- vectorized root polishing -----------------------------------------------

def _vec_root(f, lo, hi, flo, fhi, xtol_rel=1e-15, maxiter=200):
    """Illinois false position with a bisection safeguard, over many brackets."""
    lo, hi, flo, fhi = (np.array(v, dtype=float) for v in (lo, hi, flo, fhi))
    if lo.size == 0:
        return lo
    side = np.zeros(lo.shape, dtype=int)
    width0 = hi - lo
    for it in range(maxiter):
        width = hi - lo
        done = width <= xtol_rel * np.maximum(np.abs(lo) + np.abs(hi), 1e-300) + 1e-300
        if np.all(done):
            break
        with np.errstate(invalid="ignore", divide="ignore"):
            x = (lo * fhi - hi * flo) / (fhi - flo)
        bisect = (it % 4 == 3) | ~np.isfinite(x) | (x <= lo) | (x >= hi)
        x = np.where(bisect, 0.5 * (lo + hi), x)
        x = np.where(done, lo, x)
        fx = np.asarray(f(x), dtype=float)
        exact = (fx == 0.0) & ~done
        left = (np.sign(fx) == np.sign(flo)) & ~done & ~exact
        right = ~left & ~done & ~exact
        # Illinois: halve the stale endpoint value when the same side repeats
        flo_new = np.where(left, fx, np.where(right & (side == 1), 0.5 * flo, flo))
        fhi_new = np.where(right, fx, np.where(left & (side == -1), 0.5 * fhi, fhi))
        lo = np.where(left, x, np.where(exact, x, lo))
        hi = np.where(right, x, np.where(exact, x, hi))
        flo, fhi = flo_new, fhi_new
        side = np.where(left, -1, np.where(right, 1, side))
    return np.where(np.abs(flo) <= np.abs(fhi), lo, hi) if np.any(width0 > 0) else lo


# -- scanning -----------------------------------------------------------------

def _lambda_grid(k_max, lambda_min, dk, offset):
    ks = np.arange(offset * dk, k_max + 1.5 * dk, dk)
    pos = ks * ks
    if lambda_min < 0:
        n_neg = max(4, math.ceil(-lambda_min / dk))
        neg = np.linspace(lambda_min, 0.0, n_neg + 1)[:-1]
        neg[-1] = min(neg[-1], -0.5 * pos[0])
        return np.concatenate([neg, pos])
    return pos[pos >= lambda_min]


def _k_of(lam):
    return np.sign(lam) * np.sqrt(np.abs(lam))


def _find_zeros(f, lam_grid, cfg: ScanConfig):
    """Return (zeros, multiplicities) of scalar-valued vectorized f on the grid."""
    vals = f(lam_grid)
    sg = np.sign(vals)
    roots, mults = [], []

    exact = np.flatnonzero(vals == 0.0)
    roots += list(lam_grid[exact])
    mults += [1] * exact.size

    br = np.flatnonzero(sg[:-1] * sg[1:] < 0)
    r = _vec_root(f, lam_grid[br], lam_grid[br + 1], vals[br], vals[br + 1])
    roots += list(r)
    mults += [1] * r.size

    # candidate even-order zeros: |f| local minimum with no sign change around it
    a = np.abs(vals)
    i = np.arange(1, vals.size - 1)
    cand = i[(a[i] < a[i - 1]) & (a[i] <= a[i + 1]) & (sg[i - 1] == sg[i]) & (sg[i] == sg[i + 1])
             & (sg[i] != 0)]
    if cand.size:
        lo, hi = lam_grid[cand - 1], lam_grid[cand + 1]
        delta = cfg.fd_rel * (1.0 + np.abs(lam_grid[cand]))

        def g(x, delta=delta):
            return (f(x + delta) - f(x - delta)) / (2 * delta)

        glo, ghi = g(lo), g(hi)
        ok = np.sign(glo) * np.sign(ghi) < 0
        lc = _vec_root(g, lo[ok], hi[ok], glo[ok], ghi[ok], xtol_rel=1e-14)
        fc = f(lc)
        kk = _k_of(lam_grid)
        for j, (l0, l1, x, fx, s) in enumerate(zip(lo[ok], hi[ok], lc, fc, sg[cand[ok]])):
            kc = _k_of(x)
            env = np.max(a[np.abs(kk - kc) <= 0.5]) if np.any(np.abs(kk - kc) <= 0.5) else a.max()
            if abs(fx) <= cfg.double_tol * env:
                roots.append(float(x))
                mults.append(2)
            elif np.sign(fx) == -s:
                pair = _vec_root(f, [l0, x], [x, l1], [f(l0), fx], [fx, f(l1)])
                roots += list(pair)
                mults += [1, 1]
    order = np.argsort(roots)
    roots = np.asarray(roots, dtype=float)[order]
    mults = np.asarray(mults, dtype=int)[order]
    # merge duplicates (a zero found both as a grid hit and a bracket)
    out_r, out_m = [], []
    for x, m in zip(roots, mults):
        if out_r and abs(x - out_r[-1]) <= 1e-9 * (1.0 + abs(x)):
            out_m[-1] = max(out_m[-1], m)
            continue
        out_r.append(float(x))
        out_m.append(int(m))
    return np.array(out_r), np.array(out_m, dtype=int)


def counting_windows(spec: Spectrum, k_max: float | None = None) -> list[CountingWindow]:
    k_max = spec.k_max if k_max is None else k_max
    out = []
    n = 1
    while n + 0.25 <= k_max + 1e-12:
        for kb, exp in ((n - 0.25, 3 * n), (n + 0.25, 3 * n + 1)):
            out.append(CountingWindow(n, kb, exp, spec.count_below(kb)))
        n += 1
    return out


def _labels(lams, mults):
    """Order-based (n, class) labels; flags entries far from their track."""
    labels, ambiguous = [], []
    j = 0
    for lam, m in zip(lams, mults):
        lab = []
        amb = False
        for _ in range(m):
            n, c = j // 3 + 1, CLASSES[j % 3]
            track = n - 1.0 if c == "c1" else n - 0.5
            amb |= abs(_k_of(lam) - track) >= 0.25
            lab.append((n, c))
            j += 1
        labels.append(tuple(lab))
        ambiguous.append(amb)
    return labels, ambiguous


def enumerate_eigenvalues(problem: StarProblem, k_max: float, lambda_min: float | None = None,
                          settings: IntegratorSettings = DEFAULT_SETTINGS,
                          cfg: ScanConfig | None = None, strict: bool = True) -> Spectrum:
    """All zeros of omega in [lambda_min, k_max**2], with multiplicity and labels.

    Raises CountMismatchError when the top counting window cannot be
    reconciled after grid refinement (``strict``).  Mismatches in lower
    windows are kept in ``meta["window_mismatches"]``: the count is only
    guaranteed asymptotically.
    """
    cfg = cfg or ScanConfig()
    if lambda_min is None:
        lambda_min = default_lambda_min(problem)

    def f(lam):
        return omega_scaled(problem, np.asarray(lam, dtype=float), settings)[0]

    dk = cfg.dk
    prev_bad = None
    for level in range(cfg.refinements + 1):
        grid = _lambda_grid(k_max, lambda_min, dk, cfg.offset)
        roots, mults = _find_zeros(f, grid, cfg)
        keep = roots <= k_max * k_max * (1 + 1e-12)
        roots, mults = roots[keep], mults[keep]
        labels, amb = _labels(roots, mults)
        entries = tuple(SpectrumEntry(float(l), int(m), lab, a)
                        for l, m, lab, a in zip(roots, mults, labels, amb))
        truncation = max(0, math.floor(k_max - 0.25 + 1e-12))
        spec = Spectrum(entries, truncation, k_max, lambda_min,
                        {"rtol": settings.rtol, "step": settings.step, "dk": dk,
                         "double_tol": cfg.double_tol})
        windows = counting_windows(spec)
        bad = [w for w in windows if not w.ok]
        if not bad or (level and bad == prev_bad):
            # a mismatch that survives refinement unchanged is a property of the problem
            break
        prev_bad = bad
        dk /= 4.0
    meta = {"window_mismatches": [(w.n, w.k_bound, w.expected_count, w.found) for w in bad],
            "refinement_level": level}
    spec = Spectrum(spec.entries, spec.truncation, k_max, lambda_min, spec.tolerances, meta)
    if strict and windows and not windows[-1].ok:
        w = windows[-1]
        reason = ("|beta| >= 1/4: counting hypothesis fails" if not counting_hypothesis_holds(problem.jump)
                  else "solver failed to resolve all zeros")
        raise CountMismatchError(w.n, w.expected_count, w.found, reason)
    return spec


def enumerate_dirichlet(edge: EdgeSpec, k_max: float, lambda_min: float | None = None,
                        settings: IntegratorSettings = DEFAULT_SETTINGS,
                        cfg: ScanConfig | None = None) -> Spectrum:
    """Zeros of phi(pi, lam) for one edge: Robin at the root, Dirichlet at pi."""
    cfg = cfg or ScanConfig()
    if lambda_min is None:
        lambda_min = -(1.0 + edge.q.max_abs() + abs(edge.h)) ** 2

    def f(lam):
        return dirichlet_charfn(edge, np.asarray(lam, dtype=float), settings)

    grid = _lambda_grid(k_max, lambda_min, cfg.dk, cfg.offset)
    roots, mults = _find_zeros(f, grid, cfg)
    keep = roots <= k_max * k_max * (1 + 1e-12)
    entries = tuple(SpectrumEntry(float(l), int(m)) for l, m in zip(roots[keep], mults[keep]))
    return Spectrum(entries, len(entries), k_max, lambda_min,
                    {"rtol": settings.rtol, "dk": cfg.dk})


def check_disjoint(omega_spec: Spectrum, sigma: Spectrum, gap_tol: float):
    """Pairs (lam_omega, lam_sigma, gap) closer than gap_tol in lambda."""
    a, b = omega_spec.lambdas, sigma.lambdas
    out = []
    if a.size == 0 or b.size == 0:
        return out
    idx = np.searchsorted(b, a)
    for x, i in zip(a, idx):
        for j in (i - 1, i):
            if 0 <= j < b.size:
                gap = abs(x - b[j])
                if gap <= gap_tol:
                    out.append((float(x), float(b[j]), float(gap)))
    return out


def asymptotic_residuals(spec: Spectrum) -> list[AsymptoticResidual]:
    """sqrt(lam) minus its track: n - 1 for class c1, n - 1/2 for c2 and c3."""
    out = []
    for e in spec.entries:
        for n, c in e.labels:
            track = n - 1.0 if c == "c1" else n - 0.5
            out.append(AsymptoticResidual(n, c, e.sqrt_lambda - track))
    return out


def residual_summary(residuals) -> dict[str, float]:
    out = {}
    for c in CLASSES:
        vals = [abs(r.residual) for r in residuals if r.cls == c]
        out[c] = max(vals) if vals else 0.0
    return out
