"""Domain types for the three-star problem with one interior jump on edge 1.

Every edge has length pi.  Edge ``j`` carries the equation

    -y'' + q_j(x) y = lam * y,   x in (0, pi),   y'(0) - h_j y(0) = 0,

the three edges meet at x = pi with continuity and zero derivative sum, and
edge 1 has transmission conditions at x = d:

    y(d+0) = a y(d-0),    y'(d+0) = y'(d-0) / a + b y(d-0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

PI = math.pi

# Tolerance for checking that potential breakpoints hit 0 and pi.
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class PotentialSpec:
    """A real potential on [0, pi], stored as a piecewise polynomial.

    ``coeffs[i]`` holds ascending-power coefficients in the local variable
    ``x - breakpoints[i]`` for the piece ``[breakpoints[i], breakpoints[i+1]]``.
    Use the constructors :meth:`zero`, :meth:`constant`, :meth:`piecewise`
    and :meth:`sampled` rather than building instances by hand.
    """

    kind: str
    breakpoints: tuple[float, ...]
    coeffs: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("potential needs at least two breakpoints")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("potential breakpoints must be strictly increasing")
        if abs(bp[0]) > _EDGE_TOL or abs(bp[-1] - PI) > _EDGE_TOL:
            raise ValueError("potential must be defined on [0, pi] exactly")
        if len(self.coeffs) != bp.size - 1:
            raise ValueError("need one coefficient row per piece")
        for row in self.coeffs:
            if len(row) == 0 or not all(math.isfinite(c) for c in row):
                raise ValueError("coefficient rows must be non-empty and finite")
        # pin the end breakpoints so meshes line up with 0 and pi exactly
        pinned = (0.0,) + tuple(float(v) for v in bp[1:-1]) + (PI,)
        object.__setattr__(self, "breakpoints", pinned)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "PotentialSpec":
        return cls("zero", (0.0, PI), ((0.0,),))

    @classmethod
    def constant(cls, c: float) -> "PotentialSpec":
        return cls("constant", (0.0, PI), ((float(c),),))

    @classmethod
    def piecewise(cls, breakpoints: Sequence[float], coeffs: Sequence[Sequence[float]]) -> "PotentialSpec":
        rows = tuple(tuple(float(c) for c in row) for row in coeffs)
        return cls("piecewise-polynomial", tuple(float(b) for b in breakpoints), rows)

    @classmethod
    def sampled(cls, abscissae: Sequence[float], values: Sequence[float]) -> "PotentialSpec":
        """Linear interpolation through ``(abscissae, values)``."""
        x = np.asarray(abscissae, dtype=float)
        v = np.asarray(values, dtype=float)
        if x.shape != v.shape:
            raise ValueError("abscissae and values must have equal length")
        slopes = np.diff(v) / np.diff(x)
        rows = tuple((float(v[i]), float(slopes[i])) for i in range(x.size - 1))
        return cls("sampled-table", tuple(float(b) for b in x), rows)

    # -- queries ------------------------------------------------------------

    @property
    def is_piecewise_constant(self) -> bool:
        return all(all(c == 0.0 for c in row[1:]) for row in self.coeffs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        bp = np.asarray(self.breakpoints)
        idx = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, len(self.coeffs) - 1)
        out = np.empty_like(x)
        for i, row in enumerate(self.coeffs):
            mask = idx == i
            if np.any(mask):
                out[mask] = P.polyval(x[mask] - bp[i], row)
        return out if out.ndim else float(out)

    def integrate(self, lo: float, hi: float) -> float:
        """Exact integral over [lo, hi] (signed, so hi < lo flips the sign)."""
        if hi < lo:
            return -self.integrate(hi, lo)
        bp = self.breakpoints
        total = 0.0
        for i, row in enumerate(self.coeffs):
            x0, x1 = max(lo, bp[i]), min(hi, bp[i + 1])
            if x1 <= x0:
                continue
            anti = P.polyint(row)
            total += P.polyval(x1 - bp[i], anti) - P.polyval(x0 - bp[i], anti)
        return float(total)

    def max_abs(self) -> float:
        xs = np.concatenate([np.linspace(self.breakpoints[i], self.breakpoints[i + 1], 33)
                             for i in range(len(self.coeffs))])
        return float(np.max(np.abs(self(xs))))

    def shifted(self, c: float) -> "PotentialSpec":
        """Return ``q + c``."""
        rows = tuple((row[0] + c,) + tuple(row[1:]) for row in self.coeffs)
        return PotentialSpec(self.kind if self.kind != "zero" else "constant", self.breakpoints, rows)

    def __add__(self, other: "PotentialSpec") -> "PotentialSpec":
        bp = sorted(set(self.breakpoints) | set(other.breakpoints))
        rows = []
        for x0 in bp[:-1]:
            rows.append(tuple(P.polyadd(_local_row(self, x0), _local_row(other, x0))))
        return PotentialSpec("piecewise-polynomial", tuple(bp), tuple(rows))

    def __neg__(self) -> "PotentialSpec":
        return PotentialSpec(self.kind, self.breakpoints, tuple(tuple(-c for c in r) for r in self.coeffs))

    def __sub__(self, other: "PotentialSpec") -> "PotentialSpec":
        return self + (-other)


def _local_row(q: PotentialSpec, x0: float) -> np.ndarray:
    """Coefficients of q's piece containing x0, re-expanded about x0."""
    bp = q.breakpoints
    i = min(max(int(np.searchsorted(bp, x0, side="right")) - 1, 0), len(q.coeffs) - 1)
    row = np.asarray(q.coeffs[i], dtype=float)
    shift = x0 - bp[i]
    if shift == 0.0 or row.size == 1:
        return row
    # Taylor shift: p(t + shift) in powers of t
    out = np.zeros_like(row)
    for n, c in enumerate(row):
        for j in range(n + 1):
            out[j] += c * math.comb(n, j) * shift ** (n - j)
    return out


@dataclass(frozen=True)
class EdgeSpec:
    q: PotentialSpec = field(default_factory=PotentialSpec.zero)
    h: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.h):
            raise ValueError("Robin coefficient h must be finite")


@dataclass(frozen=True)
class JumpSpec:
    """Transmission data on edge 1.  ``declared=False`` marks "no discontinuity"."""

    a: float = 1.0
    b: float = 0.0
    d: float = 1.0
    declared: bool = True

    @property
    def alpha1(self) -> float:
        return 0.5 * (self.a + 1.0 / self.a)

    @property
    def alpha2(self) -> float:
        return 0.5 * (self.a - 1.0 / self.a)

    @property
    def beta(self) -> float:
        return beta_of(self)

    @property
    def is_trivial(self) -> bool:
        return abs(self.a - 1.0) + abs(self.b) == 0.0


def beta_of(jump: JumpSpec) -> float:
    """(a^2 - 1) / (3 (a^2 + 1)), the relative weight of the jump-shifted waves."""
    a2 = jump.a * jump.a
    return (a2 - 1.0) / (3.0 * (a2 + 1.0))


def a_from_beta(beta: float) -> float:
    """Inverse of :func:`beta_of`; requires |beta| < 1/3."""
    if not abs(beta) < 1.0 / 3.0:
        raise ValueError(f"beta={beta} outside (-1/3, 1/3)")
    return math.sqrt((1.0 + 3.0 * beta) / (1.0 - 3.0 * beta))


def counting_hypothesis_holds(jump: JumpSpec) -> bool:
    """True when 4|beta| < 1, which the window-count argument needs."""
    return 4.0 * abs(beta_of(jump)) < 1.0


@dataclass(frozen=True)
class StarProblem:
    edges: tuple[EdgeSpec, EdgeSpec, EdgeSpec]
    jump: JumpSpec = field(default_factory=JumpSpec)
    label: str = ""

    def __post_init__(self):
        if len(self.edges) != 3:
            raise ValueError("a three-star problem needs exactly three edges")
        object.__setattr__(self, "edges", tuple(self.edges))

    @classmethod
    def simple(cls, a=1.0, b=0.0, d=1.0, h=(0.0, 0.0, 0.0), q=None, label="") -> "StarProblem":
        q = q or (PotentialSpec.zero(),) * 3
        edges = tuple(EdgeSpec(qj, float(hj)) for qj, hj in zip(q, h))
        return cls(edges, JumpSpec(a, b, d), label)

    def replace_edge(self, j: int, edge: EdgeSpec) -> "StarProblem":
        edges = list(self.edges)
        edges[j] = edge
        return StarProblem(tuple(edges), self.jump, self.label)

    def with_jump(self, **changes) -> "StarProblem":
        from dataclasses import replace
        return StarProblem(self.edges, replace(self.jump, **changes), self.label)

    def shifted(self, c: float) -> "StarProblem":
        edges = tuple(EdgeSpec(e.q.shifted(c), e.h) for e in self.edges)
        return StarProblem(edges, self.jump, self.label)

    def swapped_23(self) -> "StarProblem":
        e1, e2, e3 = self.edges
        return StarProblem((e1, e3, e2), self.jump, self.label)


# -- spectra ------------------------------------------------------------------

CLASSES = ("c1", "c2", "c3")


@dataclass(frozen=True)
class SpectrumEntry:
    lam: float
    multiplicity: int = 1
    # one (n, class) label per unit of multiplicity
    labels: tuple[tuple[int, str], ...] = ()
    ambiguous: bool = False

    @property
    def sqrt_lambda(self) -> float:
        """Signed square root: negative eigenvalues map to -sqrt|lam|."""
        return math.copysign(math.sqrt(abs(self.lam)), self.lam)


@dataclass(frozen=True)
class Spectrum:
    entries: tuple[SpectrumEntry, ...]
    truncation: int = 0
    k_max: float = 0.0
    lambda_min: float = 0.0
    tolerances: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lams = [e.lam for e in self.entries]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("spectrum entries must be strictly increasing in lambda")

    def __len__(self):
        return len(self.entries)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([e.lam for e in self.entries])

    def expanded(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity."""
        return np.repeat(self.lambdas, [e.multiplicity for e in self.entries])

    def count_below(self, k_bound: float) -> int:
        """Count (with multiplicity) of eigenvalues with lam < k_bound**2."""
        return int(sum(e.multiplicity for e in self.entries if e.lam < k_bound * k_bound))


@dataclass(frozen=True)
class CharTrace:
    k: np.ndarray
    values: np.ndarray
    provenance: str = "forward-solve"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.shape != v.shape or k.ndim != 1:
            raise ValueError("trace grid and values must be 1-d arrays of equal length")
        if np.any(np.diff(k) <= 0):
            raise ValueError("trace grid must be strictly increasing")
        if self.provenance not in ("forward-solve", "hadamard-product", "model-omega0"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "values", v)

    def __sub__(self, other: "CharTrace") -> "CharTrace":
        if self.k.shape != other.k.shape or np.any(self.k != other.k):
            raise ValueError("traces must share a grid")
        return CharTrace(self.k, self.values - other.values, self.provenance, {"difference": True})

    def scaled(self, s: float) -> "CharTrace":
        return CharTrace(self.k, s * self.values, self.provenance, dict(self.meta))


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    field: str
    message: str


def validate(problem: StarProblem) -> list[Diagnostic]:
    """List every violated standing assumption; empty means all hold."""
    out: list[Diagnostic] = []
    for j, e in enumerate(problem.edges, start=1):
        if e.h == 0.0:
            out.append(Diagnostic("warning", f"edges[{j}].h",
                                  "h=0 breaks the standing assumption h_j != 0"))
    jmp = problem.jump
    if not jmp.a > 0:
        out.append(Diagnostic("error", "jump.a", "a must be positive"))
        return out
    if not 0.0 < jmp.d < PI:
        out.append(Diagnostic("error", "jump.d", "d must lie in (0, pi)"))
    if jmp.declared and jmp.is_trivial:
        out.append(Diagnostic("warning", "jump", "trivial jump: |a-1|+|b| = 0"))
    if not counting_hypothesis_holds(jmp):
        out.append(Diagnostic("warning", "jump.a",
                              f"|beta|={abs(jmp.beta):.4f} >= 1/4: window counting not guaranteed"))
    if jmp.a == 1.0 and jmp.d >= PI / 2:
        out.append(Diagnostic("warning", "jump.d",
                              "d >= pi/2 with a = 1: recovery of d is not guaranteed"))
    return out


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diags)
