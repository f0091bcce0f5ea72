import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from starspectra.model import (CharTrace, JumpSpec, PotentialSpec, Spectrum, SpectrumEntry,
                               StarProblem, a_from_beta, beta_of, counting_hypothesis_holds,
                               has_errors, validate)

PI = math.pi
positive_a = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


def fields(diags, severity=None):
    return [(d.severity, d.field) for d in diags if severity is None or d.severity == severity]


def test_validate_zero_h_warns_per_edge():
    diags = validate(StarProblem.simple(a=2.0, b=0.0, d=1.0))
    assert fields(diags) == [("warning", f"edges[{j}].h") for j in (1, 2, 3)]
    assert not has_errors(diags)


def test_validate_negative_a_is_error():
    diags = validate(StarProblem.simple(a=-1.0, h=(1, 1, 1)))
    assert fields(diags, "error") == [("error", "jump.a")]


def test_validate_trivial_declared_jump_warns():
    diags = validate(StarProblem.simple(a=1.0, b=0.0, d=1.0, h=(1, 1, 1)))
    assert ("warning", "jump") in fields(diags)
    undeclared = StarProblem(StarProblem.simple(h=(1, 1, 1)).edges, JumpSpec(1.0, 0.0, 1.0, declared=False))
    assert ("warning", "jump") not in fields(validate(undeclared))


def test_validate_d_out_of_range():
    assert ("error", "jump.d") in fields(validate(StarProblem.simple(a=2, d=PI, h=(1, 1, 1))))


def test_validate_large_beta_warns_counting():
    diags = validate(StarProblem.simple(a=3.0, h=(1, 1, 1)))
    assert ("warning", "jump.a") in fields(diags)


def test_validate_clean_problem_is_empty():
    assert validate(StarProblem.simple(a=2.0, b=0.3, d=1.0, h=(0.5, 1, 1))) == []


@pytest.mark.parametrize("a, want", [(1.0, 0.0), (2.0, 0.2), (3.0, 8 / 30)])
def test_beta_values(a, want):
    assert beta_of(JumpSpec(a)) == pytest.approx(want, abs=1e-15)


def test_counting_hypothesis_fails_for_a3():
    j = JumpSpec(3.0)
    assert (j.a ** 2 - 1) / (j.a ** 2 + 1) == pytest.approx(0.8)
    assert not counting_hypothesis_holds(j)
    assert counting_hypothesis_holds(JumpSpec(2.0))


@given(positive_a)
def test_beta_antisymmetric_and_bounded(a):
    b = beta_of(JumpSpec(a))
    assert b == pytest.approx(-beta_of(JumpSpec(1 / a)), abs=1e-12)
    assert abs(b) < 1 / 3


@given(positive_a)
def test_alpha_identity(a):
    j = JumpSpec(a)
    assert j.alpha1 ** 2 - j.alpha2 ** 2 == pytest.approx(1.0, rel=1e-9)
    assert j.alpha1 >= 1.0
    assert j.beta == pytest.approx(j.alpha2 / (3 * j.alpha1), rel=1e-12, abs=1e-15)


@given(st.floats(min_value=0.01, max_value=100))
def test_a_from_beta_inverts(a):
    assert a_from_beta(beta_of(JumpSpec(a))) == pytest.approx(a, rel=1e-7)


@given(a=st.floats(-2, 5), b=st.floats(-3, 3), d=st.floats(-1, 4), h=st.floats(-2, 2))
def test_validate_idempotent(a, b, d, h):
    p = StarProblem.simple(a=a, b=b, d=d, h=(h, 1.0, 0.0))
    first = validate(p)
    assert validate(p) == first
    assert p == StarProblem.simple(a=a, b=b, d=d, h=(h, 1.0, 0.0))


def test_potential_breakpoints_pinned():
    with pytest.raises(ValueError):
        PotentialSpec.piecewise([0.1, PI], [[1.0]])
    with pytest.raises(ValueError):
        PotentialSpec.piecewise([0, 2.0, 1.0, PI], [[1], [1], [1]])
    q = PotentialSpec.piecewise([0.0, 1.0, PI + 1e-14], [[1.0], [2.0]])
    assert q.breakpoints[-1] == PI


def test_potential_integrate_exact():
    q = PotentialSpec.piecewise([0, 1.0, PI], [[1.0, 2.0], [3.0, 0.0, 1.0]])
    # int_0^1 (1 + 2x) + int_0^{pi-1} (3 + t^2)
    want = 2.0 + 3 * (PI - 1) + (PI - 1) ** 3 / 3
    assert q.integrate(0, PI) == pytest.approx(want, rel=1e-14)
    assert q.integrate(PI, 0) == pytest.approx(-want, rel=1e-14)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.floats(0.2, 2.9))
def test_potential_add_sub(vals, x):
    q = PotentialSpec.sampled([0, 1.5, PI], vals)
    r = PotentialSpec.piecewise([0, 1.0, PI], [[1.0, -1.0], [0.5, 0.0, 2.0]])
    assert (q + r)(x) == pytest.approx(q(x) + r(x), abs=1e-12)
    assert (q - r)(x) == pytest.approx(q(x) - r(x), abs=1e-12)
    assert q.shifted(0.7)(x) == pytest.approx(q(x) + 0.7, abs=1e-12)


def test_sampled_is_linear_interpolation():
    xs = [0, 1, 2, PI]
    vs = [0.0, 1.0, -1.0, 2.0]
    q = PotentialSpec.sampled(xs, vs)
    grid = np.linspace(0, PI, 50)
    assert np.allclose(q(grid), np.interp(grid, xs, vs), atol=1e-14)


def test_spectrum_must_increase():
    with pytest.raises(ValueError):
        Spectrum((SpectrumEntry(1.0), SpectrumEntry(1.0)))
    s = Spectrum((SpectrumEntry(-1.0), SpectrumEntry(0.25, 2)))
    assert s.expanded().tolist() == [-1.0, 0.25, 0.25]
    assert s.entries[0].sqrt_lambda == -1.0
    assert s.count_below(0.5) == 1 and s.count_below(0.51) == 3


def test_chartrace_checks_and_difference():
    with pytest.raises(ValueError):
        CharTrace(np.array([1.0, 0.5]), np.array([0.0, 0.0]))
    t = CharTrace(np.array([1.0, 2.0]), np.array([3.0, 5.0]))
    assert (t - t.scaled(2.0)).values.tolist() == [-3.0, -5.0]
    with pytest.raises(ValueError):
        t - CharTrace(np.array([1.0, 3.0]), np.array([0.0, 0.0]))
