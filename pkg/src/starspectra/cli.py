"""star-spectra: config-driven runs of the spectral and recovery pipelines.

    star-spectra <spectrum|charfn|recover|verify|oracle> --config FILE
                 [--k-max R] [--T R] [--A R] [--out DIR] [--seed N]

Exit codes: 0 success, 1 numeric failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .charfn import (TrustRegionError, dirichlet_charfn, hadamard_normalization, hadamard_trace,
                     omega, omega0_trace, omega_trace)
from .io import (ConfigError, load_config, problem_hash, read_spectrum,
                 write_json, write_spectrum, write_table, write_trace)
from .model import PI, EdgeSpec, PotentialSpec, StarProblem
from .propagate import IntegratorError, IntegratorSettings
from .recovery import (DEFAULT_DK, MAX_TRACE_SPACING, GridTooCoarseError, HypothesisError,
                       RegimeError, bump, detect_b, green_identity_check, mean_identity_predictions,
                       moment_error_envelope, oracle_draws, recover, trace_grid,
                       trig_moment_oracle, uniqueness_experiment)
from .spectrum import (CountMismatchError, asymptotic_residuals, counting_windows,
                       enumerate_eigenvalues, residual_summary)

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
LAMBDA_REF = -1.0


class UsageError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="star-spectra", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["spectrum", "charfn", "recover", "verify", "oracle"])
    p.add_argument("--config", help="problem config (YAML)")
    p.add_argument("--k-max", type=float, dest="k_max")
    p.add_argument("--T", type=float, dest="T")
    p.add_argument("--A", type=float, dest="A")
    p.add_argument("--dk", type=float, help="k-grid spacing for traces")
    p.add_argument("--lambda-min", type=float, dest="lambda_min")
    p.add_argument("--rtol", type=float)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spectrum", help="recover: rebuild the trace from this spectrum file")
    p.add_argument("--normalization", type=float,
                   help="recover: omega(-1) for the rebuild (default: read from the spectrum file)")
    p.add_argument("--reference", help="recover: reference problem config for C and b")
    p.add_argument("--n-pairs", type=int, dest="n_pairs", help="verify: random identity pairs")
    return p


def _opt(args, run, key, default):
    v = getattr(args, key, None)
    if v is None:
        v = run.get(key, default)
    return v


def _settings(args, run) -> IntegratorSettings:
    rtol = float(_opt(args, run, "rtol", 1e-10))
    if not 0 < rtol < 1e-2:
        raise UsageError("--rtol must lie in (0, 1e-2)")
    return IntegratorSettings(rtol=rtol)


def _meta(command, cfg, settings, seed, **extra) -> dict:
    meta = {"tool": "star-spectra", "version": __version__, "command": command,
            "config_hash": cfg.digest if cfg else "-",
            "problem_hash": problem_hash(cfg.problem) if cfg else "-",
            "rtol": settings.rtol, "step": settings.step, "seed": seed}
    meta.update(extra)
    return meta


def _need_config(args):
    if not args.config:
        raise UsageError(f"{args.command} needs --config")
    return load_config(args.config)


def _warn(cfg):
    for dg in cfg.diagnostics:
        print(f"warning: {dg.field}: {dg.message}", file=sys.stderr)


# -- commands -----------------------------------------------------------------

def cmd_spectrum(args, out: Path) -> int:
    cfg = _need_config(args)
    _warn(cfg)
    settings = _settings(args, cfg.run)
    k_max = float(_opt(args, cfg.run, "k_max", 20.0))
    if not 1.25 <= k_max <= 400:
        raise UsageError("--k-max must lie in [1.25, 400]")
    lam_min = _opt(args, cfg.run, "lambda_min", None)
    p = cfg.problem
    try:
        spec = enumerate_eigenvalues(p, k_max, lam_min, settings, strict=True)
        status = EXIT_OK
    except CountMismatchError as exc:
        print(f"count mismatch: {exc}", file=sys.stderr)
        spec = enumerate_eigenvalues(p, k_max, lam_min, settings, strict=False)
        status = EXIT_NUMERIC
    res = asymptotic_residuals(spec)
    first = {}
    pos = 0
    for i, e in enumerate(spec.entries):
        first[i] = res[pos].residual
        pos += e.multiplicity
    meta = _meta("spectrum", cfg, settings, args.seed, k_max=k_max,
                 lambda_ref=LAMBDA_REF, omega_ref=float(omega(p, LAMBDA_REF, settings)),
                 count=int(spec.expanded().size), window_mismatches=spec.meta["window_mismatches"])
    write_spectrum(out / "spectrum.tsv", spec, first, meta)
    wins = counting_windows(spec)
    write_table(out / "windows.tsv", ["n", "k_bound", "expected", "found", "ok"],
                [(w.n, w.k_bound, w.expected_count, w.found, int(w.ok)) for w in wins], meta)
    write_table(out / "residuals.tsv", ["n", "class", "residual"],
                [(r.n, r.cls, r.residual) for r in res],
                dict(meta, max_abs_residual=residual_summary(res)))
    print(f"{spec.expanded().size} eigenvalues (with multiplicity) below k={k_max}; "
          f"{sum(not w.ok for w in wins)} window mismatches")
    return status


def _trace_grid(args, run):
    A = float(_opt(args, run, "A", 1.0))
    T = float(_opt(args, run, "T", 50.0))
    dk = float(_opt(args, run, "dk", DEFAULT_DK))
    if not 0 < A < T:
        raise UsageError("need 0 < A < T")
    if dk > MAX_TRACE_SPACING:
        raise UsageError(f"dk={dk} violates the sampling invariant (max {MAX_TRACE_SPACING:.4g}: "
                         "10 samples per period of 3 pi)")
    return A, T, dk, trace_grid(A, T, dk)


def cmd_charfn(args, out: Path) -> int:
    cfg = _need_config(args)
    _warn(cfg)
    settings = _settings(args, cfg.run)
    A, T, dk, k = _trace_grid(args, cfg.run)
    p = cfg.problem
    tr = omega_trace(p, k, settings)
    tr0 = omega0_trace(p.jump, k)
    resid = tr.values - tr0.values
    blocks = []
    edges = np.linspace(A, T, 11)
    for lo, hi in zip(edges, edges[1:]):
        m = (k >= lo) & (k <= hi)
        blocks.append([float(lo), float(hi), float(np.max(np.abs(tr.values[m]))),
                       float(np.max(np.abs(resid[m])))])
    meta = _meta("charfn", cfg, settings, args.seed, A=A, T=T, dk=dk,
                 sweep_k_lo_hi_maxomega_maxresidual=blocks)
    write_trace(out / "omega.tsv", tr, meta)
    write_trace(out / "omega0.tsv", tr0, meta)
    write_table(out / "residual.tsv", ["k", "omega_minus_omega0"], zip(k.tolist(), resid.tolist()), meta)
    for j in (1, 2):
        vals = dirichlet_charfn(p.edges[j], k * k, settings)
        write_table(out / f"dirichlet_{j + 1}.tsv", ["k", "phi_pi"], zip(k.tolist(), vals.tolist()), meta)
    print(f"traces on {k.size} points in [{A}, {T}] written to {out}")
    return EXIT_OK


def cmd_recover(args, out: Path) -> int:
    cfg = load_config(args.config) if args.config else None
    run = cfg.run if cfg else {}
    settings = _settings(args, run)
    A = float(_opt(args, run, "A", 1.0))
    dk = float(_opt(args, run, "dk", DEFAULT_DK))
    extra = {}
    if args.spectrum:
        spec, smeta = read_spectrum(args.spectrum)
        norm_ref = args.normalization
        if norm_ref is None:
            if "omega_ref" not in smeta:
                raise UsageError("spectrum file lacks omega_ref; pass --normalization")
            norm_ref = float(smeta["omega_ref"])
        cap = 0.5 * spec.truncation
        T = args.T if args.T is not None else min(300.0, cap - 0.5)
        if T >= cap:
            raise TrustRegionError(f"T={T} exceeds the rebuild trust region sqrt(lambda) < {cap}")
        c = hadamard_normalization(spec, norm_ref, LAMBDA_REF)
        trace = hadamard_trace(spec, c, trace_grid(A, T, dk))
        extra = {"path": "rebuild", "spectrum_file": str(args.spectrum), "truncation": spec.truncation,
                 "normalization": c}
    else:
        if cfg is None:
            raise UsageError("recover needs --config or --spectrum")
        _warn(cfg)
        T = float(_opt(args, run, "T", 300.0))
        if not A < T:
            raise UsageError("need A < T")
        trace = omega_trace(cfg.problem, trace_grid(A, T, dk), settings)
        extra = {"path": "forward"}
    ref, ref_cfg = None, None
    if args.reference:
        ref_cfg = load_config(args.reference)
        ref = omega_trace(ref_cfg.problem, trace.k, settings)
    res = recover(trace, ref, A, T)
    if ref is not None:
        d_b = res.d_hat if res.d_hat is not None else ref_cfg.problem.jump.d
        try:
            res.b_moment = detect_b(trace, ref, d_b, A, T)
        except RegimeError as exc:
            res.flags["b_regime"] = str(exc)
    meta = _meta("recover", cfg, settings, args.seed, A=A, T=T, dk=dk, **extra)
    write_json(out / "recovery.json", res.as_dict(), meta)
    d_txt = "undefined" if res.d_hat is None else f"{res.d_hat:.6f}"
    print(f"a_hat={res.a_hat:.6f} beta_hat={res.beta_hat:.6f} d_hat={d_txt} alpha1_hat={res.alpha1_hat:.6f}")
    return EXIT_OK


def _random_pair(base: StarProblem, rng):
    lo = rng.uniform(0.05, 0.8)
    hi = rng.uniform(lo + 0.2, PI / 2 - 0.05)
    e1 = base.edges[0]
    q_t = e1.q + bump(lo, hi, rng.uniform(-2, 2))
    pt = base.replace_edge(0, EdgeSpec(q_t, e1.h + rng.uniform(-1, 1)))
    return base, pt.with_jump(b=base.jump.b + rng.uniform(-1, 1))


def cmd_verify(args, out: Path) -> int:
    cfg = _need_config(args)
    settings = _settings(args, cfg.run)
    rng = np.random.default_rng(args.seed)
    base = cfg.problem
    n_pairs = int(_opt(args, cfg.run, "n_pairs", 10))
    rows = []

    def record(name, ok, value, detail=""):
        rows.append((name, "pass" if ok else "fail", value, detail))

    for i in range(n_pairs):
        p, pt = _random_pair(base, rng)
        lam = float(rng.uniform(-1, 100))
        try:
            lhs, rhs = green_identity_check(p, pt, lam, settings)
            record(f"green_identity[{i}]", abs(lhs - rhs) < 1e-6, abs(lhs - rhs), f"lambda={lam:.6g}")
        except HypothesisError as exc:
            record(f"green_identity[{i}]", False, float("nan"), f"hypothesis-violation: {exc}")
    try:
        green_identity_check(base, base.with_jump(a=base.jump.a + 0.5), 1.0, settings)
        record("green_identity_mismatched_a", False, float("nan"), "no hypothesis-violation raised")
    except HypothesisError as exc:
        record("green_identity_mismatched_a", True, 0.0, f"hypothesis-violation: {exc}")

    ex = StarProblem.simple(a=2.0, d=1.0)
    ex_t = ex.replace_edge(0, EdgeSpec(ex.edges[0].q - _indicator(1.0, PI / 2), 0.0))
    b_gap, _ = mean_identity_predictions(ex, ex_t)
    want = -(4 - 0.25) / 4 * (PI / 2 - 1)
    record("mean_identity_example", abs(b_gap - want) < 1e-10, b_gap, f"expected {want:.10f}")
    one = base.with_jump(a=1.0)
    one_t = one.replace_edge(0, EdgeSpec(one.edges[0].q + bump(0.2, 1.4, 1.0), one.edges[0].h))
    b_one, _ = mean_identity_predictions(one, one_t)
    record("mean_identity_a1_zero", b_one == 0.0, b_one)

    if base.jump.d < PI / 2:
        for kind, amount in (("h1", 0.5), ("b", 1.0), ("q1", 1.0), ("a", 0.2), ("d", 0.1)):
            rep = uniqueness_experiment(base, (kind, amount), settings=settings)
            record(f"uniqueness_{kind}", rep["displacement"] > 1e-3, rep["displacement"])
        rep = uniqueness_experiment(base, ("h1", 0.0), settings=settings)
        record("uniqueness_zero", rep["displacement"] < 1e-9, rep["displacement"])
        record("disjoint_spectra", rep["hypotheses"]["disjoint"], len(rep["hypotheses"]["clashes"]))
    else:
        record("uniqueness", False, float("nan"), "hypothesis-violation: d >= pi/2")

    meta = _meta("verify", cfg, settings, args.seed, n_pairs=n_pairs)
    write_table(out / "verify.tsv", ["check", "status", "value", "detail"], rows, meta)
    n_fail = sum(r[1] == "fail" for r in rows)
    for r in rows:
        print(f"{r[1].upper():4s} {r[0]} {r[2]!r} {r[3]}")
    return EXIT_OK if n_fail == 0 else EXIT_NUMERIC


def _indicator(lo, hi):
    return PotentialSpec.piecewise([0.0, lo, hi, PI], [[0.0], [1.0], [0.0]])


def cmd_oracle(args, out: Path) -> int:
    settings = IntegratorSettings()
    rng = np.random.default_rng(args.seed)
    A = float(args.A if args.A is not None else 1.0)
    T = float(args.T if args.T is not None else 500.0)
    if not 1.0 <= A < T / 10:
        raise UsageError("oracle needs A >= 1 and T >= 10 A")
    rows = []
    n_fail = 0
    for a, b1, b2 in oracle_draws(rng, 20):
        num, lim = trig_moment_oracle(a, b1, b2, A, T)
        c_half = moment_error_envelope(a, b1, b2, A, T / 2)
        c_full = moment_error_envelope(a, b1, b2, A, T)
        # c stable: the fitted decay exponent of the error stays within 1 +- 0.5
        ok = abs(num - lim) <= c_full / T * (1 + 1e-9) and abs(math.log2(c_full / c_half)) < 0.5
        ok = ok and (T < 500 or abs(num - lim) < 0.01)
        n_fail += not ok
        rows.append((a, b1, b2, num, lim, num - lim, c_half, c_full, "pass" if ok else "fail"))
    meta = _meta("oracle", None, settings, args.seed, A=A, T=T)
    write_table(out / "oracle.tsv", ["a", "b1", "b2", "numeric", "limit", "error", "c_half_T",
                                     "c_T", "status"], rows, meta)
    print(f"{len(rows) - n_fail}/{len(rows)} oracle draws pass at T={T}")
    return EXIT_OK if n_fail == 0 else EXIT_NUMERIC


COMMANDS = {"spectrum": cmd_spectrum, "charfn": cmd_charfn, "recover": cmd_recover,
            "verify": cmd_verify, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, out)
    except (ConfigError, UsageError, GridTooCoarseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegratorError, TrustRegionError, CountMismatchError, RegimeError,
            HypothesisError, ValueError, RuntimeError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
