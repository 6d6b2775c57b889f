"""Acceptance criteria 1-8, each at its stated tolerance.

Every test records one ``CRITERION n: PASS|FAIL`` line (printed in the
pytest terminal summary) and then asserts the outcome.
"""

import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from stokestrace.fields import ScalarField2D
from stokestrace.harness import (
    ExperimentConfig,
    gen_perturbed_system,
    gen_unit_operator,
    random_polynomial,
    run_suite,
    sample_spectrum,
    trace_identity_case,
)
from stokestrace.linalg import SpectralDecomposition, eigh, operator_norm
from stokestrace.operator_integrals import OperatorCurve, Partition, rs_integral_exact, rs_integral_partition
from stokestrace.rng import haar_unitary, stream
from stokestrace.spectral import dyadic_floor_form, dyadic_partial_sum
from stokestrace.trace_formula import (
    AntiderivativePair,
    PerturbedSystem,
    antiderivatives_from_psi,
    lhs_closed_form_poly,
    lhs_spectral_integral,
    psi_from_polynomials,
    rhs_divided_difference,
    rhs_xi_integral,
    xi_field,
)


def record(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_1_dyadic_reconstruction():
    start = time.perf_counter()
    worst, failures = 0.0, 0
    for seed in range(50):
        dim = int(stream(seed, "dim").integers(4, 33))
        sd = eigh(gen_unit_operator(seed, dim), interval=(0.0, 1.0))
        a = sd.reconstruct()
        for K in (5, 10, 20, 40):
            err = operator_norm(a - dyadic_partial_sum(sd, K))
            worst = max(worst, err / 2.0 ** -K)
            failures += err > 2.0 ** -K
    runtime = time.perf_counter() - start
    ok = failures == 0 and runtime < 5.0
    record(1, ok, f"max ||A - S_K|| / 2^-K = {worst:.6f}, violations {failures}/200, runtime {runtime:.2f}s")
    assert ok


def test_criterion_2_floor_form():
    worst = 0.0
    for seed in range(20):
        sd = eigh(gen_unit_operator(100 + seed, 4 + seed), interval=(0.0, 1.0))
        for K in (1, 3, 6, 10, 12, 20, 40):
            worst = max(worst, operator_norm(dyadic_partial_sum(sd, K) - dyadic_floor_form(sd, K)))
    ok = worst <= 1e-12
    record(2, ok, f"max ||S_K - floor form|| = {worst:.3e} (tol 1e-12), 20 seeds")
    assert ok


def test_criterion_3_berg_construction(tmp_path):
    start = time.perf_counter()
    cfg = ExperimentConfig.for_suite("berg", out=str(tmp_path))
    report = run_suite(cfg)
    runtime = time.perf_counter() - start
    checks = report.summary()["checks"]
    required = ("dimension-bound", "nesting", "b-commutation", "b-monotone", "tail-bound")
    failed = {c: checks[c]["failed"] for c in required if checks[c]["failed"]}
    rows = [r for r in report.records if r["check"] == "dimension-bound" and not r["passed"]]
    detail = ", ".join(f"{c} fails {k}x" for c, k in failed.items()) or "all checks pass"
    if rows:
        r = rows[0]
        detail += f"; first: seed {r['seed']} {r['case']} dim L_N = {r['dim']} > {r['bound']}"
    ok = not failed and runtime < 60.0
    record(3, ok, f"D=128 n=2 5 seeds: {detail}; runtime {runtime:.1f}s")
    assert ok


def test_criterion_4_three_path_identity():
    start = time.perf_counter()
    worst, bad = 0.0, 0  # worst = max diff / allowed, must stay <= 1
    for seed in range(100):
        dim = 1 + seed % 16
        values, _ = trace_identity_case(seed, dim, 0.5, 4)
        vals = np.array(list(values.values()))
        for i in range(vals.size):
            for j in range(i + 1, vals.size):
                diff = abs(vals[i] - vals[j])
                scale = max(abs(vals[i]), abs(vals[j]))
                allowed = max(1e-8 * scale, 1e-10)
                bad += diff > allowed
                worst = max(worst, diff / allowed)
    runtime = time.perf_counter() - start
    ok = bad == 0 and runtime < 120.0
    record(4, ok, f"100 systems dim 1-16 deg<=4: max pairwise |dev| / max(1e-8 rel, 1e-10 abs) = {worst:.2e}, violations {bad}, runtime {runtime:.1f}s")
    assert ok


def test_criterion_5_worked_diagonal_case():
    z = np.zeros((2, 2))
    dom = (0.0, 4.0)
    sys = PerturbedSystem([z, z], [np.diag([1.0, 2.0]), np.diag([3.0, 4.0])], interval=dom)
    one = ScalarField2D.constant(1.0, dom)
    p1 = ScalarField2D.constant(0.0, dom)
    p2 = ScalarField2D.polynomial([[0.0], [1.0]], dom)
    xi = xi_field(sys)
    paths = {
        "closed_form": lhs_closed_form_poly(sys, p1, p2),
        "spectral": lhs_spectral_integral(sys, antiderivatives_from_psi(one)),
        "xi": rhs_xi_integral(one, xi),
        "divided_difference": rhs_divided_difference(one, sys),
    }
    # cell values of 1_[0,1)x[0,3) + 1_[0,2)x[0,4) on the breakpoint grid
    xm = 0.5 * (xi.x_breaks[1:] + xi.x_breaks[:-1])
    ym = 0.5 * (xi.y_breaks[1:] + xi.y_breaks[:-1])
    want = ((xm[:, None] < 1) & (ym[None, :] < 3)).astype(int) + ((xm[:, None] < 2) & (ym[None, :] < 4)).astype(int)
    ok = all(v == 11 for v in paths.values()) and np.array_equal(xi.values, want.astype(float))
    record(5, ok, f"paths {[complex(v) for v in paths.values()]}, xi cells match indicator sum: "
                  f"{np.array_equal(xi.values, want.astype(float))}")
    assert ok


def test_criterion_6_zero_and_gauge():
    zero_worst, gauge_worst = 0.0, 0.0
    for seed in range(10):
        sys = gen_perturbed_system(seed, 8, 0.0)
        rng = stream(seed, "c6")
        p1 = ScalarField2D.polynomial(random_polynomial(rng, 3), sys.interval)
        p2 = ScalarField2D.polynomial(random_polynomial(rng, 4), sys.interval)
        psi = psi_from_polynomials(p1, p2)
        vals = [
            lhs_closed_form_poly(sys, p1, p2),
            *lhs_spectral_integral(sys, AntiderivativePair(p1, p2, psi), return_forms=True),
            rhs_xi_integral(psi, xi_field(sys)),
            rhs_divided_difference(psi, sys),
        ]
        zero_worst = max(zero_worst, max(abs(v) for v in vals))

        pert = gen_perturbed_system(seed, 8, 0.6)
        pair = antiderivatives_from_psi(ScalarField2D.polynomial(psi.coefficients, pert.interval))
        g1 = ScalarField2D.polynomial(random_polynomial(rng, 4)[:, :1], pert.interval)
        g2 = ScalarField2D.polynomial(random_polynomial(rng, 4)[:1, :], pert.interval)
        shifted = AntiderivativePair(pair.phi1 + g1, pair.phi2 + g2, pair.psi)
        gauge_worst = max(gauge_worst, abs(lhs_spectral_integral(pert, shifted) - lhs_spectral_integral(pert, pair)))
    ok = zero_worst <= 1e-12 and gauge_worst <= 1e-10
    record(6, ok, f"eps=0 max |path| = {zero_worst:.2e} (tol 1e-12); gauge change {gauge_worst:.2e} (tol 1e-10)")
    assert ok


def test_criterion_7_mu_convergence(tmp_path):
    start = time.perf_counter()
    report = run_suite(ExperimentConfig.for_suite("mu-convergence", out=str(tmp_path)))
    runtime = time.perf_counter() - start
    checks = report.summary()["checks"]
    parts = []
    for c in ("uniform-bound", "final-error", "monotone"):
        parts.append(f"{c} {checks[c]['passed']}/{checks[c]['passed'] + checks[c]['failed']}")
    finals = [r["error"] for r in report.records if r["check"] == "final-error"]
    side_by_side = sorted({r["case"].split(",")[0] for r in report.records if r["check"] == "uniform-bound"})
    bad_mono = [r for r in report.records if r["check"] == "monotone" and not r["passed"]]
    detail = ", ".join(parts) + f"; final errors max {max(finals):.1e}; bases {side_by_side}"
    if bad_mono:
        e = np.array(bad_mono[0]["errors"])
        k = int(np.argmax(np.diff(e)))
        detail += f"; first rise seed {bad_mono[0]['seed']} {bad_mono[0]['case']} N={k + 1}->{k + 2}: {e[k]:.3e}->{e[k + 1]:.3e}"
    ok = report.passed and runtime < 120.0 and len(side_by_side) == 2
    record(7, ok, f"D=64 3 seeds: {detail}; runtime {runtime:.1f}s")
    assert ok


def dyadic_spectral_measure(seed, dim):
    """Atoms at exact multiples of 2^-10 with Haar-random eigenvectors."""
    rng = stream(seed, "criterion-8")
    u = haar_unitary(rng, dim)
    lam = sample_spectrum(rng, dim, "dyadic-rational", (0.0, 1.0))
    order = np.argsort(lam, kind="stable")
    values, counts = np.unique(lam, return_counts=True)
    return SpectralDecomposition(values, u[:, order], tuple(int(c) for c in counts), (0.0, 1.0))


def test_criterion_8_partition_convergence():
    curve = OperatorCurve(lambda a: a * np.eye(8))
    worst_final, monotone = 0.0, True
    for seed in range(10):
        sd = dyadic_spectral_measure(seed, 8)
        exact = rs_integral_exact(curve, sd)
        errs = [operator_norm(rs_integral_partition(curve, sd, Partition.dyadic(0.0, 1.0, m)) - exact)
                for m in range(2, 15)]
        monotone &= all(b <= a for a, b in zip(errs, errs[1:]))
        worst_final = max(worst_final, errs[-1])
    # generic spectra, for reference: the right-tag error is the distance to the
    # nearest grid point above each eigenvalue, of order the mesh
    sd = eigh(gen_unit_operator(0, 8), interval=(0.0, 1.0))
    generic = operator_norm(rs_integral_partition(curve, sd, Partition.dyadic(0.0, 1.0, 14)) - rs_integral_exact(curve, sd))
    ok = monotone and worst_final <= 1e-8
    record(8, ok, f"dim-8 measures with atoms on the 2^-10 grid, right tags, m=2..14: monotone {monotone}, "
                  f"error at m=14 {worst_final:.1e} (tol 1e-8); generic spectrum reference {generic:.1e} <= mesh {2.0 ** -14:.1e}")
    assert ok
    assert generic <= 2.0 ** -14
