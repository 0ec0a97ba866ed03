import dataclasses

import numpy as np
import pytest

from lcpkit.convergence import (
    ModeUnsupportedError,
    certify_rho_lt_one,
    check_hmatrix_conditions,
    check_spectral_condition,
    iteration_operator_rho,
)
from lcpkit.matrix_core import SparseMatrix, classify, comparison_matrix
from lcpkit.problems import gen_example1, gen_random_hplus
from lcpkit.splittings import SplittingKind, custom_splitting, make_splitting


def _gs(dense):
    a = SparseMatrix.from_dense(dense)
    return a, make_splitting(a, SplittingKind.npgs())


def _t_dense(a, s):
    d = a.diagonal_vector()
    lhs = s.m.add_diagonal(d + 2.0).to_dense()
    reach = (s.n_part.add_diagonal(d + 1.0).abs_entrywise()
             .add(a.add_diagonal(-1.0).abs_entrywise())).to_dense()
    return np.abs(np.linalg.inv(lhs)) @ reach


def test_scalar_operator_values():
    a, s = _gs([[4.0]])
    for mode in ("exact_dense", "comparison_bound", "operator"):
        assert iteration_operator_rho(a, s, mode) == pytest.approx(0.8, abs=1e-9)
    a, s = _gs([[8.0]])
    assert iteration_operator_rho(a, s) == pytest.approx(16.0 / 18.0, abs=1e-9)


def test_identity_operator_value():
    # D = I, L = U = 0, |A - I| = 0: T = (1+1) / (1+2+1) = 1/2
    a = SparseMatrix.identity(3)
    s = make_splitting(a, SplittingKind.npj())
    assert iteration_operator_rho(a, s) == pytest.approx(0.5, abs=1e-9)


def test_modes_agree_on_benchmark_matrix():
    p = gen_example1(4, 4.0)
    s = make_splitting(p.a, SplittingKind.npgs())
    exact = iteration_operator_rho(p.a, s, "exact_dense")
    op = iteration_operator_rho(p.a, s, "operator")
    bound = iteration_operator_rho(p.a, s, "comparison_bound")
    assert op == pytest.approx(exact, abs=1e-8)
    # the sign pattern makes the bound operator coincide with the exact one
    assert bound == exact
    assert exact == pytest.approx(max(abs(np.linalg.eigvals(_t_dense(p.a, s)))),
                                  abs=1e-8)


def test_bound_never_undercuts_exact():
    for seed in range(12):
        p = gen_random_hplus(int(np.random.default_rng(seed).integers(2, 9)), seed)
        for kind in (SplittingKind.npgs(), SplittingKind.npsor(1.5)):
            s = make_splitting(p.a, kind)
            exact = iteration_operator_rho(p.a, s, "exact_dense")
            bound = iteration_operator_rho(p.a, s, "comparison_bound")
            assert bound >= exact


def test_operator_mode_requires_sign_pattern():
    a = SparseMatrix.from_dense([[2.0, -1.0], [-1.0, 2.0]])
    # put strict-upper mass into M so the system matrix is not triangular
    m = SparseMatrix.from_dense([[3.0, 0.5], [-1.0, 3.0]])
    s = custom_splitting(a, m, m.subtract(a))
    with pytest.raises(ModeUnsupportedError):
        iteration_operator_rho(a, s, "operator")
    # exact mode still answers
    assert iteration_operator_rho(a, s, "exact_dense") > 0.0


def test_comparison_bound_requires_m_comparison():
    a = SparseMatrix.identity(2)
    m = SparseMatrix.from_dense([[-2.0, 2.0], [2.0, -2.0]])  # system matrix [[1,2],[2,1]]
    s = custom_splitting(a, m, m.subtract(a))
    with pytest.raises(ModeUnsupportedError):
        iteration_operator_rho(a, s, "comparison_bound")


def test_unknown_mode_rejected():
    a, s = _gs([[4.0]])
    with pytest.raises(ValueError):
        iteration_operator_rho(a, s, "dense")


def test_spectral_certificate_scalar():
    a, s = _gs([[4.0]])
    cert = check_spectral_condition(a, s)
    assert cert.rho_t == pytest.approx(0.8, abs=1e-9)
    assert cert.rho_mode == "exact_dense"
    assert cert.spectral_condition_ok
    assert "P-matrix" in cert.notes


def test_spectral_certificate_flags_non_p():
    a, s = _gs([[1.0, -2.0], [-2.0, 1.0]])
    cert = check_spectral_condition(a, s)
    assert "not a P-matrix" in cert.notes
    assert cert.rho_t is not None  # evaluated regardless


def test_spectral_certificate_skips_large_minor_enumeration():
    p = gen_example1(4, 4.0)
    s = make_splitting(p.a, SplittingKind.npgs())
    cert = check_spectral_condition(p.a, s, p_limit=8)
    assert "not checked" in cert.notes


def test_structural_certificate_scalar_below_one():
    a, s = _gs([[0.5]])
    cert = check_hmatrix_conditions(a, s)
    assert cert.h_plus and cert.h_compatible and cert.diag_below_one
    assert cert.hmatrix_conditions_ok
    assert cert.rho_t is None and cert.spectral_condition_ok is None
    # soundness: the passing certificate comes with rho(T) < 1
    assert iteration_operator_rho(a, s) < 1.0


def test_structural_certificate_weakly_coupled_case():
    a, s = _gs([[2.0, -0.5], [-0.5, 2.0]])
    cert = check_hmatrix_conditions(a, s)
    assert cert.diag_geq_one and cert.coupling_matrix_is_m
    assert cert.hmatrix_conditions_ok
    assert iteration_operator_rho(a, s) < 1.0


def test_structural_certificate_benchmark_fails_but_solver_works():
    # conditions are sufficient only: this family fails them yet converges
    p = gen_example1(2, 4.0)
    s = make_splitting(p.a, SplittingKind.npgs())
    cert = check_hmatrix_conditions(p.a, s)
    assert cert.h_plus and cert.h_compatible and cert.diag_geq_one
    assert not cert.coupling_matrix_is_m
    assert not cert.diag_below_one
    assert not cert.hmatrix_conditions_ok
    assert "sufficient" in cert.notes


def test_certificate_boolean_identity():
    for seed in range(10):
        a = gen_random_hplus(4, seed).a
        if seed % 2:
            a = a.scaled(0.9 / a.diagonal_vector().max())
        s = make_splitting(a, SplittingKind.npj())
        cert = check_hmatrix_conditions(a, s)
        expected = cert.h_plus and cert.h_compatible and (
            (cert.diag_geq_one and cert.coupling_matrix_is_m) or cert.diag_below_one
        )
        assert cert.hmatrix_conditions_ok == expected


def test_certificates_are_pure():
    p = gen_random_hplus(5, 3)
    s = make_splitting(p.a, SplittingKind.npsor(1.3))
    c1 = check_spectral_condition(p.a, s)
    c2 = check_spectral_condition(p.a, s)
    assert dataclasses.asdict(c1) == dataclasses.asdict(c2)


def test_certificate_json_field_order():
    a, s = _gs([[4.0]])
    rec = check_spectral_condition(a, s).to_json_dict()
    assert list(rec.keys()) == [
        "rho_t", "rho_mode", "spectral_condition_ok", "h_plus", "h_compatible",
        "diag_geq_one", "coupling_matrix_is_m", "diag_below_one",
        "hmatrix_conditions_ok", "notes",
    ]


def test_certify_rho_lt_one_examples():
    assert certify_rho_lt_one(np.diag([0.5, 0.5]), np.ones(2))
    assert not certify_rho_lt_one(np.array([[0.0, 1.0], [1.0, 0.0]]), np.ones(2))
    assert certify_rho_lt_one(np.full((2, 2), 0.4), np.ones(2))
    with pytest.raises(ValueError):
        certify_rho_lt_one(np.eye(2), np.array([1.0, 0.0]))


def test_certify_rho_lt_one_is_sound():
    hits = 0
    for seed in range(12):
        a = gen_random_hplus(4, 20 + seed).a
        if seed % 2:
            a = a.scaled(0.9 / a.diagonal_vector().max())
        s = make_splitting(a, SplittingKind.npgs())
        t = _t_dense(a, s)
        witness = classify(comparison_matrix(a), p_matrix_limit=0).witness_v
        if witness is not None and certify_rho_lt_one(t, witness):
            hits += 1
            assert iteration_operator_rho(a, s) < 1.0 + 1e-8
    assert hits > 0
