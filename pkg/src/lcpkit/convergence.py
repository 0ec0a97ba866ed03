"""Convergence certification for the projected splitting iteration.

The iteration contracts errors through the nonnegative operator

    T = |(M + 2I + D_A)^-1| (|N + I + D_A| + |A - I|)

so rho(T) < 1 certifies convergence from any start.  This module builds
T (exactly, as an upper bound, or matrix-free), estimates rho by power
iteration, and evaluates two sufficient hypothesis sets: a spectral one
(P-matrix plus rho(T) < 1) and a structural one for H-matrices with
positive diagonal.  Both are sufficient, not necessary: a failed check
never proves divergence.
"""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .matrix_core import (
    SparseMatrix,
    classify,
    comparison_matrix,
    lower_triangular_solve,
    spectral_radius_nonneg,
)
from .splittings import _entrywise_close

RHO_MODES = ("exact_dense", "comparison_bound", "operator")
EXACT_DENSE_LIMIT = 2000

# margin under 1.0 so power-iteration noise cannot flip a boundary verdict
STRICTNESS_MARGIN = 1e-8


class ModeUnsupportedError(ValueError):
    """The requested rho mode does not apply to this operator's structure."""


@dataclass(frozen=True)
class ConvergenceCertificate:
    """Evaluated sufficient conditions for one (matrix, splitting) pair.

    rho_t and spectral_condition_ok are present only when a spectral
    estimate was requested; rho_mode records how rho_t was obtained so a
    bound is never mistaken for the exact value.  The structural branch:
    hmatrix_conditions_ok = h_plus and h_compatible and
    (diag_geq_one and coupling_matrix_is_m, or diag_below_one), where the
    coupling matrix is <A> + 2I - D_A - |B| with B = L_A + U_A.
    """

    h_plus: bool
    h_compatible: bool
    diag_geq_one: bool
    coupling_matrix_is_m: bool
    diag_below_one: bool
    hmatrix_conditions_ok: bool
    rho_t: Optional[float] = None
    rho_mode: Optional[str] = None
    spectral_condition_ok: Optional[bool] = None
    notes: str = ""

    def to_json_dict(self):
        return {
            "rho_t": self.rho_t,
            "rho_mode": self.rho_mode,
            "spectral_condition_ok": self.spectral_condition_ok,
            "h_plus": self.h_plus,
            "h_compatible": self.h_compatible,
            "diag_geq_one": self.diag_geq_one,
            "coupling_matrix_is_m": self.coupling_matrix_is_m,
            "diag_below_one": self.diag_below_one,
            "hmatrix_conditions_ok": self.hmatrix_conditions_ok,
            "notes": self.notes,
        }


def _shifted_parts(a, s):
    d = a.diagonal_vector()
    lhs = s.m.add_diagonal(d + 2.0)
    reach = s.n_part.add_diagonal(d + 1.0).abs_entrywise().add(
        a.add_diagonal(-1.0).abs_entrywise()
    )
    return lhs, reach


def _lhs_sign_pattern_ok(lhs):
    """Lower triangular, positive diagonal, nonpositive off-diagonal:
    exactly the pattern under which inv(lhs) >= 0 entrywise, making
    |inv| application a plain forward solve."""
    if not lhs.is_lower_triangular():
        return False
    diag_mask = lhs.col_indices == lhs._rows_expanded()
    d = np.zeros(lhs.n)
    d[lhs.col_indices[diag_mask]] = lhs.values[diag_mask]
    if np.any(d <= 0.0):
        return False
    return bool(np.all(lhs.values[~diag_mask] <= 0.0))


def _rho_estimate(a, s, mode):
    if mode not in RHO_MODES:
        raise ValueError(f"mode must be one of {RHO_MODES}")
    lhs, reach = _shifted_parts(a, s)
    if mode == "operator":
        if not _lhs_sign_pattern_ok(lhs):
            raise ModeUnsupportedError(
                "operator mode needs a lower-triangular system matrix with "
                "positive diagonal and nonpositive off-diagonal"
            )
        apply_t = lambda x: lower_triangular_solve(lhs, reach.matvec(x))
        return spectral_radius_nonneg(apply_t, n=a.n)
    if a.n > EXACT_DENSE_LIMIT:
        raise ValueError(f"{mode} mode limited to n <= {EXACT_DENSE_LIMIT}")
    if mode == "comparison_bound":
        lhs = comparison_matrix(lhs)
        if not classify(lhs, p_matrix_limit=0).is_m:
            raise ModeUnsupportedError(
                "comparison bound needs the comparison of the system matrix "
                "to be an M-matrix"
            )
    # np.abs on the comparison-bound inverse is a mathematical no-op (the
    # inverse is nonnegative), but keeping the two pipelines identical means
    # the bound can never undercut the exact value through rounding alone.
    t_dense = np.abs(np.linalg.inv(lhs.to_dense())) @ reach.to_dense()
    return spectral_radius_nonneg(t_dense)


def iteration_operator_rho(a, s, mode="exact_dense"):
    """Spectral-radius estimate of T for splitting s of a.

    exact_dense materializes |inv(M + 2I + D_A)| (n capped); operator
    applies T matrix-free under a verified sign pattern; comparison_bound
    replaces the inverse factor by the inverse of its comparison matrix,
    which can only overestimate.  A structure that doesn't support the
    requested mode raises ModeUnsupportedError rather than answering
    something else.
    """
    est = _rho_estimate(a, s, mode)
    if not est.converged:
        warnings.warn(
            f"power iteration did not converge in {est.iterations} steps; "
            "estimate may be inaccurate",
            stacklevel=2,
        )
    return est.value


def _structural_fields(a, s, p_matrix_limit=0):
    report = classify(a, p_matrix_limit=p_matrix_limit)
    d = a.diagonal_vector()
    lhs_shift = s.m.add_diagonal(d + 1.0)
    rhs_shift = s.n_part.add_diagonal(d + 1.0)
    h_compatible = _entrywise_close(
        comparison_matrix(lhs_shift).subtract(rhs_shift.abs_entrywise()),
        comparison_matrix(a),
    )
    diag_geq_one = bool(np.all(d >= 1.0))
    diag_below_one = bool(np.all(d < 1.0))
    # coupling matrix <A> + 2I - D_A - |B|, B the off-diagonal part; for a
    # positive diagonal this collapses to 2I - 2|B|
    b_abs = a.strict_lower().abs_entrywise().add(a.strict_upper().abs_entrywise())
    coupling = (
        comparison_matrix(a).add_diagonal(2.0 - d).subtract(b_abs)
    )
    coupling_is_m = classify(coupling, p_matrix_limit=0).is_m
    ok = report.is_h_plus and h_compatible and (
        (diag_geq_one and coupling_is_m) or diag_below_one
    )
    return report, dict(
        h_plus=report.is_h_plus,
        h_compatible=h_compatible,
        diag_geq_one=diag_geq_one,
        coupling_matrix_is_m=coupling_is_m,
        diag_below_one=diag_below_one,
        hmatrix_conditions_ok=ok,
    )


def check_spectral_condition(a, s, p_limit=12, mode=None):
    """Certificate with rho(T) filled in and the structural fields evaluated.

    spectral_condition_ok holds when rho(T) < 1 - margin.  P-matrix
    status goes to the notes when n <= p_limit (the enumeration is
    exponential); the spectral verdict is computed either way.  mode
    defaults to exact_dense when n permits, otherwise operator.
    """
    if mode is None:
        mode = "exact_dense" if a.n <= EXACT_DENSE_LIMIT else "operator"
    est = _rho_estimate(a, s, mode)
    report, fields = _structural_fields(a, s, p_matrix_limit=p_limit)
    notes = []
    if report.is_p is None:
        notes.append(f"P-matrix status not checked (n > {p_limit})")
    elif report.is_p:
        notes.append("A is a P-matrix")
    else:
        notes.append("A is not a P-matrix; spectral verdict still evaluated")
    if not est.converged:
        notes.append("power iteration hit its cap; rho_t is the best estimate")
    if fields["hmatrix_conditions_ok"] and est.value >= 1.0:
        notes.append("structural conditions passed but rho estimate >= 1")
    return ConvergenceCertificate(
        rho_t=est.value,
        rho_mode=mode,
        spectral_condition_ok=bool(est.value < 1.0 - STRICTNESS_MARGIN),
        notes="; ".join(notes),
        **fields,
    )


def check_hmatrix_conditions(a, s):
    """Certificate for the structural (H-matrix) sufficient conditions.

    No spectral estimate is computed; rho_t stays None.  The conditions
    are sufficient only, which the notes spell out when they fail.
    """
    _, fields = _structural_fields(a, s)
    notes = []
    if np.all(a.diagonal_vector() > 0.0):
        notes.append("coupling matrix reduces to 2I - 2|B| (positive diagonal)")
    if not fields["hmatrix_conditions_ok"]:
        notes.append(
            "conditions are sufficient, not necessary; failure does not "
            "prove divergence"
        )
    return ConvergenceCertificate(notes="; ".join(notes), **fields)


def certify_rho_lt_one(t, v, n=None):
    """Sound one-sided certificate: T v < v strictly for some v > 0.

    t may be a SparseMatrix, a dense array, or a callable; v must be
    strictly positive.  True guarantees rho(T) < 1 for nonnegative T;
    False certifies nothing.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0 or v.min() <= 0.0:
        raise ValueError("v must be strictly positive componentwise")
    if isinstance(t, SparseMatrix):
        tv = t.matvec(v)
    elif isinstance(t, np.ndarray):
        tv = t @ v
    elif callable(t):
        tv = t(v)
    else:
        raise ValueError("unsupported operator type")
    return bool(np.all(tv < v))
