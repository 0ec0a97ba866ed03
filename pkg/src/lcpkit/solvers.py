"""Projected splitting iteration and modulus-based baselines for LCP(sigma, A).

The problem: find lambda >= 0 with w = A lambda + sigma >= 0 and
lambda' w = 0.  Progress is measured by Res(lambda), the Euclidean norm
of min(lambda, A lambda + sigma), which vanishes exactly at solutions.

The projected method keeps a raw state vector zeta and applies the
projection max(0, zeta) wherever the iterate enters the right-hand side
or the stopping test; the reported solution is always the projection.
"""

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .matrix_core import SingularMatrixError, SparseMatrix, lower_triangular_solve
from .splittings import Splitting, SplittingKind, make_splitting

DENSE_FALLBACK_LIMIT = 2000
DIVERGENCE_NORM = 1e12


class DivergenceError(RuntimeError):
    """Iterate became non-finite or unboundedly large."""


def _readonly(v, n=None, name="vector"):
    v = np.asarray(v, dtype=np.float64)
    if n is not None and v.shape != (n,):
        raise ValueError(f"{name} must have length {n}")
    v = v.copy()
    v.setflags(write=False)
    return v


def alternating_initial(n):
    """The (1, 0, 1, 0, ...) start vector used by the benchmark runs."""
    v = np.zeros(n)
    v[::2] = 1.0
    return v


def alternating_solution(n):
    """The (1, 2, 1, 2, ...) reference solution of the benchmark families."""
    v = np.full(n, 2.0)
    v[::2] = 1.0
    return v


@dataclass(frozen=True)
class LcpProblem:
    """Matrix A and vector sigma; optionally a known solution for benchmarks."""

    a: SparseMatrix
    sigma: np.ndarray
    known_solution: Optional[np.ndarray] = None

    def __post_init__(self):
        if not isinstance(self.a, SparseMatrix):
            raise ValueError("a must be a SparseMatrix")
        object.__setattr__(self, "sigma", _readonly(self.sigma, self.a.n, "sigma"))
        if self.known_solution is not None:
            lam = _readonly(self.known_solution, self.a.n, "known_solution")
            w = self.a.matvec(lam) + self.sigma
            if lam.min() < 0.0 or w.min() < -1e-9 or abs(float(lam @ w)) > 1e-9:
                raise ValueError("known_solution does not solve the problem")
            object.__setattr__(self, "known_solution", lam)

    @property
    def n(self):
        return self.a.n


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule: residual threshold, iteration cap, start vector.

    initial is the raw start state; None means the alternating
    (1, 0, 1, 0, ...) pattern of the benchmark protocol.
    """

    tol: float = 1e-5
    max_iters: int = 10000
    initial: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.initial is not None:
            object.__setattr__(self, "initial", _readonly(self.initial, name="initial"))

    def start_vector(self, n):
        if self.initial is None:
            return alternating_initial(n)
        if self.initial.shape != (n,):
            raise ValueError(f"initial vector must have length {n}")
        return np.array(self.initial)


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve: final iterate, counts, and residual history."""

    lam: np.ndarray
    iterations: int
    residuals: np.ndarray
    converged: bool
    wall_seconds: float
    method: str = ""
    alpha: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "lam", _readonly(self.lam))
        object.__setattr__(self, "residuals", _readonly(self.residuals))

    @property
    def residual_final(self):
        return float(self.residuals[-1])

    def to_json_dict(self):
        """Stable-order record for machine output; wall_seconds is timing."""
        return {
            "method": self.method,
            "n": int(self.lam.size),
            "alpha": self.alpha,
            "beta": self.beta,
            "iterations": self.iterations,
            "residual_final": self.residual_final,
            "wall_seconds": self.wall_seconds,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class ModulusConfig:
    """Modulus baseline knobs: variant, relaxation, Omega scale, gamma.

    Omega is the diagonal matrix omega_scale * D_A; omega_scale defaults
    to 1/(2*alpha).  gamma rescales the unconstrained variable; the fixed
    point lambda = (|x| + x)/gamma is gamma-invariant, but the path (and
    so the iteration count) is not, hence the knob.
    """

    variant: str = "mgs"
    alpha: float = 1.0
    omega_scale: Optional[float] = None
    gamma: float = 1.0

    def __post_init__(self):
        if self.variant not in ("mgs", "msor"):
            raise ValueError("variant must be 'mgs' or 'msor'")
        if not self.alpha > 0.0:
            raise ValueError("alpha must be positive")
        if self.omega_scale is not None and not self.omega_scale > 0.0:
            raise ValueError("omega_scale must be positive")
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")

    def effective_omega_scale(self):
        if self.omega_scale is not None:
            return float(self.omega_scale)
        return 1.0 / (2.0 * self.alpha)


def residual(p, lam):
    """Res(lambda) = || min(lambda, A lambda + sigma) ||_2."""
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (p.n,):
        raise ValueError("lambda length mismatch")
    w = p.a.matvec(lam) + p.sigma
    return float(np.linalg.norm(np.minimum(lam, w)))


def _linear_solver_for(lhs):
    """Pick the cheapest exact solver the structure of lhs admits.

    Diagonal and lower-triangular systems go to substitution; anything
    else (custom splittings) gets a one-time dense LU, capped at
    n <= DENSE_FALLBACK_LIMIT so the fallback can't masquerade as a
    sparse method at scale.
    """
    if lhs.is_diagonal():
        d = np.zeros(lhs.n)
        d[lhs.col_indices] = lhs.values
        if np.any(d == 0.0):
            row = int(np.argmin(d != 0.0))
            raise SingularMatrixError(f"zero diagonal in row {row}")
        return lambda b: b / d
    if lhs.is_lower_triangular():
        return lambda b: lower_triangular_solve(lhs, b)
    if lhs.n > DENSE_FALLBACK_LIMIT:
        raise ValueError(
            f"system matrix is not triangular and n > {DENSE_FALLBACK_LIMIT}; "
            "dense factorization refused"
        )
    lu, piv = scipy.linalg.lu_factor(lhs.to_dense(), check_finite=False)
    udiag = np.abs(np.diag(lu))
    if np.any(udiag == 0.0):
        row = int(np.argmin(udiag > 0.0))
        raise SingularMatrixError(f"singular system matrix (pivot {row})")
    return lambda b: scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def _guard(vec, k):
    if not np.all(np.isfinite(vec)) or float(np.abs(vec).max()) > DIVERGENCE_NORM:
        raise DivergenceError(f"iterate diverged at iteration {k}")


def projected_solve(p, s, cfg, on_iterate=None):
    """Run the projected splitting iteration on problem p.

    Each pass solves (M + 2I + D_A) zeta_next = (N + I + D_A) lam
    + |(A - I) lam + sigma| - sigma with lam = max(0, zeta), then tests
    Res on the projected new iterate.  The iteration count is the number
    of passes performed when the test first succeeds.

    on_iterate, when given, is called as on_iterate(k, lam_k) with the
    projected iterate after pass k; it must not mutate its argument.
    """
    if s.m.n != p.n:
        raise ValueError("splitting dimension mismatch")
    d = p.a.diagonal_vector()
    lhs = s.m.add_diagonal(d + 2.0)
    rhs_mat = s.n_part.add_diagonal(d + 1.0)
    shifted = p.a.add_diagonal(-1.0)
    solve = _linear_solver_for(lhs)
    sigma = p.sigma
    zeta = cfg.start_vector(p.n)
    residuals = []
    converged = False
    iterations = 0
    t0 = time.perf_counter()
    for k in range(1, cfg.max_iters + 1):
        lam = np.maximum(0.0, zeta)
        rhs = rhs_mat.matvec(lam) + np.abs(shifted.matvec(lam) + sigma) - sigma
        zeta = solve(rhs)
        _guard(zeta, k)
        lam = np.maximum(0.0, zeta)
        res = residual(p, lam)
        residuals.append(res)
        iterations = k
        if on_iterate is not None:
            on_iterate(k, lam)
        if res < cfg.tol:
            converged = True
            break
    wall = time.perf_counter() - t0
    kind = s.kind
    return SolveReport(
        lam=np.maximum(0.0, zeta),
        iterations=iterations,
        residuals=np.asarray(residuals),
        converged=converged,
        wall_seconds=wall,
        method=kind.tag,
        alpha=kind.alpha1,
        beta=kind.beta1,
    )


def modulus_solve(p, cfg, mcfg, on_iterate=None):
    """Run the modulus-based splitting baseline (mgs or msor variants).

    State is the unconstrained vector x; each pass solves
    (M + Omega) x_next = N x + (Omega - A) |x| - gamma sigma and reports
    lambda = (|x_next| + x_next) / gamma, stopping on Res(lambda) < tol.
    The splitting matches the projected family: mgs uses the Gauss-Seidel
    pair, msor the SOR pair at the configured alpha.
    """
    if mcfg.variant == "mgs":
        kind = SplittingKind.npgs()
    else:
        kind = SplittingKind.npsor(mcfg.alpha)
    s = make_splitting(p.a, kind)
    d = p.a.diagonal_vector()
    omega = mcfg.effective_omega_scale() * d
    if np.any(omega <= 0.0):
        raise ValueError("Omega must be a positive diagonal; matrix diagonal is not")
    lhs = s.m.add_diagonal(omega)
    omega_minus_a = p.a.scaled(-1.0).add_diagonal(omega)
    solve = _linear_solver_for(lhs)
    gamma = mcfg.gamma
    sigma_term = gamma * p.sigma
    x = cfg.start_vector(p.n)
    residuals = []
    converged = False
    iterations = 0
    t0 = time.perf_counter()
    for k in range(1, cfg.max_iters + 1):
        rhs = s.n_part.matvec(x) + omega_minus_a.matvec(np.abs(x)) - sigma_term
        x = solve(rhs)
        _guard(x, k)
        lam = (np.abs(x) + x) / gamma
        res = residual(p, lam)
        residuals.append(res)
        iterations = k
        if on_iterate is not None:
            on_iterate(k, lam)
        if res < cfg.tol:
            converged = True
            break
    wall = time.perf_counter() - t0
    return SolveReport(
        lam=(np.abs(x) + x) / gamma,
        iterations=iterations,
        residuals=np.asarray(residuals),
        converged=converged,
        wall_seconds=wall,
        method=mcfg.variant,
        alpha=mcfg.alpha,
        gamma=gamma,
    )
