"""Lanczos tridiagonalization and Krylov convergence experiments.

The recursion ``A Q_l = Q_l T_l + beta_l q_{l+1} e_l'`` is run with full
(twice repeated) reorthogonalization, so the computed Krylov bases stay
orthonormal to working precision and the inclusion counts derived from them
remain trustworthy.  On top of it this module provides

* the tridiagonal left-definite (Lehmann-Goerisch) bounds, which need only
  ``T_l``, ``beta_l`` and a scalar ``omega >= q_{l+1}' M K^-1 M q_{l+1}``,
* shift-and-invert Lanczos estimates for comparison,
* a perturbation check relating the left bounds to ``||W|| ||C||^2``, and
* per-step convergence histories for the diag(1:2:100) experiments.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import (
    BadOmega,
    BadShift,
    NotPositiveDefinite,
    SingularShiftedMatrix,
    ZeroStartVector,
)
from .kahan import _safe_shift, _solve_bordered_left
from .lehmann import left_lehmann, right_lehmann
from .pencil import (
    ZERO_BAND,
    EdgeLabeledValues,
    Pencil,
    schwarz_matrices,
    solve_definite_gep,
)

FAMILIES = ("ritz", "harmonic", "dual", "lehmann_right", "lehmann_left",
            "goerisch_left", "shift_invert", "exact")

# margin applied to the smallest eigenvalue when certifying kappa
KAPPA_MARGIN = 1e-6


@dataclass(frozen=True)
class LanczosFactorization:
    """``A Q[:, :ell] = Q[:, :ell] T + beta[-1] Q[:, ell] e_ell'``.

    ``breakdown`` is True when the Krylov space became invariant; then
    ``beta[-1] == 0`` and the last column of Q is zero.
    """

    alpha: np.ndarray
    beta: np.ndarray
    Q: np.ndarray
    ell: int
    breakdown: bool = False

    @property
    def T(self):
        off = self.beta[:-1]
        return np.diag(self.alpha) + np.diag(off, 1) + np.diag(off, -1)

    @property
    def Q_ell(self):
        return self.Q[:, :self.ell]

    def truncated(self, ell):
        """The factorization after the first ``ell`` steps."""
        if not 1 <= ell <= self.ell:
            raise ValueError(f"ell must be in 1..{self.ell}, got {ell}")
        return LanczosFactorization(
            self.alpha[:ell].copy(), self.beta[:ell].copy(),
            self.Q[:, :ell + 1].copy(), ell,
            self.breakdown and ell == self.ell,
        )


def _as_apply(op):
    if isinstance(op, np.ndarray) or scipy.sparse.issparse(op):
        return lambda x: op @ x, op.shape[0]
    if isinstance(op, scipy.sparse.linalg.LinearOperator):
        return op.matvec, op.shape[0]
    if callable(op):
        return op, None
    A = np.asarray(op, dtype=float)
    return lambda x: A @ x, A.shape[0]


def lanczos(K_operator, q1, ell, inner=None):
    """Run ``ell`` Lanczos steps on a symmetric operator.

    ``K_operator`` may be an array, a sparse matrix, a ``LinearOperator``
    or a callable ``x -> A x``.  ``inner`` is an optional positive definite
    matrix G; the operator must then be self-adjoint in ``<x, y> = x'G y``
    and Q comes out G-orthonormal.
    """
    apply, n = _as_apply(K_operator)
    q = np.asarray(q1, dtype=float).ravel().copy()
    n = q.size if n is None else n
    if q.size != n:
        raise ValueError(f"start vector has length {q.size}, operator has n={n}")
    G = None if inner is None else np.asarray(inner, dtype=float)

    def gdot(X, y):
        return X.T @ y if G is None else X.T @ (G @ y)

    nrm = float(np.sqrt(gdot(q, q)))
    if not nrm > 0 or not np.isfinite(nrm):
        raise ZeroStartVector("start vector is zero")
    ell = int(ell)
    if ell < 1:
        raise ValueError("ell must be at least 1")
    ell = min(ell, n)

    Q = np.zeros((n, ell + 1))
    Q[:, 0] = q / nrm
    alpha = np.zeros(ell)
    beta = np.zeros(ell)
    scale = 0.0
    steps, broke = ell, False
    for j in range(ell):
        w = np.asarray(apply(Q[:, j]), dtype=float).ravel()
        alpha[j] = float(gdot(Q[:, j], w))
        w = w - alpha[j] * Q[:, j]
        if j > 0:
            w = w - beta[j - 1] * Q[:, j - 1]
        basis = Q[:, :j + 1]
        for _ in range(2):
            w = w - basis @ gdot(basis, w)
        b = float(np.sqrt(max(gdot(w, w), 0.0)))
        scale = max(scale, abs(alpha[j]), b)
        if b <= ZERO_BAND * max(scale, np.finfo(float).tiny):
            beta[j] = 0.0
            steps, broke = j + 1, True
            break
        beta[j] = b
        Q[:, j + 1] = w / b
    if broke:
        Q = Q[:, :steps + 1]
        Q[:, steps] = 0.0
        alpha, beta = alpha[:steps], beta[:steps]
    return LanczosFactorization(alpha, beta, Q, steps, broke)


def certified_kappa(K, M=None):
    """``(1 - 1e-6) * lambda_min`` of the pencil from a dense eigensolve."""
    lam_min = scipy.linalg.eigh(K, M, eigvals_only=True, subset_by_index=[0, 0])[0]
    if lam_min <= 0:
        raise NotPositiveDefinite("K")
    return (1.0 - KAPPA_MARGIN) * float(lam_min)


def omega_from_kappa(kappa):
    """``omega = 1 / kappa`` bounds ``q' M K^-1 M q`` for any M-unit vector q."""
    if not kappa > 0:
        raise BadOmega(f"kappa must be positive, got {kappa}")
    return 1.0 / float(kappa)


def exact_omega(pencil, fact):
    q = fact.Q[:, fact.ell]
    Mq = pencil.M @ q
    return float(Mq @ pencil.solve_k(Mq))


def tridiagonal_lehmann(fact, omega, rho):
    """Left-definite bounds from ``T_l``, ``beta_l`` and ``omega``.

    The pencil is ``A - Lambda B`` with
    ``A = [[T, beta e], [beta e', 1/omega + beta^2 e'T^-1 e]]`` and
    ``B = diag(I, 1/(rho omega) - beta^2 e'T^-1 (T - rho)^-1 e)``; rho is a
    simple eigenvalue and is removed.
    """
    omega = float(omega)
    if not omega > 0:
        raise BadOmega(f"omega must be positive, got {omega}")
    rho = float(rho)
    if not rho > 0:
        raise BadShift("left-definite bounds need rho > 0")
    ell = fact.ell
    theta, V = scipy.linalg.eigh_tridiagonal(fact.alpha, fact.beta[:-1])
    if theta[0] <= 0:
        raise NotPositiveDefinite("T", "K must be positive definite")
    rho, delta = _safe_shift(fact.T, rho)
    b = float(fact.beta[-1])
    v = V[-1] ** 2
    e_tinv_e = float(np.sum(v / theta))
    d = float(np.sum(v / (theta * (theta - rho))))
    A = np.zeros((ell + 1, ell + 1))
    A[:ell, :ell] = fact.T
    A[ell - 1, ell] = A[ell, ell - 1] = b
    A[ell, ell] = 1.0 / omega + b * b * e_tinv_e
    B = np.eye(ell + 1)
    B[ell, ell] = 1.0 / (rho * omega) - b * b * d
    return _solve_bordered_left(A, B, rho, 1, "goerisch_left", delta)


def _shifted_factor(pencil, rho):
    A = pencil.K - rho * pencil.M
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    d = np.abs(np.diag(lu))
    if d.min() <= np.finfo(float).eps * pencil.n * max(np.abs(A).max(), 1.0):
        raise SingularShiftedMatrix(f"K - {rho:g} M is numerically singular")
    return lu, piv


def shift_invert_lanczos(pencil, rho, q1, ell):
    """Lanczos on ``(K - rho M)^-1 K`` in the K inner product."""
    if not pencil.k_definite:
        raise NotPositiveDefinite("K", "shift-invert runs in the K inner product")
    lu_piv = _shifted_factor(pencil, float(rho))
    K = pencil.K
    return lanczos(lambda x: scipy.linalg.lu_solve(lu_piv, K @ x), q1, ell, inner=K)


def _map_back(theta, rho):
    theta = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(theta == 1.0, np.inf, rho * theta / (theta - 1.0))


def shift_invert_ritz(pencil, rho, q1, ell):
    """Eigenvalue estimates ``rho theta / (theta - 1)`` from shift-and-invert Lanczos.

    These are estimates, not bounds.
    """
    fact = shift_invert_lanczos(pencil, rho, q1, ell)
    theta = scipy.linalg.eigh_tridiagonal(fact.alpha, fact.beta[:-1],
                                          eigvals_only=True)
    return EdgeLabeledValues(_map_back(theta, float(rho)))


@dataclass(frozen=True)
class BauerFikeReport:
    """Per-bound left side of the perturbation inequality against ``||W|| ||C||^2``."""

    bounds: np.ndarray
    lhs: np.ndarray
    rhs: float
    tolerance: float

    @property
    def slack(self):
        return self.rhs + self.tolerance - self.lhs

    @property
    def holds(self):
        return bool(np.all(self.slack >= 0))


def bauer_fike_check(H, C, W, rho, bounds, rtol=1e-9):
    """Check ``min_i (|L_i - rho|/rho)(|L_i - b|/b) L_i <= ||W|| ||C||^2``.

    ``L_i`` are the eigenvalues of H and ``b`` runs over every finite left
    bound in ``bounds``.  The comparison allows ``rtol * (rhs + ||H||)``.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    W = np.atleast_2d(np.asarray(getattr(W, "W_hat", W), dtype=float))
    rho = float(rho)
    ritz_vals = np.linalg.eigvalsh(0.5 * (H + H.T))
    c_norm = np.linalg.norm(C, 2) if C.size else 0.0
    w_norm = np.linalg.norm(W, 2) if W.size else 0.0
    rhs = float(w_norm * c_norm ** 2)
    vals = bounds.values()
    vals = vals[np.isfinite(vals) & (vals > 0)]
    lhs = np.array([
        np.min(np.abs(ritz_vals - rho) / rho * np.abs(ritz_vals - b) / b * ritz_vals)
        for b in vals
    ])
    tol = rtol * (rhs + np.linalg.norm(H, 2))
    return BauerFikeReport(vals, lhs, rhs, float(tol))


@dataclass(frozen=True)
class HistoryConfig:
    """A Krylov experiment: pencil, start vector, shift and target eigenvalues."""

    K: np.ndarray
    q1: np.ndarray
    rho: float
    M: np.ndarray = None
    targets: tuple = ()
    kappa: float = None
    name: str = "custom"


@dataclass(frozen=True)
class StepRecord:
    step: int
    ritz: EdgeLabeledValues
    harmonic: EdgeLabeledValues
    dual: EdgeLabeledValues
    lehmann_right: object
    lehmann_left: object
    goerisch_left: object
    shift_invert: EdgeLabeledValues
    # data for the perturbation check on the tridiagonal bounds
    beta: float = 0.0
    omega: float = 0.0


@dataclass
class ConvergenceHistory:
    config: HistoryConfig
    exact: np.ndarray
    records: list = field(default_factory=list)

    @property
    def steps(self):
        return [r.step for r in self.records]

    def errors(self, family, target):
        """Per-step absolute error of ``family`` for the eigenvalue ``target``.

        Ritz-type families use bottom edge labels; shift-relative families
        (Lehmann bounds and shift-invert estimates) use the label of the
        target about rho.  Missing values give ``inf``.
        """
        lam = self.exact
        j = int(np.argmin(np.abs(lam - target))) + 1
        rho = self.config.rho
        if target < rho:
            label = -int(np.count_nonzero((lam < rho) & (lam >= lam[j - 1])))
        else:
            label = int(np.count_nonzero((lam > rho) & (lam <= lam[j - 1])))
        out = np.full(len(self.records), np.inf)
        for i, rec in enumerate(self.records):
            val = getattr(rec, family)
            try:
                if family in ("ritz", "harmonic", "dual"):
                    v = val[j]
                elif family == "shift_invert":
                    v = _about_shift(val.values, rho, label)
                else:
                    v = val[label]
            except IndexError:
                continue
            out[i] = abs(v - target)
        return out

    def first_step_below(self, family, target, tol):
        err = self.errors(family, target)
        hit = np.nonzero(err <= tol)[0]
        return self.records[hit[0]].step if hit.size else None


def _about_shift(values, rho, label):
    values = np.asarray(values, dtype=float)
    if label < 0:
        below = np.sort(values[values < rho])[::-1]
        if -label > below.size:
            raise IndexError(label)
        return float(below[-label - 1])
    above = np.sort(values[values > rho])
    if label > above.size:
        raise IndexError(label)
    return float(above[label - 1])


def convergence_history(config, rho=None, max_ell=25):
    """Run Lanczos from ``config.q1`` and record every bound family per step.

    Stops early when the Krylov space becomes invariant.
    """
    rho = config.rho if rho is None else float(rho)
    if rho != config.rho:
        config = HistoryConfig(config.K, config.q1, rho, config.M, config.targets,
                               config.kappa, config.name)
    pencil = Pencil(config.K, config.M)
    exact = pencil.eigenvalues()
    kappa = config.kappa if config.kappa is not None else certified_kappa(pencil.K, pencil.M)
    omega = omega_from_kappa(kappa)
    M = pencil.M
    Minv_K = pencil.solve_m(pencil.K)
    fact = lanczos(Minv_K, config.q1, max_ell, inner=M)
    si = shift_invert_lanczos(pencil, rho, config.q1, fact.ell)
    hist = ConvergenceHistory(config, exact)
    for ell in range(1, fact.ell + 1):
        f = fact.truncated(ell)
        S = schwarz_matrices(pencil, f.Q_ell)
        ritz_vals = solve_definite_gep(S.H1, S.H2)[0]
        harm = solve_definite_gep(S.H0, S.H1)[0]
        dual = solve_definite_gep(S.H2, S.H3)[0]
        right = right_lehmann(S, rho)
        left = left_lehmann(S, rho)
        goer = tridiagonal_lehmann(f, omega, rho)
        k_si = min(ell, si.ell)
        theta = scipy.linalg.eigh_tridiagonal(si.alpha[:k_si], si.beta[:k_si - 1],
                                              eigvals_only=True)
        hist.records.append(StepRecord(
            step=ell, ritz=ritz_vals, harmonic=harm, dual=dual,
            lehmann_right=right, lehmann_left=left, goerisch_left=goer,
            shift_invert=EdgeLabeledValues(_map_back(theta, rho)),
            beta=float(f.beta[-1]), omega=omega,
        ))
    return hist


def _diag_problem():
    return np.diag(np.arange(1.0, 100.0, 2.0)), np.ones(50)


def ends_config():
    """diag(1, 3, ..., 99) with M = I and the all-ones start vector."""
    K, q1 = _diag_problem()
    return HistoryConfig(K=K, q1=q1, rho=50.0, name="ends")


def interior_config():
    """Same matrix; shift 16 between the targets 13, 15 and 17, 19."""
    K, q1 = _diag_problem()
    return HistoryConfig(K=K, q1=q1, rho=16.0, targets=(13.0, 15.0, 17.0, 19.0),
                         name="interior")
