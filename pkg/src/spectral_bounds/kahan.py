"""Bordered (Kahan) formulations of Lehmann bounds and the Goerisch relaxation.

Given an M-orthonormal basis ``Q1`` of the trial space and the block
Lanczos data ``M^-1 K Q1 = Q1 H + Q2 C``, the right-definite Lehmann bounds
are the eigenvalues of

    [[H, C'], [C, rho I + C (H - rho I)^-1 C']]

other than rho itself (which appears k times).  The left-definite bounds
are the positive eigenvalues of the pencil

    [[H, C'], [C, N1]] - Lambda [[I, 0], [0, (N1 - N2) / rho]]

with ``N1 = W^-1 + C H^-1 C'`` and ``N2 = C (H - rho I)^-1 C'``, where
``W = Q2' M K^-1 M Q2``.  Replacing W by any certified ``W_hat >= W`` keeps
the bounds valid (possibly weaker); upper bounds may then wrap through
infinity and become trivial.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import (
    BadKappa,
    BadShift,
    NotPositiveDefinite,
    ShiftAtRitzValue,
)
from .lehmann import _assemble, left_inverse, right_inverse
from .pencil import _cholesky_or_none, _sym, m_orthonormalize

# residual directions with singular value below this times ||M^-1/2 K M^-1/2||
# are dropped from Q2
RESIDUAL_RANK_TOL = 1e-12
# how close rho may come to an eigenvalue of H before it is nudged
_RITZ_BAND = 1e-10
_RHO_NUDGE = 1e-8
# band (relative to the bordered matrix norm) used to count copies of rho
RHO_COPY_BAND = 1e-8


@dataclass(frozen=True)
class BlockLanczosData:
    """One block Lanczos step: ``M^-1 K Q1 - Q1 H = Q2 C``."""

    Q1: np.ndarray
    H: np.ndarray
    C: np.ndarray
    Q2: np.ndarray

    @property
    def m(self):
        return self.H.shape[0]

    @property
    def k(self):
        return self.C.shape[0]


@dataclass(frozen=True)
class GoerischW:
    """A positive definite ``W_hat >= Q2' M K^-1 M Q2``.

    ``provenance`` is ``"exact"`` for a direct solve and ``"residual_bound"``
    when built from approximate solves and a spectral lower bound ``kappa``.
    """

    W_hat: np.ndarray
    provenance: str = "exact"
    kappa: float = None


def block_lanczos_step(pencil, P):
    Q1 = m_orthonormalize(P, pencil.M)
    KQ1 = pencil.K @ Q1
    H = _sym(Q1.T @ KQ1)
    resid = pencil.solve_m(KQ1) - Q1 @ H
    resid -= Q1 @ (Q1.T @ (pencil.M @ resid))

    L = np.tril(pencil._m_chol[0])
    X = L.T @ resid
    Qx, Cx = np.linalg.qr(X)
    signs = np.where(np.diag(Cx) < 0, -1.0, 1.0)
    Qx, Cx = Qx * signs, Cx * signs[:, None]

    Kt = scipy.linalg.solve_triangular(L, pencil.K, lower=True)
    Kt = scipy.linalg.solve_triangular(L, Kt.T, lower=True)
    tol = RESIDUAL_RANK_TOL * max(np.linalg.norm(Kt), np.finfo(float).tiny)
    s = np.linalg.svd(Cx, compute_uv=False)
    if s.size and s.min() > tol:
        Q2x, C = Qx, Cx
    else:
        U, s, Vt = np.linalg.svd(Cx)
        keep = s > tol
        Q2x = Qx @ U[:, keep]
        C = s[keep, None] * Vt[keep]
    Q2 = scipy.linalg.solve_triangular(L.T, Q2x, lower=False)
    return BlockLanczosData(Q1=Q1, H=H, C=C, Q2=Q2)


def exact_w(pencil, Q2):
    """``W = Q2' M K^-1 M Q2`` by a direct solve."""
    B = pencil.M @ Q2
    return GoerischW(_sym(B.T @ pencil.solve_k(B)), "exact")


def inexact_solve(K, B, steps):
    """Approximate ``K^-1 B`` column by column with ``steps`` CG iterations from zero."""
    B = np.asarray(B, dtype=float)
    Z = np.zeros_like(B)
    for j in range(B.shape[1]):
        Z[:, j], _ = scipy.sparse.linalg.cg(K, B[:, j], rtol=0.0, atol=0.0,
                                             maxiter=steps)
    return Z


def goerisch_w(K, Q2, Z2, kappa, M=None):
    """Certified upper bound ``W_hat`` from approximate solves ``Z2 ~ K^-1 M Q2``.

    With ``R = M Q2 - K Z2`` and ``kappa ||x||^2 <= x'K x``::

        W = R'K^-1 R + Z2'R + (M Q2)'Z2 <= R'R / kappa + Z2'R + (M Q2)'Z2
    """
    if not kappa > 0:
        raise BadKappa(f"kappa must be positive, got {kappa}")
    K = np.asarray(K, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    Z2 = np.asarray(Z2, dtype=float)
    B = Q2 if M is None else np.asarray(M, dtype=float) @ Q2
    R = B - K @ Z2
    W_hat = R.T @ R / kappa + Z2.T @ R + B.T @ Z2
    return GoerischW(_sym(W_hat), "residual_bound", float(kappa))


def _safe_shift(H, rho):
    ev = np.linalg.eigvalsh(H)
    scale = max(np.linalg.norm(H), np.finfo(float).tiny)
    if ev.size == 0 or np.min(np.abs(ev - rho)) > _RITZ_BAND * scale:
        return rho, 0.0
    for delta in (_RHO_NUDGE * scale, -_RHO_NUDGE * scale):
        if np.min(np.abs(ev - (rho + delta))) > _RITZ_BAND * scale:
            return rho + delta, delta
    raise ShiftAtRitzValue(f"rho = {rho:g} coincides with a Ritz value")


def _strip_rho(theta, rho, k, scale):
    """Drop the k eigenvalues nearest rho; also count those inside the band."""
    theta = np.asarray(theta, dtype=float)
    dist = np.abs(theta - rho)
    dist[~np.isfinite(dist)] = np.inf
    multiplicity = int(np.count_nonzero(dist <= RHO_COPY_BAND * scale))
    drop = np.argsort(dist, kind="stable")[:k]
    keep = np.ones(theta.size, dtype=bool)
    keep[drop] = False
    return theta[keep], multiplicity


def _check_blocks(H, C):
    H = _sym(np.atleast_2d(np.asarray(H, dtype=float)))
    C = np.asarray(C, dtype=float)
    if C.ndim == 1:
        C = C[None, :]
    if C.size == 0:
        C = np.zeros((0, H.shape[0]))
    if C.shape[1] != H.shape[0]:
        raise ValueError(f"C must have {H.shape[0]} columns, got shape {C.shape}")
    return H, C


def kahan_right(H, C, rho):
    """Right-definite Lehmann bounds from the bordered (m+k) x (m+k) matrix."""
    H, C = _check_blocks(H, C)
    m, k = H.shape[0], C.shape[0]
    rho, delta = _safe_shift(H, float(rho))
    N2 = C @ np.linalg.solve(H - rho * np.eye(m), C.T)
    A = np.block([[H, C.T], [C, rho * np.eye(k) + _sym(N2)]])
    theta = np.linalg.eigvalsh(A)
    lam, mult = _strip_rho(theta, rho, k, np.linalg.norm(A))
    with np.errstate(divide="ignore"):
        raw = right_inverse(lam, rho)
    return _assemble(rho, "right", lam, raw, lam < rho, lam > rho,
                     np.zeros(lam.size, dtype=bool), form="bordered",
                     perturbation=delta, rho_multiplicity=mult)


def _w_array(W):
    return np.atleast_2d(np.asarray(getattr(W, "W_hat", W), dtype=float))


def bordered_left_pencil(H, C, W, rho):
    """The blocks ``(A, B)`` of the left-definite bordered pencil ``A - Lambda B``.

    ``A = [[H, C'], [C, N1]]`` and ``B = diag(I, M1)``.  Whenever the Ritz
    value just below rho lies below it, ``M1`` is positive definite.
    """
    H, C = _check_blocks(H, C)
    m, k = H.shape[0], C.shape[0]
    rho = float(rho)
    if not rho > 0:
        raise BadShift("left-definite bordered forms need rho > 0")
    h_chol = _cholesky_or_none(H)
    if h_chol is None:
        raise NotPositiveDefinite("H", "K must be positive definite")
    if k:
        W = _sym(_w_array(W))
        if W.shape != (k, k):
            raise ValueError(f"W must be {k}x{k}, got {W.shape}")
        w_chol = _cholesky_or_none(W)
        if w_chol is None:
            raise NotPositiveDefinite("W")
        W_inv = scipy.linalg.cho_solve(w_chol, np.eye(k))
        N1 = _sym(W_inv + C @ scipy.linalg.cho_solve(h_chol, C.T))
        N2 = _sym(C @ np.linalg.solve(H - rho * np.eye(m), C.T))
        M1 = _sym((N1 - N2) / rho)
    else:
        N1 = M1 = np.zeros((0, 0))
    A = np.block([[H, C.T], [C, N1]])
    B = scipy.linalg.block_diag(np.eye(m), M1)
    return A, B


def _bordered_left(H, C, W, rho, variant):
    H, C = _check_blocks(H, C)
    k = C.shape[0]
    rho = float(rho)
    if not rho > 0:
        raise BadShift("left-definite bordered forms need rho > 0")
    rho, delta = _safe_shift(H, rho)
    A, B = bordered_left_pencil(H, C, W, rho)
    return _solve_bordered_left(A, B, rho, k, variant, delta)


def _solve_bordered_left(A, B, rho, k, variant, delta=0.0):
    # A is positive definite (its Schur complement is W^-1) while B need not
    # be, so solve the reciprocal problem B z = mu A z and invert.
    mu = scipy.linalg.eigh(_sym(B), _sym(A), eigvals_only=True)
    tiny = 1e-14 * max(np.abs(mu).max(initial=0.0), np.finfo(float).tiny)
    with np.errstate(divide="ignore"):
        theta = np.where(np.abs(mu) <= tiny, np.inf, 1.0 / mu)
    lam, mult = _strip_rho(theta, rho, k, np.linalg.norm(A))

    band = 1e-10 * max(np.abs(lam[np.isfinite(lam)]).max(initial=0.0), 1.0)
    below = (lam > band) & (lam < rho)
    wrapped = ~np.isfinite(lam) | (lam < -band)
    above = (lam > rho) | wrapped
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(np.isfinite(lam), left_inverse(lam, rho), 1.0)
    return _assemble(rho, variant, lam, raw, below, above, wrapped,
                     form="bordered", perturbation=delta,
                     rho_multiplicity=mult)


def kahan_left(H, C, W, rho):
    """Left-definite Lehmann bounds from the bordered pencil with exact W."""
    return _bordered_left(H, C, W, rho, "left")


def goerisch_left(H, C, W_hat, rho):
    """Left-definite bounds with a relaxed ``W_hat >= W``; wrapped entries are trivial."""
    return _bordered_left(H, C, W_hat, rho, "goerisch_left")
