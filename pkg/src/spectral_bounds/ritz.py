"""Ritz, harmonic Ritz and dual harmonic Ritz values.

All three are Rayleigh-Ritz on equivalent forms of ``K x = lambda M x``:

* Ritz:           ``P'K P y = Lambda P'M P y``
* harmonic:       ``P'K M^-1 K P y = Lambda P'K P y``
* dual harmonic:  ``P'M P y = Lambda P'M K^-1 M P y``

With K and M positive definite, for every k the chains
``lambda_k <= dual_k <= ritz_k <= harmonic_k`` (from the bottom) and
``dual_-l <= ritz_-l <= harmonic_-l <= lambda_-l`` (from the top) hold.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BadSplit, IndefiniteRightSide, NotPositiveDefinite
from .pencil import (
    EdgeLabeledValues,
    _cholesky_or_none,
    check_basis,
    schwarz_matrices,
    solve_definite_gep,
)

KINDS = ("ritz", "harmonic", "dual_harmonic")


@dataclass(frozen=True)
class RitzResult:
    kind: str
    values: EdgeLabeledValues
    vectors: np.ndarray
    # False when K is indefinite: harmonic values are then not inner bounds
    guaranteed: bool = True


def _normalize_vectors(U, M):
    norms = np.sqrt(np.einsum("ij,ij->j", U, M @ U))
    U = U / norms
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def ritz(pencil, P):
    P = check_basis(P, pencil.n)
    H1 = P.T @ pencil.K @ P
    H2 = P.T @ pencil.M @ P
    values, Y = solve_definite_gep(H1, H2)
    return RitzResult("ritz", values, _normalize_vectors(P @ Y, pencil.M))


def harmonic_ritz(pencil, P, require_definite=False):
    """Harmonic Ritz values and vectors.

    For indefinite ``P'K P`` the reciprocal problem ``H1 y = mu H0 y`` (with
    ``H0`` positive definite) is solved instead and ``Lambda = 1 / mu``; the
    result is flagged ``guaranteed=False``, as is any result for indefinite K.
    """
    P = check_basis(P, pencil.n)
    KP = pencil.K @ P
    H0 = KP.T @ pencil.solve_m(KP)
    H1 = P.T @ KP
    if _cholesky_or_none(0.5 * (H1 + H1.T)) is not None:
        values, Y = solve_definite_gep(H0, H1)
        return RitzResult("harmonic", values, _normalize_vectors(P @ Y, pencil.M),
                          guaranteed=pencil.k_definite)
    if require_definite:
        raise IndefiniteRightSide("P'K P is not positive definite")
    mu, Y = solve_definite_gep(H1, H0)
    mu = mu.values
    with np.errstate(divide="ignore"):
        lam = np.where(mu == 0.0, np.inf, 1.0 / mu)
    order = np.argsort(lam)
    U = _normalize_vectors(P @ Y[:, order], pencil.M)
    return RitzResult("harmonic", EdgeLabeledValues(lam), U, guaranteed=False)


def dual_harmonic_ritz(pencil, P):
    if not pencil.k_definite:
        raise NotPositiveDefinite("K", "dual harmonic Ritz values need K^-1")
    S = schwarz_matrices(pencil, P)
    values, Y = solve_definite_gep(S.H2, S.H3)
    P = check_basis(P, pencil.n)
    return RitzResult("dual_harmonic", values, _normalize_vectors(P @ Y, pencil.M))


def optimality_witness(pencil, P, nu, pi):
    """A pencil ``(A_hat, M)`` agreeing with ``(K, M)`` on span(P).

    Its ``nu`` lowest and ``pi`` highest eigenvalues equal the corresponding
    Ritz values, so no method seeing only ``P'K P`` and ``P'M P`` can certify
    anything sharper.  The remaining ``n - m`` eigenvalues all equal the
    midpoint ``(Lambda_nu + Lambda_{-pi}) / 2``.
    """
    res = ritz(pencil, P)
    m = len(res.values)
    if nu < 1 or pi < 1 or nu + pi != m:
        raise BadSplit(f"need positive nu, pi with nu + pi = m = {m}, got {nu}, {pi}")
    if not pencil.k_definite:
        raise NotPositiveDefinite("K")
    U = res.vectors
    D = np.diag(res.values.values)
    mid = 0.5 * (res.values[nu] + res.values[-pi])
    MU = pencil.M @ U
    A_hat = MU @ D @ MU.T + mid * (pencil.M - MU @ MU.T)
    A_hat = 0.5 * (A_hat + A_hat.T)
    return A_hat, pencil.M.copy()
