"""Dense building blocks for the symmetric pencil K - lambda M.

Everything downstream reduces to small symmetric-definite eigenproblems,
inertia counts, and the projected moment ("Schwarz") matrices of a trial
subspace.  All functions are pure and operate on numpy arrays.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    NotPositiveDefinite,
    NotSymmetric,
    RankDeficient,
    SingularK,
)

# |theta| <= ZERO_BAND * ||A||_F counts as zero in inertia tests.
ZERO_BAND = 1e-10
# singular values below RANK_TOL * sigma_max are treated as zero.
RANK_TOL = 1e-12
_SYMMETRY_TOL = 1e-10


def _as_symmetric(A, name):
    A = np.array(A, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    scale = max(np.linalg.norm(A), 1.0)
    if np.linalg.norm(A - A.T) > _SYMMETRY_TOL * scale:
        raise NotSymmetric(f"{name} is not symmetric")
    return 0.5 * (A + A.T)


def _cholesky_or_none(A):
    try:
        return scipy.linalg.cho_factor(A, lower=True)
    except np.linalg.LinAlgError:
        return None


@dataclass(frozen=True)
class Pencil:
    """The generalized problem ``K x = lambda M x``.

    ``M`` must be positive definite; whether ``K`` is positive definite is
    recorded in :attr:`k_definite` and checked by the operations that need it.
    Passing ``M=None`` means the identity.
    """

    K: np.ndarray
    M: np.ndarray = None
    k_definite: bool = field(init=False)
    _m_chol: tuple = field(init=False, repr=False, compare=False)
    _k_chol: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        K = _as_symmetric(self.K, "K")
        M = np.eye(K.shape[0]) if self.M is None else _as_symmetric(self.M, "M")
        if M.shape != K.shape:
            raise DimensionMismatch(f"K is {K.shape} but M is {M.shape}")
        m_chol = _cholesky_or_none(M)
        if m_chol is None:
            raise NotPositiveDefinite("M")
        k_chol = _cholesky_or_none(K)
        K.setflags(write=False)
        M.setflags(write=False)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "_m_chol", m_chol)
        object.__setattr__(self, "_k_chol", k_chol)
        object.__setattr__(self, "k_definite", k_chol is not None)

    @property
    def n(self):
        return self.K.shape[0]

    @property
    def identity_mass(self):
        return bool(np.array_equal(self.M, np.eye(self.n)))

    def solve_m(self, B):
        return scipy.linalg.cho_solve(self._m_chol, B)

    def solve_k(self, B):
        if self._k_chol is not None:
            return scipy.linalg.cho_solve(self._k_chol, B)
        with warnings.catch_warnings():
            # singularity is checked explicitly below
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(self.K, check_finite=False)
        d = np.abs(np.diag(lu))
        if d.min() <= np.finfo(float).eps * self.n * max(d.max(), 1.0):
            raise SingularK("K is numerically singular")
        return scipy.linalg.lu_solve((lu, piv), B)

    def eigenvalues(self):
        """Dense reference spectrum, ascending (the oracle for experiments)."""
        return scipy.linalg.eigh(self.K, self.M, eigvals_only=True)


@dataclass(frozen=True)
class EdgeLabeledValues:
    """Ascending values addressed from either edge of the spectrum.

    ``v[k]`` for ``k >= 1`` is the k-th value from the bottom, ``v[-l]`` the
    l-th from the top; ``v[k] == v[-(m + 1 - k)]``.  Zero is not an index.
    """

    values: np.ndarray

    def __post_init__(self):
        vals = np.sort(np.asarray(self.values, dtype=float).ravel())
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    def __getitem__(self, k):
        m = self.values.size
        if not isinstance(k, (int, np.integer)):
            raise TypeError("edge labels are nonzero integers")
        if 1 <= k <= m:
            return float(self.values[k - 1])
        if -m <= k <= -1:
            return float(self.values[m + k])
        raise IndexError(f"edge label {k} out of range for {m} values")

    def __iter__(self):
        return iter(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def edge_label(self, i):
        """Label of ``values[i]`` measured from the nearer edge."""
        m = self.values.size
        k = i + 1
        return k if k <= m - k + 1 else -(m - k + 1)


@dataclass(frozen=True)
class Inertia:
    negative: int
    zero: int
    positive: int

    def __iter__(self):
        return iter((self.negative, self.zero, self.positive))


@dataclass(frozen=True)
class SchwarzMatrices:
    """Projected moments of a basis P.

    ``H0 = P'K M^-1 K P``, ``H1 = P'K P``, ``H2 = P'M P``, ``H3 = P'M K^-1 M P``.
    ``k_norm`` is the Frobenius norm of K (sets the scale of the
    limiting-case shifts); ``k_definite`` records whether K was positive
    definite.
    """

    H0: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    H3: np.ndarray
    k_definite: bool = True
    k_norm: float = None

    @property
    def m(self):
        return self.H1.shape[0]


def _sym(A):
    return 0.5 * (A + A.T)


def check_basis(P, n=None):
    """Validate a trial basis and return it as a float 2-d array.

    Raises :class:`RankDeficient` if the numerical rank is below the column
    count.
    """
    P = np.array(P, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.ndim != 2:
        raise DimensionMismatch("basis must be a 1-d or 2-d array")
    if n is not None and P.shape[0] != n:
        raise DimensionMismatch(f"basis has {P.shape[0]} rows, pencil has n={n}")
    if P.shape[1] == 0 or P.shape[1] > P.shape[0]:
        raise DimensionMismatch(f"basis must have 1..n columns, got {P.shape[1]}")
    s = np.linalg.svd(P, compute_uv=False)
    if s[0] == 0.0 or s[-1] < RANK_TOL * s[0]:
        rank = int(np.sum(s > RANK_TOL * s[0]))
        raise RankDeficient(f"basis has numerical rank {rank} < {P.shape[1]}")
    return P


def solve_definite_gep(A, B):
    """All eigenpairs of ``A y = theta B y`` with B positive definite.

    Cholesky reduction followed by a symmetric eigensolve.  Returns
    ``(EdgeLabeledValues, Y)`` with ``Y' B Y = I``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A is {A.shape}, B is {B.shape}")
    try:
        theta, Y = scipy.linalg.eigh(_sym(A), _sym(B))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("B", str(exc)) from None
    return EdgeLabeledValues(theta), Y


def inertia(A, band=ZERO_BAND):
    """Negative / zero / positive eigenvalue counts of a symmetric matrix.

    Eigenvalues with ``|theta| <= band * ||A||_F`` count as zero.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"inertia needs a square matrix, got {A.shape}")
    if A.size == 0:
        return Inertia(0, 0, 0)
    theta = np.linalg.eigvalsh(_sym(A))
    tol = band * np.linalg.norm(A)
    neg = int(np.sum(theta < -tol))
    pos = int(np.sum(theta > tol))
    return Inertia(neg, theta.size - neg - pos, pos)


def count_below(pencil, rho):
    """Number of pencil eigenvalues below ``rho``, by Sylvester's law.

    ``K - rho M`` is congruent to ``diag(lambda_i - rho)`` so its negative
    inertia is the count.  This is ``r - 1`` in the shift-index notation.
    """
    return inertia(pencil.K - rho * pencil.M).negative


def m_orthonormalize(P, M):
    """Basis of span(P) that is orthonormal in the M inner product.

    Signs are fixed so the triangular factor has a positive diagonal; an
    M-orthonormal input therefore comes back unchanged.
    """
    M = np.asarray(M, dtype=float)
    P = check_basis(P, M.shape[0])
    chol = _cholesky_or_none(M)
    if chol is None:
        raise NotPositiveDefinite("M")
    L = np.tril(chol[0])
    Q, R = np.linalg.qr(L.T @ P)
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q = Q * signs
    return scipy.linalg.solve_triangular(L.T, Q, lower=False)


def schwarz_matrices(pencil, P):
    P = check_basis(P, pencil.n)
    KP = pencil.K @ P
    MP = pencil.M @ P
    H0 = _sym(KP.T @ pencil.solve_m(KP))
    H1 = _sym(P.T @ KP)
    H2 = _sym(P.T @ MP)
    try:
        H3 = _sym(MP.T @ pencil.solve_k(MP))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularK(str(exc)) from None
    return SchwarzMatrices(
        H0, H1, H2, H3,
        k_definite=pencil.k_definite,
        k_norm=float(np.linalg.norm(pencil.K)),
    )


def j_matrices(S, rho):
    """``(H0 - rho H1, H1 - rho H2, H2 - rho H3)``."""
    return (S.H0 - rho * S.H1, S.H1 - rho * S.H2, S.H2 - rho * S.H3)


def g_matrix(S, rho):
    """The 2m x 2m block matrix ``[[J0, J1], [J1, J2]]``.

    It has at most ``r - 1`` negative eigenvalues when K is positive definite
    and ``lambda_{r-1} < rho < lambda_r``.
    """
    J0, J1, J2 = j_matrices(S, rho)
    return np.block([[J0, J1], [J1, J2]])
