"""Right- and left-definite Lehmann inclusion bounds about a shift rho.

Right-definite bounds come from Rayleigh-Ritz on the spectral map
``lambda -> 1 / (lambda - rho)``; left-definite bounds from
``lambda -> lambda / (lambda - rho)``.  Both are expressed through the
Schwarz matrices of a trial basis:

* right:  ``(H1 - rho H2) y = R (H0 - 2 rho H1 + rho^2 H2) y``,
  ``Lambda = rho + 1/R``
* left:   ``(H1 - rho H2) y = L (H1 - 2 rho H2 + rho^2 H3) y``,
  ``Lambda = rho - rho / (1 - L)``

Negative R (or L) give lower bounds below rho, positive ones give upper
bounds above it.  Each interval ``[Lambda_-k, rho)`` holds at least k
eigenvalues of the pencil and each ``(rho, Lambda_l]`` at least l.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite, ShiftAtEigenvalue, WrongSide
from .pencil import (
    ZERO_BAND,
    EdgeLabeledValues,
    _cholesky_or_none,
    check_basis,
    j_matrices,
    solve_definite_gep,
)

VARIANTS = ("right", "left", "goerisch_left")

# smallest eigenvalue of the shifted right-hand side (in the H2 metric),
# relative to its largest, below which rho is treated as an eigenvalue
SHIFT_TOL = 1e-12
# the J-form is used when rho sits this far (relative to |rho|) outside the
# range of the reference Ritz-type values
_J_FORM_MARGIN = 0.5
LIMIT_SCALE = 1e8


def right_transform(R, rho):
    return rho + 1.0 / np.asarray(R, dtype=float)


def right_inverse(lam, rho):
    return 1.0 / (np.asarray(lam, dtype=float) - rho)


def left_transform(L, rho):
    L = np.asarray(L, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return rho - rho / (1.0 - L)


def left_inverse(lam, rho):
    lam = np.asarray(lam, dtype=float)
    return lam / (lam - rho)


@dataclass(frozen=True)
class ShiftedBounds:
    """Inclusion bounds labeled outward from the shift.

    ``lower[k-1]`` is ``Lambda_-k`` (descending away from rho) and
    ``upper[l-1]`` is ``Lambda_l`` (ascending).  Upper entries whose
    transformed value wrapped through infinity carry ``wrapped=True`` and
    the trivial bound ``+inf``.  ``raw`` holds the eigenvalues of the
    transformed pencil (R for the right-definite variant, L otherwise),
    ascending.
    """

    rho: float
    variant: str
    lower: np.ndarray
    upper: np.ndarray
    wrapped: np.ndarray
    raw: np.ndarray
    indeterminate: int = 0
    form: str = "pencil"
    perturbation: float = 0.0
    rho_multiplicity: int = None
    definite: bool = True

    @property
    def nu(self):
        return int(self.lower.size)

    @property
    def pi(self):
        return int(self.upper.size)

    def __getitem__(self, label):
        """``b[-k]`` is the k-th bound below rho, ``b[l]`` the l-th above."""
        if label < 0 and -label <= self.nu:
            return float(self.lower[-label - 1])
        if label > 0 and label <= self.pi:
            return float(self.upper[label - 1])
        raise IndexError(f"no bound labeled {label}")

    def values(self):
        """All finite, non-wrapped bounds in ascending order."""
        up = self.upper[~self.wrapped]
        return np.sort(np.concatenate([self.lower, up]))

    def labeled(self):
        """``(label, value, wrapped)`` triples, lowest first."""
        out = [(-k, float(v), False) for k, v in
               reversed(list(enumerate(self.lower, start=1)))]
        out += [(l, float(v), bool(w)) for l, (v, w) in
                enumerate(zip(self.upper, self.wrapped), start=1)]
        return out


@dataclass(frozen=True)
class InclusionStatement:
    """``[endpoint, rho)`` (side "below") or ``(rho, endpoint]`` holds >= count eigenvalues."""

    side: str
    endpoint: float
    rho: float
    count: int

    @property
    def interval(self):
        if self.side == "below":
            return (self.endpoint, self.rho)
        return (self.rho, self.endpoint)

    def eigenvalues_inside(self, eigenvalues, rtol=0.0):
        lam = np.asarray(eigenvalues, dtype=float)
        slack = rtol * (1.0 + abs(self.endpoint))
        if self.side == "below":
            inside = (lam >= self.endpoint - slack) & (lam < self.rho)
        else:
            inside = (lam > self.rho) & (lam <= self.endpoint + slack)
        return int(np.count_nonzero(inside))

    def holds(self, eigenvalues, rtol=0.0):
        return self.eigenvalues_inside(eigenvalues, rtol) >= self.count


def _assemble(rho, variant, lam, raw, below, above, wrapped_mask, **meta):
    order_low = np.argsort(-lam[below])
    lower = lam[below][order_low]
    up_vals = np.where(wrapped_mask, np.inf, lam)[above]
    wr = wrapped_mask[above]
    order_up = np.argsort(up_vals, kind="stable")
    indeterminate = int(lam.size - below.sum() - above.sum())
    return ShiftedBounds(
        rho=float(rho),
        variant=variant,
        lower=lower,
        upper=up_vals[order_up],
        wrapped=wr[order_up],
        raw=np.sort(np.asarray(raw, dtype=float)),
        indeterminate=indeterminate,
        **meta,
    )


def _from_right_raw(R, rho, **meta):
    R = np.asarray(R, dtype=float)
    band = ZERO_BAND * max(np.abs(R).max(initial=0.0), np.finfo(float).tiny)
    below = R < -band
    above = R > band
    with np.errstate(divide="ignore"):
        lam = right_transform(np.where(below | above, R, 1.0), rho)
    return _assemble(rho, "right", lam, R, below, above,
                     np.zeros(R.size, dtype=bool), **meta)


def _from_left_raw(L, rho, variant="left", **meta):
    L = np.asarray(L, dtype=float)
    band = ZERO_BAND * max(np.abs(L).max(initial=0.0), np.finfo(float).tiny)
    below = L < -band
    above = L > band
    if rho > 0:
        wrapped = above & (L <= 1.0)
    else:
        wrapped = np.zeros(L.size, dtype=bool)
    safe = np.where(below | (above & ~wrapped), L, 2.0)
    lam = left_transform(safe, rho)
    return _assemble(rho, variant, lam, L, below, above, wrapped, **meta)


def _from_one_sided(lam, rho, variant, raw, **meta):
    lam = np.asarray(lam, dtype=float)
    below = lam < rho
    above = lam > rho
    return _assemble(rho, variant, lam, raw, below, above,
                     np.zeros(lam.size, dtype=bool), **meta)


def _check_shift(rhs, H2):
    mu = np.linalg.eigvalsh(_metric_reduce(rhs, H2))
    if mu[-1] <= 0 or mu[0] < SHIFT_TOL * mu[-1]:
        raise ShiftAtEigenvalue(
            "shifted right-hand side is not positive definite; rho is "
            "numerically an eigenvalue with eigenvector in the subspace")


def _metric_reduce(A, B):
    chol = _cholesky_or_none(B)
    if chol is None:
        raise NotPositiveDefinite("H2")
    L = np.tril(chol[0])
    X = scipy.linalg.solve_triangular(L, A, lower=True)
    X = scipy.linalg.solve_triangular(L, X.T, lower=True)
    return 0.5 * (X + X.T)


def _j_form_sign(A, B, rho):
    """+1 / -1 when ``A - rho B`` is comfortably definite, else 0.

    "Comfortably" means every eigenvalue of ``(A, B)`` is at least
    ``margin * |rho|`` away from rho, so the direct form has no cancellation
    problem and its right side is Cholesky-reducible.
    """
    gap = _J_FORM_MARGIN * abs(rho)
    if _cholesky_or_none(A - (rho + gap) * B) is not None:
        return 1
    if _cholesky_or_none((rho - gap) * B - A) is not None:
        return -1
    return 0


def right_lehmann(S, rho):
    """Right-definite Lehmann bounds about ``rho`` from Schwarz matrices."""
    rho = float(rho)
    J0, J1, _ = j_matrices(S, rho)
    rhs = J0 - rho * J1
    _check_shift(rhs, S.H2)
    sign = _j_form_sign(S.H1, S.H2, rho)
    if sign:
        lam, _ = solve_definite_gep(sign * J0, sign * J1)
        lam = lam.values
        return _from_one_sided(lam, rho, "right", right_inverse(lam, rho),
                               form="shifted")
    R, _ = solve_definite_gep(J1, rhs)
    return _from_right_raw(R.values, rho)


def left_lehmann(S, rho):
    """Left-definite Lehmann bounds about ``rho``; requires K positive definite."""
    if not S.k_definite:
        raise NotPositiveDefinite("K", "left-definite bounds need K > 0")
    rho = float(rho)
    _, J1, J2 = j_matrices(S, rho)
    rhs = J1 - rho * J2
    _check_shift(rhs, S.H2)
    sign = _j_form_sign(S.H2, S.H3, rho)
    if sign:
        lam, _ = solve_definite_gep(sign * J1, sign * J2)
        lam = lam.values
        # with rho > 0, a value at or below zero is the image of a raw value
        # in (0, 1] and only says that something lies above rho
        wrapped = (lam <= 0.0) if rho > 0 else np.zeros(lam.size, dtype=bool)
        return _assemble(rho, "left", lam, left_inverse(lam, rho), (lam < rho) & ~wrapped,
                         (lam > rho) | wrapped, wrapped, form="shifted")
    L, _ = solve_definite_gep(J1, rhs)
    return _from_left_raw(L.values, rho)


def inclusion_intervals(b):
    out = [InclusionStatement("below", float(a), b.rho, k)
           for k, a in enumerate(b.lower, start=1)]
    out += [InclusionStatement("above", float(v), b.rho, l)
            for l, (v, w) in enumerate(zip(b.upper, b.wrapped), start=1)
            if not w]
    return out


def temple(pencil, p, rho):
    """Temple's lower bound for the eigenvalue just below ``rho``.

    Requires the Rayleigh quotient of ``p`` to lie below rho.
    """
    p = check_basis(p, pencil.n)[:, 0]
    rho = float(rho)
    Ap = pencil.K @ p - rho * (pencil.M @ p)
    den = float(p @ Ap)
    if den >= 0.0:
        raise WrongSide(f"p'(K - rho M)p = {den:g} must be negative")
    num = float(Ap @ pencil.solve_m(Ap))
    return rho + num / den


def _relative_deviation(a, b):
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        return np.inf
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), np.finfo(float).tiny)))


@dataclass(frozen=True)
class LimitReport:
    right_at_zero_vs_harmonic: float
    left_at_zero_vs_ritz: float
    right_at_infinity_vs_ritz: float
    left_at_infinity_vs_dual: float
    big_shift: float

    def max_deviation(self):
        return max(self.right_at_zero_vs_harmonic, self.left_at_zero_vs_ritz,
                   self.right_at_infinity_vs_ritz, self.left_at_infinity_vs_dual)


def limit_consistency(S, scale=LIMIT_SCALE):
    """Compare the Lehmann families with their rho -> 0 and rho -> +-inf limits.

    The large shift is ``scale * ||K||_F`` (both signs are tried and the
    worse deviation is kept).
    """
    ritz_vals = solve_definite_gep(S.H1, S.H2)[0].values
    harm = solve_definite_gep(S.H0, S.H1)[0].values
    dual = solve_definite_gep(S.H2, S.H3)[0].values
    k_norm = S.k_norm if S.k_norm else float(np.abs(harm).max())
    big = scale * k_norm
    r_inf = max(_relative_deviation(right_lehmann(S, s * big).values(), ritz_vals)
                for s in (1.0, -1.0))
    l_inf = max(_relative_deviation(left_lehmann(S, s * big).values(), dual)
                for s in (1.0, -1.0))
    return LimitReport(
        right_at_zero_vs_harmonic=_relative_deviation(right_lehmann(S, 0.0).values(), harm),
        left_at_zero_vs_ritz=_relative_deviation(left_lehmann(S, 0.0).values(), ritz_vals),
        right_at_infinity_vs_ritz=r_inf,
        left_at_infinity_vs_dual=l_inf,
        big_shift=big,
    )


@dataclass(frozen=True)
class CompareReport:
    """Outcome of the left-versus-right comparison at one shift.

    ``lower_ok[k-1]`` certifies ``Lambda^R_-k <= Lambda^L_-k`` and
    ``upper_ok[l-1]`` certifies ``Lambda^L_l <= Lambda^R_l``; the
    ``*_exact_ok`` arrays check the outer inequality against the true
    eigenvalues when those were supplied.
    """

    hypothesis_met: bool
    lower_ok: np.ndarray
    upper_ok: np.ndarray
    lower_exact_ok: np.ndarray = None
    upper_exact_ok: np.ndarray = None

    @property
    def status(self):
        if not self.hypothesis_met:
            return "hypothesis unmet"
        checks = [self.lower_ok, self.upper_ok, self.lower_exact_ok, self.upper_exact_ok]
        ok = all(bool(np.all(c)) for c in checks if c is not None)
        return "pass" if ok else "fail"


def left_right_compare(S, rho, n_below=None, eigenvalues=None, rtol=1e-9):
    """Check that left-definite bounds are at least as tight as right-definite ones.

    Guaranteed when the harmonic Ritz value ``Lambda~_{r-1}`` lies below
    rho, where ``r - 1`` (``n_below``) is the number of eigenvalues below
    rho.  Pass either ``n_below`` or the full ``eigenvalues``.
    """
    rho = float(rho)
    if eigenvalues is not None:
        eigenvalues = np.sort(np.asarray(eigenvalues, dtype=float))
        n_below = int(np.count_nonzero(eigenvalues < rho))
    if n_below is None:
        raise ValueError("pass n_below or eigenvalues")
    harm = EdgeLabeledValues(solve_definite_gep(S.H0, S.H1)[0].values)
    empty = np.zeros(0, dtype=bool)
    if n_below > S.m or (n_below >= 1 and harm[n_below] >= rho):
        return CompareReport(False, empty, empty)
    right = right_lehmann(S, rho)
    left = left_lehmann(S, rho)

    def leq(a, b):
        return a <= b + rtol * (1.0 + np.abs(b))

    nl = min(right.nu, left.nu)
    nu_ = min(right.pi, left.pi)
    lower_ok = leq(right.lower[:nl], left.lower[:nl])
    if right.nu != left.nu:
        lower_ok = np.append(lower_ok, False)
    upper_ok = leq(left.upper[:nu_], right.upper[:nu_])
    if right.pi != left.pi:
        upper_ok = np.append(upper_ok, False)
    lower_exact = upper_exact = None
    if eigenvalues is not None:
        r = n_below + 1
        ks = np.arange(1, left.nu + 1)
        ks = ks[r - ks >= 1]
        lower_exact = leq(left.lower[ks - 1], eigenvalues[r - ks - 1])
        ls = np.arange(1, left.pi + 1)
        ls = ls[r + ls - 1 <= eigenvalues.size]
        upper_exact = leq(eigenvalues[r + ls - 2], left.upper[ls - 1])
    return CompareReport(True, lower_ok, upper_ok, lower_exact, upper_exact)
