"""Randomized property suite checked against dense eigensolves.

Each property is a function of one random instance returning ``True``
(holds), ``False`` (violated) or ``None`` (not applicable, e.g. a hypothesis
is unmet).  Instances are drawn from a ``numpy.random.Generator`` so a
seed reproduces the whole report.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .kahan import (
    block_lanczos_step,
    bordered_left_pencil,
    exact_w,
    goerisch_left,
    goerisch_w,
    inexact_solve,
    kahan_left,
    kahan_right,
)
from .lanczos import bauer_fike_check, certified_kappa
from .lehmann import (
    inclusion_intervals,
    left_lehmann,
    left_right_compare,
    limit_consistency,
    right_lehmann,
    temple,
)
from .pencil import (
    Pencil,
    _cholesky_or_none,
    g_matrix,
    inertia,
    j_matrices,
    schwarz_matrices,
    solve_definite_gep,
)

# absolute-plus-relative slack for comparisons against exact eigenvalues
ROUNDOFF = 1e-9
EQUIV_RTOL = 1e-8
CG_STEPS = 5


def _slack(x):
    return ROUNDOFF * (1.0 + np.abs(x))


@dataclass
class Instance:
    pencil: Pencil
    P: np.ndarray
    rho: float
    eigenvalues: np.ndarray
    seed_index: int = 0

    @property
    def n_below(self):
        return int(np.count_nonzero(self.eigenvalues < self.rho))

    def describe(self):
        return {
            "index": self.seed_index,
            "n": self.pencil.n,
            "m": self.P.shape[1],
            "rho": self.rho,
            "eigenvalues": self.eigenvalues.tolist(),
        }


def random_spd(rng, n, low=1.0, high=20.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (Q * rng.uniform(low, high, n)) @ Q.T


def random_instance(rng, n_min=4, n_max=12, index=0):
    """A random SPD pencil, a trial basis with ``m <= n - 2`` and a mid-gap shift."""
    n = int(rng.integers(n_min, n_max + 1))
    K = random_spd(rng, n)
    if rng.random() < 0.5:
        M = None
    else:
        A = rng.standard_normal((n, n))
        M = np.eye(n) + 0.2 * (A @ A.T) / n
    pencil = Pencil(K, M)
    lam, X = scipy.linalg.eigh(pencil.K, pencil.M)
    m = int(rng.integers(1, n - 1))
    if rng.random() < 0.5:
        P = rng.standard_normal((n, m))
    else:
        cols = rng.choice(n, size=m, replace=False)
        P = X[:, cols] + 10.0 ** rng.uniform(-4, -1) * rng.standard_normal((n, m))
    r = int(rng.integers(1, n))
    rho = 0.5 * (lam[r - 1] + lam[r])
    return Instance(pencil, P, float(rho), lam, index)


def check_ordering(inst):
    """Ritz, harmonic and dual harmonic values interlace the spectrum from both ends."""
    S = schwarz_matrices(inst.pencil, inst.P)
    ritz = solve_definite_gep(S.H1, S.H2)[0]
    harm = solve_definite_gep(S.H0, S.H1)[0]
    dual = solve_definite_gep(S.H2, S.H3)[0]
    return ordering_holds(inst.eigenvalues, ritz, harm, dual)


def ordering_holds(lam, ritz, harm, dual):
    lam = np.sort(np.asarray(lam, dtype=float))
    m = len(ritz)
    ok = True
    for k in range(1, m + 1):
        lo = lam[k - 1]
        hi = lam[-k]
        s_lo, s_hi = _slack(lo), _slack(hi)
        ok &= lo <= dual[k] + s_lo
        ok &= dual[k] <= ritz[k] + s_lo
        ok &= ritz[k] <= harm[k] + s_lo
        ok &= dual[-k] <= ritz[-k] + s_hi
        ok &= ritz[-k] <= harm[-k] + s_hi
        ok &= harm[-k] <= hi + s_hi
    return bool(ok)


def bounds_valid(bounds, eigenvalues):
    return all(s.holds(eigenvalues, ROUNDOFF) for s in inclusion_intervals(bounds))


def _goerisch_bounds(inst, data=None):
    p = inst.pencil
    data = block_lanczos_step(p, inst.P) if data is None else data
    Z = inexact_solve(p.K, p.M @ data.Q2, CG_STEPS)
    W_hat = goerisch_w(p.K, data.Q2, Z, certified_kappa(p.K, p.M), M=p.M)
    return data, W_hat, goerisch_left(data.H, data.C, W_hat, inst.rho)


def check_inclusion_right(inst):
    S = schwarz_matrices(inst.pencil, inst.P)
    return bounds_valid(right_lehmann(S, inst.rho), inst.eigenvalues)


def check_inclusion_left(inst):
    S = schwarz_matrices(inst.pencil, inst.P)
    return bounds_valid(left_lehmann(S, inst.rho), inst.eigenvalues)


def check_inclusion_goerisch(inst):
    return bounds_valid(_goerisch_bounds(inst)[2], inst.eigenvalues)


def goerisch_not_tighter(relaxed, exact):
    """Relaxed bounds lie outside the exact-W bounds index-wise."""
    nl = min(relaxed.nu, exact.nu)
    ok = np.all(relaxed.lower[:nl] <= exact.lower[:nl] + _slack(exact.lower[:nl]))
    nu_ = min(relaxed.pi, exact.pi)
    up_r, up_e = relaxed.upper[:nu_], exact.upper[:nu_]
    ok &= np.all(up_r >= up_e - _slack(np.where(np.isfinite(up_e), up_e, 0.0)))
    return bool(ok)


def check_goerisch_monotone(inst):
    data, _, relaxed = _goerisch_bounds(inst)
    exact = kahan_left(data.H, data.C, exact_w(inst.pencil, data.Q2), inst.rho)
    return goerisch_not_tighter(relaxed, exact)


def check_inertia_equality(inst):
    S = schwarz_matrices(inst.pencil, inst.P)
    neg = inertia(j_matrices(S, inst.rho)[1]).negative
    return right_lehmann(S, inst.rho).nu == neg == left_lehmann(S, inst.rho).nu


def check_inertia_bound(inst):
    S = schwarz_matrices(inst.pencil, inst.P)
    return inertia(g_matrix(S, inst.rho)).negative <= inst.n_below


def check_comparison(inst):
    S = schwarz_matrices(inst.pencil, inst.P)
    rep = left_right_compare(S, inst.rho, eigenvalues=inst.eigenvalues, rtol=ROUNDOFF)
    if not rep.hypothesis_met:
        return None
    return rep.status == "pass"


def _rel_match(a, b):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    return bool(np.all(np.abs(a - b) <= EQUIV_RTOL * np.maximum(np.abs(b), 1.0)))


def same_bounds(a, b):
    fin_a, fin_b = a.upper[~a.wrapped], b.upper[~b.wrapped]
    return (_rel_match(a.lower, b.lower) and _rel_match(fin_a, fin_b)
            and np.array_equal(a.wrapped, b.wrapped))


def check_kahan_equivalence(inst):
    S = schwarz_matrices(inst.pencil, inst.P)
    data = block_lanczos_step(inst.pencil, inst.P)
    kr = kahan_right(data.H, data.C, inst.rho)
    kl = kahan_left(data.H, data.C, exact_w(inst.pencil, data.Q2), inst.rho)
    return (same_bounds(kr, right_lehmann(S, inst.rho))
            and same_bounds(kl, left_lehmann(S, inst.rho))
            and kr.rho_multiplicity == data.k
            and kl.rho_multiplicity == data.k)


def check_definiteness_trigger(inst):
    """``M1`` is positive definite whenever the Ritz value below rho is below it."""
    data = block_lanczos_step(inst.pencil, inst.P)
    r1 = inst.n_below
    ritz = np.linalg.eigvalsh(data.H)
    if data.k == 0 or r1 < 1 or r1 > ritz.size or ritz[r1 - 1] >= inst.rho:
        return None
    _, B = bordered_left_pencil(data.H, data.C, exact_w(inst.pencil, data.Q2), inst.rho)
    m = data.m
    return _cholesky_or_none(B[m:, m:]) is not None


def check_bauer_fike(inst):
    data = block_lanczos_step(inst.pencil, inst.P)
    if data.k == 0:
        return None
    W = exact_w(inst.pencil, data.Q2)
    b = kahan_left(data.H, data.C, W, inst.rho)
    return bauer_fike_check(data.H, data.C, W, inst.rho, b).holds


def check_limits(inst):
    rep = limit_consistency(schwarz_matrices(inst.pencil, inst.P))
    return (rep.right_at_zero_vs_harmonic <= 1e-10
            and rep.left_at_zero_vs_ritz <= 1e-10
            and rep.right_at_infinity_vs_ritz <= 1e-5
            and rep.left_at_infinity_vs_dual <= 1e-5)


def random_temple_case(rng, pencil):
    """A random vector p and a shift above its Rayleigh quotient.

    The shift is kept at least 5% of the spectral spread away from the
    quotient and from every eigenvalue, so ``p'(K - rho M)p`` is not
    dominated by cancellation.
    """
    lam = pencil.eigenvalues()
    spread = lam[-1] - lam[0]
    for _ in range(100):
        p = rng.standard_normal(pencil.n)
        q = float(p @ pencil.K @ p) / float(p @ pencil.M @ p)
        rho = q + rng.uniform(0.05, 1.0) * spread
        if np.min(np.abs(lam - rho)) > 0.05 * spread:
            return p, rho
    raise RuntimeError("no admissible Temple case found")


def check_temple(inst):
    rng = np.random.default_rng([inst.seed_index, 7])
    p, rho = random_temple_case(rng, inst.pencil)
    t = temple(inst.pencil, p, rho)
    b = right_lehmann(schwarz_matrices(inst.pencil, p), rho)
    return bool(abs(t - b[-1]) <= 1e-12 * max(abs(t), 1.0))


PROPERTIES = {
    "ordering": check_ordering,
    "inclusion_right": check_inclusion_right,
    "inclusion_left": check_inclusion_left,
    "inclusion_goerisch": check_inclusion_goerisch,
    "goerisch_monotone": check_goerisch_monotone,
    "inertia_equality": check_inertia_equality,
    "inertia_bound": check_inertia_bound,
    "left_vs_right": check_comparison,
    "kahan_equivalence": check_kahan_equivalence,
    "definiteness_trigger": check_definiteness_trigger,
    "bauer_fike": check_bauer_fike,
    "limits": check_limits,
    "temple": check_temple,
}


@dataclass
class PropertyResult:
    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self):
        return self.failed == 0


@dataclass
class VerifyReport:
    seed: int
    count: int
    results: dict

    @property
    def ok(self):
        return all(r.ok for r in self.results.values())

    def format(self):
        lines = [f"seed={self.seed} instances={self.count}"]
        for r in self.results.values():
            tag = "PASS" if r.ok else "FAIL"
            note = f" ({r.skipped} hypothesis unmet)" if r.name == "left_vs_right" else (
                f" ({r.skipped} not applicable)" if r.skipped else "")
            lines.append(f"{tag} {r.name}: {r.passed} passed, {r.failed} failed{note}")
            for ce in r.counterexamples[:3]:
                lines.append(f"  counterexample: {ce}")
        return "\n".join(lines)


def run_suite(seed=0, count=200, n_min=4, n_max=12, properties=None):
    """Draw ``count`` instances and run every property on each."""
    names = list(PROPERTIES) if properties is None else list(properties)
    rng = np.random.default_rng(seed)
    results = {name: PropertyResult(name) for name in names}
    for i in range(count):
        inst = random_instance(rng, n_min, n_max, index=i)
        for name in names:
            res = results[name]
            try:
                outcome = PROPERTIES[name](inst)
            except Exception as exc:  # report, do not abort the suite
                outcome = False
                info = inst.describe()
                info["error"] = f"{type(exc).__name__}: {exc}"
                res.counterexamples.append(info)
                res.failed += 1
                continue
            if outcome is None:
                res.skipped += 1
            elif outcome:
                res.passed += 1
            else:
                res.failed += 1
                res.counterexamples.append(inst.describe())
    return VerifyReport(seed, count, results)
