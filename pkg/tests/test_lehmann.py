import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_bounds import (
    NotPositiveDefinite,
    Pencil,
    ShiftAtEigenvalue,
    WrongSide,
    harmonic_ritz,
    inclusion_intervals,
    inertia,
    j_matrices,
    left_lehmann,
    left_right_compare,
    limit_consistency,
    right_lehmann,
    ritz,
    schwarz_matrices,
    temple,
)
from spectral_bounds.lehmann import (
    left_inverse,
    left_transform,
    right_inverse,
    right_transform,
)
from spectral_bounds.verify import bounds_valid

from conftest import krylov_basis, random_spd

D4 = Pencil(np.diag([1.0, 2.0, 3.0, 4.0]))
S_INV = schwarz_matrices(D4, np.eye(4)[:, :2])


def _random_case(rng, n, m, gap_index):
    K = random_spd(rng, n)
    p = Pencil(K)
    lam = p.eigenvalues()
    rho = 0.5 * (lam[gap_index - 1] + lam[gap_index])
    return p, rng.standard_normal((n, m)), rho, lam


class TestRightLehmann:
    def test_invariant_subspace_exact(self):
        b = right_lehmann(S_INV, 2.5)
        assert (b.nu, b.pi) == (2, 0)
        np.testing.assert_allclose(b.lower, [2.0, 1.0])

    def test_zero_shift_is_harmonic(self, rng):
        p = Pencil(random_spd(rng, 7))
        P = rng.standard_normal((7, 3))
        b = right_lehmann(schwarz_matrices(p, P), 0.0)
        np.testing.assert_allclose(b.values(), harmonic_ritz(p, P).values.values, rtol=1e-10)
        assert b.nu == 0

    def test_random_inclusions(self, rng):
        for _ in range(20):
            p, P, rho, lam = _random_case(rng, 10, 4, 4)
            b = right_lehmann(schwarz_matrices(p, P), rho)
            assert bounds_valid(b, lam)

    def test_shift_at_eigenvalue(self):
        with pytest.raises(ShiftAtEigenvalue):
            right_lehmann(S_INV, 2.0)

    def test_labels_and_ordering(self, rng):
        p, P, rho, _ = _random_case(rng, 12, 6, 6)
        b = right_lehmann(schwarz_matrices(p, P), rho)
        assert b.nu + b.pi == 6
        assert np.all(b.lower < rho) and np.all(b.upper > rho)
        assert np.all(np.diff(b.lower) <= 0) and np.all(np.diff(b.upper) >= 0)
        if b.nu:
            assert b[-1] == b.lower[0]

    def test_indeterminate_when_shift_is_ritz_value(self):
        p = Pencil(np.diag([1.0, 3.0]))
        S = schwarz_matrices(p, np.array([1.0, 1.0]) / np.sqrt(2))
        b = right_lehmann(S, 2.0)
        assert b.indeterminate == 1 and b.nu == b.pi == 0

    def test_large_shift_uses_shifted_form(self, diag_problem):
        pencil, q1 = diag_problem
        S = schwarz_matrices(pencil, krylov_basis(pencil.K, q1, 6))
        assert right_lehmann(S, 1e8).form == "shifted"
        assert right_lehmann(S, 14.0).form == "pencil"


class TestLeftLehmann:
    def test_invariant_subspace_exact(self):
        b = left_lehmann(S_INV, 2.5)
        np.testing.assert_allclose(b.lower, [2.0, 1.0])
        assert b.pi == 0

    def test_nonpositive_value_is_wrapped(self):
        # one Ritz vector far from rho takes the direct shifted form, and its
        # value lands below zero: only "something lies above rho" survives
        S = schwarz_matrices(Pencil(np.diag([1.0, 2.0, 20.0, 30.0])), np.ones(4))
        b = left_lehmann(S, 10.0)
        assert b.form == "shifted" and b.nu == 0
        assert b.upper.tolist() == [np.inf] and b.wrapped.tolist() == [True]
        assert inclusion_intervals(b) == []

    def test_zero_shift_is_ritz(self, rng):
        p = Pencil(random_spd(rng, 7), random_spd(rng, 7, 1.0, 2.0))
        P = rng.standard_normal((7, 3))
        b = left_lehmann(schwarz_matrices(p, P), 0.0)
        np.testing.assert_allclose(b.values(), ritz(p, P).values.values, rtol=1e-10)

    def test_diag_problem_shift_14(self, diag_problem):
        pencil, q1 = diag_problem
        b = left_lehmann(schwarz_matrices(pencil, krylov_basis(pencil.K, q1, 12)), 14.0)
        assert b[-1] <= 13.0 + 1e-9
        assert 15.0 - 1e-9 <= b[1]
        assert bounds_valid(b, pencil.eigenvalues())

    def test_needs_definite_k(self):
        S = schwarz_matrices(Pencil(np.diag([-1.0, 2.0, 3.0])), np.eye(3)[:, 1:])
        with pytest.raises(NotPositiveDefinite):
            left_lehmann(S, 2.5)

    def test_wrapped_entries_are_trivial(self, diag_problem):
        # a short Krylov space about a low shift: the top value wraps
        pencil, q1 = diag_problem
        b = left_lehmann(schwarz_matrices(pencil, krylov_basis(pencil.K, q1, 10)), 14.0)
        assert b.wrapped.any()
        assert np.all(np.isinf(b.upper[b.wrapped]))
        assert len(inclusion_intervals(b)) == b.nu + b.pi - int(b.wrapped.sum())

    def test_random_inclusions(self, rng):
        for _ in range(20):
            p, P, rho, lam = _random_case(rng, 10, 4, 5)
            assert bounds_valid(left_lehmann(schwarz_matrices(p, P), rho), lam)


class TestInertiaEquality:
    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 12))
    def test_same_count_below(self, seed, n):
        rng = np.random.default_rng(seed)
        r = int(rng.integers(1, n))
        p, P, rho, _ = _random_case(rng, n, int(rng.integers(1, n - 1)), r)
        S = schwarz_matrices(p, P)
        neg = inertia(j_matrices(S, rho)[1]).negative
        assert right_lehmann(S, rho).nu == neg == left_lehmann(S, rho).nu


class TestInclusionIntervals:
    def test_counts(self, rng):
        for _ in range(50):
            p, P, rho, lam = _random_case(rng, 8, 3, int(rng.integers(1, 8)))
            b = right_lehmann(schwarz_matrices(p, P), rho)
            if (b.nu, b.pi) == (2, 1):
                stmts = inclusion_intervals(b)
                assert [s.count for s in stmts] == [1, 2, 1]
                assert [s.side for s in stmts] == ["below", "below", "above"]
                return
        pytest.fail("no instance with nu=2, pi=1 drawn")

    def test_invariant_subspace_exact(self):
        for s in inclusion_intervals(right_lehmann(S_INV, 2.5)):
            assert s.holds([1.0, 2.0, 3.0, 4.0])
            assert s.eigenvalues_inside([1.0, 2.0, 3.0, 4.0]) == s.count


class TestTransforms:
    @given(st.floats(-1e3, 1e3).filter(lambda x: abs(x) > 1e-3), st.floats(0.1, 100))
    def test_right_round_trip(self, R, rho):
        lam = right_transform(R, rho)
        assert np.isclose(right_inverse(lam, rho), R, rtol=1e-12 * max(1, abs(R) * abs(lam)))

    @given(st.floats(-1e3, 1e3).filter(lambda x: abs(x - 1) > 1e-2 and abs(x) > 1e-3),
           st.floats(0.1, 100))
    def test_left_round_trip(self, L, rho):
        lam = left_transform(L, rho)
        assert np.isclose(left_inverse(lam, rho), L, rtol=1e-12 * max(1, abs(lam / rho) ** 2))

    def test_raw_values_map_to_bounds(self, rng):
        p, P, rho, _ = _random_case(rng, 10, 4, 5)
        b = right_lehmann(schwarz_matrices(p, P), rho)
        vals = np.sort(right_transform(b.raw, rho))
        np.testing.assert_allclose(vals, b.values(), rtol=1e-12)


class TestMonotonicity:
    def test_within_gap(self, rng):
        for _ in range(20):
            p, P, _, lam = _random_case(rng, 10, 4, 5)
            S = schwarz_matrices(p, P)
            lo, hi = lam[4], lam[5]
            shifts = lo + (hi - lo) * np.array([0.2, 0.5, 0.8])
            for fn in (right_lehmann, left_lehmann):
                prev = None
                for rho in shifts:
                    b = fn(S, rho)
                    if prev is not None and prev.nu == b.nu:
                        assert np.all(b.lower >= prev.lower - 1e-9 * (1 + np.abs(prev.lower)))
                    prev = b


class TestTemple:
    def test_exact_eigenvector(self):
        assert temple(D4, np.eye(4)[:, 1], 2.5) == pytest.approx(2.0, abs=1e-14)

    def test_hand_example(self):
        assert temple(D4, np.ones(4) / 2, 3.5) == pytest.approx(1.25, abs=1e-14)

    def test_wrong_side(self):
        with pytest.raises(WrongSide):
            temple(D4, np.ones(4) / 2, 2.0)

    def test_matches_single_vector_lehmann(self, rng):
        for _ in range(30):
            p = Pencil(random_spd(rng, 6), random_spd(rng, 6, 1.0, 2.0))
            v = rng.standard_normal(6)
            q = v @ p.K @ v / (v @ p.M @ v)
            rho = q + rng.uniform(0.5, 5.0)
            t = temple(p, v, rho)
            b = right_lehmann(schwarz_matrices(p, v), rho)
            assert t == pytest.approx(b[-1], rel=1e-12)


class TestLimits:
    def test_diagonal_closed_form(self):
        p = Pencil(np.diag([1.0, 3.0]))
        rep = limit_consistency(schwarz_matrices(p, np.array([1.0, 2.0])))
        assert rep.max_deviation() < 1e-6

    def test_invariant_subspace(self):
        assert limit_consistency(S_INV).max_deviation() < 1e-9

    def test_diag_problem(self, diag_problem):
        pencil, q1 = diag_problem
        rep = limit_consistency(schwarz_matrices(pencil, krylov_basis(pencil.K, q1, 8)))
        assert rep.right_at_zero_vs_harmonic <= 1e-10
        assert rep.left_at_zero_vs_ritz <= 1e-10
        assert rep.max_deviation() < 1e-5
        assert rep.big_shift == pytest.approx(1e8 * np.linalg.norm(pencil.K))


class TestLeftRightCompare:
    def test_invariant_subspace_equality(self):
        rep = left_right_compare(S_INV, 2.5, eigenvalues=[1.0, 2.0, 3.0, 4.0])
        assert rep.status == "pass"
        np.testing.assert_allclose(right_lehmann(S_INV, 2.5).lower,
                                   left_lehmann(S_INV, 2.5).lower)

    def test_random_with_hypothesis(self, rng):
        met = 0
        for _ in range(200):
            K = random_spd(rng, 12)
            p = Pencil(K)
            lam, X = scipy.linalg.eigh(K)
            # the hypothesis needs every eigenvector below rho well represented
            P = X[:, :8] + 1e-2 * rng.standard_normal((12, 8))
            rho = 0.5 * (lam[4] + lam[5])
            rep = left_right_compare(schwarz_matrices(p, P), rho, eigenvalues=lam)
            assert rep.status != "fail"
            met += rep.hypothesis_met
        assert met > 50

    def test_hypothesis_unmet_is_reported(self, diag_problem):
        pencil, q1 = diag_problem
        S = schwarz_matrices(pencil, krylov_basis(pencil.K, q1, 10))
        assert left_right_compare(S, 14.0, n_below=7).status == "hypothesis unmet"

    def test_diag_problem(self, diag_problem):
        pencil, q1 = diag_problem
        lam = pencil.eigenvalues()
        statuses = {}
        for m in range(10, 50, 3):
            S = schwarz_matrices(pencil, krylov_basis(pencil.K, q1, m))
            statuses[m] = left_right_compare(S, 14.0, eigenvalues=lam).status
        assert "fail" not in statuses.values()
        assert all(statuses[m] == "pass" for m in statuses if m >= 34)

    def test_needs_count(self):
        with pytest.raises(ValueError):
            left_right_compare(S_INV, 2.5)
