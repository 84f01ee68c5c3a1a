import numpy as np
import pytest
import scipy.linalg
import scipy.sparse.linalg

from spectral_bounds import (
    BadOmega,
    HistoryConfig,
    Pencil,
    SingularShiftedMatrix,
    ZeroStartVector,
    bauer_fike_check,
    block_lanczos_step,
    convergence_history,
    exact_omega,
    exact_w,
    ends_config,
    interior_config,
    goerisch_left,
    kahan_left,
    lanczos,
    omega_from_kappa,
    shift_invert_ritz,
    tridiagonal_lehmann,
)
from spectral_bounds.verify import bounds_valid, goerisch_not_tighter, ordering_holds

from conftest import random_spd


def _recursion_residual(K, f):
    e = np.zeros(f.ell)
    e[-1] = 1.0
    R = K @ f.Q_ell - f.Q_ell @ f.T - f.beta[-1] * np.outer(f.Q[:, f.ell], e)
    return np.linalg.norm(R)


class TestLanczos:
    def test_tridiagonal_input(self, rng):
        n = 8
        a, b = rng.uniform(1, 5, n), rng.uniform(0.5, 1.5, n - 1)
        K = np.diag(a) + np.diag(b, 1) + np.diag(b, -1)
        f = lanczos(K, np.eye(n)[:, 0], 5)
        np.testing.assert_allclose(f.T, K[:5, :5], atol=1e-13)

    def test_diag_problem_residual(self, diag_problem):
        pencil, q1 = diag_problem
        f = lanczos(pencil.K, q1 / np.sqrt(50), 20)
        assert _recursion_residual(pencil.K, f) < 1e-8 * np.linalg.norm(pencil.K)
        np.testing.assert_allclose(f.Q.T @ f.Q, np.eye(21), atol=1e-12)
        assert np.all(f.beta > 0)

    def test_three_term_consistency_every_step(self, diag_problem):
        pencil, q1 = diag_problem
        f = lanczos(pencil.K, q1, 30)
        for ell in range(1, 31):
            g = f.truncated(ell)
            assert _recursion_residual(pencil.K, g) <= 1e-8 * ell * np.linalg.norm(pencil.K)

    def test_ritz_values_inside_spectrum(self, rng):
        A = rng.standard_normal((50, 50))
        A = A + A.T
        ev = np.linalg.eigvalsh(A)
        theta = np.linalg.eigvalsh(lanczos(A, rng.standard_normal(50), 10).T)
        assert ev[0] - 1e-10 <= theta.min() and theta.max() <= ev[-1] + 1e-10

    def test_operator_inputs_agree(self, rng):
        K = random_spd(rng, 12)
        q = rng.standard_normal(12)
        ref = lanczos(K, q, 6)
        for op in (scipy.sparse.linalg.aslinearoperator(K), lambda x: K @ x):
            f = lanczos(op, q, 6)
            np.testing.assert_allclose(f.T, ref.T, atol=1e-12)

    def test_zero_start(self):
        with pytest.raises(ZeroStartVector):
            lanczos(np.eye(3), np.zeros(3), 2)

    def test_breakdown(self):
        f = lanczos(np.diag([1.0, 2.0, 3.0, 4.0]), np.ones(4), 10)
        assert f.breakdown and f.ell == 4 and f.beta[-1] == 0.0
        np.testing.assert_allclose(np.linalg.eigvalsh(f.T), [1, 2, 3, 4], atol=1e-12)

    def test_inner_product(self, rng):
        K, M = random_spd(rng, 9), random_spd(rng, 9, 1.0, 3.0)
        f = lanczos(np.linalg.solve(M, K), rng.standard_normal(9), 5, inner=M)
        np.testing.assert_allclose(f.Q.T @ M @ f.Q, np.eye(6), atol=1e-12)
        np.testing.assert_allclose(f.Q_ell.T @ K @ f.Q_ell, f.T, atol=1e-10)


class TestTridiagonalLehmann:
    def test_invariant_space(self):
        f = lanczos(np.diag([1.0, 2.0, 3.0, 4.0]), np.ones(4), 4)
        b = tridiagonal_lehmann(f, 1.0, 2.5)
        np.testing.assert_allclose(b.values(), [1, 2, 3, 4], atol=1e-10)
        assert b.rho_multiplicity == 1

    def test_matches_bordered_form(self, diag_problem):
        pencil, q1 = diag_problem
        f = lanczos(pencil.K, q1, 25)
        for ell in (1, 5, 12, 25):
            g = f.truncated(ell)
            C = np.zeros((1, ell))
            C[0, -1] = g.beta[-1]
            for omega in (1.0, exact_omega(pencil, g)):
                a = tridiagonal_lehmann(g, omega, 14.0)
                b = goerisch_left(g.T, C, [[omega]], 14.0)
                np.testing.assert_allclose(a.lower, b.lower, rtol=1e-10)
                fin = ~a.wrapped
                np.testing.assert_allclose(a.upper[fin], b.upper[~b.wrapped], rtol=1e-10)

    def test_inclusions_on_diag_problem(self, diag_problem):
        pencil, q1 = diag_problem
        f = lanczos(pencil.K, q1, 15)
        assert bounds_valid(tridiagonal_lehmann(f, 1.0, 14.0), pencil.eigenvalues())

    def test_exact_omega_is_tightest(self, diag_problem):
        pencil, q1 = diag_problem
        f = lanczos(pencil.K, q1, 25)
        for ell in range(2, 26, 4):
            g = f.truncated(ell)
            w = exact_omega(pencil, g)
            tight = tridiagonal_lehmann(g, w, 16.0)
            for factor in (1.01, 2.0, 10.0):
                assert goerisch_not_tighter(tridiagonal_lehmann(g, factor * w, 16.0), tight)

    def test_exact_omega_equals_kahan_left(self, diag_problem):
        pencil, q1 = diag_problem
        f = lanczos(pencil.K, q1, 9)
        d = block_lanczos_step(pencil, f.Q_ell)
        a = tridiagonal_lehmann(f, exact_omega(pencil, f), 14.0)
        b = kahan_left(d.H, d.C, exact_w(pencil, d.Q2), 14.0)
        np.testing.assert_allclose(a.lower, b.lower, rtol=1e-8)

    def test_bad_omega(self):
        f = lanczos(np.diag([1.0, 2.0, 3.0]), np.ones(3), 2)
        with pytest.raises(BadOmega):
            tridiagonal_lehmann(f, 0.0, 1.5)
        with pytest.raises(BadOmega):
            omega_from_kappa(-1.0)


class TestShiftInvert:
    def test_full_space_is_exact(self, rng):
        p = Pencil(random_spd(rng, 10), random_spd(rng, 10, 1.0, 2.0))
        est = shift_invert_ritz(p, 7.3, rng.standard_normal(10), 10)
        np.testing.assert_allclose(est.values, p.eigenvalues(), rtol=1e-8)

    def test_diag_problem_resolves_neighbours(self, diag_problem):
        pencil, q1 = diag_problem
        est = shift_invert_ritz(pencil, 14.0, q1, 8).values
        for target in (13.0, 15.0):
            assert np.min(np.abs(est - target)) < 1e-6

    def test_monotone_toward_nearest(self, rng):
        p = Pencil(random_spd(rng, 40))
        lam = p.eigenvalues()
        rho = 0.5 * (lam[19] + lam[20]) + 0.1 * (lam[20] - lam[19])
        q = rng.standard_normal(40)
        prev_above = prev_below = np.inf
        for ell in range(2, 15):
            est = shift_invert_ritz(p, rho, q, ell).values
            if not (np.any(est > rho) and np.any(est < rho)):
                continue
            above = est[est > rho].min() - lam[20]
            below = lam[19] - est[est < rho].max()
            assert above >= -1e-9 and below >= -1e-9
            assert above <= prev_above + 1e-9 and below <= prev_below + 1e-9
            prev_above, prev_below = above, below

    def test_singular_shift(self):
        with pytest.raises(SingularShiftedMatrix):
            shift_invert_ritz(Pencil(np.diag([1.0, 2.0, 3.0])), 2.0, np.ones(3), 2)


class TestBauerFike:
    def test_zero_coupling(self):
        H = np.diag([1.0, 4.0])
        b = kahan_left(H, np.zeros((1, 2)), [[1.0]], 2.5)
        rep = bauer_fike_check(H, np.zeros((1, 2)), [[1.0]], 2.5, b)
        assert rep.rhs == 0.0
        np.testing.assert_allclose(rep.lhs, 0.0, atol=1e-12)
        assert rep.holds

    @pytest.mark.parametrize("h,c,w,rho", [(3.0, 0.5, 0.4, 2.0), (5.0, 1.3, 0.1, 2.2),
                                           (1.5, 0.2, 2.0, 4.0)])
    def test_scalar_case_is_sharp(self, h, c, w, rho):
        # with m = k = 1 the bound is the quadratic root and the inequality is tight
        b = kahan_left([[h]], [[c]], [[w]], rho)
        lam = b.values()[0]
        lhs = abs(h - rho) / rho * abs(h - lam) / lam * h
        rep = bauer_fike_check([[h]], [[c]], [[w]], rho, b)
        assert rep.lhs[0] == pytest.approx(lhs)
        assert lhs == pytest.approx(w * c * c, rel=1e-12)
        assert rep.holds

    def test_diag_problem_run(self, diag_problem):
        pencil, q1 = diag_problem
        f = lanczos(pencil.K, q1, 20)
        for ell in range(5, 21):
            g = f.truncated(ell)
            C = np.zeros((1, ell))
            C[0, -1] = g.beta[-1]
            b = tridiagonal_lehmann(g, 1.0, 14.0)
            assert bauer_fike_check(g.T, C, [[1.0]], 14.0, b).holds


class TestConvergenceHistory:
    def test_ends_ordering(self):
        hist = convergence_history(ends_config(), max_ell=20)
        assert hist.steps == list(range(1, 21))
        for rec in hist.records:
            assert ordering_holds(hist.exact, rec.ritz, rec.harmonic, rec.dual)

    def test_interior_qualitative(self):
        hist = convergence_history(interior_config(), max_ell=49)
        for t in (13.0, 15.0, 17.0, 19.0):
            si = hist.first_step_below("shift_invert", t, 1e-6)
            leh = hist.first_step_below("goerisch_left", t, 1e-2)
            rz = hist.first_step_below("ritz", t, 1e-2)
            assert si is not None and leh is not None and rz is not None
            assert si < leh
            assert max(leh, rz) <= 2 * min(leh, rz)

    def test_trivial_stops_at_dimension(self):
        cfg = HistoryConfig(np.diag([1.0, 2.0, 3.0, 4.0]), np.ones(4), 2.5)
        hist = convergence_history(cfg, max_ell=10)
        assert hist.steps == [1, 2, 3, 4]
        np.testing.assert_allclose(hist.records[-1].ritz.values, [1, 2, 3, 4], atol=1e-10)
        np.testing.assert_allclose(hist.records[-1].goerisch_left.values(), [1, 2, 3, 4],
                                   atol=1e-10)

    def test_error_bookkeeping(self):
        hist = convergence_history(interior_config(), max_ell=10)
        err = hist.errors("ritz", 13.0)
        assert np.all(np.isinf(err[:6])) and np.isfinite(err[6])
        assert hist.errors("lehmann_left", 15.0)[-1] < np.inf

    def test_general_mass(self, rng):
        K, M = random_spd(rng, 15), random_spd(rng, 15, 1.0, 2.0)
        lam = scipy.linalg.eigh(K, M, eigvals_only=True)
        rho = 0.5 * (lam[6] + lam[7])
        hist = convergence_history(HistoryConfig(K, rng.standard_normal(15), rho, M=M),
                                   max_ell=12)
        for rec in hist.records:
            assert ordering_holds(lam, rec.ritz, rec.harmonic, rec.dual)
            for b in (rec.lehmann_right, rec.lehmann_left, rec.goerisch_left):
                assert bounds_valid(b, lam)
