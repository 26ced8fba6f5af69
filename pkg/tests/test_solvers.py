import numpy as np
import pytest

from lpgreedy import (
    DependentBasisError,
    LpSpace,
    SolverConfig,
    apply_functional,
    best_approx_subspace,
    lp_norm,
    minimize_free_relax,
    minimize_over_line,
    norming_functional,
)


def grid_min_1d(fun, radius=3.0, levels=6, n=21):
    """Successive-refinement grid search over one complex variable."""
    center = 0.0 + 0.0j
    span = radius
    for _ in range(levels):
        offs = np.linspace(-span, span, n)
        grid = center + offs[:, None] + 1j * offs[None, :]
        vals = np.vectorize(fun)(grid)
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        center = grid[i, j]
        span *= 2.5 / n
    return center, fun(center)


def grid_min_2d(fun, radius=2.0, levels=4, n=9):
    """Successive-refinement grid search over two complex variables."""
    centers = np.zeros(2, dtype=complex)
    span = radius
    for _ in range(levels):
        offs = np.linspace(-span, span, n)
        axes = [centers[k] + offs[:, None] + 1j * offs[None, :] for k in range(2)]
        best = (np.inf, None)
        flat0 = axes[0].ravel()
        flat1 = axes[1].ravel()
        for a in flat0:
            vals = np.array([fun(a, b) for b in flat1])
            j = int(np.argmin(vals))
            if vals[j] < best[0]:
                best = (vals[j], (a, flat1[j]))
        centers = np.array(best[1])
        span *= 2.5 / n
    return centers, best[0]


class TestMinimizeOverLine:
    def test_exact_cancellation(self):
        space = LpSpace(2.0, 2)
        res = minimize_over_line(space, [2, 0], [1, 0])
        assert res.value == 0.0
        assert res.converged
        assert res.minimizer[0] == pytest.approx(2.0 + 0j, abs=1e-6)

    def test_hilbert_projection(self):
        space = LpSpace(2.0, 2)
        res = minimize_over_line(space, [1, 1], [1, 0])
        assert res.value == pytest.approx(1.0, abs=1e-10)
        assert res.minimizer[0] == pytest.approx(1.0 + 0j, abs=1e-8)

    def test_p4_symmetric_minimizer_vs_grid(self):
        space = LpSpace(4.0, 2)
        base = np.array([1.0, 1.0], dtype=complex)
        direction = np.array([1.0, 0.0], dtype=complex)

        def objective(lam):
            return lp_norm(space, base - lam * direction)

        lam_grid, val_grid = grid_min_1d(objective)
        res = minimize_over_line(space, base, direction)
        assert val_grid == pytest.approx(1.0, abs=1e-8)
        assert res.value == pytest.approx(1.0, abs=1e-8)
        # quartic flatness limits minimizer resolution, not the value
        assert res.minimizer[0] == pytest.approx(1.0 + 0j, abs=1e-2)
        assert lam_grid == pytest.approx(1.0 + 0j, abs=1e-2)

    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_random_instances_vs_grid(self, p):
        space = LpSpace(p, 4)
        rng = np.random.default_rng(23)
        for _ in range(5):
            base = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            direction = rng.standard_normal(4) + 1j * rng.standard_normal(4)

            def objective(lam):
                return lp_norm(space, base - lam * direction)

            _, val_grid = grid_min_1d(objective, radius=4.0)
            res = minimize_over_line(space, base, direction)
            assert res.converged
            assert res.value <= val_grid + 1e-7

    def test_hilbert_closed_form(self):
        space = LpSpace(2.0, 5)
        rng = np.random.default_rng(29)
        for _ in range(20):
            base = rng.standard_normal(5) + 1j * rng.standard_normal(5)
            d = rng.standard_normal(5) + 1j * rng.standard_normal(5)
            lam_star = np.vdot(d, base) / np.vdot(d, d)
            res = minimize_over_line(space, base, d)
            assert res.minimizer[0] == pytest.approx(lam_star, abs=1e-8)
            assert res.value == pytest.approx(
                lp_norm(space, base - lam_star * d), abs=1e-8
            )

    def test_zero_direction_rejected(self):
        with pytest.raises(ValueError, match="nonzero"):
            minimize_over_line(LpSpace(2.0, 2), [1, 1], [0, 0])

    def test_non_convergence_flag(self):
        cfg = SolverConfig(max_iters=1)
        res = minimize_over_line(LpSpace(3.0, 2), [1, 1], [1, 0], cfg)
        assert not res.converged
        assert res.iterations == 1
        assert res.value <= lp_norm(LpSpace(3.0, 2), [1, 1])


class TestMinimizeFreeRelax:
    def test_degenerate_first_step(self):
        space = LpSpace(2.0, 2)
        res = minimize_free_relax(space, [1, 1], [0, 0], [1, 0])
        w, lam = res.minimizer
        assert w == 0.0 + 0.0j
        assert lam == pytest.approx(1.0 + 0j, abs=1e-8)
        assert res.value == pytest.approx(1.0, abs=1e-10)

    def test_exact_representation(self):
        space = LpSpace(2.0, 2)
        res = minimize_free_relax(space, [1, 1], [1, 0], [0, 1])
        w, lam = res.minimizer
        assert res.value <= 1e-10
        assert w == pytest.approx(0.0 + 0j, abs=1e-6)
        assert lam == pytest.approx(1.0 + 0j, abs=1e-6)

    def test_exact_representation_vs_grid(self):
        space = LpSpace(2.0, 2)
        f = np.array([1.0, 1.0], dtype=complex)
        G = np.array([1.0, 0.0], dtype=complex)
        phi = np.array([0.0, 1.0], dtype=complex)

        def objective(w, lam):
            return lp_norm(space, f - (1.0 - w) * G - lam * phi)

        centers, val = grid_min_2d(objective)
        assert val <= 1e-2  # coarse grid confirms the zero-residual basin
        assert centers[0] == pytest.approx(0.0 + 0j, abs=0.05)
        assert centers[1] == pytest.approx(1.0 + 0j, abs=0.05)

    def test_f_equals_G(self):
        space = LpSpace(3.0, 3)
        rng = np.random.default_rng(31)
        G = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        res = minimize_free_relax(space, G, G, [1, 0, 0])
        assert res.value <= 1e-10
        w, lam = res.minimizer
        assert abs(w) <= 1e-5
        assert abs(lam) <= 1e-5

    def test_restarts_agree(self):
        # convex objective: any start lands at the same value
        space = LpSpace(1.5, 4)
        rng = np.random.default_rng(37)
        f = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        G = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        phi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        values = []
        for _ in range(8):
            x0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            values.append(minimize_free_relax(space, f, G, phi, x0=x0).value)
        assert max(values) - min(values) <= 1e-8

    def test_hilbert_closed_form(self):
        space = LpSpace(2.0, 6)
        rng = np.random.default_rng(41)
        for _ in range(10):
            f = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            G = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            phi = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            B = np.column_stack([G, phi])
            u = np.linalg.lstsq(B, f, rcond=None)[0]  # f ~ u0*G + u1*phi
            expected = lp_norm(space, f - B @ u)
            res = minimize_free_relax(space, f, G, phi)
            assert res.value == pytest.approx(expected, abs=1e-8)
            w, lam = res.minimizer
            assert 1.0 - w == pytest.approx(u[0], abs=1e-6)
            assert lam == pytest.approx(u[1], abs=1e-6)


class TestBestApproxSubspace:
    def test_orthogonal_projection(self):
        space = LpSpace(2.0, 3)
        coeffs, residual = best_approx_subspace(space, [1, 1, 1], [[1, 0, 0], [0, 1, 0]])
        np.testing.assert_allclose(coeffs, [1.0, 1.0], atol=1e-8)
        np.testing.assert_allclose(residual, [0.0, 0.0, 1.0], atol=1e-8)

    def test_matches_normal_equations(self):
        space = LpSpace(2.0, 6)
        rng = np.random.default_rng(43)
        f = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        basis = [rng.standard_normal(6) + 1j * rng.standard_normal(6) for _ in range(3)]
        B = np.column_stack(basis)
        expected = np.linalg.lstsq(B, f, rcond=None)[0]
        coeffs, _ = best_approx_subspace(space, f, basis)
        np.testing.assert_allclose(coeffs, expected, atol=1e-8)

    def test_f_in_span(self):
        space = LpSpace(3.0, 4)
        rng = np.random.default_rng(47)
        basis = [rng.standard_normal(4) + 1j * rng.standard_normal(4) for _ in range(2)]
        f = 0.7 * basis[0] - 1.2j * basis[1]
        _, residual = best_approx_subspace(space, f, basis)
        assert lp_norm(space, residual) <= 1e-8

    def test_dependent_basis_rejected(self):
        space = LpSpace(2.0, 3)
        b = np.array([1.0, 2.0, 0.0], dtype=complex)
        with pytest.raises(DependentBasisError):
            best_approx_subspace(space, [1, 1, 1], [b, 2.0 * b])

    def test_empty_basis_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            best_approx_subspace(LpSpace(2.0, 3), [1, 1, 1], [])

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
    def test_certificate_and_local_optimality(self, p):
        space = LpSpace(p, 5)
        rng = np.random.default_rng(53)
        f = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        basis = [rng.standard_normal(5) + 1j * rng.standard_normal(5) for _ in range(2)]
        coeffs, residual = best_approx_subspace(space, f, basis)
        F = norming_functional(space, residual)
        for b in basis:
            assert abs(apply_functional(F, b)) <= 1e-7
        # perturbing any coefficient strictly increases the objective
        value = lp_norm(space, residual)
        B = np.column_stack(basis)
        for k in range(2):
            for delta in (1e-3, -1e-3, 1e-3j, -1e-3j):
                perturbed = coeffs.copy()
                perturbed[k] += delta
                assert lp_norm(space, f - B @ perturbed) > value


class TestGradientIdentity:
    """Analytic directional derivative of the norm vs central differences."""

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
    def test_matches_finite_difference(self, p):
        space = LpSpace(p, 6)
        rng = np.random.default_rng(59)
        h = 1e-6
        for _ in range(25):
            x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            F = norming_functional(space, x)
            analytic = apply_functional(F, y).real
            numeric = (lp_norm(space, x + h * y) - lp_norm(space, x - h * y)) / (2 * h)
            assert analytic == pytest.approx(numeric, abs=1e-5)


class TestSolverConfig:
    def test_field_ranges(self):
        with pytest.raises(ValueError, match="grad_tol"):
            SolverConfig(grad_tol=0.0)
        with pytest.raises(ValueError, match="max_iters"):
            SolverConfig(max_iters=0)
        with pytest.raises(ValueError, match="armijo_c"):
            SolverConfig(armijo_c=1.0)
        with pytest.raises(ValueError, match="backtrack_factor"):
            SolverConfig(backtrack_factor=0.0)
