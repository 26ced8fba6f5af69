import json

import numpy as np
import pytest

from lpgreedy import (
    Dictionary,
    DualFunctional,
    InfeasibleSelectionError,
    LpSpace,
    TargetSpec,
    dict_dual_norm,
    eps_select,
    generate_dictionary,
    lp_norm,
    make_target,
    norming_functional,
    weak_select,
)


class TestGenerateDictionary:
    def test_canonical_is_identity(self):
        space = LpSpace(2.0, 3)
        d = generate_dictionary(space, 3, "canonical")
        np.testing.assert_array_equal(d.atoms, np.eye(3, dtype=complex))
        assert [lp_norm(space, a) for a in d.atoms] == [1.0, 1.0, 1.0]

    def test_canonical_count_mismatch(self):
        with pytest.raises(ValueError, match="count == dim"):
            generate_dictionary(LpSpace(2.0, 3), 4, "canonical")

    def test_gaussian_deterministic(self):
        space = LpSpace(2.0, 8)
        a = generate_dictionary(space, 32, "gaussian", seed=7)
        b = generate_dictionary(space, 32, "gaussian", seed=7)
        np.testing.assert_array_equal(a.atoms, b.atoms)
        c = generate_dictionary(space, 32, "gaussian", seed=8)
        assert not np.array_equal(a.atoms, c.atoms)

    @pytest.mark.parametrize("kind,count", [("gaussian", 20), ("fourier_frame", 16)])
    def test_unit_norms_p3(self, kind, count):
        space = LpSpace(3.0, 8)
        d = generate_dictionary(space, count, kind, seed=1)
        norms = np.array([lp_norm(space, a) for a in d.atoms])
        assert norms.max() <= 1.0 + 1e-12
        assert norms.min() >= 1.0 - 1e-12

    def test_fourier_requires_oversampling(self):
        with pytest.raises(ValueError, match="count >= dim"):
            generate_dictionary(LpSpace(2.0, 8), 4, "fourier_frame")

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            generate_dictionary(LpSpace(2.0, 4), 4, "hadamard")

    def test_atoms_immutable(self):
        d = generate_dictionary(LpSpace(2.0, 4), 4, "canonical")
        with pytest.raises(ValueError):
            d.atoms[0, 0] = 5.0

    def test_overnorm_atom_rejected(self):
        space = LpSpace(2.0, 2)
        with pytest.raises(ValueError, match="norm"):
            Dictionary(space=space, atoms=np.array([[1.1 + 0j, 0.0]]))


class TestDictDualNorm:
    def test_canonical_dual_of_e1(self):
        space = LpSpace(2.0, 3)
        d = generate_dictionary(space, 3, "canonical")
        F = norming_functional(space, [1, 0, 0])
        assert dict_dual_norm(F, d) == (1.0, 0)

    def test_hand_value(self):
        space = LpSpace(2.0, 3)
        d = generate_dictionary(space, 3, "canonical")
        F = norming_functional(space, [1, 0.5, 0])
        value, idx = dict_dual_norm(F, d)
        assert value == pytest.approx(1.0 / np.sqrt(1.25), abs=1e-12)
        assert value == pytest.approx(0.894427, abs=1e-6)
        assert idx == 0

    def test_zero_functional(self):
        d = generate_dictionary(LpSpace(2.0, 3), 3, "canonical")
        F = DualFunctional(np.zeros(3, dtype=complex))
        assert dict_dual_norm(F, d) == (0.0, 0)

    def test_dimension_mismatch(self):
        d = generate_dictionary(LpSpace(2.0, 3), 3, "canonical")
        F = DualFunctional(np.ones(2, dtype=complex))
        with pytest.raises(ValueError, match="dimension"):
            dict_dual_norm(F, d)


class TestWeakSelect:
    def test_argmax(self):
        space = LpSpace(2.0, 2)
        d = generate_dictionary(space, 2, "canonical")
        F = norming_functional(space, [1, 0.5])
        sel = weak_select(F, d, t=1.0)
        assert sel.index == 0
        assert sel.phase == pytest.approx(1.0 + 0j, abs=1e-12)

    def test_first_qualifying_low_threshold(self):
        space = LpSpace(2.0, 2)
        d = generate_dictionary(space, 2, "canonical")
        F = norming_functional(space, [1, 0.5])
        sel = weak_select(F, d, t=0.4, policy="first_qualifying")
        assert sel.index == 0

    def test_first_qualifying_skips_below_threshold(self):
        space = LpSpace(2.0, 3)
        d = generate_dictionary(space, 3, "canonical")
        # |F| values proportional to (0.1, 0.2, 1.0): only index 2 clears t=0.9
        F = norming_functional(space, [0.1, 0.2, 1.0])
        sel = weak_select(F, d, t=0.9, policy="first_qualifying")
        assert sel.index == 2

    def test_negative_value_phase(self):
        d = generate_dictionary(LpSpace(2.0, 2), 2, "canonical")
        F = DualFunctional(np.array([-2.0, 0.0], dtype=complex))
        sel = weak_select(F, d, t=1.0)
        assert sel.phase == pytest.approx(-1.0 + 0j, abs=1e-12)
        assert sel.phase * sel.value == pytest.approx(2.0 + 0j, abs=1e-12)

    def test_all_zero_values(self):
        d = generate_dictionary(LpSpace(2.0, 2), 2, "canonical")
        F = DualFunctional(np.zeros(2, dtype=complex))
        sel = weak_select(F, d, t=1.0)
        assert (sel.index, sel.phase, sel.value) == (0, 1.0 + 0j, 0.0 + 0j)

    def test_t_range_validated(self):
        d = generate_dictionary(LpSpace(2.0, 2), 2, "canonical")
        F = DualFunctional(np.ones(2, dtype=complex))
        for t in (0.0, 1.5, -0.1):
            with pytest.raises(ValueError, match="t must"):
                weak_select(F, d, t=t)

    def test_matches_dual_norm_argmax(self):
        space = LpSpace(3.0, 6)
        d = generate_dictionary(space, 12, "gaussian", seed=2)
        rng = np.random.default_rng(17)
        for _ in range(50):
            h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            F = norming_functional(space, h)
            sel = weak_select(F, d, t=1.0)
            assert sel.index == dict_dual_norm(F, d)[1]
            # phase contract: phase * value is |value|
            aligned = sel.phase * sel.value
            assert abs(aligned.imag) <= 1e-12
            assert aligned.real == pytest.approx(abs(sel.value), abs=1e-12)


class TestEpsSelect:
    def test_circle_on_own_atom(self):
        space = LpSpace(2.0, 4)
        d = generate_dictionary(space, 8, "gaussian", seed=3)
        f = d.atoms[0]
        F = norming_functional(space, f)
        sel = eps_select(F, d, f, eps_m=0.5, mode="circle")
        assert sel.index == 0
        aligned = sel.phase * sel.value
        assert aligned.real == pytest.approx(abs(sel.value), abs=1e-12)

    def test_plain_tie_breaks_to_smallest_index(self):
        space = LpSpace(2.0, 2)
        d = generate_dictionary(space, 2, "canonical")
        f = np.array([0.5, 0.5], dtype=complex)
        F = norming_functional(space, f)
        sel = eps_select(F, d, f, eps_m=0.1, mode="plain")
        assert sel.index == 0
        assert sel.phase == 1.0 + 0j

    def test_infeasible_target_detected(self):
        space = LpSpace(2.0, 2)
        d = generate_dictionary(space, 2, "canonical")
        f = np.array([2.0, 0.0], dtype=complex)  # far outside conv(D)
        F = norming_functional(space, f)
        with pytest.raises(InfeasibleSelectionError):
            eps_select(F, d, f, eps_m=0.0, mode="plain")
        with pytest.raises(InfeasibleSelectionError):
            eps_select(F, d, f, eps_m=0.0, mode="plain", policy="first_qualifying")

    def test_circle_feasible_where_plain_is_not(self):
        space = LpSpace(2.0, 2)
        d = generate_dictionary(space, 2, "canonical")
        f = np.array([-1.0, 0.0], dtype=complex)  # -e_1 is in A_1(D), not conv(D)
        F = norming_functional(space, f)
        sel = eps_select(F, d, f, eps_m=0.0, mode="circle")
        assert sel.index == 0
        assert sel.phase == pytest.approx(-1.0 + 0j, abs=1e-12)
        with pytest.raises(InfeasibleSelectionError):
            eps_select(F, d, f, eps_m=0.0, mode="plain")

    def test_negative_eps_rejected(self):
        d = generate_dictionary(LpSpace(2.0, 2), 2, "canonical")
        F = DualFunctional(np.ones(2, dtype=complex))
        with pytest.raises(ValueError, match="eps_m"):
            eps_select(F, d, [1, 0], -0.1, mode="plain")


class TestMakeTarget:
    def test_one_sparse_exact(self):
        space = LpSpace(2.0, 4)
        d = generate_dictionary(space, 8, "gaussian", seed=5)
        t = make_target(d, "a1", 1, eps=0.0, seed=9)
        (idx, coeff), = t.true_coeffs
        assert abs(abs(coeff) - 1.0) <= 1e-12
        np.testing.assert_allclose(t.f, coeff * d.atoms[idx], atol=1e-15)
        np.testing.assert_array_equal(t.f, t.f_eps)

    def test_a1_mass_and_perturbation(self):
        space = LpSpace(3.0, 6)
        d = generate_dictionary(space, 12, "gaussian", seed=6)
        t = make_target(d, "a1", 4, eps=0.3, seed=10)
        total = sum(abs(c) for _, c in t.true_coeffs)
        assert total == pytest.approx(1.0, abs=1e-12)
        assert lp_norm(space, t.f - t.f_eps) <= 0.3 + 1e-12
        assert t.A_eps == 1.0

    def test_conv_weights(self):
        d = generate_dictionary(LpSpace(2.0, 6), 12, "gaussian", seed=6)
        t = make_target(d, "conv", 5, eps=0.0, seed=11)
        weights = [c for _, c in t.true_coeffs]
        assert all(w.imag == 0.0 and w.real > 0.0 for w in weights)
        assert sum(w.real for w in weights) == pytest.approx(1.0, abs=1e-12)

    def test_sparsity_out_of_range(self):
        d = generate_dictionary(LpSpace(2.0, 4), 4, "canonical")
        with pytest.raises(ValueError, match="sparsity"):
            make_target(d, "a1", 5)
        with pytest.raises(ValueError, match="sparsity"):
            make_target(d, "a1", 0)

    def test_deterministic(self):
        d = generate_dictionary(LpSpace(2.0, 6), 12, "gaussian", seed=6)
        a = make_target(d, "a1", 3, eps=0.1, seed=4)
        b = make_target(d, "a1", 3, eps=0.1, seed=4)
        np.testing.assert_array_equal(a.f, b.f)
        assert a.true_coeffs == b.true_coeffs


class TestSerialization:
    def test_dictionary_round_trip(self):
        space = LpSpace(2.5, 5)
        d = generate_dictionary(space, 9, "gaussian", seed=13)
        obj = json.loads(json.dumps(d.to_json_obj()))
        d2 = Dictionary.from_json_obj(obj)
        assert d2.space == d.space
        assert d2.kind == "gaussian"
        np.testing.assert_array_equal(d2.atoms, d.atoms)

    def test_target_round_trip(self):
        d = generate_dictionary(LpSpace(2.0, 5), 9, "gaussian", seed=13)
        t = make_target(d, "a1", 3, eps=0.2, seed=14)
        obj = json.loads(json.dumps(t.to_json_obj()))
        t2 = TargetSpec.from_json_obj(obj)
        np.testing.assert_array_equal(t2.f, t.f)
        np.testing.assert_array_equal(t2.f_eps, t.f_eps)
        assert t2.eps == t.eps
        assert t2.membership == t.membership
        assert t2.true_coeffs == t.true_coeffs

    def test_entries_are_re_im_pairs(self):
        d = generate_dictionary(LpSpace(2.0, 2), 2, "canonical")
        obj = d.to_json_obj()
        assert obj["elements"][0] == [[1.0, 0.0], [0.0, 0.0]]


class TestHullSuprema:
    """Sampled absolutely-convex / convex hull values never beat the atom max."""

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_sampling_bounds(self, p):
        space = LpSpace(p, 8)
        d = generate_dictionary(space, 16, "gaussian", seed=20)
        rng = np.random.default_rng(21)
        h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        F = norming_functional(space, h)
        values = d.atoms @ F.coeffs
        abs_max = np.abs(values).max()
        re_max = values.real.max()
        for _ in range(500):
            w = rng.standard_normal(16) + 1j * rng.standard_normal(16)
            w /= np.abs(w).sum()
            assert abs(np.dot(w, values)) <= abs_max + 1e-9
            c = rng.uniform(0.0, 1.0, 16)
            c /= c.sum()
            assert np.dot(c, values).real <= re_max + 1e-9
