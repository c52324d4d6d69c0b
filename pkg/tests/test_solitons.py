import itertools

import numpy as np
import pytest

import toda_dress as td
from toda_dress.errors import DegenerateConfigurationError, SolutionSingularityError
from toda_dress.solitons import IdempotentFamily

from conftest import make_canonical, random_soliton_spec


def permutation_sum_eta(H, subset):
    """Interaction coefficient by explicit signed permutation enumeration."""
    subset = list(subset)
    ell = len(subset)
    total = 0.0 + 0j
    for perm in itertools.permutations(range(ell)):
        sign = 1
        seen = [False] * ell
        for start in range(ell):
            if seen[start]:
                continue
            length = 0
            node = start
            while not seen[node]:
                seen[node] = True
                node = perm[node]
                length += 1
            if length % 2 == 0:
                sign = -sign
        total += sign * np.prod([H[subset[m], subset[perm[m]]] for m in range(ell)])
    return total / np.prod([H[k, k] for k in subset])


def descent_point(spec, depth=35.0):
    """A point where every exponential factor is vanishingly small."""
    r = spec.r
    rates = np.array([[np.real(2 * np.sin(np.pi * spec.rho(i) / spec.structure.p)
                               / spec.zeta(i)),
                       np.real(2 * np.sin(np.pi * spec.rho(i) / spec.structure.p)
                               * spec.zeta(i))] for i in range(r)])
    direction, *_ = np.linalg.lstsq(rates, -np.ones(r), rcond=None)
    achieved = rates @ direction
    assert max(achieved) < 0, "no common descent direction for this draw"
    z = tuple(direction * depth / min(-achieved))
    assert all(np.real(spec.z_exponent(i, z)) < -30 for i in range(r))
    return z


class TestSpecValidation:
    def test_rejects_equal_d_indices(self):
        _, _, sd = make_canonical((1, 1))
        with pytest.raises(ValueError):
            td.SolitonSpec(spectral=sd, poles=td.PoleData((1.2,), (0.5,)),
                           index_c=(1,), index_d=((2, 2),),
                           coeff_c=(np.array([1.0 + 0j]),),
                           coeff_d=((np.array([1.0 + 0j]), np.array([1.0 + 0j])),))

    def test_rejects_vanishing_pairing(self):
        # with n_star = 2 choose d orthogonal to the Gram image of c
        _, _, sd = make_canonical((2, 2))
        with pytest.raises(DegenerateConfigurationError):
            td.SolitonSpec(spectral=sd, poles=td.PoleData((1.2,), (0.5,)),
                           index_c=(1,), index_d=((1, 2),),
                           coeff_c=(np.array([1.0, 0.0], complex),),
                           coeff_d=((np.array([0.0, 1.0], complex),
                                     np.array([1.0, 1.0], complex)),))


class TestIdempotents:
    @pytest.mark.parametrize("sizes,r", [((2, 1), 2), ((2, 2, 1), 2), ((3, 2, 2), 3)])
    def test_product_laws(self, sizes, r, rng):
        spec, _, _ = random_soliton_spec(sizes, r, rng, clearance=None)
        fam = IdempotentFamily(spec)
        p = spec.structure.p
        for _ in range(12):
            A, B = rng.choice(["J", "K"], size=2)
            i, j, k, l = rng.integers(0, r, size=4)
            a = int(rng.integers(1, p + 1))
            left = fam.y(A, a, i, j) @ fam.y(B, a, k, l)
            ratio = (fam.bracket(A, i, l) / fam.bracket(A, i, j)
                     * fam.bracket(B, k, j) / fam.bracket(B, k, l))
            assert np.linalg.norm(left - ratio * fam.y(B, a, k, j)) < 1e-12
            tilded = fam.y_tilde(A, a, i, j) @ fam.y_tilde(B, a, k, l)
            assert np.linalg.norm(
                tilded - fam.bracket(A, i, l) * fam.y_tilde(B, a, k, j)) < 1e-12

    def test_diagonal_idempotency(self, rng):
        spec, _, _ = random_soliton_spec((2, 1), 2, rng, clearance=None)
        fam = IdempotentFamily(spec)
        for A in ("J", "K"):
            for i in range(2):
                for a in (1, 2):
                    Y = fam.y(A, a, i, i)
                    assert np.linalg.norm(Y @ Y - Y) < 1e-12


class TestDressingFactor:
    @pytest.mark.parametrize("sizes,r", [((1, 1), 1), ((2, 1), 1), ((2, 1), 2),
                                         ((2, 2, 1), 2)])
    def test_inverse_and_intertwining(self, sizes, r, rng):
        spec, pair, _ = random_soliton_spec(sizes, r, rng, clearance=None)
        p = spec.structure.p
        for A in ("J", "K"):
            for a in range(1, p + 1):
                h_a, h_a_inv = td.dressing_factor_h(spec, a, A)
                assert np.linalg.norm(h_a @ h_a_inv
                                      - np.eye(spec.structure.size(a))) < 1e-13
                h_up, h_up_inv = td.dressing_factor_h(spec, a + 1, A)
                assert np.linalg.norm(
                    h_a @ pair.C_plus(a) @ h_up_inv - pair.C_plus(a)) < 1e-12
                assert np.linalg.norm(
                    h_up_inv @ pair.C_minus(a) @ h_a - pair.C_minus(a)) < 1e-12

    def test_single_pole_closed_form(self, rng):
        # r=1: h reduces to I minus a rank-one idempotent with an explicit weight
        spec, _, _ = random_soliton_spec((2, 1), 1, rng, clearance=None)
        fam = IdempotentFamily(spec)
        p = spec.structure.p
        mu, nu = spec.poles.mu[0], spec.poles.nu[0]
        I = spec.index_c[0]
        J, _ = spec.index_d[0]
        weight = 1 - mu / nu * td.root_of_unity(p, I + J)
        weight_inv = 1 - nu / mu * td.root_of_unity(p, -(I + J))
        for a in range(1, p + 1):
            h_a, h_a_inv = td.dressing_factor_h(spec, a, "J")
            eye = np.eye(spec.structure.size(a))
            np.testing.assert_allclose(h_a, eye - weight * fam.y("J", a, 0, 0),
                                       atol=1e-12)
            np.testing.assert_allclose(h_a_inv, eye - weight_inv * fam.y("J", a, 0, 0),
                                       atol=1e-12)


class TestInteractionEta:
    def test_singleton_is_one(self, rng):
        H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        assert td.interaction_eta(H, [1]) == pytest.approx(1.0)

    def test_diagonal_matrix_gives_one(self):
        H = np.diag([1.5, -2.0 + 1j, 0.3j])
        for size in (1, 2, 3):
            for subset in itertools.combinations(range(3), size):
                assert td.interaction_eta(H, list(subset)) == pytest.approx(1.0)

    def test_full_set_is_normalized_determinant(self, rng):
        H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        eta = td.interaction_eta(H, [0, 1, 2])
        want = np.linalg.det(H) / (H[0, 0] * H[1, 1] * H[2, 2])
        assert eta == pytest.approx(want)

    def test_permutation_sum_oracle(self, rng):
        H = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        for size in (2, 3, 4):
            for subset in itertools.combinations(range(4), size):
                assert td.interaction_eta(H, list(subset)) == pytest.approx(
                    permutation_sum_eta(H, list(subset)))

    def test_zero_diagonal_rejected(self):
        H = np.array([[0.0, 1.0], [1.0, 1.0]], dtype=complex)
        with pytest.raises(DegenerateConfigurationError):
            td.interaction_eta(H, [0, 1])


class TestDeltaMatrixX:
    @pytest.mark.parametrize("sizes,r", [((2, 1), 2), ((2, 2, 1), 2), ((2, 1), 3)])
    def test_full_subset_equals_h_K(self, sizes, r, rng):
        spec, _, _ = random_soliton_spec(sizes, r, rng, clearance=None)
        for a in range(1, spec.structure.p + 1):
            X_full = td.delta_matrix_X(spec, range(r), a)
            h_K, _ = td.dressing_factor_h(spec, a, "K")
            np.testing.assert_allclose(X_full, h_K, atol=1e-12)

    @pytest.mark.parametrize("sizes,r", [((2, 1), 2), ((2, 2, 1), 3)])
    def test_inverse_variant(self, sizes, r, rng):
        spec, _, _ = random_soliton_spec(sizes, r, rng, clearance=None)
        for a in range(1, spec.structure.p + 1):
            for size in range(1, r + 1):
                for subset in itertools.combinations(range(r), size):
                    X = td.delta_matrix_X(spec, list(subset), a)
                    X_inv = td.delta_matrix_X(spec, list(subset), a, inverse=True)
                    assert np.linalg.norm(
                        X_inv @ X - np.eye(spec.structure.size(a))) < 1e-11

    def test_singleton_matches_explicit_formula(self, rng):
        # ell = 1 written out with H-weights instead of the row-replacement matrix
        spec, _, sol = random_soliton_spec((2, 1), 2, rng, clearance=None)
        fam = sol.family
        H = sol.H
        DJ_inv = np.linalg.inv(sol.D_J)
        r = spec.r
        for a in range(1, spec.structure.p + 1):
            for i in range(r):
                direct = np.eye(spec.structure.size(a), dtype=complex)
                for j in range(r):
                    for k in range(r):
                        direct -= (DJ_inv[k, j] * H[i, i] - DJ_inv[k, i] * H[i, j]) \
                            / H[i, i] * fam.y_tilde("J", a, j, k)
                for k in range(r):
                    direct -= DJ_inv[k, i] / H[i, i] * fam.y_tilde("K", a, i, k)
                np.testing.assert_allclose(
                    direct, td.delta_matrix_X(spec, [i], a), atol=1e-11)

    def test_abelian_reduces_to_phase(self, rng):
        spec, _, sol = random_soliton_spec((1, 1, 1), 2, rng, clearance=None)
        p = spec.structure.p
        for a in range(1, p + 1):
            for size in (1, 2):
                for subset in itertools.combinations(range(2), size):
                    xt = sol.x_tilde(a, subset)
                    phase = td.root_of_unity(p, sum(spec.rho(i) for i in subset))
                    assert abs(xt[0, 0] - phase) < 1e-12

    def test_row_replacement_determinant_ratio(self, rng):
        # e^{delta_i} carried by H equals the Cramer-style determinant ratio
        spec, _, sol = random_soliton_spec((2, 1), 3, rng, clearance=None)
        for i in range(spec.r):
            delta = sol.D_J.copy()
            delta[i, :] = sol.D_K[i, :]
            ratio = np.linalg.det(delta) / np.linalg.det(sol.D_J)
            assert abs(ratio - sol.H[i, i]) < 1e-11


class TestTauPair:
    def test_vacuum_limit(self, rng):
        spec, _, sol = random_soliton_spec((2, 1), 2, rng, clearance=None)
        z = descent_point(spec)
        for a in range(1, spec.structure.p + 1):
            tp = sol.tau_pair(z, a)
            assert abs(tp.tau - 1) < 1e-12
            assert np.linalg.norm(tp.tau_x - np.eye(spec.structure.size(a))) < 1e-12
            gamma, gamma_inv = sol.gamma_pair(z, a)
            assert np.linalg.norm(gamma - np.eye(spec.structure.size(a))) < 1e-12
            assert np.linalg.norm(gamma_inv - np.eye(spec.structure.size(a))) < 1e-12

    @pytest.mark.parametrize("sizes,r", [((2, 1), 2), ((2, 2, 1), 3), ((1, 1), 2)])
    def test_scalar_tau_determinant_oracle(self, sizes, r, rng):
        # tau_a must equal det(I + diag(E'_a) H) expanded by principal minors
        spec, _, sol = random_soliton_spec(sizes, r, rng, clearance=None)
        z = (0.17, -0.08)
        p = spec.structure.p
        for a in range(1, p + 1):
            e_prime = np.array([
                td.root_of_unity(p, a * spec.rho(i)) * np.exp(spec.z_exponent(i, z))
                for i in range(r)])
            oracle = np.linalg.det(np.eye(r) + np.diag(e_prime) @ sol.H)
            tp = sol.tau_pair(z, a)
            assert abs(tp.tau - oracle) < 1e-12 * (1 + abs(oracle))

    def test_two_soliton_term_structure(self, rng):
        # four terms: 1, E_1, E_2, and the det-weighted cross term
        spec, _, sol = random_soliton_spec((1, 1), 2, rng, clearance=None)
        z = (0.3, 0.05)
        H = sol.H
        for a in (1, 2):
            e = [td.root_of_unity(2, a * spec.rho(i)) * np.exp(spec.z_exponent(i, z))
                 * H[i, i] for i in range(2)]
            eta_12 = np.linalg.det(H) / (H[0, 0] * H[1, 1])
            expected = 1 + e[0] + e[1] + eta_12 * e[0] * e[1]
            assert abs(sol.tau_pair(z, a).tau - expected) < 1e-12


class TestSolitonGamma:
    @pytest.mark.parametrize("sizes,r", [((1, 1), 1), ((2, 1), 1), ((2, 1), 2),
                                         ((2, 2, 1), 2), ((3, 2, 2), 2)])
    def test_inverse_identity(self, sizes, r, rng):
        spec, _, sol = random_soliton_spec(sizes, r, rng, clearance=None)
        for z in [(0.0, 0.0), (0.25, -0.3), (-0.4, 0.15)]:
            for a in range(1, spec.structure.p + 1):
                try:
                    gamma, gamma_inv = sol.gamma_pair(z, a)
                except SolutionSingularityError:
                    continue
                assert np.linalg.norm(
                    gamma_inv @ gamma - np.eye(spec.structure.size(a))) < 1e-10

    @pytest.mark.parametrize("sizes,r", [((1, 1), 1), ((2, 1), 1), ((2, 1), 2),
                                         ((2, 2, 1), 2), ((1, 1, 1), 3)])
    def test_matches_general_dressing(self, sizes, r, rng):
        spec, pair, _ = random_soliton_spec(sizes, r, rng, clearance=None)
        points = [(0.11, -0.07), (-0.2, 0.23), (0.31, 0.17)]
        assert td.cross_construction_check(spec, pair, points) < 1e-9

    def test_block_index_periodicity(self, rng):
        spec, _, sol = random_soliton_spec((2, 2, 1), 2, rng, clearance=None)
        p = spec.structure.p
        z = (0.18, -0.09)
        for a in range(1, p + 1):
            g1, gi1 = sol.gamma_pair(z, a)
            g2, gi2 = sol.gamma_pair(z, a + p)
            np.testing.assert_allclose(g1, g2, atol=1e-12)
            np.testing.assert_allclose(gi1, gi2, atol=1e-12)

    def test_abelian_is_scalar_tau_ratio(self, rng):
        spec, _, sol = random_soliton_spec((1, 1, 1), 2, rng, clearance=None)
        z = (0.12, 0.28)
        for a in range(1, 4):
            gamma, _ = sol.gamma_pair(z, a)
            ratio = sol.tau_pair(z, a + 1).tau / sol.tau_pair(z, a).tau
            assert abs(gamma[0, 0] - ratio) < 1e-12

    def test_exact_singularity_detected(self):
        # tuned so the scalar tau vanishes identically at the origin
        _, _, sd = make_canonical((1, 1))
        spec = td.SolitonSpec(
            spectral=sd, poles=td.PoleData((1 / 3,), (1.0,)),
            index_c=(1,), index_d=((1, 2),),
            coeff_c=(np.array([1.0 + 0j]),),
            coeff_d=((np.array([1.0 + 0j]), np.array([2.0 + 0j])),))
        sol = td.ClosedFormSolution(spec)
        assert abs(sol.tau_pair((0.0, 0.0), 1).tau) < 1e-14
        with pytest.raises(SolutionSingularityError):
            sol.gamma_pair((0.0, 0.0), 1)


class TestOneSoliton:
    def test_requires_single_pole(self, rng):
        spec, _, _ = random_soliton_spec((2, 1), 2, rng, clearance=None)
        with pytest.raises(ValueError):
            td.one_soliton(spec, (0.0, 0.0))

    @pytest.mark.parametrize("sizes", [(1, 1), (2, 1), (2, 2, 1), (3, 2, 2)])
    def test_matches_subset_machinery(self, sizes, rng):
        spec, _, sol = random_soliton_spec(sizes, 1, rng, clearance=None)
        z = (0.21, -0.34)
        blocks = td.one_soliton(spec, z)
        for a in range(1, spec.structure.p + 1):
            gamma, gamma_inv = sol.gamma_pair(z, a)
            np.testing.assert_allclose(blocks[a][0], gamma, atol=1e-11)
            np.testing.assert_allclose(blocks[a][1], gamma_inv, atol=1e-11)

    def test_far_field_is_identity(self, rng):
        spec, _, _ = random_soliton_spec((2, 1), 1, rng, clearance=None)
        z = descent_point(spec)
        blocks = td.one_soliton(spec, z)
        for a, (gamma, gamma_inv) in blocks.items():
            eye = np.eye(spec.structure.size(a))
            assert np.linalg.norm(gamma - eye) < 1e-12
            assert np.linalg.norm(gamma_inv - eye) < 1e-12

    def test_abelian_x_factor_is_pure_phase(self, rng):
        spec, _, sol = random_soliton_spec((1, 1), 1, rng, clearance=None)
        p = spec.structure.p
        phase = td.root_of_unity(p, spec.rho(0))
        for a in (1, 2):
            xt = sol.x_tilde(a, [0])
            assert abs(xt[0, 0] - phase) < 1e-13

    def test_inverse_identity(self, rng):
        spec, _, _ = random_soliton_spec((2, 2, 1), 1, rng, clearance=None)
        blocks = td.one_soliton(spec, (0.4, 0.1))
        for a, (gamma, gamma_inv) in blocks.items():
            assert np.linalg.norm(
                gamma_inv @ gamma - np.eye(spec.structure.size(a))) < 1e-12
