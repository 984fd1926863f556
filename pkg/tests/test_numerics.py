import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasekit.errors import DomainError, GuardError, StructuralError
from phasekit.numerics import (
    check_unit,
    coherent_cutoff,
    coherent_state,
    eigh,
    eigvalsh,
    geometric_dim,
    geometric_state,
    max_psd_shift,
    number_state,
    opnorm,
    projection_wedge_spectrum,
    rank_one_wedge,
)

from conftest import random_contraction, random_hermitian

HALF_PI_MATRIX = np.array([[0.5, -1j / math.pi], [1j / math.pi, 0.5]])


def char_poly_eigs_2x2(a):
    """Roots of t^2 - tr(A) t + det(A) for a 2x2 Hermitian matrix."""
    tr = (a[0, 0] + a[1, 1]).real
    det = (a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]).real
    disc = math.sqrt(tr * tr / 4 - det)
    return tr / 2 - disc, tr / 2 + disc


class TestEigh:
    def test_diagonal(self):
        np.testing.assert_allclose(eigh(np.diag([0.9, 0.1])).eigenvalues, [0.1, 0.9], atol=1e-15)

    def test_pauli_x(self):
        np.testing.assert_allclose(eigh(np.array([[0, 1], [1, 0]])).eigenvalues, [-1, 1], atol=1e-15)

    def test_half_circle_block_matches_characteristic_polynomial(self):
        expected = char_poly_eigs_2x2(HALF_PI_MATRIX)
        np.testing.assert_allclose(eigh(HALF_PI_MATRIX).eigenvalues, expected, atol=1e-14)
        np.testing.assert_allclose(expected, [0.5 - 1 / math.pi, 0.5 + 1 / math.pi], atol=1e-15)

    @pytest.mark.parametrize("dim", [2, 8, 64])
    def test_reconstruction_and_orthonormality(self, rng, dim):
        worst_rec = worst_orth = 0.0
        for _ in range(100):
            a = random_hermitian(rng, dim)
            dec = eigh(a)
            scale = max(1.0, np.max(np.abs(a)))
            worst_rec = max(worst_rec, np.max(np.abs(dec.reconstruct() - a)) / scale)
            v = dec.eigenvectors
            worst_orth = max(worst_orth, np.max(np.abs(v.conj().T @ v - np.eye(dim))))
            assert np.all(np.diff(dec.eigenvalues) >= 0)
        assert worst_rec <= 1e-10 * dim
        assert worst_orth <= 1e-10

    def test_deterministic(self, rng):
        a = random_hermitian(rng, 32)
        d1, d2 = eigh(a), eigh(a.copy())
        assert np.array_equal(d1.eigenvalues, d2.eigenvalues)
        assert np.array_equal(d1.eigenvectors, d2.eigenvectors)

    def test_non_hermitian_rejected_with_asymmetry(self):
        with pytest.raises(StructuralError, match="asymmetry"):
            eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_non_square_rejected(self):
        with pytest.raises(StructuralError):
            eigvalsh(np.zeros((2, 3)))


class TestOpnorm:
    @pytest.mark.parametrize("dim", [1, 5, 40])
    def test_identity(self, dim):
        assert opnorm(np.eye(dim)) == 1.0

    def test_zero(self):
        assert opnorm(np.zeros((4, 4))) == 0.0

    def test_half_circle_block(self):
        assert opnorm(HALF_PI_MATRIX) == pytest.approx(0.5 + 1 / math.pi, abs=1e-14)
        assert opnorm(HALF_PI_MATRIX) == pytest.approx(0.81831, abs=1e-5)

    def test_negative_dominant(self):
        assert opnorm(np.diag([-3.0, 1.0])) == 3.0


class TestRankOneWedge:
    def test_eigenvector(self):
        assert rank_one_wedge(np.diag([0.2, 0.8]), [1, 0]) == pytest.approx(0.2, abs=1e-15)

    def test_superposition_matches_oracle(self):
        a = np.diag([0.2, 0.8])
        phi = np.array([1, 1]) / math.sqrt(2)
        lam = rank_one_wedge(a, phi)
        assert lam == pytest.approx(0.32, abs=1e-14)
        assert max_psd_shift(a, phi) == pytest.approx(0.32, abs=1e-10)

    def test_outside_range(self):
        assert rank_one_wedge(np.diag([0.0, 0.5]), [1, 0]) == 0.0

    def test_random_contractions_match_bisection(self, rng):
        for _ in range(60):
            dim = int(rng.integers(2, 17))
            a = random_contraction(rng, dim)
            phi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            phi /= np.linalg.norm(phi)
            assert abs(rank_one_wedge(a, phi) - max_psd_shift(a, phi)) <= 1e-8

    def test_rank_deficient_matches_bisection(self, rng):
        for _ in range(20):
            a = random_contraction(rng, 6, rank=3)
            v = np.linalg.eigh(a)[1][:, -1]
            assert abs(rank_one_wedge(a, v) - max_psd_shift(a, v)) <= 1e-8
            generic = rng.standard_normal(6) + 0j
            generic /= np.linalg.norm(generic)
            assert rank_one_wedge(a, generic) == 0.0

    def test_monotone_on_commuting_pairs(self, rng):
        for _ in range(50):
            dim = int(rng.integers(2, 10))
            q, _ = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
            wa = rng.uniform(0, 1, dim)
            wb = np.minimum(1.0, wa + rng.uniform(0, 0.5, dim))
            a, b = (q * wa) @ q.conj().T, (q * wb) @ q.conj().T
            phi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            phi /= np.linalg.norm(phi)
            assert rank_one_wedge(a, phi) <= rank_one_wedge(b, phi) + 1e-10

    def test_outside_unit_interval_rejected(self):
        with pytest.raises(DomainError):
            rank_one_wedge(np.diag([0.5, 1.5]), [1, 0])

    def test_non_unit_vector_rejected(self):
        with pytest.raises(DomainError):
            rank_one_wedge(np.diag([0.5, 0.5]), [1, 1])


def schur_short(a, idx):
    """Shorted operator onto the coordinate subspace ``idx``: A_PP - A_PQ A_QQ^{-1} A_QP."""
    rest = [i for i in range(a.shape[0]) if i not in idx]
    app = a[np.ix_(idx, idx)]
    if not rest:
        return app
    apq = a[np.ix_(idx, rest)]
    aqq = a[np.ix_(rest, rest)]
    return app - apq @ np.linalg.solve(aqq, apq.conj().T)


class TestProjectionWedge:
    def test_single_index_equals_rank_one(self, rng):
        a = random_contraction(rng, 8)
        assert projection_wedge_spectrum(a, [3])[0] == pytest.approx(rank_one_wedge(a, number_state(3, 8)), abs=1e-12)

    def test_matches_schur_complement(self, rng):
        for _ in range(20):
            a = random_contraction(rng, 9)
            idx = sorted(rng.choice(9, 3, replace=False).tolist())
            expected = np.linalg.eigvalsh(schur_short(a, idx))
            np.testing.assert_allclose(projection_wedge_spectrum(a, idx), expected, atol=1e-9)

    def test_bad_indices(self):
        with pytest.raises(DomainError):
            projection_wedge_spectrum(np.eye(3) * 0.5, [])
        with pytest.raises(DomainError):
            projection_wedge_spectrum(np.eye(3) * 0.5, [3])


class TestStates:
    def test_number_state(self):
        psi = number_state(2, 4)
        assert psi.tolist() == [0, 0, 1, 0]
        with pytest.raises(DomainError):
            number_state(4, 4)

    def test_check_unit(self):
        with pytest.raises(DomainError, match="normalised"):
            check_unit([1.0, 1.0])
        with pytest.raises(DomainError, match="mismatch"):
            check_unit([1.0, 0.0], dim=3)

    def test_coherent_matches_factorial_formula(self):
        z = 1.3 * np.exp(0.4j)
        dim = coherent_cutoff(abs(z))
        psi = coherent_state(z, dim)
        direct = [math.exp(-abs(z) ** 2 / 2) * z**n / math.sqrt(math.factorial(n)) for n in range(dim)]
        np.testing.assert_allclose(psi, direct, atol=1e-15)
        assert np.vdot(psi, psi).real == pytest.approx(1.0, abs=1e-12)

    def test_coherent_cutoff_rule(self):
        assert coherent_cutoff(3.0) == 59
        assert coherent_cutoff(0.0) == 20

    @pytest.mark.parametrize("mod", [0.5, 3.0, 6.0, 10.0])
    def test_coherent_tail_negligible_at_cutoff(self, mod):
        psi = coherent_state(mod, coherent_cutoff(mod))
        assert abs(np.vdot(psi, psi).real - 1) <= 1e-12

    def test_coherent_guard(self):
        with pytest.raises(GuardError):
            coherent_state(5.0, 20)

    def test_geometric_state(self):
        r = 0.5
        dim = geometric_dim(r)
        assert r ** (2 * dim) <= 1e-12 < r ** (2 * (dim - 1))
        psi = geometric_state(r, dim)
        assert psi[3] == pytest.approx(math.sqrt(1 - r * r) * r**3)
        with pytest.raises(GuardError):
            geometric_state(0.9, 10)
        with pytest.raises(DomainError):
            geometric_state(1.0, 10)

    def test_geometric_phases(self):
        psi = geometric_state(0.3, 30, phases=lambda n: 0.5 * n)
        assert np.angle(psi[2]) == pytest.approx(1.0)


@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=2**32 - 1))
def test_eigh_spectrum_sum_equals_trace(dim, seed):
    a = random_hermitian(np.random.default_rng(seed), dim)
    assert eigh(a).eigenvalues.sum() == pytest.approx(np.trace(a).real, abs=1e-10 * dim)
