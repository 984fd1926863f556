import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import erf

from phasekit.checks import random_arcset
from phasekit.effects import TWO_PI, ArcSet
from phasekit.errors import DomainError, GuardError
from phasekit.numerics import coherent_cutoff, coherent_state, geometric_state, number_state, random_state
from phasekit.observables import Canonical, Conjugated, Elementary, GroundState, Mixture, Trivial
from phasekit.statistics import (
    density_canonical_geometric,
    density_double_sum,
    density_groundstate_coherent,
    fourier_coeff,
    min_variance,
    norm_scan,
    number_stats,
    phase_density,
    phase_prob,
    sampled_distribution,
    truncated_norms,
    uncertainty_product,
    value_comp_rows,
    value_comp_scan,
)

HALF = ArcSet.interval(0.0, math.pi)
FAMILIES = [Canonical(), Trivial(), GroundState(), Elementary(0, 3, 0.9), Mixture(0.2, GroundState()),
            Conjugated((0.0, 0.4, 0.1), Canonical())]


def erf_series(x):
    """Maclaurin series of erf, summed until terms drop below 1e-18."""
    total, n, term = 0.0, 0, x
    while True:
        contrib = term / (2 * n + 1)
        total += contrib
        if abs(contrib) < 1e-18:
            break
        n += 1
        term *= -x * x / n
    return 2 / math.sqrt(math.pi) * total


def poisson_series(r, theta, terms=400):
    """1 + 2 sum r^k cos(k theta), the geometric-series form of the Poisson kernel."""
    k = np.arange(1, terms)
    return 1 + 2 * np.sum(r**k * np.cos(k * theta))


def var_quadrature(g, n_grid=1 << 14):
    """Levy minimum variance by trapezoid windows and bounded scalar minimisation over beta."""
    theta = TWO_PI * np.arange(n_grid) / n_grid
    vals = g(theta)

    def windowed(beta):
        u = (theta - beta + math.pi) % TWO_PI - math.pi
        mean = np.mean(u * vals)
        return np.mean((u - mean) ** 2 * vals)

    coarse = TWO_PI * np.arange(256) / 256
    start = coarse[int(np.argmin([windowed(b) for b in coarse]))]
    res = minimize_scalar(windowed, bounds=(start - TWO_PI / 256, start + TWO_PI / 256), method="bounded",
                          options={"xatol": 1e-10})
    return res.fun


class TestErf:
    def test_against_series(self):
        for x in np.linspace(-3, 3, 20):
            assert abs(erf(x) - erf_series(x)) <= 1e-12


class TestPhaseProb:
    @pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
    def test_number_states_uniform(self, family):
        for n in (0, 3, 7):
            assert phase_prob(family, number_state(n, 10), HALF, 10) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
    def test_full_circle(self, rng, family):
        assert phase_prob(family, random_state(12, rng), ArcSet.full(), 12) == pytest.approx(1.0, abs=1e-12)

    def test_two_level_superpositions(self):
        # The effect block is [[1/2, -i/pi], [i/pi, 1/2]]: real superpositions
        # cancel the cross terms, the top eigenvector (|0> + i|1>)/sqrt 2 attains 1/2 + 1/pi.
        real = np.array([1, 1]) / math.sqrt(2)
        top = np.array([1, 1j]) / math.sqrt(2)
        assert phase_prob(Canonical(), real, HALF, 2) == pytest.approx(0.5, abs=1e-15)
        assert phase_prob(Canonical(), top, HALF, 2) == pytest.approx(0.5 + 1 / math.pi, abs=1e-15)
        assert phase_prob(Canonical(), top, HALF, 2) == pytest.approx(0.81831, abs=1e-5)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            phase_prob(Canonical(), number_state(0, 4), HALF, 5)


class TestDensity:
    def test_trivial_uniform(self, rng):
        dist = phase_density(Trivial(), random_state(16, rng), 64)
        assert np.max(np.abs(dist.density - 1)) <= 1e-14

    @pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
    def test_number_state_uniform(self, family):
        dist = phase_density(family, number_state(7, 10), 64)
        assert np.max(np.abs(dist.density - 1)) <= 1e-14

    def test_poisson_kernel_values(self):
        assert density_canonical_geometric(0.5, 0.0) == pytest.approx(3.0)
        assert density_canonical_geometric(0.5, math.pi) == pytest.approx(1 / 3)
        assert density_canonical_geometric(0.0, 1.234) == 1.0
        for theta in np.linspace(0, TWO_PI, 7):
            assert density_canonical_geometric(0.5, theta) == pytest.approx(poisson_series(0.5, theta), abs=1e-12)
        with pytest.raises(DomainError):
            density_canonical_geometric(1.0, 0.0)

    def test_geometric_state_matrix_vs_closed(self):
        psi = geometric_state(0.5, 200)
        dist = phase_density(Canonical(), psi, 1024, method="matrix")
        assert dist.density[0] == pytest.approx(3.0, abs=1e-10)
        assert dist.density[512] == pytest.approx(1 / 3, abs=1e-10)
        assert np.max(np.abs(dist.density - density_canonical_geometric(0.5, dist.grid))) <= 1e-6

    def test_groundstate_coherent_values(self):
        assert density_groundstate_coherent(0.0, np.linspace(0, 6, 5)) == pytest.approx(np.ones(5))
        assert density_groundstate_coherent(2.0, math.pi / 2) == pytest.approx(math.exp(-4), abs=1e-15)
        assert density_groundstate_coherent(2.0, math.pi / 2) == pytest.approx(0.0183156, abs=1e-7)
        psi = coherent_state(2.0, 80)
        oracle = density_double_sum(GroundState(), psi, [0.0, math.pi / 2])
        assert density_groundstate_coherent(2.0, 0.0) == pytest.approx(oracle[0], abs=1e-10)
        assert density_groundstate_coherent(2.0, math.pi / 2) == pytest.approx(oracle[1], abs=1e-10)
        # Frozen from the matrix oracle above.
        assert density_groundstate_coherent(2.0, 0.0) == pytest.approx(7.0915489, abs=1e-6)
        with pytest.raises(DomainError):
            density_groundstate_coherent(-1.0, 0.0)

    def test_groundstate_coherent_matrix_vs_closed(self):
        psi = coherent_state(2.0, 80)
        dist = phase_density(GroundState(), psi, 1024, method="matrix")
        assert np.max(np.abs(dist.density - density_groundstate_coherent(2.0, dist.grid))) <= 1e-6

    @pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
    def test_fft_matches_double_sum(self, rng, family):
        psi = random_state(20, rng)
        fast = phase_density(family, psi, 128, method="fft")
        slow = phase_density(family, psi, 128, method="matrix")
        assert np.max(np.abs(fast.density - slow.density)) <= 1e-12
        assert np.max(np.abs(fast.evaluate(fast.grid) - slow.density)) <= 1e-12

    @pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
    def test_invariants(self, rng, family):
        dist = phase_density(family, random_state(30, rng), 256)
        assert abs(np.mean(dist.density) - 1) <= 1e-8
        assert dist.coefficient(0) == pytest.approx(1.0, abs=1e-10)
        assert dist.coefficient(-3) == np.conj(dist.coefficient(3))
        assert np.min(dist.density) >= -1e-9

    @pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
    def test_mass_matches_phase_prob(self, rng, family):
        for _ in range(5):
            psi = random_state(24, rng)
            x = random_arcset(rng)
            dist = phase_density(family, psi, 128)
            assert dist.mass(x) == pytest.approx(phase_prob(family, psi, x, 24), abs=1e-8)

    def test_trapezoid_mass_on_grid_aligned_arc(self, rng):
        psi = random_state(16, rng)
        grid = 1 << 14
        dist = phase_density(GroundState(), psi, grid)
        # Trapezoid with half weights at the endpoints of [0, pi); O(h^2) on a partial arc.
        g = dist.density
        half = grid // 2
        trap = (np.sum(g[:half]) - 0.5 * g[0] + 0.5 * g[half]) / grid
        assert trap == pytest.approx(phase_prob(GroundState(), psi, HALF, 16), abs=1e-8)

    def test_aliasing_guard(self):
        with pytest.raises(GuardError):
            phase_density(Canonical(), number_state(0, 40), 64)

    def test_unknown_method(self):
        with pytest.raises(DomainError):
            phase_density(Canonical(), number_state(0, 4), 16, method="spline")

    def test_sampled_distribution_coefficients(self, rng):
        dist = phase_density(GroundState(), random_state(10, rng), 64)
        resampled = sampled_distribution(dist.density)
        np.testing.assert_allclose(resampled.fourier[:10], dist.fourier, atol=1e-13)


class TestFourierCoefficients:
    def test_canonical_poisson(self):
        assert fourier_coeff(Canonical(), 0.5, 2) == pytest.approx(0.25, abs=1e-10)
        quad_val = quad(lambda t: math.cos(2 * t) * density_canonical_geometric(0.5, t), 0, TWO_PI)[0] / TWO_PI
        assert quad_val == pytest.approx(0.25, abs=1e-10)

    @pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
    def test_total_mass(self, family):
        assert fourier_coeff(family, 0.7, 0) == pytest.approx(1.0, abs=1e-10)

    def test_canonical_powers(self):
        for r in (0.3, 0.7, 0.9):
            for k in range(9):
                assert abs(fourier_coeff(Canonical(), r, k) - r**k) <= 1e-10

    def test_groundstate_trend(self):
        mods = [abs(fourier_coeff(GroundState(), r, 1)) for r in (0.9, 0.99, 0.999)]
        assert mods[0] < mods[1] < mods[2] < 1
        assert mods[0] == pytest.approx(0.8587, abs=1e-4)

    def test_negative_order_conjugates(self):
        fam = Conjugated((0.0, 1.0, 0.3), GroundState())
        assert fourier_coeff(fam, 0.6, -2) == pytest.approx(np.conj(fourier_coeff(fam, 0.6, 2)))

    def test_quadrature_with_phases(self):
        fam = GroundState()
        r = 0.6
        phases = lambda n: 0.3 * np.asarray(n) ** 2  # noqa: E731
        psi = geometric_state(r, 80, phases=phases)
        psi = psi / np.linalg.norm(psi)
        dist = phase_density(fam, psi, 512)
        for k in range(4):
            integrand_re = quad(lambda t: math.cos(k * t) * dist.evaluate(t), 0, TWO_PI, limit=200)[0]
            integrand_im = quad(lambda t: -math.sin(k * t) * dist.evaluate(t), 0, TWO_PI, limit=200)[0]
            oracle = complex(integrand_re, integrand_im) / TWO_PI
            assert abs(fourier_coeff(fam, r, k, dim=80, phases=phases) - oracle) <= 1e-8

    def test_tail_guard(self):
        with pytest.raises(GuardError):
            fourier_coeff(Canonical(), 0.9, 1, dim=10)
        with pytest.raises(DomainError):
            fourier_coeff(Canonical(), 1.0, 1)


class TestMinVariance:
    def test_uniform(self):
        rep = min_variance(sampled_distribution(np.ones(256)))
        assert rep.VAR == pytest.approx(math.pi**2 / 3, abs=1e-12)
        assert rep.VAR == pytest.approx(3.28987, abs=1e-5)

    def test_sharp_poisson(self):
        # Window centred at 0: pi^2/3 + 4 Li2(-r), with Li2 summed as a series.
        r = 0.99
        k = np.arange(1, 200000)
        series = math.pi**2 / 3 + 4 * np.sum((-r) ** k / k**2)
        psi = geometric_state(r, 1400)
        rep = min_variance(phase_density(Canonical(), psi, 4096))
        assert rep.VAR == pytest.approx(series, abs=1e-9)
        assert rep.VAR == pytest.approx(0.02776, abs=1e-5)
        oracle = var_quadrature(lambda t: density_canonical_geometric(0.99, t), 1 << 16)
        assert rep.VAR == pytest.approx(oracle, abs=1e-6)

    def test_symmetric_poisson_exact(self):
        # For the Poisson kernel centred at 0 the optimal window is centred at 0.
        r = 0.5
        exact = quad(lambda t: t * t * density_canonical_geometric(r, t), -math.pi, math.pi)[0] / TWO_PI
        rep = min_variance(phase_density(Canonical(), geometric_state(r, 60), 256))
        assert rep.VAR == pytest.approx(exact, abs=1e-10)
        assert min(rep.beta_star, TWO_PI - rep.beta_star) <= 1e-6

    def test_matches_quadrature_oracle(self, rng):
        for family in (Canonical(), GroundState()):
            psi = random_state(8, rng)
            dist = phase_density(family, psi, 256)
            assert min_variance(dist).VAR == pytest.approx(var_quadrature(dist.evaluate), abs=1e-7)

    def test_rotation_invariance(self):
        base = coherent_state(1.5, 60)
        shift = 1.234
        rotated = base * np.exp(1j * shift * np.arange(60))
        v0 = min_variance(phase_density(GroundState(), base, 512)).VAR
        v1 = min_variance(phase_density(GroundState(), rotated, 512)).VAR
        assert v0 == pytest.approx(v1, abs=1e-9)

    def test_unnormalised(self):
        with pytest.raises(DomainError):
            min_variance(sampled_distribution(2 * np.ones(64)))


@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_min_variance_bounds(dim, seed):
    psi = random_state(dim, np.random.default_rng(seed))
    rep = min_variance(phase_density(Canonical(), psi, 64))
    assert 0 <= rep.VAR <= math.pi**2 / 3 + 1e-9


class TestNumberStats:
    def test_eigenstate(self):
        assert number_stats(number_state(4, 8)) == (4.0, 0.0)

    def test_coherent(self):
        mean, var = number_stats(coherent_state(3.0, 40))
        assert mean == pytest.approx(9, abs=1e-8) and var == pytest.approx(9, abs=1e-8)

    def test_geometric_mean(self):
        psi = geometric_state(0.5, 60)
        assert number_stats(psi)[0] == pytest.approx(1 / 3, abs=1e-12)


class TestUncertainty:
    def test_three(self):
        rep = uncertainty_product(3.0)
        assert rep.numberVar == pytest.approx(9, abs=1e-8)
        assert abs(rep.product - 0.25) <= 0.25 * 0.25

    def test_three_against_quadrature(self):
        psi = coherent_state(3.0, coherent_cutoff(3.0))
        dist = phase_density(Canonical(), psi, 4096)
        assert uncertainty_product(3.0).VAR == pytest.approx(var_quadrature(dist.evaluate), abs=1e-8)

    def test_vacuum(self):
        rep = uncertainty_product(0.0)
        assert rep.VAR == pytest.approx(math.pi**2 / 3, abs=1e-12)
        assert rep.product == 0

    def test_trend(self):
        devs = [abs(uncertainty_product(z).product - 0.25) for z in (2, 3, 4, 5, 6)]
        assert all(b < a for a, b in zip(devs, devs[1:]))
        assert devs[-1] <= 0.025

    def test_dim_guard(self):
        with pytest.raises(GuardError):
            uncertainty_product(3.0, dim=30)


class TestValueComplementarity:
    def test_head_masses(self):
        rows = value_comp_rows(Canonical(), [0.0, 0.9, 0.99], 3)
        assert rows[0]["head_mass"] == pytest.approx(1.0)
        assert rows[1]["head_mass"] == pytest.approx(0.5695, abs=1e-4)
        assert rows[2]["head_mass"] == pytest.approx(0.0773, abs=1e-4)
        for row in rows:
            assert abs(row["head_mass"] - row["head_closed"]) <= 1e-12

    def test_concentration_increases(self):
        rows = value_comp_scan(Canonical(), [0.9, 0.99, 0.999], 3)
        conc = [row["concentration"] for row in rows]
        assert conc[0] < conc[1] < conc[2] < 1

    def test_scan_requires_decrease(self):
        with pytest.raises(AssertionError):
            value_comp_scan(Canonical(), [0.9, 0.5], 3)


class TestNormScan:
    def test_trivial(self):
        assert [r["norm"] for r in truncated_norms(Trivial(), HALF, [16, 64, 256])] == [0.5, 0.5, 0.5]

    @pytest.mark.parametrize("family", [Canonical(), GroundState()], ids=lambda f: f.name)
    def test_tends_to_one(self, family):
        rows = norm_scan(family, HALF, [16, 64, 256])
        norms = [r["norm"] for r in rows]
        assert norms[-1] >= 0.99
        assert all(b >= a - 1e-10 for a, b in zip(norms, norms[1:]))

    def test_zero_measure(self):
        with pytest.raises(DomainError):
            truncated_norms(Canonical(), ArcSet.from_pairs([]), [8])
