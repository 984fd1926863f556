"""Phase distributions, closed-form densities, minimum variance and limit scans.

The phase density of a state ``psi`` is the trigonometric polynomial

    g(theta) = sum_k a_k e^{ik theta},   a_k = sum_m c[m+k, m] conj(psi_{m+k}) psi_m,

so ``a_k`` are also the Fourier-Stieltjes coefficients
``(1/2pi) int e^{-ik theta} g(theta) dtheta`` of the phase probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .effects import TWO_PI, ArcSet, build_effect, kernel_integral
from .errors import DomainError, GuardError
from .numerics import (
    EFFECT_TOL,
    check_unit,
    coherent_cutoff,
    coherent_state,
    geometric_dim,
    geometric_state,
    opnorm,
)
from .observables import Canonical, PhaseFamily

DEFAULT_GRID = 4096
TAIL_TOL = 1e-12
NORMALIZATION_TOL = 1e-8
GOLDEN_TOL = 1e-10


@dataclass
class PhaseDistribution:
    """Density samples on ``theta_j = 2 pi j / M`` plus coefficients ``a_0 .. a_K``."""

    grid: np.ndarray
    density: np.ndarray
    fourier: np.ndarray
    family: PhaseFamily | None = None
    state: np.ndarray | None = field(default=None, repr=False)

    def coefficient(self, k: int) -> complex:
        """``a_k`` for any integer ``k`` (zero beyond the stored range)."""
        if abs(k) >= self.fourier.size:
            return 0j
        return complex(self.fourier[k] if k >= 0 else np.conj(self.fourier[-k]))

    def evaluate(self, theta) -> np.ndarray:
        """Density at arbitrary angles from the stored coefficients."""
        theta = np.asarray(theta, dtype=float)
        k = np.arange(1, self.fourier.size)
        osc = np.exp(1j * np.multiply.outer(theta, k)) @ self.fourier[1:]
        return self.fourier[0].real + 2 * osc.real

    def mass(self, arcs: ArcSet) -> float:
        """Exact probability of ``arcs`` from the coefficients."""
        k = np.arange(self.fourier.size)
        kern = kernel_integral(arcs, k)
        return float(self.fourier[0].real * kern[0].real + 2 * np.sum(self.fourier[1:] * kern[1:]).real)


@dataclass(frozen=True)
class VarianceReport:
    VAR: float
    alpha_star: float
    beta_star: float
    numberVar: float = float("nan")
    product: float = float("nan")


# -- probabilities and densities --------------------------------------------

def phase_prob(family: PhaseFamily, psi, arcs: ArcSet, dim: int) -> float:
    """``<psi|E(X) psi>`` through the truncated effect matrix."""
    psi = check_unit(psi, dim)
    e = build_effect(family, arcs, dim).matrix
    return float(np.vdot(psi, e @ psi).real)


def fourier_coefficients(family: PhaseFamily, psi) -> np.ndarray:
    """``a_k`` for ``k = 0 .. D-1`` by summing the phase matrix along diagonals."""
    psi = np.asarray(psi, dtype=complex)
    dim = psi.size
    if family.is_canonical():
        length = 1 << int(np.ceil(np.log2(2 * dim)))
        spec = np.fft.fft(psi, length)
        corr = np.fft.ifft(np.abs(spec) ** 2)[:dim]
        return np.conj(corr)
    out = np.empty(dim, dtype=complex)
    for k in range(dim):
        diag = family.diagonal(k, dim - k)
        out[k] = np.sum(diag * np.conj(psi[k:]) * psi[: dim - k])
    return out


def density_double_sum(family: PhaseFamily, psi, theta) -> np.ndarray:
    """``sum_{n,m} c[n,m] conj(psi_n) psi_m e^{i(n-m) theta}`` by explicit matrix products."""
    psi = np.asarray(psi, dtype=complex)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    c = family.block(psi.size)
    u = psi[:, None] * np.exp(-1j * np.outer(np.arange(psi.size), theta))
    return np.einsum("nj,nm,mj->j", u.conj(), c, u).real


def phase_density(family: PhaseFamily, psi, grid: int = DEFAULT_GRID,
                  method: str = "auto") -> PhaseDistribution:
    """Density of ``p^E_psi`` on an ``M``-point grid.

    ``method`` is ``"fft"`` (squared DFT for the canonical phase, otherwise
    DFT synthesis of the diagonal sums), ``"matrix"`` (explicit double sum)
    or ``"auto"`` (``"fft"``).
    """
    psi = check_unit(psi)
    dim = psi.size
    if grid < 2 * dim:
        raise GuardError(f"grid size {grid} aliases a dimension-{dim} state; need M >= {2 * dim}")
    theta = TWO_PI * np.arange(grid) / grid
    coeffs = fourier_coefficients(family, psi)
    if method == "matrix":
        g = density_double_sum(family, psi, theta)
    elif method in ("auto", "fft"):
        if family.is_canonical():
            g = np.abs(np.fft.fft(psi, grid)) ** 2
        else:
            spec = np.zeros(grid, dtype=complex)
            spec[1:dim] = coeffs[1:]
            g = coeffs[0].real + 2 * (grid * np.fft.ifft(spec)).real
    else:
        raise DomainError(f"unknown density method {method!r}")
    kmax = min(dim - 1, grid // 2 - 1)
    return PhaseDistribution(theta, g, coeffs[: kmax + 1], family, psi)


def sampled_distribution(density, fourier=None) -> PhaseDistribution:
    """Wrap density samples on a uniform grid; coefficients come from the DFT if not given."""
    g = np.asarray(density, dtype=float)
    grid = g.size
    if fourier is None:
        fourier = np.fft.fft(g)[: grid // 2] / grid
    return PhaseDistribution(TWO_PI * np.arange(grid) / grid, g, np.asarray(fourier, dtype=complex))


def density_canonical_geometric(r: float, theta):
    """Poisson kernel ``(1 - r^2) / (1 - 2 r cos theta + r^2)``."""
    if not -1 < r < 1:
        raise DomainError(f"Poisson kernel needs |r| < 1, got {r}")
    return (1 - r * r) / (1 - 2 * r * np.cos(theta) + r * r)


def density_groundstate_coherent(r: float, theta):
    """Ground-state phase density in the coherent state ``|r>``, ``r >= 0``."""
    if r < 0:
        raise DomainError(f"coherent amplitude must be nonnegative, got {r}")
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    s = np.sin(theta)
    return math.exp(-r * r) + np.exp(-r * r * s * s) * 2 * r * c * (math.sqrt(math.pi) / 2) * (1 + erf(r * c))


def fourier_coeff(family: PhaseFamily, r: float, k: int, dim: int | None = None,
                  phases=None, tail_tol: float = TAIL_TOL) -> complex:
    """Truncated series for the ``k``-th coefficient of ``p^E_{psi_r}``.

    ``r^|k| (1 - r^2) sum_{n<D} c[n+k, n] e^{-i(u_{n+k} - u_n)} r^{2n}``;
    ``phases`` is ``n -> u_n`` or ``None``.  ``dim`` defaults to the smallest
    dimension meeting the tail bound.
    """
    if not -1 < r < 1:
        raise DomainError(f"geometric state needs |r| < 1, got {r}")
    if k < 0:
        return complex(np.conj(fourier_coeff(family, r, -k, dim, phases, tail_tol)))
    if dim is None:
        dim = geometric_dim(r, tail_tol)
    tail = abs(r) ** (2 * dim)
    if tail > tail_tol:
        raise GuardError(f"series tail {tail:.3e} exceeds {tail_tol:g}; use dim >= {geometric_dim(r, tail_tol)}")
    n = np.arange(dim)
    terms = family.entries(n + k, n) * np.power(float(r), 2 * n)
    if phases is not None:
        terms = terms * np.exp(-1j * (np.asarray(phases(n + k)) - np.asarray(phases(n))))
    return complex(r**k * (1 - r * r) * np.sum(terms))


# -- minimum variance -------------------------------------------------------

def _window_moments(coeffs: np.ndarray, beta):
    """First and second moments of ``u = theta - beta`` over ``[beta - pi, beta + pi)``."""
    k = np.arange(1, coeffs.size)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    rot = coeffs[1:] * np.exp(1j * np.multiply.outer(np.atleast_1d(beta), k))
    m1 = 2 * (rot @ (-1j * sign / k)).real
    m2 = math.pi**2 / 3 + 2 * (rot @ (2 * sign / k**2)).real
    return m1, m2


def min_variance(dist: PhaseDistribution) -> VarianceReport:
    """Levy minimum variance ``inf_{alpha, beta}`` of the windowed second moment.

    For each window centre ``beta`` the optimal ``alpha`` is the window mean,
    and the window moments are exact integrals of the density's
    trigonometric polynomial.  ``beta`` is searched on the ``M`` grid and
    refined by golden section.
    """
    a = dist.fourier
    if abs(a[0] - 1) > NORMALIZATION_TOL:
        raise DomainError(f"density is not normalised: mass {a[0].real!r}")
    grid = dist.grid.size
    kmax = a.size - 1
    if kmax == 0:
        return VarianceReport(math.pi**2 / 3, math.pi, math.pi)
    k = np.arange(1, kmax + 1)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    size = max(grid, 2 * kmax + 2)
    b1 = np.zeros(size, dtype=complex)
    b2 = np.zeros(size, dtype=complex)
    b1[1 : kmax + 1] = a[1:] * (-1j * sign / k)
    b2[1 : kmax + 1] = a[1:] * (2 * sign / k**2)
    m1 = 2 * (size * np.fft.ifft(b1)).real
    m2 = math.pi**2 / 3 + 2 * (size * np.fft.ifft(b2)).real
    var = m2 - m1**2
    j = int(np.argmin(var))
    step = TWO_PI / size

    def objective(beta):
        p1, p2 = _window_moments(a, beta)
        return float(p2[0] - p1[0] ** 2)

    lo, hi = (j - 1) * step, (j + 1) * step
    inv_phi = (math.sqrt(5) - 1) / 2
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    while hi - lo > GOLDEN_TOL:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = objective(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = objective(x2)
    beta = 0.5 * (lo + hi)
    best = objective(beta)
    if var[j] < best:
        beta, best = j * step, float(var[j])
    p1, _ = _window_moments(a, beta)
    best = min(max(best, 0.0), math.pi**2 / 3)
    beta_star = beta % TWO_PI
    return VarianceReport(best, beta_star + float(p1[0]), beta_star)


# -- number statistics and composite experiments -----------------------------

def number_stats(psi) -> tuple[float, float]:
    psi = check_unit(psi)
    p = np.abs(psi) ** 2
    n = np.arange(psi.size)
    mean = float(np.sum(n * p))
    return mean, float(np.sum(n * n * p) - mean * mean)


def uncertainty_product(z_modulus: float, grid: int = DEFAULT_GRID, dim: int | None = None) -> VarianceReport:
    """``Var(N) * VAR(E_can)`` in the coherent state ``|z>`` with ``z = |z|``."""
    need = coherent_cutoff(z_modulus)
    if dim is None:
        dim = need
    elif dim < need:
        raise GuardError(f"dimension {dim} below coherent cutoff {need} for |z| = {z_modulus}")
    psi = coherent_state(z_modulus, dim)
    report = min_variance(phase_density(Canonical(), psi, max(grid, 2 * dim)))
    _, var_n = number_stats(psi)
    return VarianceReport(report.VAR, report.alpha_star, report.beta_star, var_n, var_n * report.VAR)


def value_comp_rows(family: PhaseFamily, r_values, p: int, delta: float = 0.1,
                    tail_tol: float = TAIL_TOL) -> list[dict]:
    """Head mass ``sum_{n<=p} |<n|psi_r>|^2`` and phase concentration on ``[-delta, delta]``."""
    window = ArcSet.from_pairs([(-delta, delta)])
    rows = []
    for r in r_values:
        dim = max(p + 1, geometric_dim(r, tail_tol))
        psi = geometric_state(r, dim, tail_tol=tail_tol)
        head = float(np.sum(np.abs(psi[: p + 1]) ** 2))
        dist = PhaseDistribution(np.zeros(0), np.zeros(0), fourier_coefficients(family, psi))
        rows.append({
            "r": float(r),
            "dim": dim,
            "head_mass": head,
            "head_closed": 1 - float(r) ** (2 * (p + 1)),
            "concentration": dist.mass(window),
        })
    return rows


def value_comp_scan(family: PhaseFamily, r_values, p: int, delta: float = 0.1,
                    tail_tol: float = TAIL_TOL) -> list[dict]:
    """:func:`value_comp_rows`, raising ``AssertionError`` unless the head mass decreases."""
    rows = value_comp_rows(family, r_values, p, delta, tail_tol)
    heads = [row["head_mass"] for row in rows]
    if any(b >= a for a, b in zip(heads, heads[1:])):
        raise AssertionError(f"head mass is not decreasing along r: {heads}")
    return rows


def truncated_norms(family: PhaseFamily, arcs: ArcSet, dims) -> list[dict]:
    """``||E(X)||`` per truncation, with ``gap = 1 - norm``."""
    if arcs.measure <= 0:
        raise DomainError("norm scan needs an arc set of positive measure")
    rows = []
    for dim in dims:
        norm = opnorm(build_effect(family, arcs, int(dim)).matrix)
        rows.append({"dim": int(dim), "norm": norm, "gap": 1 - norm})
    return rows


def norm_scan(family: PhaseFamily, arcs: ArcSet, dims, slack: float = EFFECT_TOL) -> list[dict]:
    """:func:`truncated_norms`, raising ``AssertionError`` if norms drop by more than ``slack``."""
    rows = truncated_norms(family, arcs, dims)
    norms = [row["norm"] for row in rows]
    if any(b < a - slack for a, b in zip(norms, norms[1:])):
        raise AssertionError(f"truncated norms decrease: {norms}")
    return rows
