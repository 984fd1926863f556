"""Dense Hermitian linear algebra, the rank-one infimum and Fock-space states.

Matrices are plain complex ``numpy`` arrays indexed ``(n, m)`` in the number
basis, and states are 1-d complex arrays of Fock coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, GuardError, StructuralError

HERMITIAN_TOL = 1e-12
EFFECT_TOL = 1e-10
UNIT_TOL = 1e-12
RANGE_TOL = 1e-10


@dataclass(frozen=True)
class HermitianEigen:
    """Ascending eigenvalues and the matching orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_defect(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {a.shape}")
    defect = hermitian_defect(a)
    if defect > tol:
        raise StructuralError(f"matrix is not Hermitian: max asymmetry {defect:.3e}")
    return a


def eigh(a, tol: float = HERMITIAN_TOL) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrised as ``(A + A*)/2`` after validation so that
    LAPACK sees an exactly Hermitian array.
    """
    a = check_hermitian(a, tol)
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return HermitianEigen(w, v)


def eigvalsh(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = check_hermitian(a, tol)
    return np.linalg.eigvalsh(0.5 * (a + a.conj().T))


def opnorm(a, tol: float = HERMITIAN_TOL) -> float:
    """Operator norm ``max |eigenvalue|`` of a Hermitian matrix."""
    w = eigvalsh(a, tol)
    if w.size == 0:
        return 0.0
    return float(max(abs(w[0]), abs(w[-1])))


def check_effect_spectrum(w: np.ndarray, tol: float = EFFECT_TOL) -> None:
    if w.size and (w[0] < -tol or w[-1] > 1 + tol):
        raise DomainError(
            f"operator is not between O and I: spectrum [{w[0]:.3e}, {w[-1]:.3e}]"
        )


def rank_one_wedge(a, phi, range_tol: float = RANGE_TOL) -> float:
    """Coefficient ``lam`` of the infimum ``|phi><phi| ^ A = lam |phi><phi|``.

    ``lam = ||A^{-1/2} phi||^{-2}`` when ``phi`` lies in the range of
    ``A^{1/2}`` and 0 otherwise.  Eigenvalues at or below ``range_tol`` times
    the largest eigenvalue count as kernel; ``phi`` is considered outside the
    range when its kernel weight reaches ``range_tol``.
    """
    dec = eigh(a)
    check_effect_spectrum(dec.eigenvalues)
    phi = check_unit(phi, dim=dec.eigenvalues.size)
    w = np.clip(dec.eigenvalues, 0.0, 1.0)
    cutoff = range_tol * max(w[-1], np.finfo(float).tiny) if w.size else 0.0
    weights = np.abs(dec.eigenvectors.conj().T @ phi) ** 2
    kernel = w <= cutoff
    if weights[kernel].sum() >= range_tol or np.all(kernel):
        return 0.0
    return float(1.0 / np.sum(weights[~kernel] / w[~kernel]))


def projection_wedge_spectrum(a, indices, range_tol: float = RANGE_TOL) -> np.ndarray:
    """Spectrum of the infimum ``P ^ A`` for ``P`` projecting onto basis ``indices``.

    The infimum is the shorted operator of ``A`` onto ``ran P``; restricted to
    ``ran P`` it equals ``(P A^+ P)^{-1}`` when ``ran P`` avoids the kernel of
    ``A``.  Returns its ascending eigenvalues on ``ran P`` (length ``len(indices)``).
    """
    dec = eigh(a)
    check_effect_spectrum(dec.eigenvalues)
    idx = np.asarray(sorted(set(int(i) for i in indices)), dtype=int)
    if idx.size == 0:
        raise DomainError("index set must be nonempty")
    if idx[0] < 0 or idx[-1] >= dec.eigenvalues.size:
        raise DomainError(f"indices must lie in [0, {dec.eigenvalues.size})")
    w = np.clip(dec.eigenvalues, 0.0, 1.0)
    cutoff = range_tol * max(w[-1], np.finfo(float).tiny)
    rows = dec.eigenvectors[idx, :]
    kernel = w <= cutoff
    out = np.zeros(idx.size)
    if np.all(kernel):
        return out
    # Kernel components: directions of ran P with weight on ker A wedge to zero.
    kr = rows[:, kernel]
    gram_kernel = kr @ kr.conj().T
    kw, kv = np.linalg.eigh(0.5 * (gram_kernel + gram_kernel.conj().T))
    good = kw < range_tol
    if not np.any(good):
        return out
    basis = kv[:, good]
    rr = rows[:, ~kernel]
    inv = (rr / w[~kernel]) @ rr.conj().T
    inv = basis.conj().T @ inv @ basis
    mu = np.linalg.eigvalsh(0.5 * (inv + inv.conj().T))
    out[-mu.size:] = np.sort(1.0 / mu)
    return np.sort(out)


def max_psd_shift(a, phi, tol: float = 1e-12, iters: int = 200) -> float:
    """Largest ``t`` with ``min eig(A - t |phi><phi|) >= -tol``, by bisection.

    Independent of :func:`rank_one_wedge`; used to cross-check it.
    """
    a = check_hermitian(a)
    phi = np.asarray(phi, dtype=complex)
    proj = np.outer(phi, phi.conj())

    def ok(t):
        return np.linalg.eigvalsh(a - t * proj)[0] >= -tol

    lo, hi = 0.0, 1.0
    while ok(hi):
        lo, hi = hi, 2 * hi
    if not ok(lo):
        return 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return lo


# -- states -----------------------------------------------------------------

def check_unit(psi, dim: int | None = None, tol: float = UNIT_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DomainError("state must be a 1-d coefficient vector")
    if dim is not None and psi.size != dim:
        raise DomainError(f"dimension mismatch: state has {psi.size}, expected {dim}")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise DomainError(f"state is not normalised: |psi|^2 = {norm2!r}")
    return psi


def number_state(n: int, dim: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise DomainError(f"number state |{n}> does not fit in dimension {dim}")
    psi = np.zeros(dim, dtype=complex)
    psi[n] = 1.0
    return psi


def coherent_cutoff(modulus: float) -> int:
    """Dimension ``|z|^2 + 10|z| + 20`` keeping the Poisson tail negligible."""
    z = abs(modulus)
    return int(np.ceil(z * z + 10 * z + 20))


def coherent_state(z: complex, dim: int, tail_tol: float = 1e-12) -> np.ndarray:
    """Coherent state ``e^{-|z|^2/2} sum z^n / sqrt(n!) |n>`` truncated at ``dim``."""
    n = np.arange(dim)
    mod = abs(z)
    if mod == 0:
        return number_state(0, dim)
    logc = -0.5 * mod * mod + n * np.log(mod) - 0.5 * gammaln(n + 1)
    psi = np.exp(logc) * np.exp(1j * np.angle(z) * n)
    tail = 1.0 - float(np.sum(np.exp(2 * logc)))
    if tail > tail_tol:
        raise GuardError(
            f"coherent tail mass {tail:.3e} exceeds {tail_tol:g} at dimension {dim}; "
            f"use dim >= {coherent_cutoff(mod)}"
        )
    return psi


def geometric_dim(r: float, tail_tol: float = 1e-12) -> int:
    """Smallest dimension with geometric tail ``r^{2D} <= tail_tol``."""
    if r == 0:
        return 1
    return max(1, int(np.ceil(np.log(tail_tol) / (2 * np.log(abs(r))))))


def geometric_state(r: float, dim: int, phases=None, tail_tol: float = 1e-12) -> np.ndarray:
    """``sqrt(1-r^2) sum e^{i u_n} r^n |n>`` truncated at ``dim`` (not renormalised).

    ``phases`` is a callable ``n -> u_n`` (array in, array out) or ``None``.
    """
    if not -1 < r < 1:
        raise DomainError(f"geometric state needs |r| < 1, got {r}")
    if dim < 1:
        raise DomainError("dimension must be positive")
    tail = abs(r) ** (2 * dim)
    if tail > tail_tol:
        raise GuardError(
            f"geometric tail {tail:.3e} exceeds {tail_tol:g}; use dim >= {geometric_dim(r, tail_tol)}"
        )
    n = np.arange(dim)
    with np.errstate(divide="ignore"):
        mags = np.sqrt(1 - r * r) * np.power(float(r), n)
    psi = mags.astype(complex)
    if phases is not None:
        psi = psi * np.exp(1j * np.asarray(phases(n), dtype=float))
    return psi


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)
