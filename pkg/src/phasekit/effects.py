"""Truncated effect operators ``E(X)`` for finite unions of arcs.

``E(X)[n, m] = c[n, m] * K_X(n - m)`` where ``K_X(k)`` is the normalised
integral of ``e^{ikx}`` over ``X``.  Arc sets are unions of half-open
intervals, so ``K_X`` is evaluated in closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, DomainError, PreconditionError
from .numerics import (
    EFFECT_TOL,
    eigh,
    opnorm,
    projection_wedge_spectrum,
    rank_one_wedge,
)
from .observables import GRAM_TOL, Elementary, Mixture, PhaseFamily, validate_gram

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class ArcSet:
    """Disjoint, sorted half-open arcs ``[a, b)`` inside ``[0, 2pi]``.

    Build through :meth:`from_pairs`, which canonicalises arbitrary input:
    endpoints are reduced mod 2pi, a pair with ``b < a`` (after reduction) or
    ``b > 2pi`` wraps through zero, overlapping or touching arcs merge, and an
    arc of length ``>= 2pi`` is the full circle.
    """

    arcs: tuple = ()

    @classmethod
    def from_pairs(cls, pairs) -> "ArcSet":
        pieces = []
        for a, b in pairs:
            a, b = float(a), float(b)
            if not (math.isfinite(a) and math.isfinite(b)):
                raise DomainError(f"arc endpoints must be finite, got ({a}, {b})")
            if b - a >= TWO_PI:
                return cls.full()
            if a == b:
                continue
            length = (b - a) % TWO_PI if b < a else b - a
            start = a % TWO_PI
            end = start + length
            if end <= TWO_PI:
                pieces.append((start, end))
            else:
                pieces.append((start, TWO_PI))
                pieces.append((0.0, end - TWO_PI))
        pieces = sorted(p for p in pieces if p[1] > p[0])
        merged: list[list[float]] = []
        for a, b in pieces:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls(tuple((a, b) for a, b in merged))

    @classmethod
    def full(cls) -> "ArcSet":
        return cls(((0.0, TWO_PI),))

    @classmethod
    def interval(cls, a: float, b: float) -> "ArcSet":
        return cls.from_pairs([(a, b)])

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.arcs))

    @property
    def is_full(self) -> bool:
        return self.arcs == ((0.0, TWO_PI),)

    def shift(self, x: float) -> "ArcSet":
        """The translate ``X + x`` (mod 2pi)."""
        if self.is_full:
            return self
        return ArcSet.from_pairs([(a + x, b + x) for a, b in self.arcs])

    def complement(self) -> "ArcSet":
        out, pos = [], 0.0
        for a, b in self.arcs:
            if a > pos:
                out.append((pos, a))
            pos = b
        if pos < TWO_PI:
            out.append((pos, TWO_PI))
        return ArcSet(tuple(out))

    def union(self, other: "ArcSet") -> "ArcSet":
        return ArcSet.from_pairs(list(self.arcs) + list(other.arcs))

    def to_json(self) -> list:
        return [[a, b] for a, b in self.arcs]

    @classmethod
    def from_json(cls, data) -> "ArcSet":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls.from_pairs([(p[0], p[1]) for p in data])
        except (TypeError, IndexError) as exc:
            raise DomainError(f"arc set must be a list of [a, b] pairs: {data!r}") from exc


def _unit_phase(k: np.ndarray, x: float) -> np.ndarray:
    # e^{ikx}; the endpoints 0 and 2pi give exactly 1 for integer k.
    if x == 0.0 or x == TWO_PI:
        return np.ones(k.shape, dtype=complex)
    return np.exp(1j * k * x)


def kernel_integral(arcs: ArcSet, k) -> np.ndarray | complex:
    """``(1/2pi) * integral over X of e^{ikx} dx`` for integer ``k`` (scalar or array)."""
    scalar = np.ndim(k) == 0
    k = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.zeros(k.shape, dtype=complex)
    zero = k == 0
    out[zero] = arcs.measure / TWO_PI
    kk = k[~zero]
    if kk.size:
        acc = np.zeros(kk.shape, dtype=complex)
        for a, b in arcs.arcs:
            acc += _unit_phase(kk, b) - _unit_phase(kk, a)
        out[~zero] = acc / (2j * math.pi * kk)
    return complex(out[0]) if scalar else out


@dataclass(frozen=True)
class Effect:
    matrix: np.ndarray
    family: PhaseFamily
    arcs: ArcSet
    dim: int

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "family": self.family.to_json(),
            "arcs": self.arcs.to_json(),
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }


def kernel_matrix(arcs: ArcSet, dim: int) -> np.ndarray:
    """Toeplitz matrix ``K_X(n - m)``, Hermitian by construction."""
    k = np.arange(dim)
    vals = kernel_integral(arcs, k)
    diff = k[:, None] - k[None, :]
    return np.where(diff >= 0, vals[np.abs(diff)], np.conj(vals[np.abs(diff)]))


def build_effect(family: PhaseFamily, arcs: ArcSet, dim: int, validate: bool = True) -> Effect:
    """Truncated ``E(X)`` at dimension ``dim``."""
    if dim < 1:
        raise DomainError("dimension must be positive")
    if validate:
        violation = validate_gram(family, dim)
        if violation > GRAM_TOL:
            raise ConstructionError(
                f"{family.name} is not a valid phase matrix at dim {dim}: violation {violation:.3e}"
            )
    c = family.block(dim)
    c = 0.5 * (c + c.conj().T)
    if arcs.is_full:
        mat = np.eye(dim, dtype=complex)
    else:
        mat = c * kernel_matrix(arcs, dim)
    return Effect(mat, family, arcs, dim)


def number_shift(x: float, dim: int) -> np.ndarray:
    """Diagonal of ``U_x = e^{ixN}``."""
    return np.exp(1j * x * np.arange(dim))


def covariance_residual(family: PhaseFamily, arcs: ArcSet, x: float, dim: int) -> float:
    """``|| U_x E(X) U_x* - E(X + x) ||`` in operator norm."""
    e = build_effect(family, arcs, dim).matrix
    u = number_shift(x, dim)
    rotated = u[:, None] * e * u.conj()[None, :]
    shifted = build_effect(family, arcs.shift(x), dim, validate=False).matrix
    diff = rotated - shifted
    return opnorm(0.5 * (diff + diff.conj().T))


def elementary_spectrum_closed(s: int, t: int, w: complex, arcs: ArcSet) -> tuple[float, float, float]:
    """Closed-form ``(e_-, e_0, e_+)`` of an elementary effect."""
    if s == t:
        raise DomainError("elementary phase needs s != t")
    if abs(w) > 1 + 1e-15:
        raise DomainError(f"elementary phase needs |w| <= 1, got {abs(w)}")
    e0 = arcs.measure / TWO_PI
    if arcs.is_full:
        return 1.0, 1.0, 1.0
    spread = abs(w) * abs(kernel_integral(arcs, s - t))
    return e0 - spread, e0, e0 + spread


def is_nontrivial_effect(matrix: np.ndarray, tol: float = EFFECT_TOL) -> bool:
    """``O != E(X) != I`` at truncation."""
    ident = np.eye(matrix.shape[0])
    return opnorm(matrix) > tol and opnorm(ident - matrix) > tol


def complementarity_probe(family: PhaseFamily, arcs: ArcSet, numbers, dim: int) -> float:
    """Smallest infimum coefficient of ``(sum_i P_{n_i}) ^ E(X)`` over unit vectors of its range.

    For a single index this is ``rank_one_wedge(E(X), |n>)``.  For several
    indices the infimum is the shorted operator of ``E(X)`` onto
    ``span{|n_i>}`` and the minimum of its spectrum is returned; use
    :func:`wedge_spectrum` for the full spectrum.  A positive value
    disproves complementarity at this truncation.
    """
    numbers = sorted(set(int(n) for n in numbers))
    if not numbers:
        raise DomainError("number set must be nonempty")
    if numbers[0] < 0 or numbers[-1] >= dim:
        raise DomainError(f"number indices must lie in [0, {dim})")
    eff = build_effect(family, arcs, dim).matrix
    if not is_nontrivial_effect(eff):
        raise PreconditionError("E(X) is numerically O or I; the probe needs O != E(X) != I")
    if len(numbers) == 1:
        phi = np.zeros(dim, dtype=complex)
        phi[numbers[0]] = 1.0
        return rank_one_wedge(eff, phi)
    return float(projection_wedge_spectrum(eff, numbers)[0])


def wedge_spectrum(family: PhaseFamily, arcs: ArcSet, numbers, dim: int) -> np.ndarray:
    """Full spectrum of ``(sum_i P_{n_i}) ^ E(X)`` restricted to the span of ``|n_i>``."""
    eff = build_effect(family, arcs, dim).matrix
    return projection_wedge_spectrum(eff, numbers)


def mixture_bound_check(eps: float, inner: PhaseFamily, arcs: ArcSet, k: int, dim: int,
                        tol: float = 1e-10) -> tuple[float, float]:
    """``(lam, bound)`` for ``P_k ^ E_eps(X)`` against ``eps * l(X) / 2pi``.

    Raises ``AssertionError`` if ``lam < bound - tol``.
    """
    if not 0 < eps <= 1:
        raise DomainError(f"mixture weight must lie in (0, 1], got {eps}")
    lam = complementarity_probe(Mixture(eps, inner), arcs, [k], dim)
    bound = eps * arcs.measure / TWO_PI
    if lam < bound - tol:
        raise AssertionError(f"wedge {lam!r} below mixture bound {bound!r}")
    return lam, bound


def effect_eigenvalues(effect: Effect) -> np.ndarray:
    """Spectrum of an effect, clamped to ``[0, 1]`` after validation."""
    w = eigh(effect.matrix).eigenvalues
    if w[0] < -EFFECT_TOL or w[-1] > 1 + EFFECT_TOL:
        raise DomainError(f"effect spectrum [{w[0]:.3e}, {w[-1]:.3e}] leaves [0, 1]")
    return np.clip(w, 0.0, 1.0)


def elementary_spectrum_numeric(family: Elementary, arcs: ArcSet, dim: int) -> np.ndarray:
    if max(family.s, family.t) >= dim:
        raise DomainError("elementary indices must lie inside the truncation")
    return effect_eigenvalues(build_effect(family, arcs, dim))

