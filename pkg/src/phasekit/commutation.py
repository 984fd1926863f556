"""Commutativity domains com(N, E) and com(E) at finite truncation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .effects import TWO_PI, ArcSet, build_effect
from .errors import DomainError, GuardError
from .numerics import check_unit, opnorm
from .observables import PhaseFamily

NULL_TOL = 1e-8
ZERO_TOL = 1e-12


@dataclass
class ComReport:
    A_set: list
    pa_dim: int
    com_estimate_dim: int
    dim_eval: int
    dim_big: int
    singular_values: np.ndarray = field(repr=False)
    witness: np.ndarray | None = None

    def to_json(self) -> dict:
        return {
            "A_set": list(self.A_set),
            "pa_dim": self.pa_dim,
            "com_estimate_dim": self.com_estimate_dim,
            "dim_eval": self.dim_eval,
            "dim_big": self.dim_big,
            "witness": None if self.witness is None
            else [[float(z.real), float(z.imag)] for z in self.witness],
        }


def com_ne_set(family: PhaseFamily, dim: int, tol: float = ZERO_TOL) -> list[int]:
    """Indices ``n < dim`` whose row of the phase matrix vanishes off the diagonal."""
    if dim < 2:
        raise DomainError("com(N, E) needs dim >= 2")
    c = np.abs(family.block(dim))
    np.fill_diagonal(c, 0.0)
    return [int(n) for n in np.flatnonzero(np.all(c <= tol, axis=1))]


def default_test_pairs(seed: int = 0, n_random: int = 4) -> list[tuple[ArcSet, ArcSet]]:
    """Nested arcs ``[0, 2pi j/8)`` paired cyclically plus seeded random arc pairs."""
    nested = [ArcSet.interval(0.0, TWO_PI * j / 8) for j in range(1, 8)]
    pairs = [(nested[i], nested[(i + 1) % 7]) for i in range(7)]
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        a, b = np.sort(rng.uniform(0, TWO_PI, 2))
        c, d = np.sort(rng.uniform(0, TWO_PI, 2))
        pairs.append((ArcSet.interval(a, b), ArcSet.interval(c, d)))
    return pairs


def commutator(family: PhaseFamily, x: ArcSet, y: ArcSet, dim: int) -> np.ndarray:
    ex = build_effect(family, x, dim).matrix
    ey = build_effect(family, y, dim).matrix
    return ex @ ey - ey @ ex


def pairwise_commutator_norm(family: PhaseFamily, x: ArcSet, y: ArcSet, dim: int) -> float:
    """``||E(X)E(Y) - E(Y)E(X)||`` at truncation ``dim``."""
    comm = commutator(family, x, y, dim)
    # The commutator of Hermitian matrices is anti-Hermitian; i*C is Hermitian.
    herm = 1j * comm
    return opnorm(0.5 * (herm + herm.conj().T))


def com_e_estimate(family: PhaseFamily, dim_big: int, dim_eval: int, pairs=None,
                   tol: float = NULL_TOL, seed: int = 0) -> ComReport:
    """Numerical common null space of commutators restricted to the leading block.

    Commutators are formed at ``dim_big`` and compressed to the leading
    ``dim_eval x dim_eval`` block before stacking.  Dropping rows can only
    enlarge the null space, so the estimate over-approximates ``com(E)``.
    """
    if dim_big < 2 * dim_eval + 8:
        raise GuardError(f"truncation guard needs dim_big >= 2*dim_eval + 8 = {2 * dim_eval + 8}")
    if pairs is None:
        pairs = default_test_pairs(seed)
    if len(pairs) < 8:
        raise DomainError("com(E) estimate needs at least 8 test pairs")
    blocks = [commutator(family, x, y, dim_big)[:dim_eval, :dim_eval] for x, y in pairs]
    stacked = np.vstack(blocks)
    _, s, vh = np.linalg.svd(stacked)
    top = s[0] if s.size else 0.0
    if top <= ZERO_TOL:
        null = np.eye(dim_eval, dtype=complex)
    else:
        null = vh[np.sum(s > tol * top):].conj().T
    a_set = com_ne_set(family, dim_eval)
    outside = np.setdiff1d(np.arange(dim_eval), a_set)
    witness = None
    if null.shape[1] > len(a_set) and outside.size:
        # Null-space direction with the largest weight off span{|n>: n in A}.
        _, sv, coeff = np.linalg.svd(null[outside, :])
        if sv[0] > math.sqrt(tol):
            vec = null @ coeff[0].conj()
            vec[a_set] = 0.0
            witness = _fix_phase(vec / np.linalg.norm(vec))
    return ComReport(a_set, len(a_set), int(null.shape[1]), dim_eval, dim_big, s, witness)


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    j = int(np.argmax(np.abs(vec)))
    return vec * np.exp(-1j * np.angle(vec[j]))


def joint_prob(family: PhaseFamily, phi, n: int, arcs: ArcSet, dim: int,
               tol: float = ZERO_TOL) -> float:
    """``|<phi|n>|^2 * l(X) / 2pi`` for ``phi`` in com(N, E)."""
    phi = check_unit(phi, dim)
    a_set = set(com_ne_set(family, dim, tol))
    for j in np.flatnonzero(np.abs(phi) > tol):
        if int(j) not in a_set:
            raise DomainError(
                f"state is not in com(N, E): component |{int(j)}> has an off-diagonal phase-matrix row"
            )
    if not 0 <= n < dim:
        raise DomainError(f"number index {n} outside [0, {dim})")
    return float(abs(phi[n]) ** 2 * arcs.measure / TWO_PI)
