"""Phase matrices of covariant phase observables.

A phase observable is fixed by its phase matrix ``c[n, m] = <xi_n|xi_m>``.
Each family below evaluates entries lazily through a vectorised
``entries(n, m)`` so that blocks, single diagonals and single entries all
share one code path.  Families are immutable and have a JSON descriptor
(``to_json`` / :func:`family_from_json`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import ConstructionError, DomainError
from .numerics import hermitian_defect

GRAM_TOL = 1e-10
STRUCTURE_TOL = 1e-9


def _idx(n):
    return np.asarray(n, dtype=np.int64)


def _complex_json(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def complex_from_json(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConstructionError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


class PhaseFamily:
    """Base class; subclasses implement ``entries`` and ``to_json``."""

    def entries(self, n, m) -> np.ndarray:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    @property
    def name(self) -> str:
        return self.to_json()["variant"]

    def block(self, dim: int) -> np.ndarray:
        """Leading ``dim x dim`` block of the phase matrix."""
        k = np.arange(dim)
        return np.asarray(self.entries(k[:, None], k[None, :]), dtype=complex)

    def diagonal(self, k: int, length: int) -> np.ndarray:
        """``c[m + k, m]`` for ``m = 0 .. length-1`` (``k`` may be negative)."""
        m = np.arange(length)
        if k >= 0:
            return np.asarray(self.entries(m + k, m), dtype=complex)
        return np.asarray(self.entries(m, m - k), dtype=complex)

    def is_canonical(self) -> bool:
        return False


@dataclass(frozen=True)
class Canonical(PhaseFamily):
    """All entries equal to one."""

    def entries(self, n, m):
        n, m = np.broadcast_arrays(_idx(n), _idx(m))
        return np.ones(n.shape, dtype=complex)

    def to_json(self):
        return {"variant": "canonical"}

    def is_canonical(self):
        return True


@dataclass(frozen=True)
class Trivial(PhaseFamily):
    """Identity phase matrix: ``E(X) = l(X)/2pi * I``."""

    def entries(self, n, m):
        n, m = _idx(n), _idx(m)
        return (n == m).astype(complex)

    def to_json(self):
        return {"variant": "trivial"}


@dataclass(frozen=True)
class Sparse(PhaseFamily):
    """Identity plus finitely many off-diagonal entries.

    ``links`` maps ``(n, m)`` with ``n < m`` to ``c[n, m]``; the lower
    triangle follows by conjugation.
    """

    links: tuple = ()

    def __post_init__(self):
        items = []
        for (n, m), w in dict(self.links).items():
            n, m = int(n), int(m)
            if n < 0 or m < 0 or n == m:
                raise ConstructionError(f"invalid off-diagonal link ({n}, {m})")
            w = complex(w)
            if n > m:
                n, m, w = m, n, w.conjugate()
            items.append(((n, m), w))
        object.__setattr__(self, "links", tuple(sorted(items)))

    def entries(self, n, m):
        n, m = np.broadcast_arrays(_idx(n), _idx(m))
        out = (n == m).astype(complex)
        for (s, t), w in self.links:
            out = np.where((n == s) & (m == t), w, out)
            out = np.where((n == t) & (m == s), w.conjugate(), out)
        return out

    def to_json(self):
        return {
            "variant": "sparse",
            "links": [[s, t, _complex_json(w)] for (s, t), w in self.links],
        }


@dataclass(frozen=True)
class Elementary(PhaseFamily):
    """Trivial phase perturbed by ``c[s, t] = w`` on one off-diagonal pair."""

    s: int
    t: int
    w: complex = 1.0

    def __post_init__(self):
        if self.s == self.t:
            raise ConstructionError("elementary phase needs s != t")
        if self.s < 0 or self.t < 0:
            raise ConstructionError("elementary indices must be nonnegative")
        if abs(self.w) > 1 + 1e-15:
            raise ConstructionError(f"elementary phase needs |w| <= 1, got |w| = {abs(self.w)}")
        object.__setattr__(self, "w", complex(self.w))

    def entries(self, n, m):
        n, m = np.broadcast_arrays(_idx(n), _idx(m))
        out = (n == m).astype(complex)
        out = np.where((n == self.s) & (m == self.t), self.w, out)
        return np.where((n == self.t) & (m == self.s), self.w.conjugate(), out)

    def to_json(self):
        return {"variant": "elementary", "s": self.s, "t": self.t, "w": _complex_json(self.w)}


@dataclass(frozen=True)
class GroundState(PhaseFamily):
    """``c[n, m] = Gamma((n+m)/2 + 1) / sqrt(n! m!)``, evaluated in log space."""

    def entries(self, n, m):
        n, m = np.broadcast_arrays(_idx(n), _idx(m))
        if np.any(n < 0) or np.any(m < 0):
            raise DomainError("indices must be nonnegative")
        # Ordered arguments make c[n, m] and c[m, n] bitwise equal.
        lo, hi = np.minimum(n, m), np.maximum(n, m)
        logc = gammaln((lo + hi) / 2 + 1) - 0.5 * gammaln(lo + 1) - 0.5 * gammaln(hi + 1)
        return np.where(n == m, 1.0, np.exp(logc)).astype(complex)

    def to_json(self):
        return {"variant": "groundstate"}


TAIL_RULES = ("repeat-last", "extend-canonical")


@dataclass(frozen=True)
class FromVectors(PhaseFamily):
    """Gram matrix of generating vectors ``xi_0 .. xi_{K-1}`` with a tail rule.

    ``repeat-last`` sets ``xi_n = xi_{K-1}`` for ``n >= K``;
    ``extend-canonical`` sets ``xi_n = xi_0`` for ``n >= K``.  Either way the
    tail block is all ones, i.e. canonical among itself.
    """

    vectors: tuple
    tail: str = "repeat-last"
    _gram: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.tail not in TAIL_RULES:
            raise ConstructionError(f"unknown tail rule {self.tail!r}; expected one of {TAIL_RULES}")
        rows = [np.asarray(v, dtype=complex).ravel() for v in self.vectors]
        if not rows:
            raise ConstructionError("at least one generating vector is required")
        width = max(r.size for r in rows)
        xi = np.zeros((len(rows), width), dtype=complex)
        for i, r in enumerate(rows):
            xi[i, : r.size] = r
        object.__setattr__(self, "vectors", tuple(tuple(complex(x) for x in r) for r in xi))
        object.__setattr__(self, "_gram", xi.conj() @ xi.T)

    def _map(self, n):
        k = len(self.vectors)
        fill = k - 1 if self.tail == "repeat-last" else 0
        return np.where(n < k, n, fill)

    def entries(self, n, m):
        n, m = np.broadcast_arrays(_idx(n), _idx(m))
        return self._gram[self._map(n), self._map(m)]

    def to_json(self):
        return {
            "variant": "from-vectors",
            "vectors": [[_complex_json(x) for x in v] for v in self.vectors],
            "tail": self.tail,
        }


@dataclass(frozen=True)
class Mixture(PhaseFamily):
    """``eps * trivial + (1 - eps) * inner``."""

    eps: float
    inner: PhaseFamily

    def __post_init__(self):
        if not 0 <= self.eps <= 1:
            raise ConstructionError(f"mixture weight must lie in [0, 1], got {self.eps}")

    def entries(self, n, m):
        n, m = np.broadcast_arrays(_idx(n), _idx(m))
        return self.eps * (n == m) + (1 - self.eps) * self.inner.entries(n, m)

    def to_json(self):
        return {"variant": "mixture", "eps": self.eps, "inner": self.inner.to_json()}

    def is_canonical(self):
        return self.eps == 0 and self.inner.is_canonical()


@dataclass(frozen=True)
class Conjugated(PhaseFamily):
    """Unitary conjugate ``U E U*`` with ``U = diag(e^{i theta_n})``.

    The phase rule is the polynomial ``theta_n = sum_j coeffs[j] * n**j``.
    """

    coeffs: tuple
    inner: PhaseFamily

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def phase(self, n):
        n = np.asarray(n, dtype=float)
        return np.polynomial.polynomial.polyval(n, self.coeffs) if self.coeffs else np.zeros(n.shape)

    def entries(self, n, m):
        n, m = np.broadcast_arrays(_idx(n), _idx(m))
        return np.exp(1j * (self.phase(n) - self.phase(m))) * self.inner.entries(n, m)

    def to_json(self):
        return {"variant": "conjugated", "coeffs": list(self.coeffs), "inner": self.inner.to_json()}


def two_link_phase(w: complex) -> Sparse:
    """Phase with ``c[0,1] = c[1,2] = w`` and trivial elsewhere (valid for ``|w| <= 1/sqrt 2``)."""
    return Sparse({(0, 1): w, (1, 2): w})


# -- entry-level API --------------------------------------------------------

def entry(family: PhaseFamily, n: int, m: int) -> complex:
    if n < 0 or m < 0:
        raise DomainError("indices must be nonnegative")
    return complex(family.entries(n, m))


def validate_gram(family: PhaseFamily, dim: int) -> float:
    """Largest violation of the phase-matrix axioms on the leading block.

    Maximum of the unit-diagonal deviation, the Hermitian deviation and the
    negative part of the smallest eigenvalue.  At most ``GRAM_TOL`` is valid.
    """
    if dim < 1:
        raise DomainError("dimension must be positive")
    c = family.block(dim)
    diag = float(np.max(np.abs(np.diag(c) - 1.0)))
    herm = hermitian_defect(c)
    low = float(np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0])
    return max(diag, herm, -low, 0.0)


@dataclass(frozen=True)
class StructureReport:
    is_strong: bool
    is_modulus_one: bool
    is_extremal_certified: bool
    checked_dim: int
    max_violation: float


def structure_flags(family: PhaseFamily, dim: int, tol: float = STRUCTURE_TOL) -> StructureReport:
    """Strongness, modulus-one and extremality certificate on the leading block.

    Strongness is the chain identity ``c[n, n+k] = prod_j c[n+j, n+j+1]``.
    ``max_violation`` is the largest chain-identity residual.
    """
    if dim < 3:
        raise DomainError("structure check needs dim >= 3")
    c = family.block(dim)
    sup = np.array([c[j, j + 1] for j in range(dim - 1)])
    worst = 0.0
    for n in range(dim - 1):
        chain = np.cumprod(sup[n:])
        worst = max(worst, float(np.max(np.abs(c[n, n + 1 :] - chain))))
    modulus_one = bool(np.max(np.abs(np.abs(c) - 1.0)) < tol)
    return StructureReport(
        is_strong=worst < tol,
        is_modulus_one=modulus_one,
        is_extremal_certified=modulus_one,
        checked_dim=dim,
        max_violation=worst,
    )


def cyclic_moment(family: PhaseFamily, k: int, dim: int) -> np.ndarray:
    """Truncated ``V^(k)``: entries ``c[n, n+k]`` at ``(n, n+k)``, zero elsewhere."""
    if k < 0 or k >= dim:
        raise DomainError(f"cyclic moment order must satisfy 0 <= k < dim, got k={k}, dim={dim}")
    out = np.zeros((dim, dim), dtype=complex)
    n = np.arange(dim - k)
    out[n, n + k] = family.entries(n, n + k)
    return out


# -- JSON descriptors -------------------------------------------------------

NAMED = {
    "canonical": Canonical,
    "trivial": Trivial,
    "groundstate": GroundState,
}


def family_from_json(desc) -> PhaseFamily:
    """Parse a descriptor dict, a JSON string or a bare family name."""
    if isinstance(desc, str):
        text = desc.strip()
        if text.lower() in NAMED:
            return NAMED[text.lower()]()
        try:
            desc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConstructionError(f"unknown family {desc!r}") from exc
    if not isinstance(desc, dict) or "variant" not in desc:
        raise ConstructionError(f"family descriptor needs a 'variant' key: {desc!r}")
    v = str(desc["variant"]).lower()
    try:
        if v in NAMED:
            return NAMED[v]()
        if v == "elementary":
            return Elementary(int(desc["s"]), int(desc["t"]), complex_from_json(desc.get("w", 1.0)))
        if v == "sparse":
            return Sparse({(int(s), int(t)): complex_from_json(w) for s, t, w in desc["links"]})
        if v == "from-vectors":
            vecs = [[complex_from_json(x) for x in vec] for vec in desc["vectors"]]
            return FromVectors(tuple(tuple(v_) for v_ in vecs), desc.get("tail", "repeat-last"))
        if v == "mixture":
            return Mixture(float(desc["eps"]), family_from_json(desc["inner"]))
        if v == "conjugated":
            return Conjugated(tuple(desc.get("coeffs", ())), family_from_json(desc["inner"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConstructionError):
            raise
        raise ConstructionError(f"malformed {v} descriptor: {exc}") from exc
    raise ConstructionError(f"unknown family variant {v!r}")


def family_to_json(family: PhaseFamily) -> str:
    return json.dumps(family.to_json(), sort_keys=True)
