"""Acceptance criteria as runnable checks with machine-readable verdicts.

Each ``criterion_NN`` returns a :class:`CheckResult`; tolerances are fixed
here and nowhere else.
"""

from __future__ import annotations

import json
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .commutation import com_e_estimate, default_test_pairs, pairwise_commutator_norm
from .effects import (
    TWO_PI,
    ArcSet,
    build_effect,
    complementarity_probe,
    covariance_residual,
    elementary_spectrum_closed,
    mixture_bound_check,
)
from .numerics import coherent_state, eigh, geometric_state, max_psd_shift, number_state, random_state
from .observables import Canonical, Elementary, GroundState, Mixture, Trivial, two_link_phase
from .statistics import (
    density_canonical_geometric,
    density_groundstate_coherent,
    fourier_coeff,
    phase_density,
    truncated_norms,
    uncertainty_product,
    value_comp_rows,
)

SEED = 20240601


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] C{self.number:02d} {self.name}: {self.detail}"


def _timed(number, name):
    def wrap(fn):
        def run():
            start = time.perf_counter()
            passed, detail = fn()
            return CheckResult(number, name, bool(passed), detail, time.perf_counter() - start)
        run.__name__ = fn.__name__
        run.number = number
        return run
    return wrap


def random_arcset(rng, max_arcs: int = 2) -> ArcSet:
    while True:
        pairs = []
        for _ in range(int(rng.integers(1, max_arcs + 1))):
            a = rng.uniform(0, TWO_PI)
            pairs.append((a, a + rng.uniform(0.05, 0.45) * TWO_PI))
        arcs = ArcSet.from_pairs(pairs)
        if 0 < arcs.measure < TWO_PI - 1e-3:
            return arcs


def _fmt(x: float) -> str:
    return f"{x:.3e}"


@_timed(1, "covariance")
def criterion_01():
    rng = np.random.default_rng(SEED + 1)
    families = [Canonical(), Elementary(2, 5, 0.6 + 0.3j), GroundState(), Mixture(0.3, Canonical())]
    start = time.perf_counter()
    worst = 0.0
    for fam in families:
        for _ in range(50):
            worst = max(worst, covariance_residual(fam, random_arcset(rng), rng.uniform(0, TWO_PI), 64))
    elapsed = time.perf_counter() - start
    return worst <= 1e-12 and elapsed < 10, f"max residual {_fmt(worst)} (<= 1e-12), {elapsed:.2f}s (< 10s)"


@_timed(2, "elementary spectrum closed form")
def criterion_02():
    rng = np.random.default_rng(SEED + 2)
    dim, worst = 32, 0.0
    for _ in range(20):
        s, t = (int(v) for v in rng.choice(dim, 2, replace=False))
        w = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, TWO_PI))
        arcs = random_arcset(rng)
        em, e0, ep = elementary_spectrum_closed(s, t, w, arcs)
        got = eigh(build_effect(Elementary(s, t, w), arcs, dim).matrix).eigenvalues
        expected = np.sort([em, ep] + [e0] * (dim - 2))
        worst = max(worst, float(np.max(np.abs(got - expected))))
    return worst <= 1e-10, f"max |closed - numeric| {_fmt(worst)} (<= 1e-10)"


@_timed(3, "Busch-Gudder probe for the elementary phase")
def criterion_03():
    dim = 16
    fam = Elementary(0, 1, 1.0)
    arcs = ArcSet.interval(0.0, math.pi)
    em, _, ep = elementary_spectrum_closed(0, 1, 1.0, arcs)
    expected0 = 2 * em * ep / (em + ep)
    lam0 = complementarity_probe(fam, arcs, [0], dim)
    lam5 = complementarity_probe(fam, arcs, [5], dim)
    eff = build_effect(fam, arcs, dim).matrix
    or0 = max_psd_shift(eff, number_state(0, dim))
    or5 = max_psd_shift(eff, number_state(5, dim))
    d0, d5 = abs(lam0 - expected0), abs(lam5 - 0.5)
    o0, o5 = abs(lam0 - or0), abs(lam5 - or5)
    ok = d0 <= 1e-8 and d5 <= 1e-10 and o0 <= 1e-8 and o5 <= 1e-8
    return ok, (f"lam0={lam0:.12f} vs 2e-e+/(e-+e+)={expected0:.12f} ({_fmt(d0)}); lam5={lam5:.12f} ({_fmt(d5)}); "
                f"oracle gaps {_fmt(o0)}, {_fmt(o5)}")


@_timed(4, "commutativity characterisation")
def criterion_04():
    rng = np.random.default_rng(SEED + 4)
    pairs = default_test_pairs(SEED) + [(random_arcset(rng), random_arcset(rng)) for _ in range(20)]
    triv = max(pairwise_commutator_norm(Trivial(), x, y, 48) for x, y in pairs)
    can = com_e_estimate(Canonical(), 48, 16, seed=SEED)
    others = {
        f.name: max(pairwise_commutator_norm(f, x, y, 48) for x, y in pairs[:8])
        for f in (Canonical(), GroundState(), Elementary(0, 2, 1.0))
    }
    ok = triv <= 1e-12 and can.com_estimate_dim == 0 and all(v > 1e-6 for v in others.values())
    return ok, (f"trivial max commutator {_fmt(triv)}; canonical com-estimate dim {can.com_estimate_dim}; "
                f"nontrivial commutator norms {json.dumps({k: round(v, 6) for k, v in others.items()})}")


@_timed(5, "strong-phase equality and proper inclusion")
def criterion_05():
    parts, ok = [], True
    for fam in (Canonical(), Trivial(), GroundState()):
        rep = com_e_estimate(fam, 48, 16, seed=SEED)
        ok &= rep.com_estimate_dim == rep.pa_dim
        parts.append(f"{fam.name}: est {rep.com_estimate_dim} = |A| {rep.pa_dim}")
    rep = com_e_estimate(two_link_phase(1 / math.sqrt(2)), 48, 16, seed=SEED)
    ok &= rep.com_estimate_dim > rep.pa_dim and rep.witness is not None
    witness = "none" if rep.witness is None else str(np.round(np.abs(rep.witness[:4]), 6).tolist())
    parts.append(f"E_w: est {rep.com_estimate_dim} > |A| {rep.pa_dim}, |witness[:4]| {witness}")
    return ok, "; ".join(parts)


@_timed(6, "closed-form densities")
def criterion_06():
    psi = geometric_state(0.5, 200)
    dist = phase_density(Canonical(), psi, 1024, method="matrix")
    err1 = float(np.max(np.abs(dist.density - density_canonical_geometric(0.5, dist.grid))))
    psi = coherent_state(2.0, 80)
    dist = phase_density(GroundState(), psi, 1024, method="matrix")
    err2 = float(np.max(np.abs(dist.density - density_groundstate_coherent(2.0, dist.grid))))
    return err1 <= 1e-6 and err2 <= 1e-6, f"Poisson kernel {_fmt(err1)}, ground-state coherent {_fmt(err2)} (<= 1e-6)"


@_timed(7, "Fourier-Stieltjes coefficients")
def criterion_07():
    worst = 0.0
    for r in (0.3, 0.7, 0.9):
        for k in range(9):
            worst = max(worst, abs(fourier_coeff(Canonical(), r, k) - r**k))
    trend_ok, mods = True, {}
    for k in (1, 2, 3):
        vals = [abs(fourier_coeff(GroundState(), r, k)) for r in (0.9, 0.99, 0.999)]
        gaps = [1 - v for v in vals]
        trend_ok &= all(0 < g for g in gaps) and all(b < a for a, b in zip(gaps, gaps[1:]))
        mods[k] = [round(v, 6) for v in vals]
    return worst <= 1e-10 and trend_ok, f"canonical max |c_k - r^k| {_fmt(worst)}; ground-state |c_k| {mods}"


@_timed(8, "effect norms tend to one")
def criterion_08():
    start = time.perf_counter()
    arcs = ArcSet.interval(0.0, math.pi)
    dims = [16, 64, 256]
    ok, parts = True, []
    for fam in (Canonical(), GroundState()):
        norms = [r["norm"] for r in truncated_norms(fam, arcs, dims)]
        ok &= all(b >= a - 1e-10 for a, b in zip(norms, norms[1:])) and norms[-1] >= 0.99
        parts.append(f"{fam.name} gaps {[_fmt(1 - n) for n in norms]}")
    triv = [r["norm"] for r in truncated_norms(Trivial(), arcs, dims)]
    ok &= all(n == 0.5 for n in triv)
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    return ok, "; ".join(parts) + f"; trivial {triv}; {elapsed:.2f}s (< 60s)"


@_timed(9, "probabilistic complementarity evidence")
def criterion_09():
    rng = np.random.default_rng(SEED + 9)
    dim = 128
    eff = build_effect(Canonical(), ArcSet.interval(0.0, math.pi), dim).matrix
    states = np.array([random_state(dim, rng) for _ in range(1000)])
    probs = np.einsum("in,nm,im->i", states.conj(), eff, states).real
    top = float(probs.max())
    return top <= 1 - 1e-6, f"max phase probability over 1000 states {top:.6f} (<= 1 - 1e-6)"


@_timed(10, "value complementarity scan")
def criterion_10():
    rows = value_comp_rows(Canonical(), [0.9, 0.99, 0.999], 3, 0.1)
    head_err = max(abs(r["head_mass"] - (1 - r["r"] ** 8)) for r in rows)
    heads = [r["head_mass"] for r in rows]
    conc = [r["concentration"] for r in rows]
    ok = (head_err <= 1e-12 and all(b < a for a, b in zip(heads, heads[1:]))
          and all(b > a for a, b in zip(conc, conc[1:])))
    return ok, (f"head mass {[round(h, 6) for h in heads]} (max err {_fmt(head_err)}); "
                f"mass of [-0.1, 0.1] {[round(c, 6) for c in conc]}")


@_timed(11, "uncertainty product tends to 1/4")
def criterion_11():
    start = time.perf_counter()
    prods = [uncertainty_product(z).product for z in (2.0, 3.0, 4.0, 5.0, 6.0)]
    devs = [abs(p - 0.25) for p in prods]
    elapsed = time.perf_counter() - start
    ok = all(b < a for a, b in zip(devs, devs[1:])) and devs[-1] <= 0.025 and elapsed < 120
    return ok, f"products {[round(p, 6) for p in prods]}; {elapsed:.2f}s (< 120s)"


@_timed(12, "mixture noncomplementarity bound")
def criterion_12():
    rng = np.random.default_rng(SEED + 12)
    worst = math.inf
    for inner in (Canonical(), GroundState()):
        for eps in (0.1, 0.5):
            for _ in range(10):
                k = int(rng.integers(0, 64))
                arcs = random_arcset(rng)
                try:
                    lam, bound = mixture_bound_check(eps, inner, arcs, k, 64)
                except AssertionError:
                    return False, f"bound violated at eps={eps}, k={k}, arcs={arcs.to_json()}"
                worst = min(worst, lam - bound)
    return worst >= -1e-10, f"min (lambda - eps*l(X)/2pi) {_fmt(worst)} (>= -1e-10)"


@_timed(13, "determinism")
def criterion_13():
    from .cli import ExperimentConfig, run_experiment

    configs = [
        dict(experiment="effect", family="groundstate", dim=12, arcs=[[0.3, 2.0], [4.0, 7.0]]),
        dict(experiment="spectrum", family={"variant": "elementary", "s": 1, "t": 4, "w": [0.5, 0.5]}, dim=16),
        dict(experiment="commute", family="canonical", dim=8, seed=2),
        dict(experiment="density", family="canonical", state="coherent:1.5", dim=40, grid=256),
        dict(experiment="variance", family="groundstate", state="coherent:2", dim=60),
        dict(experiment="structure", family="groundstate", dim=12),
        dict(experiment="covariance", family="groundstate", dim=32, trials=5, seed=7),
        dict(experiment="complementarity", family={"variant": "mixture", "eps": 0.2, "inner": {"variant": "canonical"}},
             dim=16, seed=3),
        dict(experiment="uncertainty", z_values=[2.0, 3.0], seed=1),
        dict(experiment="value-scan", r_values=[0.5, 0.9], seed=1),
        dict(experiment="norm-scan", family="canonical", dims=[8, 16], seed=1),
    ]
    same = []
    with tempfile.TemporaryDirectory() as tmp:
        for i, cfg in enumerate(configs):
            blobs = []
            for rep in range(2):
                out = Path(tmp) / f"{i}-{rep}"
                _, paths = run_experiment(ExperimentConfig(out=str(out), **cfg))
                blobs.append(paths[0].read_bytes())
            same.append(blobs[0] == blobs[1])
    return all(same), f"byte-identical reruns {sum(same)}/{len(same)}"


CRITERIA = [
    criterion_01, criterion_02, criterion_03, criterion_04, criterion_05, criterion_06, criterion_07,
    criterion_08, criterion_09, criterion_10, criterion_11, criterion_12, criterion_13,
]


def run_all() -> list[CheckResult]:
    return [fn() for fn in CRITERIA]
