"""``phasekit`` experiment runner.

Each experiment writes a CSV (or JSON) data file plus ``manifest.json`` with
the resolved configuration, its hash, tolerances and pass/fail verdicts.
Exit codes: 0 all verdicts pass, 2 verdict failure, 3 configuration error,
4 numerical guard violated.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import checks
from .commutation import com_e_estimate, com_ne_set, default_test_pairs, pairwise_commutator_norm
from .effects import (
    TWO_PI,
    ArcSet,
    build_effect,
    complementarity_probe,
    covariance_residual,
    elementary_spectrum_closed,
)
from .errors import ConfigError, ConstructionError, GuardError, PhasekitError
from .numerics import (
    coherent_cutoff,
    coherent_state,
    eigh,
    geometric_dim,
    geometric_state,
    hermitian_defect,
    max_psd_shift,
    number_state,
    random_state,
)
from .observables import (
    GRAM_TOL,
    Elementary,
    Mixture,
    complex_from_json,
    family_from_json,
    structure_flags,
    validate_gram,
)
from .report import Results, emit_report
from .statistics import (
    DEFAULT_GRID,
    min_variance,
    number_stats,
    phase_density,
    truncated_norms,
    uncertainty_product,
    value_comp_rows,
)

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_GUARD = 0, 2, 3, 4

TOLERANCES = {
    "effect_spectrum": 1e-10,
    "covariance": 1e-12,
    "elementary_spectrum": 1e-10,
    "wedge_oracle": 1e-8,
    "mixture_bound": 1e-10,
    "gram": GRAM_TOL,
    "normalization": 1e-8,
    "nonnegativity": 1e-9,
    "head_mass": 1e-12,
    "norm_slack": 1e-10,
}


@dataclass
class ExperimentConfig:
    experiment: str = "structure"
    family: object = "canonical"
    arcs: list = field(default_factory=lambda: [[0.0, math.pi]])
    dim: int | None = None
    dims: list = field(default_factory=lambda: [16, 64, 256])
    dim_big: int | None = None
    grid: int = DEFAULT_GRID
    state: str = "number:0"
    numbers: list | None = None
    shift: float | None = None
    trials: int = 50
    r_values: list = field(default_factory=lambda: [0.9, 0.99, 0.999])
    z_values: list = field(default_factory=lambda: [2.0, 3.0, 4.0, 5.0, 6.0])
    p: int = 3
    delta: float = 0.1
    criteria: list | None = None
    seed: int = 0
    out: str = "phasekit-out"
    format: str = "csv"

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out")
        if not isinstance(d["family"], str):
            d["family"] = json.loads(json.dumps(d["family"]))
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


# -- helpers ------------------------------------------------------------------

def _family(cfg):
    desc = cfg.family if isinstance(cfg.family, str) else json.dumps(cfg.family)
    return family_from_json(desc)


def _arcs(cfg) -> ArcSet:
    return ArcSet.from_json(cfg.arcs)


def _dim(cfg, default: int) -> int:
    return int(cfg.dim) if cfg.dim is not None else default


def parse_state(spec: str, dim: int | None, rng) -> np.ndarray:
    """``number:n``, ``coherent:z``, ``geometric:r``, ``random`` or a JSON list of reals / ``[re, im]``."""
    spec = spec.strip()
    if spec.startswith("["):
        try:
            vec = np.array([complex_from_json(x) for x in json.loads(spec)], dtype=complex)
        except (json.JSONDecodeError, ConstructionError, TypeError, ValueError) as exc:
            raise ConfigError(f"cannot parse state coefficients: {exc}") from exc
        if not vec.size or np.linalg.norm(vec) == 0:
            raise ConfigError("state coefficients must not all vanish")
        return vec / np.linalg.norm(vec)
    kind, _, arg = spec.partition(":")
    kind = kind.lower()
    if kind == "number":
        n = int(arg)
        return number_state(n, dim if dim is not None else n + 1)
    if kind == "coherent":
        z = complex(arg)
        return coherent_state(z, dim if dim is not None else coherent_cutoff(abs(z)))
    if kind == "geometric":
        r = float(arg)
        return geometric_state(r, dim if dim is not None else geometric_dim(r))
    if kind == "random":
        if dim is None:
            raise ConfigError("random state needs --dim")
        return random_state(dim, rng)
    raise ConfigError(f"unknown state spec {spec!r}")


def random_arcs(rng, max_arcs: int = 2) -> ArcSet:
    """Random arc set of positive measure below 2pi (may wrap through zero)."""
    while True:
        count = int(rng.integers(1, max_arcs + 1))
        pairs = []
        for _ in range(count):
            a = rng.uniform(0, TWO_PI)
            pairs.append((a, a + rng.uniform(0.05, 0.45) * TWO_PI))
        arcs = ArcSet.from_pairs(pairs)
        if 0 < arcs.measure < TWO_PI - 1e-3:
            return arcs


# -- experiments ----------------------------------------------------------------

def exp_effect(cfg, rng):
    fam, arcs = _family(cfg), _arcs(cfg)
    dim = _dim(cfg, 16)
    eff = build_effect(fam, arcs, dim)
    w = eigh(eff.matrix).eigenvalues
    tol = TOLERANCES["effect_spectrum"]
    res = Results("effect", ["n", "m", "re", "im"])
    for n in range(dim):
        for m in range(dim):
            z = eff.matrix[n, m]
            res.rows.append([n, m, float(z.real), float(z.imag)])
    res.verdicts = {
        "hermitian": hermitian_defect(eff.matrix) <= 1e-12,
        "spectrum_in_unit_interval": bool(w[0] >= -tol and w[-1] <= 1 + tol),
    }
    res.extra = {"min_eig": float(w[0]), "max_eig": float(w[-1])}
    return res


def exp_spectrum(cfg, rng):
    fam, arcs = _family(cfg), _arcs(cfg)
    dim = _dim(cfg, 16)
    eff = build_effect(fam, arcs, dim)
    w = eigh(eff.matrix).eigenvalues
    tol = TOLERANCES["effect_spectrum"]
    res = Results("spectrum", ["index", "eigenvalue"], [[i, float(v)] for i, v in enumerate(w)])
    res.verdicts["spectrum_in_unit_interval"] = bool(w[0] >= -tol and w[-1] <= 1 + tol)
    if isinstance(fam, Elementary) and max(fam.s, fam.t) < dim:
        em, e0, ep = elementary_spectrum_closed(fam.s, fam.t, fam.w, arcs)
        expected = np.sort(np.array([em, ep] + [e0] * (dim - 2)))
        err = float(np.max(np.abs(expected - w)))
        res.verdicts["closed_form"] = err <= TOLERANCES["elementary_spectrum"]
        res.extra = {"e_minus": em, "e_zero": e0, "e_plus": ep, "closed_form_error": err}
    return res


def exp_covariance(cfg, rng):
    fam = _family(cfg)
    dim = _dim(cfg, 64)
    res = Results("covariance", ["trial", "arcs", "shift", "residual"])
    if cfg.shift is not None:
        cases = [(_arcs(cfg), float(cfg.shift))]
    else:
        cases = [(random_arcs(rng), float(rng.uniform(0, TWO_PI))) for _ in range(cfg.trials)]
    worst = 0.0
    for i, (arcs, x) in enumerate(cases):
        r = covariance_residual(fam, arcs, x, dim)
        worst = max(worst, r)
        res.rows.append([i, json.dumps(arcs.to_json()), x, r])
    res.verdicts["residual"] = worst <= TOLERANCES["covariance"]
    res.extra = {"max_residual": worst}
    return res


def exp_commute(cfg, rng):
    fam = _family(cfg)
    dim_eval = _dim(cfg, 16)
    dim_big = cfg.dim_big if cfg.dim_big is not None else 2 * dim_eval + 16
    report = com_e_estimate(fam, dim_big, dim_eval, seed=cfg.seed)
    norms = [pairwise_commutator_norm(fam, x, y, dim_big) for x, y in default_test_pairs(cfg.seed)]
    res = Results(
        "commute",
        ["dim_eval", "dim_big", "pa_dim", "com_estimate_dim", "witness_found", "max_commutator_norm"],
        [[dim_eval, dim_big, report.pa_dim, report.com_estimate_dim, report.witness is not None, max(norms)]],
    )
    res.verdicts["inclusion"] = report.pa_dim <= report.com_estimate_dim
    res.extra = report.to_json()
    return res


def exp_complementarity(cfg, rng):
    fam, arcs = _family(cfg), _arcs(cfg)
    dim = _dim(cfg, 16)
    numbers = cfg.numbers if cfg.numbers is not None else list(range(min(dim, 8)))
    eff = build_effect(fam, arcs, dim).matrix
    bound = fam.eps * arcs.measure / TWO_PI if isinstance(fam, Mixture) else 0.0
    res = Results("complementarity", ["n", "lambda", "oracle", "abs_diff", "bound"])
    worst, below = 0.0, False
    for n in numbers:
        lam = complementarity_probe(fam, arcs, [n], dim)
        oracle = max_psd_shift(eff, number_state(int(n), dim))
        diff = abs(lam - oracle)
        worst = max(worst, diff)
        below |= lam < bound - TOLERANCES["mixture_bound"]
        res.rows.append([int(n), lam, oracle, diff, bound])
    res.verdicts["oracle_agreement"] = worst <= TOLERANCES["wedge_oracle"]
    if isinstance(fam, Mixture):
        res.verdicts["mixture_bound"] = not below
    return res


def _state_and_family(cfg, rng):
    fam = _family(cfg)
    psi = parse_state(cfg.state, cfg.dim, rng)
    return fam, psi


def exp_density(cfg, rng):
    fam, psi = _state_and_family(cfg, rng)
    dist = phase_density(fam, psi, max(cfg.grid, 2 * psi.size))
    res = Results("density", ["theta", "g"], [[float(t), float(g)] for t, g in zip(dist.grid, dist.density)])
    res.verdicts = {
        "normalization": abs(float(np.mean(dist.density)) - 1) <= TOLERANCES["normalization"],
        "nonnegative": float(np.min(dist.density)) >= -TOLERANCES["nonnegativity"],
    }
    return res


def exp_variance(cfg, rng):
    fam, psi = _state_and_family(cfg, rng)
    rep = min_variance(phase_density(fam, psi, max(cfg.grid, 2 * psi.size)))
    _, var_n = number_stats(psi)
    res = Results("variance", ["VAR", "alpha_star", "beta_star", "VarN", "product"],
                  [[rep.VAR, rep.alpha_star, rep.beta_star, var_n, var_n * rep.VAR]])
    res.verdicts["levy_bounds"] = 0 <= rep.VAR <= math.pi**2 / 3 + 1e-9
    return res


def exp_uncertainty(cfg, rng):
    res = Results("uncertainty", ["z", "VarN", "VAR", "product"])
    devs = []
    for z in cfg.z_values:
        rep = uncertainty_product(float(z), cfg.grid)
        res.rows.append([float(z), rep.numberVar, rep.VAR, rep.product])
        devs.append(abs(rep.product - 0.25))
    res.verdicts["trend_to_quarter"] = all(b < a for a, b in zip(devs, devs[1:]))
    if cfg.z_values and float(cfg.z_values[-1]) >= 6:
        res.verdicts["within_10pct_at_largest_z"] = devs[-1] <= 0.1 * 0.25
    return res


def exp_norm_scan(cfg, rng):
    fam, arcs = _family(cfg), _arcs(cfg)
    rows = truncated_norms(fam, arcs, cfg.dims)
    norms = [r["norm"] for r in rows]
    res = Results("norm-scan", ["dim", "norm", "gap"], [[r["dim"], r["norm"], r["gap"]] for r in rows])
    res.verdicts["nondecreasing"] = all(b >= a - TOLERANCES["norm_slack"] for a, b in zip(norms, norms[1:]))
    return res


def exp_value_scan(cfg, rng):
    fam = _family(cfg)
    rows = value_comp_rows(fam, cfg.r_values, cfg.p, cfg.delta)
    res = Results("value-scan", ["r", "dim", "head_mass", "head_closed", "concentration"],
                  [[r["r"], r["dim"], r["head_mass"], r["head_closed"], r["concentration"]] for r in rows])
    heads = [r["head_mass"] for r in rows]
    conc = [r["concentration"] for r in rows]
    res.verdicts = {
        "head_closed_form": all(abs(r["head_mass"] - r["head_closed"]) <= TOLERANCES["head_mass"] for r in rows),
        "head_decreasing": all(b < a for a, b in zip(heads, heads[1:])),
        "concentration_increasing": all(b > a for a, b in zip(conc, conc[1:])),
    }
    return res


def exp_structure(cfg, rng):
    fam = _family(cfg)
    dim = _dim(cfg, 64)
    rep = structure_flags(fam, dim)
    gram = validate_gram(fam, dim)
    res = Results("structure",
                  ["dim", "is_strong", "is_modulus_one", "is_extremal_certified", "max_violation", "gram_violation",
                   "com_ne_size"],
                  [[dim, rep.is_strong, rep.is_modulus_one, rep.is_extremal_certified, rep.max_violation, gram,
                    len(com_ne_set(fam, dim))]])
    res.verdicts = {
        "valid_phase_matrix": gram <= TOLERANCES["gram"],
        "modulus_one_implies_extremal": (not rep.is_modulus_one) or rep.is_extremal_certified,
    }
    return res


def exp_acceptance(cfg, rng):
    selected = checks.CRITERIA if cfg.criteria is None else [checks.CRITERIA[int(i) - 1] for i in cfg.criteria]
    res = Results("acceptance", ["criterion", "name", "passed", "detail"])
    for fn in selected:
        out = fn()
        res.rows.append([out.number, out.name, out.passed, out.detail])
        res.verdicts[f"c{out.number:02d}"] = out.passed
        res.extra[f"c{out.number:02d}_seconds"] = out.seconds
    return res


EXPERIMENTS = {
    "effect": exp_effect,
    "spectrum": exp_spectrum,
    "covariance": exp_covariance,
    "commute": exp_commute,
    "complementarity": exp_complementarity,
    "density": exp_density,
    "variance": exp_variance,
    "uncertainty": exp_uncertainty,
    "norm-scan": exp_norm_scan,
    "value-scan": exp_value_scan,
    "structure": exp_structure,
    "acceptance": exp_acceptance,
}


def run_experiment(cfg: ExperimentConfig):
    """Execute one experiment and write its report; returns ``(results, paths)``."""
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; choose from {sorted(EXPERIMENTS)}")
    if cfg.experiment not in ("uncertainty", "acceptance"):
        fam = _family(cfg)
        check_dim = max([cfg.dim or 16] + [int(d) for d in cfg.dims if cfg.experiment == "norm-scan"])
        violation = validate_gram(fam, min(check_dim, 512))
        if violation > GRAM_TOL:
            raise ConfigError(f"family fails the phase-matrix check: violation {violation:.3e}")
    rng = np.random.default_rng(cfg.seed)
    start = time.perf_counter()
    results = EXPERIMENTS[cfg.experiment](cfg, rng)
    elapsed = time.perf_counter() - start
    paths = emit_report(results, cfg.out, cfg.format, cfg.to_json(), elapsed, TOLERANCES)
    return results, paths


# -- command line ---------------------------------------------------------------

def _json_arg(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasekit", description=__doc__.splitlines()[0])
    parser.add_argument("experiment", choices=sorted(EXPERIMENTS))
    parser.add_argument("--config", help="JSON config file; its values override flags")
    parser.add_argument("--family", help="family name (canonical, trivial, groundstate) or JSON descriptor")
    parser.add_argument("--arcs", type=_json_arg, help="JSON list of [a, b] arcs in radians")
    parser.add_argument("--dim", type=int)
    parser.add_argument("--dims", type=_json_arg, help="JSON list of dimensions (norm-scan)")
    parser.add_argument("--dim-big", type=int, dest="dim_big")
    parser.add_argument("--grid", type=int)
    parser.add_argument("--state", help="number:n | coherent:z | geometric:r | random | JSON coefficients")
    parser.add_argument("--numbers", type=_json_arg)
    parser.add_argument("--shift", type=float)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--r-values", type=_json_arg, dest="r_values")
    parser.add_argument("--z-values", type=_json_arg, dest="z_values")
    parser.add_argument("--p", type=int)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--criteria", type=_json_arg, help="JSON list of acceptance criterion numbers")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out")
    parser.add_argument("--format", choices=["csv", "json"])
    return parser


def config_from_args(args) -> ExperimentConfig:
    values = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    if args.config:
        try:
            with open(args.config) as fh:
                values.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        values["experiment"] = values.get("experiment", args.experiment)
    return ExperimentConfig.from_dict(values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        results, paths = run_experiment(cfg)
    except GuardError as exc:
        print(f"phasekit: numerical guard violated: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (PhasekitError, ValueError, TypeError) as exc:
        print(f"phasekit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name, ok in results.verdicts.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"wrote {', '.join(str(p) for p in paths)}")
    return EXIT_OK if results.passed else EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
