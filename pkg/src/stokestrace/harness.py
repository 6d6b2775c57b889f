"""Deterministic generators, experiment configuration and verification
suites.

Random draws come from :func:`stokestrace.rng.stream`, one named stream per
``(seed, purpose)``, so every record in a report is reproducible from its
seed alone.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .berg import BergDiagnostics, BergSequence, OrthonormalBasis, berg_diagnostics
from .exceptions import DomainError
from .fields import ScalarField2D
from .linalg import CommutingTuple, commuting_tuple, eigh, operator_norm
from .rng import complex_gaussian, haar_unitary, stream
from .spectral import dyadic_floor_form, dyadic_partial_sum
from .trace_formula import (
    AntiderivativePair,
    PerturbedSystem,
    antiderivatives_from_psi,
    berg_reduction_experiment,
    lhs_closed_form_poly,
    lhs_spectral_integral,
    psi_from_polynomials,
    rhs_divided_difference,
    rhs_xi_integral,
    xi_field,
)

__all__ = [
    "SPECTRUM_LAWS",
    "SUITES",
    "SCHEMA_VERSION",
    "ExperimentConfig",
    "Report",
    "sample_spectrum",
    "gen_commuting_pair",
    "gen_perturbed_system",
    "gen_unit_operator",
    "random_polynomial",
    "run_suite",
    "trace_identity_case",
    "mu_convergence_case",
]

SCHEMA_VERSION = 1
SPECTRUM_LAWS = ("uniform", "dyadic-rational", "clustered")
SUITES = ("dyadic", "berg", "trace-identity", "mu-convergence")
DYADIC_DENOMINATOR = 2 ** 10


# -- generators --------------------------------------------------------------


def sample_spectrum(rng: np.random.Generator, dim: int, law: str, interval) -> np.ndarray:
    """``dim`` eigenvalues in ``[a, b]`` drawn according to ``law``.

    ``uniform``: i.i.d. uniform; ``dyadic-rational``: uniform over the
    multiples of ``2^-10`` in ``[a, b]``; ``clustered``: three centres with
    jitter of ``1e-3 (b - a)``.
    """
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise DomainError(f"interval must satisfy a < b, got [{a}, {b}]")
    if law == "uniform":
        return rng.uniform(a, b, dim)
    if law == "dyadic-rational":
        lo = math.ceil(a * DYADIC_DENOMINATOR)
        hi = math.floor(b * DYADIC_DENOMINATOR)
        return rng.integers(lo, hi + 1, dim) / DYADIC_DENOMINATOR
    if law == "clustered":
        w = 1e-3 * (b - a)
        centres = rng.uniform(a + w, b - w, 3)
        vals = centres[rng.integers(0, 3, dim)] + rng.uniform(-w, w, dim)
        return np.clip(vals, a, b)
    raise DomainError(f"unknown spectrum law {law!r}; expected one of {SPECTRUM_LAWS}")


def _pair_from(u: np.ndarray, d1: np.ndarray, d2: np.ndarray) -> CommutingTuple:
    uh = u.conj().T
    m1 = (u * d1) @ uh
    m2 = (u * d2) @ uh
    return commuting_tuple([0.5 * (m1 + m1.conj().T), 0.5 * (m2 + m2.conj().T)])


def gen_commuting_pair(seed: int, dim: int, spectrum_law: str = "uniform", interval=(-1.0, 1.0)) -> CommutingTuple:
    """``(U diag(d1) U*, U diag(d2) U*)`` with a seeded Haar unitary ``U``."""
    if dim < 1:
        raise DomainError("dim must be at least 1")
    rng = stream(seed, "commuting-pair")
    u = haar_unitary(rng, dim)
    d1 = sample_spectrum(rng, dim, spectrum_law, interval)
    d2 = sample_spectrum(rng, dim, spectrum_law, interval)
    return _pair_from(u, d1, d2)


def gen_unit_operator(seed: int, dim: int, spectrum_law: str = "uniform") -> np.ndarray:
    """Hermitian ``0 <= A <= I`` with spectrum drawn on ``[0, 1]``."""
    rng = stream(seed, "unit-operator")
    u = haar_unitary(rng, dim)
    d = sample_spectrum(rng, dim, spectrum_law, (0.0, 1.0))
    m = (u * d) @ u.conj().T
    return 0.5 * (m + m.conj().T)


def gen_perturbed_system(seed: int, dim: int, eps: float, interval=(-1.0, 1.0),
                         spectrum_law: str = "uniform") -> PerturbedSystem:
    """Two commuting pairs, the second a perturbation of the first.

    The unperturbed pair is ``U0 diag(d) U0*``.  The perturbed pair uses
    ``U1 = U0 expm(eps K)`` for a random anti-Hermitian ``K`` of unit norm
    and spectra ``(1 - t) d + t d'`` with ``t = 1 - exp(-eps)``, where
    ``d'`` are independent draws.  ``eps = 0`` gives identical pairs;
    ``eps = inf`` gives an independent Haar unitary and spectra ``d'``.
    """
    if not eps >= 0:
        raise DomainError(f"perturbation scale must be nonnegative, got {eps}")
    rng = stream(seed, "perturbed-system")
    u0 = haar_unitary(rng, dim)
    d1 = sample_spectrum(rng, dim, spectrum_law, interval)
    d2 = sample_spectrum(rng, dim, spectrum_law, interval)
    e1 = sample_spectrum(rng, dim, spectrum_law, interval)
    e2 = sample_spectrum(rng, dim, spectrum_law, interval)
    g = complex_gaussian(rng, (dim, dim))
    k = g - g.conj().T
    k = k / max(operator_norm(k), 1e-300)
    u_indep = haar_unitary(rng, dim)
    if math.isinf(eps):
        u1, t = u_indep, 1.0
    else:
        u1, t = u0 @ expm(eps * k), -math.expm1(-eps)
    if spectrum_law == "dyadic-rational" and 0 < t < 1:
        # stay on the dyadic grid
        q1 = np.round(((1 - t) * d1 + t * e1) * DYADIC_DENOMINATOR) / DYADIC_DENOMINATOR
        q2 = np.round(((1 - t) * d2 + t * e2) * DYADIC_DENOMINATOR) / DYADIC_DENOMINATOR
    else:
        q1, q2 = (1 - t) * d1 + t * e1, (1 - t) * d2 + t * e2
    return PerturbedSystem(_pair_from(u0, d1, d2), _pair_from(u1, q1, q2), interval=interval)


def random_polynomial(rng: np.random.Generator, degree: int, complex_coeffs: bool = True) -> np.ndarray:
    """Coefficients ``c[i, j]`` with ``i + j <= degree``, standard normal."""
    c = np.zeros((degree + 1, degree + 1), dtype=complex)
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            c[i, j] = rng.standard_normal() + (1j * rng.standard_normal() if complex_coeffs else 0.0)
    return c


# -- configuration -----------------------------------------------------------

_SUITE_DEFAULTS = {
    "dyadic": {"cases": 50, "dim": 32, "K_list": [5, 10, 20, 40]},
    "berg": {"cases": 5, "dim": 128, "p_list": [2.0]},
    "trace-identity": {"cases": 20, "dim": 8, "degree": 4, "eps": 0.5},
    "mu-convergence": {"cases": 3, "dim": 64, "degree": 3, "eps": 0.5},
}

DEFAULT_TOLERANCES = {
    "relative": 1e-8,
    "absolute": 1e-10,
    "floor_form": 1e-12,
    "projection": 1e-10,
    "commutator": 1e-10,
    "monotone": 1e-10,
    "mu_final": 1e-6,
    "mu_slack": 1e-12,
    "zero": 1e-12,
}


@dataclass
class ExperimentConfig:
    """Settings of one suite run.

    ``dim`` is the ambient dimension (for ``dyadic`` the largest sampled
    dimension, which is drawn from ``4..dim``); ``N_list`` defaults to all
    levels up to saturation (``berg``) or up to ``dim`` (``mu-convergence``).
    Past saturation the mu error decays like ``2^-N``, so the ``mu_final``
    tolerance needs ``max(N_list)`` of roughly 25 or more.
    """

    suite: str = "trace-identity"
    seed: int = 0
    cases: int = 20
    dim: int = 8
    n: int = 2
    spectrum_law: str = "uniform"
    interval: list = field(default_factory=lambda: [-1.0, 1.0])
    eps: float = 0.5
    degree: int = 4
    K_list: list = field(default_factory=lambda: [5, 10, 20, 40])
    N_list: Optional[list] = None
    p_list: list = field(default_factory=lambda: [2.0])
    basis: str = "standard"
    k_cut: int = 50
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out: str = "out"
    fixed_clock: bool = False
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        self.validate()

    @classmethod
    def for_suite(cls, suite: str, **overrides) -> "ExperimentConfig":
        if suite not in SUITES:
            raise DomainError(f"unknown suite {suite!r}; expected one of {SUITES}")
        params = dict(_SUITE_DEFAULTS[suite])
        if suite in ("dyadic", "berg"):
            params.setdefault("interval", [0.0, 1.0])
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(suite=suite, **params)

    def validate(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise DomainError(f"unsupported config schema version {self.schema_version}")
        if self.suite not in SUITES:
            raise DomainError(f"unknown suite {self.suite!r}")
        if self.spectrum_law not in SPECTRUM_LAWS:
            raise DomainError(f"unknown spectrum law {self.spectrum_law!r}")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.cases < 1 or self.dim < 1 or self.n < 1:
            raise DomainError("cases, dim and n must be positive")
        if len(self.interval) != 2 or not self.interval[0] < self.interval[1]:
            raise DomainError(f"invalid interval {self.interval}")
        if not self.eps >= 0:
            raise DomainError("eps must be nonnegative")
        if self.degree < 0 or any(int(k) < 1 for k in self.K_list) or self.k_cut < 1:
            raise DomainError("degrees and levels must be nonnegative / positive")
        if self.N_list is not None and any(int(N) < 1 for N in self.N_list):
            raise DomainError("N_list entries must be positive")
        if any(p < 1 for p in self.p_list):
            raise DomainError("Schatten indices must be >= 1")
        if self.basis not in ("standard", "seeded-random"):
            raise DomainError(f"unknown basis {self.basis!r}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise DomainError(f"unknown tolerance keys {sorted(unknown)}")

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise DomainError(f"unknown config keys {sorted(extra)}")
        return cls(**data)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())


# -- reports -----------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


@dataclass
class Report:
    """Per-case records plus a summary; ``passed`` iff every record passes."""

    suite: str
    config: dict
    records: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    runtime: float = 0.0
    generated_at: str = ""

    def add(self, seed: int, case: str, check: str, passed: bool, **values) -> None:
        self.records.append({"seed": int(seed), "case": case, "check": check, "passed": bool(passed), **values})

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.records)

    def first_failure(self) -> Optional[dict]:
        for r in self.records:
            if not r["passed"]:
                return r
        return None

    def summary(self) -> dict:
        devs = [r["deviation"] for r in self.records if isinstance(r.get("deviation"), float)]
        checks: dict = {}
        for r in self.records:
            c = checks.setdefault(r["check"], {"passed": 0, "failed": 0})
            c["passed" if r["passed"] else "failed"] += 1
        return {
            "records": len(self.records),
            "passed": sum(r["passed"] for r in self.records),
            "failed": sum(not r["passed"] for r in self.records),
            "max_deviation": max(devs) if devs else 0.0,
            "checks": checks,
            "all_passed": self.passed,
            "first_failure": self.first_failure(),
            "runtime_s": self.runtime,
        }

    def to_dict(self) -> dict:
        self.records.sort(key=lambda r: (r["seed"], r["case"], r["check"]))
        return _jsonable({
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "generated_at": self.generated_at,
            "config": self.config,
            "summary": self.summary(),
            "records": self.records,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def write(self, out_dir) -> list:
        """Write ``report.json`` and any CSV tables; return the paths."""
        os.makedirs(out_dir, exist_ok=True)
        paths = [os.path.join(out_dir, "report.json")]
        with open(paths[0], "w") as fh:
            fh.write(self.to_json())
        for name, (header, rows) in self.tables.items():
            path = os.path.join(out_dir, name)
            _write_csv(path, header, rows)
            paths.append(path)
        return paths


def _csv_cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (complex, np.complexfloating)):
        return repr(complex(x))
    return str(x)


def _write_csv(path, header, rows):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_csv_cell(x) for x in r])


def _digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(np.asarray(a, dtype=complex)).tobytes())
    return h.hexdigest()[:16]


def _max_pairwise(values: dict, rel: float, absolute: float):
    """Largest relative pairwise deviation and whether every pair passes
    ``|u - v| <= max(rel * max(|u|, |v|), absolute)``."""
    names = list(values)
    worst, ok = 0.0, True
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            u, v = values[names[i]], values[names[j]]
            diff = abs(u - v)
            scale = max(abs(u), abs(v))
            if diff > max(rel * scale, absolute):
                ok = False
            if scale > 0:
                worst = max(worst, diff / scale)
    return worst, ok


# -- suites ------------------------------------------------------------------


def _suite_dyadic(cfg: ExperimentConfig, report: Report) -> None:
    for c in range(cfg.cases):
        seed = cfg.seed + c
        dim = int(stream(seed, "dim").integers(4, max(cfg.dim, 4) + 1))
        A = gen_unit_operator(seed, dim, cfg.spectrum_law)
        sd = eigh(A, interval=(0.0, 1.0))
        for K in cfg.K_list:
            K = int(K)
            S = dyadic_partial_sum(sd, K)
            err = operator_norm(A - S)
            report.add(seed, f"K={K}", "reconstruction", err <= 2.0 ** -K, dim=dim, error=err, bound=2.0 ** -K,
                       digest=_digest(A))
            dev = operator_norm(S - dyadic_floor_form(sd, K))
            report.add(seed, f"K={K}", "floor-form", dev <= cfg.tol("floor_form"), dim=dim, deviation=dev)


def _suite_berg(cfg: ExperimentConfig, report: Report) -> None:
    header = ["seed"] + list(BergDiagnostics.COLUMNS)
    rows = []
    tp, tc, tm = cfg.tol("projection"), cfg.tol("commutator"), cfg.tol("monotone")
    for c in range(cfg.cases):
        seed = cfg.seed + c
        t = gen_commuting_pair(seed, cfg.dim, cfg.spectrum_law, (0.0, 1.0))
        basis = (OrthonormalBasis.standard(cfg.dim) if cfg.basis == "standard"
                 else OrthonormalBasis.random(cfg.dim, seed))
        seq = BergSequence(t, basis, k_cut=cfg.k_cut, rescale=False)
        N_list = cfg.N_list or list(range(1, (seq.saturation_level() or cfg.k_cut) + 1))
        diag = berg_diagnostics(t, N_list=N_list, p_list=cfg.p_list, sequence=seq)
        for r in diag.rows:
            rows.append([seed] + [r[k] for k in BergDiagnostics.COLUMNS])
            case = f"N={r['N']},i={r['i']},p={r['p']}"
            report.add(seed, case, "dimension-bound", r["within_stated_bound"], dim=r["dim"], bound=r["stated_bound"])
            report.add(seed, case, "piece-bound", r["dim"] <= r["piece_bound"], dim=r["dim"], bound=r["piece_bound"])
            report.add(seed, case, "nesting", r["nesting_defect"] <= tp, deviation=r["nesting_defect"])
            report.add(seed, case, "b-commutation", r["max_b_commutator"] <= tc, deviation=r["max_b_commutator"])
            report.add(seed, case, "b-monotone", r["min_increment_eig"] >= -tm, value=r["min_increment_eig"])
            report.add(seed, case, "tail-bound", r["within_tail_bound"], error=r["approx_error"], bound=r["tail_bound"])
    report.tables["berg_diagnostics.csv"] = (header, rows)


def _case_polynomials(seed: int, degree: int, interval):
    rng = stream(seed, "polynomials")
    d1 = int(rng.integers(0, degree + 1))
    d2 = int(rng.integers(0, degree + 1))
    p1 = ScalarField2D.polynomial(random_polynomial(rng, d1), interval)
    p2 = ScalarField2D.polynomial(random_polynomial(rng, d2), interval)
    return p1, p2


def trace_identity_case(seed: int, dim: int, eps: float, degree: int, interval=(-1.0, 1.0),
                        spectrum_law: str = "uniform"):
    """All evaluation paths of the trace identity on one seeded case.

    Returns ``(values, xi)`` where ``values`` maps path names to complex
    results.
    """
    sys = gen_perturbed_system(seed, dim, eps, interval, spectrum_law)
    p1, p2 = _case_polynomials(seed, degree, interval)
    psi = psi_from_polynomials(p1, p2)
    two, four = lhs_spectral_integral(sys, AntiderivativePair(p1, p2, psi), return_forms=True)
    xi = xi_field(sys)
    values = {
        "closed_form": lhs_closed_form_poly(sys, p1, p2),
        "spectral_two_term": two,
        "spectral_four_term": four,
        "spectral_from_psi": lhs_spectral_integral(sys, antiderivatives_from_psi(psi)),
        "xi_integral": rhs_xi_integral(psi, xi),
        "divided_difference": rhs_divided_difference(psi, sys),
    }
    return values, xi


def _suite_trace_identity(cfg: ExperimentConfig, report: Report) -> None:
    rel, ab = cfg.tol("relative"), cfg.tol("absolute")
    last_xi = None
    for c in range(cfg.cases):
        seed = cfg.seed + c
        values, xi = trace_identity_case(seed, cfg.dim, cfg.eps, cfg.degree, tuple(cfg.interval), cfg.spectrum_law)
        dev, ok = _max_pairwise(values, rel, ab)
        if cfg.eps == 0:
            ok = ok and all(abs(v) <= cfg.tol("zero") for v in values.values())
        report.add(seed, "paths", "three-path", ok, deviation=dev, values=values)
        last_xi = xi
    if last_xi is not None:
        rows = []
        xb, yb = last_xi.x_breaks, last_xi.y_breaks
        for i in range(last_xi.values.shape[0]):
            for j in range(last_xi.values.shape[1]):
                rows.append([float(xb[i]), float(xb[i + 1]), float(yb[j]), float(yb[j + 1]), float(last_xi.values[i, j])])
        report.tables["xi_grid.csv"] = (["x_lo", "x_hi", "y_lo", "y_hi", "xi"], rows)


def mu_convergence_case(seed: int, dim: int, eps: float, degree: int, N_list=None, interval=(-1.0, 1.0),
                        spectrum_law: str = "uniform", k_cut: int = 50):
    """Berg reduction experiment for one seed with a standard and a seeded
    random basis; ``psi`` is a random polynomial of the given degree,
    ``p1 = 0`` and ``p2 = int_0^x psi``."""
    sys = gen_perturbed_system(seed, dim, eps, interval, spectrum_law)
    rng = stream(seed, "mu-psi")
    psi = ScalarField2D.polynomial(random_polynomial(rng, degree), interval)
    p1 = ScalarField2D.polynomial([[0.0]], interval)
    p2 = psi.antiderivative_x(0.0)
    bases = {"standard": OrthonormalBasis.standard(dim), "seeded-random": OrthonormalBasis.random(dim, seed)}
    N_list = list(N_list) if N_list else list(range(1, dim + 1))
    return berg_reduction_experiment(sys, bases, N_list, p1, p2, k_cut=k_cut)


def _suite_mu(cfg: ExperimentConfig, report: Report) -> None:
    header = ["seed", "basis", "N", "dim_P0", "dim_P", "integral_re", "integral_im", "error", "bound",
              "C1_N", "C2_N", "dev_V1", "dev_V2", "saturated"]
    rows = []
    for c in range(cfg.cases):
        seed = cfg.seed + c
        rep = mu_convergence_case(seed, cfg.dim, cfg.eps, cfg.degree, cfg.N_list, tuple(cfg.interval),
                                  cfg.spectrum_law, cfg.k_cut)
        for b in rep.bases():
            bound = rep.bound(b)
            for r in rep.rows(b):
                rows.append([seed, b, r["N"], r["dim_P0"], r["dim_P"], r["integral"].real, r["integral"].imag,
                             r["error"], bound, r["C1_N"], r["C2_N"], r["dev_V1"], r["dev_V2"], r["saturated"]])
                report.add(seed, f"{b},N={r['N']}", "uniform-bound", abs(r["integral"]) <= bound,
                           value=abs(r["integral"]), bound=bound)
                if cfg.eps == 0:
                    report.add(seed, f"{b},N={r['N']}", "zero", abs(r["integral"]) <= cfg.tol("zero"),
                               value=abs(r["integral"]))
            report.add(seed, b, "monotone", rep.monotone(b, cfg.tol("mu_slack")),
                       errors=[r["error"] for r in rep.rows(b)])
            if rep.conclusive(b):
                report.add(seed, b, "final-error", rep.final_error(b) <= cfg.tol("mu_final"),
                           error=rep.final_error(b), target=rep.target)
            else:
                report.add(seed, b, "final-error", True, inconclusive=True, error=rep.final_error(b))
        finals = {b: rep.rows(b)[-1]["integral"] for b in rep.bases()}
        spread = max(abs(u - v) for u in finals.values() for v in finals.values())
        report.add(seed, "bases", "basis-agreement (reported)", True, deviation=float(spread))
    report.tables["mu_convergence.csv"] = (header, rows)



_RUNNERS = {
    "dyadic": _suite_dyadic,
    "berg": _suite_berg,
    "trace-identity": _suite_trace_identity,
    "mu-convergence": _suite_mu,
}


def run_suite(config: ExperimentConfig, write: bool = True) -> Report:
    """Run the configured suite and (optionally) write its outputs to
    ``config.out``."""
    config.validate()
    report = Report(config.suite, asdict(config))
    start = time.perf_counter()
    _RUNNERS[config.suite](config, report)
    if config.fixed_clock:
        report.runtime = 0.0
        report.generated_at = "1970-01-01T00:00:00Z"
    else:
        report.runtime = time.perf_counter() - start
        report.generated_at = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    if write:
        report.write(config.out)
    return report
