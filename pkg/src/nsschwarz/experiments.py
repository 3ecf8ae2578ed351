"""Batch driver for the Schwarz experiment suite.

Each test is the problem ``-u'' + (b u)' + u = f`` on (0, 1) with one of the
convection strengths in ``TESTS``. ``run_test`` produces one ``TableRow`` per
subdomain count, ``sweep_hH`` the grid of additive condition numbers over
fine/coarse mesh pairs, and ``emit_spectrum`` eigenvalue CSVs.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import condition_number_a, condition_number_2, elman_constants, operator_a_norm
from .decomposition import two_level
from .dg import ProblemConfig, assemble
from .errors import ConfigError, Divergence, SchwarzError
from .krylov import gmres, multiplicative_iterate, preconditioned_solve
from .linalg import eigenvalues, lu_factor
from .schwarz import SchwarzOperators

log = logging.getLogger(__name__)

TESTS = {"test1": 1_000.0, "test2": 2_000.0, "test3": 10_000.0, "test4": 100_000.0}

PROFILES = {
    "desk": {"h_inv": 64, "H_inv": 16, "J_list": [4, 8, 16]},
    "paper": {"h_inv": 256, "H_inv": 64, "J_list": [4, 8, 16, 32, 64]},
}

#: (1/h values, 1/H values) for the mesh sweeps at J = 4 and J = 8
SWEEP_GRIDS = {4: ([16, 32, 64, 128], [4, 8, 16]), 8: ([32, 64, 128, 256], [8, 16, 32])}

DEFAULT_DEGREE = 2
DEFAULT_SOURCE = "boundary-layer"


def test_problem(test_id: str, **overrides) -> ProblemConfig:
    if test_id not in TESTS:
        raise ConfigError(f"unknown test {test_id!r}; known: {sorted(TESTS)} or 'custom'")
    params = dict(epsilon=1.0, b=TESTS[test_id], gamma=1.0, degree_r=DEFAULT_DEGREE,
                  source=DEFAULT_SOURCE)
    params.update({k: v for k, v in overrides.items() if v is not None})
    return ProblemConfig(**params)


@dataclass
class ExperimentConfig:
    problem: ProblemConfig = field(default_factory=lambda: test_problem("test1"))
    h_inv: int = 64
    H_inv: int = 16
    J_list: list[int] = field(default_factory=lambda: [4, 8, 16])
    alpha: float = 1.0
    gmres_tol: float = 1e-8
    gmres_max_iter: int = 1000
    mult_tol: float = 1e-8
    outputs: str = "results"
    seed: int = 0

    def __post_init__(self):
        self.J_list = [int(J) for J in self.J_list]
        if not 0.0 < self.gmres_tol < 1.0:
            raise ConfigError(f"gmres_tol must lie in (0, 1), got {self.gmres_tol}")
        if self.h_inv < 1 or self.H_inv < 1 or self.h_inv % self.H_inv:
            raise ConfigError(f"1/H = {self.H_inv} must divide 1/h = {self.h_inv}")
        bad = [J for J in self.J_list if J < 1 or self.H_inv % J]
        if bad:
            raise ConfigError(f"J values {bad} do not divide 1/H = {self.H_inv}")
        if self.alpha < 0:
            raise ConfigError("alpha must be nonnegative")

    @classmethod
    def for_profile(cls, profile: str, problem: ProblemConfig, **overrides):
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile {profile!r}; known: {sorted(PROFILES)}")
        params = dict(PROFILES[profile])
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(problem=problem, **params)


_PROBLEM_KEYS = {f.name for f in dataclasses.fields(ProblemConfig)}
_EXPERIMENT_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def load_config(source, test_id: str | None = None) -> ExperimentConfig:
    """Parse a JSON experiment config (path, JSON text or dict); unknown keys are rejected.

    ``problem`` may be omitted when ``test_id`` names a built-in test; keys
    given under ``problem`` override that test's coefficients.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = Path(source).read_text() if Path(str(source)).exists() else str(source)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    prob = doc.get("problem", {})
    if not isinstance(prob, dict):
        raise ConfigError("'problem' must be an object")
    unknown = set(prob) - _PROBLEM_KEYS
    if unknown:
        raise ConfigError(f"unknown problem keys: {sorted(unknown)}")
    if "domain" in prob:
        prob = dict(prob, domain=tuple(prob["domain"]))
    try:
        if test_id and test_id != "custom":
            problem = test_problem(test_id, **prob)
        else:
            params = dict(epsilon=1.0, gamma=1.0, degree_r=DEFAULT_DEGREE, source=DEFAULT_SOURCE)
            params.update(prob)
            problem = ProblemConfig(**params)
        rest = {k: v for k, v in doc.items() if k != "problem"}
        return ExperimentConfig(problem=problem, **rest)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class TableRow:
    J: int
    gmres_iters_none: int
    gmres_iters_ad: int
    gmres_iters_hy: int
    mult_iters: int
    mult_converged: bool
    kappa_A_none: float
    kappa_A_ad: float
    kappa_A_hy: float
    E_mu_norm_A: float
    rho_E_mu: float
    c_p_ad: float
    c_p_hy: float
    gmres_converged: bool
    wall_times: dict = field(default_factory=dict, compare=False)

    CSV_FIELDS = ("J", "gmres_iters_none", "gmres_iters_ad", "gmres_iters_hy", "mult_iters",
                  "mult_converged", "kappa_A_none", "kappa_A_ad", "kappa_A_hy",
                  "E_mu_norm_A", "rho_E_mu", "c_p_ad", "c_p_hy", "gmres_converged")

    def to_record(self) -> dict[str, str]:
        out = {}
        for name in self.CSV_FIELDS:
            v = getattr(self, name)
            out[name] = str(bool(v)).lower() if isinstance(v, (bool, np.bool_)) else (
                repr(float(v)) if isinstance(v, float) else str(v))
        return out

    @classmethod
    def from_record(cls, rec: dict[str, str]) -> "TableRow":
        kw = {}
        for f in dataclasses.fields(cls):
            if f.name == "wall_times":
                continue
            raw = rec[f.name]
            if f.type in ("bool", bool):
                if raw not in ("true", "false"):
                    raise ValueError(f"bad boolean {raw!r} for {f.name}")
                kw[f.name] = raw == "true"
            elif f.type in ("int", int):
                kw[f.name] = int(raw)
            else:
                kw[f.name] = float(raw)
        return cls(**kw)


def write_csv(path, fieldnames, records):
    """UTF-8, RFC 4180 quoting, LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames), lineterminator="\n",
                                quoting=csv.QUOTE_MINIMAL)
        writer.writeheader()
        for rec in records:
            writer.writerow(rec)
    return path


def read_rows(path) -> list[TableRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [TableRow.from_record(rec) for rec in csv.DictReader(fh)]


@dataclass
class _Baseline:
    system: object
    A_factors: object
    gmres_iters: int
    kappa: float
    seconds: float


def _baseline(cfg: ExperimentConfig) -> _Baseline:
    t0 = time.perf_counter()
    system = assemble(cfg.problem, cfg.h_inv)
    _, stats = gmres(system.A, system.f, cfg.gmres_tol, cfg.gmres_max_iter)
    return _Baseline(system, lu_factor(system.A), stats.iterations,
                     condition_number_2(system.A), time.perf_counter() - t0)


def table_row(cfg: ExperimentConfig, base: _Baseline, J: int) -> TableRow:
    """All measurements for one subdomain count."""
    A, f, space = base.system.A, base.system.f, base.system.space
    F = base.A_factors
    times = {}
    ops = SchwarzOperators(A, two_level(A, space, cfg.H_inv, J), alpha=cfg.alpha)

    t0 = time.perf_counter()
    _, st_ad = preconditioned_solve(A, ops.apply_B, f, cfg.gmres_tol, cfg.gmres_max_iter)
    times["gmres_ad"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    _, st_hy = preconditioned_solve(A, ops.apply_B_hy, f, cfg.gmres_tol, cfg.gmres_max_iter)
    times["gmres_hy"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    try:
        _, st_mu = multiplicative_iterate(ops, f, cfg.mult_tol, cfg.gmres_max_iter)
        mult_iters, mult_ok = st_mu.iterations, st_mu.converged
    except Divergence as exc:
        log.warning("multiplicative iteration diverged for J=%d after %d sweeps",
                    J, exc.stats.iterations)
        mult_iters, mult_ok = exc.stats.iterations, False
    times["multiplicative"] = time.perf_counter() - t0

    P_ad = ops.additive[0]
    P_hy = ops.hybrid[0]
    E = ops.E_mu
    return TableRow(
        J=J,
        gmres_iters_none=base.gmres_iters,
        gmres_iters_ad=st_ad.iterations,
        gmres_iters_hy=st_hy.iterations,
        mult_iters=mult_iters,
        mult_converged=mult_ok,
        kappa_A_none=base.kappa,
        kappa_A_ad=condition_number_a(A, P_ad, F),
        kappa_A_hy=condition_number_a(A, P_hy, F),
        E_mu_norm_A=operator_a_norm(A, E, F),
        rho_E_mu=eigenvalues(E).spectral_radius,
        c_p_ad=elman_constants(P_ad).c_p,
        c_p_hy=elman_constants(P_hy).c_p,
        gmres_converged=bool(st_ad.converged and st_hy.converged),
        wall_times=times,
    )


def run_test(cfg: ExperimentConfig, test_id: str = "custom", write=True) -> list[TableRow]:
    """One row per J; a failing row is logged and skipped."""
    base = _baseline(cfg)
    rows = []
    for J in cfg.J_list:
        try:
            rows.append(table_row(cfg, base, J))
        except SchwarzError as exc:
            log.error("%s J=%d failed: %s", test_id, J, exc)
    if write:
        out = Path(cfg.outputs)
        write_csv(out / f"{test_id}.csv", TableRow.CSV_FIELDS, [r.to_record() for r in rows])
        timing = [{"J": "NA", "method": "gmres_none", "seconds": repr(base.seconds)}]
        for r in rows:
            timing += [{"J": str(r.J), "method": k, "seconds": repr(v)}
                       for k, v in r.wall_times.items()]
        write_csv(out / f"{test_id}_times.csv", ("J", "method", "seconds"), timing)
    return rows


def kappa_ad(problem: ProblemConfig, h_inv: int, H_inv: int, J: int) -> float:
    system = assemble(problem, h_inv)
    A = system.A
    ops = SchwarzOperators(A, two_level(A, system.space, H_inv, J))
    return condition_number_a(A, ops.additive[0])


def sweep_hH(cfg: ExperimentConfig, test_id: str = "custom", J: int = 4,
             h_invs=None, H_invs=None, write=True) -> np.ndarray:
    """kappa_A(P_ad) on a grid; rows are 1/H, columns 1/h; NaN marks non-nested cells."""
    default_h, default_H = SWEEP_GRIDS.get(J, ([cfg.h_inv], [cfg.H_inv]))
    h_invs = list(h_invs or default_h)
    H_invs = list(H_invs or default_H)
    grid = np.full((len(H_invs), len(h_invs)), np.nan)
    for a, Hi in enumerate(H_invs):
        for c, hi in enumerate(h_invs):
            if hi % Hi or Hi % J:
                continue
            grid[a, c] = kappa_ad(cfg.problem, hi, Hi, J)
    if write:
        recs = []
        for a, Hi in enumerate(H_invs):
            rec = {"H_inv": str(Hi)}
            rec.update({str(hi): ("nan" if math.isnan(grid[a, c]) else repr(float(grid[a, c])))
                        for c, hi in enumerate(h_invs)})
            recs.append(rec)
        write_csv(Path(cfg.outputs) / f"{test_id}_sweep_J{J}.csv",
                  ["H_inv"] + [str(h) for h in h_invs], recs)
    return grid


ALPHAS = (0.25, 0.5, 1.0, 2.0)


def alpha_sweep(cfg: ExperimentConfig, test_id: str = "custom", J: int = 4,
                alphas=ALPHAS, write=True) -> list[dict]:
    """Hybrid GMRES iterations and kappa_A(P_hy) for several relaxation parameters."""
    if J < 1 or cfg.H_inv % J:
        raise ConfigError(f"J = {J} does not divide 1/H = {cfg.H_inv}")
    system = assemble(cfg.problem, cfg.h_inv)
    A, f = system.A, system.f
    dec = two_level(A, system.space, cfg.H_inv, J)
    F = lu_factor(A)
    out = []
    for a in alphas:
        ops = SchwarzOperators(A, dec, alpha=a)
        _, st = preconditioned_solve(A, ops.apply_B_hy, f, cfg.gmres_tol, cfg.gmres_max_iter)
        P_hy = ops.hybrid[0]
        out.append({"alpha": float(a), "gmres_iters_hy": st.iterations,
                    "converged": bool(st.converged),
                    "kappa_A_hy": condition_number_a(A, P_hy, F),
                    "c_p_hy": elman_constants(P_hy).c_p})
    if write:
        recs = [{k: (str(v).lower() if isinstance(v, bool) else
                     repr(v) if isinstance(v, float) else str(v)) for k, v in row.items()}
                for row in out]
        write_csv(Path(cfg.outputs) / f"{test_id}_alpha_J{J}.csv",
                  ("alpha", "gmres_iters_hy", "converged", "kappa_A_hy", "c_p_hy"), recs)
    return out


def emit_spectrum(cfg: ExperimentConfig, test_id: str = "custom", J_list=None,
                  write=True) -> dict:
    """Eigenvalues of A and of P_ad for each J, plus a diameter/rho summary."""
    system = assemble(cfg.problem, cfg.h_inv)
    A = system.A
    spectra = {"A": eigenvalues(A)}
    for J in J_list or cfg.J_list:
        ops = SchwarzOperators(A, two_level(A, system.space, cfg.H_inv, J), alpha=cfg.alpha)
        spectra[f"P_ad_J{J}"] = eigenvalues(ops.additive[0])
    if write:
        out = Path(cfg.outputs)
        summary = []
        for name, spec in spectra.items():
            write_csv(out / f"{test_id}_spectrum_{name}.csv", ("re", "im"),
                      [{"re": repr(float(z.real)), "im": repr(float(z.imag))}
                       for z in spec.eigenvalues])
            summary.append({"operator": name, "n": str(len(spec)),
                            "diameter": repr(spec.diameter),
                            "spectral_radius": repr(spec.spectral_radius)})
        write_csv(out / f"{test_id}_spectrum_summary.csv",
                  ("operator", "n", "diameter", "spectral_radius"), summary)
    return spectra


def rows_to_text(rows: list[TableRow]) -> str:
    buf = io.StringIO()
    buf.write(f"{'J':>4} {'it_none':>7} {'it_ad':>5} {'it_hy':>5} {'mult':>5} "
              f"{'kA(P_ad)':>10} {'kA(P_hy)':>10} {'|E_mu|_A':>9} {'rho(E_mu)':>10} "
              f"{'c_p(P_ad)':>9}\n")
    for r in rows:
        mult = str(r.mult_iters) if r.mult_converged else f"{r.mult_iters}!"
        buf.write(f"{r.J:>4} {r.gmres_iters_none:>7} {r.gmres_iters_ad:>5} "
                  f"{r.gmres_iters_hy:>5} {mult:>5} {r.kappa_A_ad:>10.4g} "
                  f"{r.kappa_A_hy:>10.4g} {r.E_mu_norm_A:>9.4g} {r.rho_E_mu:>10.4g} "
                  f"{r.c_p_ad:>9.3g}\n")
    return buf.getvalue()
