"""Sweep engine for phase-diagram experiments.

A sweep enumerates the product of parameter axes (alpha, rho, P, sigma2, N),
runs `replicates` freshly generated instances per cell with per-cell seeds
derived from the base seed and the cell indices, and records one CSV row per
replicate.  Results depend only on (cell parameters, base_seed, replicate
index), never on execution order or worker count.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import GaussBernoulliPrior, GenerationConfig, UniformGainPrior, generate_instance
from .solver import DivergenceError, SolverConfig, run

__all__ = [
    "SweepSpec",
    "CellRow",
    "CellAggregate",
    "GridResult",
    "alpha_min",
    "measurement_count",
    "sparsity_count",
    "cell_seed",
    "run_sweep",
    "run_phase_diagram",
    "run_transition_profile",
    "run_sigma_p_diagram",
    "write_rows_csv",
    "read_rows_csv",
    "aggregate_rows",
]

CSV_HEADER = ("alpha", "rho", "P", "sigma2", "N", "seed", "mse_corr", "iterations", "converged")

# Floor applied inside log10 aggregation; an exactly-zero MSE would otherwise
# poison the cell mean with -inf.
LOG10_FLOOR = 1e-300

SOLVER_KEYS = (
    "damping",
    "crit_tol",
    "delta_reg",
    "stall_window",
    "max_iters",
    "inflation_factor",
    "gain_mode",
)

DEFAULT_INFLATION = 1.1


def alpha_min(P, rho):
    """Counting bound on the measurement rate; no finite bound for P = 1."""
    if P <= 1:
        return math.inf
    return P * rho / (P - 1)


def measurement_count(alpha, N):
    return int(round(alpha * N))


def sparsity_count(rho, N):
    return int(round(rho * N))


def cell_seed(base_seed, indices):
    """Derived integer seed for one replicate; stable across executions."""
    ss = np.random.SeedSequence([int(base_seed), *[int(i) for i in indices]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SweepSpec:
    alphas: tuple
    rhos: tuple
    Ps: tuple
    sigma2s: tuple
    Ns: tuple
    replicates: int = 5
    base_seed: int = 0
    solver: dict = field(default_factory=dict)
    success_threshold: float = 1e-8
    output: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "rhos", tuple(float(r) for r in self.rhos))
        object.__setattr__(self, "Ps", tuple(int(p) for p in self.Ps))
        object.__setattr__(self, "sigma2s", tuple(float(s) for s in self.sigma2s))
        object.__setattr__(self, "Ns", tuple(int(n) for n in self.Ns))
        if not all((self.alphas, self.rhos, self.Ps, self.sigma2s, self.Ns)):
            raise ValueError("every axis needs at least one value")
        if any(not 0.0 < r <= 1.0 for r in self.rhos):
            raise ValueError("rho values must be in (0, 1]")
        if any(a <= 0.0 for a in self.alphas):
            raise ValueError("alpha values must be > 0")
        if any(p < 1 for p in self.Ps):
            raise ValueError("P values must be >= 1")
        if any(s < 0.0 for s in self.sigma2s):
            raise ValueError("sigma2 values must be >= 0")
        if any(n < 16 for n in self.Ns):
            raise ValueError("N values must be >= 16")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be >= 0")
        if self.success_threshold <= 0.0:
            raise ValueError("success_threshold must be > 0")
        for a in self.alphas:
            for n in self.Ns:
                if measurement_count(a, n) < 1:
                    raise ValueError(f"alpha={a}, N={n} gives M < 1")
        unknown = set(self.solver) - set(SOLVER_KEYS)
        if unknown:
            raise ValueError(f"unknown solver keys: {sorted(unknown)}")

    def to_dict(self):
        return {
            "axes": {
                "alpha": list(self.alphas),
                "rho": list(self.rhos),
                "P": list(self.Ps),
                "sigma2": list(self.sigma2s),
                "N": list(self.Ns),
            },
            "replicates": self.replicates,
            "base_seed": self.base_seed,
            "solver": dict(self.solver),
            "success_threshold": self.success_threshold,
        }

    @classmethod
    def from_dict(cls, d):
        axes = d["axes"]
        return cls(
            alphas=axes["alpha"],
            rhos=axes["rho"],
            Ps=axes["P"],
            sigma2s=axes["sigma2"],
            Ns=axes["N"],
            replicates=int(d.get("replicates", 5)),
            base_seed=int(d.get("base_seed", 0)),
            solver=dict(d.get("solver", {})),
            success_threshold=float(d.get("success_threshold", 1e-8)),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass
class CellRow:
    alpha: float
    rho: float
    P: int
    sigma2: float
    N: int
    seed: int
    mse_corr: float
    iterations: int
    status: str

    def cell_key(self):
        return (self.alpha, self.rho, self.P, self.sigma2, self.N)


@dataclass
class CellAggregate:
    alpha: float
    rho: float
    P: int
    sigma2: float
    N: int
    alpha_min: float
    n_rows: int
    mean_log10_mse: float
    success_rate: float
    mean_iterations_success: float


@dataclass
class GridResult:
    spec: SweepSpec
    rows: list
    aggregates: list

    def to_csv(self, path):
        write_rows_csv(self.rows, path)


def _solver_config_for_cell(rho, sigma2, solver_overrides):
    opts = dict(solver_overrides)
    inflation = float(opts.pop("inflation_factor", DEFAULT_INFLATION))
    gain_mode = opts.pop("gain_mode", "blind")
    return SolverConfig(
        assumed_signal_prior=GaussBernoulliPrior(rho=rho),
        assumed_gain_prior=UniformGainPrior(center=1.0, variance=inflation * sigma2),
        gain_mode=gain_mode,
        **opts,
    )


def run_cell_replicate(alpha, rho, P, sigma2, N, seed, solver_overrides):
    """Generate one noiseless instance from `seed`, solve it, return a row.

    Solver divergence is recorded as a failed row (mse_corr = inf), not raised.
    """
    config = GenerationConfig(
        N=N,
        M=measurement_count(alpha, N),
        P=P,
        signal_prior=GaussBernoulliPrior(rho=rho),
        gain_prior=UniformGainPrior(center=1.0, variance=sigma2),
        delta=0.0,
        seed=seed,
    )
    instance = generate_instance(config)
    solver_config = _solver_config_for_cell(rho, sigma2, solver_overrides)
    try:
        result = run(instance, solver_config)
        mse, iterations, status = result.mse_corr, result.iterations, result.status
    except DivergenceError as err:
        mse, iterations, status = math.inf, err.iteration, "diverged"
    return CellRow(
        alpha=alpha, rho=rho, P=P, sigma2=sigma2, N=N,
        seed=seed, mse_corr=mse, iterations=iterations, status=status,
    )


def iter_cells(spec):
    """Yield (indices, parameters) for every replicate in deterministic order."""
    for ia, alpha in enumerate(spec.alphas):
        for ir, rho in enumerate(spec.rhos):
            for ip, P in enumerate(spec.Ps):
                for isig, sigma2 in enumerate(spec.sigma2s):
                    for inn, N in enumerate(spec.Ns):
                        for rep in range(spec.replicates):
                            yield (ia, ir, ip, isig, inn, rep), (alpha, rho, P, sigma2, N)


def aggregate_rows(rows, success_threshold):
    """Per-cell aggregates, recomputable exactly from the rows."""
    order = []
    groups = {}
    for row in rows:
        key = row.cell_key()
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    out = []
    for key in order:
        alpha, rho, P, sigma2, N = key
        cell = groups[key]
        logs = [math.log10(max(r.mse_corr, LOG10_FLOOR)) for r in cell]
        wins = [r.mse_corr < success_threshold for r in cell]
        it_ok = [r.iterations for r, w in zip(cell, wins) if w]
        out.append(
            CellAggregate(
                alpha=alpha, rho=rho, P=P, sigma2=sigma2, N=N,
                alpha_min=alpha_min(P, rho),
                n_rows=len(cell),
                mean_log10_mse=sum(logs) / len(logs),
                success_rate=sum(wins) / len(wins),
                mean_iterations_success=(sum(it_ok) / len(it_ok)) if it_ok else math.nan,
            )
        )
    return out


def run_sweep(spec, threads=1):
    """Execute every replicate of the sweep; write CSV if the spec names one."""
    work = list(iter_cells(spec))

    def job(item):
        indices, (alpha, rho, P, sigma2, N) = item
        seed = cell_seed(spec.base_seed, indices)
        return run_cell_replicate(alpha, rho, P, sigma2, N, seed, spec.solver)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(job, work))
    else:
        rows = [job(item) for item in work]

    result = GridResult(
        spec=spec, rows=rows, aggregates=aggregate_rows(rows, spec.success_threshold)
    )
    if spec.output:
        result.to_csv(spec.output)
    return result


def run_phase_diagram(spec, threads=1):
    """Grid over (alpha, rho) at fixed (P, sigma2, N)."""
    if not (len(spec.Ps) == len(spec.sigma2s) == len(spec.Ns) == 1):
        raise ValueError("phase diagram expects single-valued P, sigma2 and N axes")
    return run_sweep(spec, threads=threads)


def run_transition_profile(spec, threads=1):
    """Profile over (alpha, N) at fixed (rho, P, sigma2)."""
    if not (len(spec.rhos) == len(spec.Ps) == len(spec.sigma2s) == 1):
        raise ValueError("transition profile expects single-valued rho, P and sigma2 axes")
    return run_sweep(spec, threads=threads)


def run_sigma_p_diagram(spec, threads=1):
    """Grid over (sigma2, P) at fixed (rho, alpha, N)."""
    if not (len(spec.alphas) == len(spec.rhos) == len(spec.Ns) == 1):
        raise ValueError("sigma2-P diagram expects single-valued alpha, rho and N axes")
    return run_sweep(spec, threads=threads)


def _fmt(x):
    """Floats with 17 significant digits (exact float64 round trip)."""
    return format(float(x), ".17g")


def write_rows_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    _fmt(r.alpha), _fmt(r.rho), r.P, _fmt(r.sigma2), r.N,
                    r.seed, _fmt(r.mse_corr), r.iterations, r.status,
                ]
            )


def read_rows_csv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}, want {list(CSV_HEADER)}")
        for rec in reader:
            rows.append(
                CellRow(
                    alpha=float(rec[0]), rho=float(rec[1]), P=int(rec[2]),
                    sigma2=float(rec[3]), N=int(rec[4]), seed=int(rec[5]),
                    mse_corr=float(rec[6]), iterations=int(rec[7]), status=rec[8],
                )
            )
    return rows
