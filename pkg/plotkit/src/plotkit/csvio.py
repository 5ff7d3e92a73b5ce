"""Reader and aggregator for the sweep grid CSV schema.

One row per replicate with columns
alpha,rho,P,sigma2,N,seed,mse_corr,iterations,converged.
Aggregation happens plot-side from the raw rows; the mean of log10(MSE_corr)
uses a 1e-300 floor so an exactly-zero MSE cannot poison a cell.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

EXPECTED_HEADER = ("alpha", "rho", "P", "sigma2", "N", "seed", "mse_corr", "iterations", "converged")

LOG10_FLOOR = 1e-300


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Row:
    alpha: float
    rho: float
    P: int
    sigma2: float
    N: int
    seed: int
    mse_corr: float
    iterations: int
    converged: str

    def cell(self):
        return (self.alpha, self.rho, self.P, self.sigma2, self.N)


@dataclass(frozen=True)
class Cell:
    alpha: float
    rho: float
    P: int
    sigma2: float
    N: int
    n_rows: int
    mean_log10_mse: float
    success_rate: float
    mean_iterations_success: float


def read_rows(path):
    try:
        fh = open(path, newline="")
    except OSError as err:
        raise OSError(f"cannot read {path}: {err}") from err
    with fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {list(EXPECTED_HEADER)}")
        if header != EXPECTED_HEADER:
            raise SchemaError(
                f"{path}: header {list(header)} does not match {list(EXPECTED_HEADER)}"
            )
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(EXPECTED_HEADER):
                raise SchemaError(f"{path}:{lineno}: expected {len(EXPECTED_HEADER)} fields")
            try:
                rows.append(
                    Row(
                        alpha=float(rec[0]), rho=float(rec[1]), P=int(rec[2]),
                        sigma2=float(rec[3]), N=int(rec[4]), seed=int(rec[5]),
                        mse_corr=float(rec[6]), iterations=int(rec[7]), converged=rec[8],
                    )
                )
            except ValueError as err:
                raise SchemaError(f"{path}:{lineno}: {err}") from err
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def aggregate(rows, success_threshold=1e-8):
    """Collapse replicate rows into per-cell statistics, first-seen order."""
    order = []
    groups = {}
    for row in rows:
        key = row.cell()
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    cells = []
    for key in order:
        members = groups[key]
        logs = [math.log10(max(r.mse_corr, LOG10_FLOOR)) for r in members]
        wins = [r.mse_corr < success_threshold for r in members]
        it_ok = [r.iterations for r, w in zip(members, wins) if w]
        cells.append(
            Cell(
                alpha=key[0], rho=key[1], P=key[2], sigma2=key[3], N=key[4],
                n_rows=len(members),
                mean_log10_mse=sum(logs) / len(logs),
                success_rate=sum(wins) / len(wins),
                mean_iterations_success=(sum(it_ok) / len(it_ok)) if it_ok else math.nan,
            )
        )
    return cells
