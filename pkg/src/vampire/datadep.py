"""Data-dependent current model for read and write bursts.

The current drawn by a transfer is linear in the number of ones in the line
and in the number of bits toggled against the previous transfer:

    I_total = i_zero + d_one * n_ones + d_toggle * n_toggles      (mA)

One parameter triple exists per (operation, interleave class) pair, because
different interleavings exercise different switching circuitry.  Counts may
be fractional: payload-free traces feed expected counts in.

``fit_params`` calibrates a triple from measurement samples with ordinary
least squares; goodness of fit is reported as the squared Pearson correlation
between fitted and measured response.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .dram_state import InterleaveClass
from .errors import RankDeficient


class Operation(Enum):
    READ = "read"
    WRITE = "write"


@dataclass(frozen=True)
class DataDepParams:
    """Linear current-model parameters, all in mA.

    ``i_zero_ma`` is the current for an all-zero line, ``d_one_ma`` the extra
    current per one bit, ``d_toggle_ma`` the extra current per toggled bit.
    Reads have non-negative ``d_one_ma``; writes non-positive (the I/O driver
    on the module sinks current when a one arrives).
    """

    i_zero_ma: float
    d_one_ma: float
    d_toggle_ma: float


def eval_current(p: DataDepParams, n_ones: float, n_toggles: float) -> float:
    """Evaluate the linear model at the given (possibly fractional) counts."""
    return p.i_zero_ma + p.d_one_ma * n_ones + p.d_toggle_ma * n_toggles


@dataclass(frozen=True)
class DataDepTable:
    """All eight parameter triples: {read, write} x four interleave classes."""

    params: dict[tuple[Operation, InterleaveClass], DataDepParams]

    def __post_init__(self):
        expected = {(op, ic) for op in Operation for ic in InterleaveClass}
        if set(self.params) != expected:
            missing = sorted(
                f"{op.value}/{ic.value}" for op, ic in expected - set(self.params)
            )
            raise ValueError(f"data-dependency table incomplete, missing {missing}")

    def get(self, op: Operation, klass: InterleaveClass) -> DataDepParams:
        return self.params[(op, klass)]

    def check_signs(self) -> list[str]:
        """Return violations of the observed sign conventions."""
        problems = []
        for (op, klass), p in sorted(
            self.params.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)
        ):
            where = f"{op.value}/{klass.value}"
            if not p.i_zero_ma > 0:
                problems.append(f"{where}: i_zero_ma must be > 0")
            if op is Operation.READ and p.d_one_ma < 0:
                problems.append(f"{where}: read d_one_ma must be >= 0")
            if op is Operation.WRITE and p.d_one_ma > 0:
                problems.append(f"{where}: write d_one_ma must be <= 0")
        return problems


Sample = tuple[float, float, float]  # (n_ones, n_toggles, measured current mA)


def fit_params(
    samples: Sequence[Sample],
    fit_ones: bool = True,
    fit_toggles: bool = True,
) -> tuple[DataDepParams, float]:
    """Least-squares fit of the linear model to measurement samples.

    Requires at least as many samples as free parameters and a full-rank
    design; a degenerate design (constant or collinear regressors) raises
    :class:`RankDeficient`.  Callers whose samples do not vary in one of the
    regressors can request a reduced fit via ``fit_ones``/``fit_toggles``;
    the dropped slope is reported as 0.  Returns the parameters and the R^2
    of the fit, clamped to [0, 1].
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError("samples must be (n_ones, n_toggles, current_ma) triples")
    n = data.shape[0]
    columns = [np.ones(n)]
    if fit_ones:
        columns.append(data[:, 0])
    if fit_toggles:
        columns.append(data[:, 1])
    design = np.column_stack(columns)
    y = data[:, 2]
    if n < design.shape[1]:
        raise RankDeficient(
            f"need at least {design.shape[1]} samples, got {n}"
        )
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise RankDeficient("design matrix is rank deficient")
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)

    it = iter(coef[1:])
    d_one = float(next(it)) if fit_ones else 0.0
    d_toggle = float(next(it)) if fit_toggles else 0.0
    params = DataDepParams(float(coef[0]), d_one, d_toggle)
    return params, _r_squared(design @ coef, y)


def _r_squared(fitted: np.ndarray, measured: np.ndarray) -> float:
    ss_res = float(np.sum((measured - fitted) ** 2))
    ss_tot = float(np.sum((measured - np.mean(measured)) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res < 1e-18 else 0.0
    return min(1.0, max(0.0, 1.0 - ss_res / ss_tot))


def model_percent_error(
    p: DataDepParams, samples: Sequence[Sample]
) -> tuple[float, float]:
    """Max and mean absolute percent error of the model over the samples.

    Sample currents must be positive; the per-sample error is
    |predicted - measured| / measured * 100.
    """
    if len(samples) == 0:
        raise ValueError("samples must be non-empty")
    errors = []
    for n_ones, n_toggles, measured in samples:
        if measured <= 0:
            raise ValueError(f"measured current must be > 0, got {measured}")
        predicted = eval_current(p, n_ones, n_toggles)
        errors.append(abs(predicted - measured) / measured * 100.0)
    return max(errors), sum(errors) / len(errors)


def read_calibration_csv(lines: Iterable[str]) -> list[Sample]:
    """Read calibration samples: header ``n_ones,n_toggles,current_ma``."""
    reader = csv.DictReader(lines)
    required = {"n_ones", "n_toggles", "current_ma"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ValueError(
            "calibration CSV must have header n_ones,n_toggles,current_ma"
        )
    return [
        (float(row["n_ones"]), float(row["n_toggles"]), float(row["current_ma"]))
        for row in reader
    ]
