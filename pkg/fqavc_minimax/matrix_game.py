# Copyright 2025 Ceshine Lee
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Exact value of a finite zero-sum game by the simplex method.

Convention: `loss[i, j]` is paid by the row player (who minimises) to the column player
(who maximises). After shifting the matrix to be ≥ 1, the row player's problem is

    maximise Σ y  subject to  Lᵀ y ≤ 1,  y ≥ 0,

which starts feasible at the slack basis. The row strategy is y/Σy, the column strategy is
read from the reduced costs of the slack variables (the LP dual), and the game value is
1/Σy minus the shift.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .numeric_config import get_numeric_config

LOGGER = logging.getLogger(__name__)
_MAX_PIVOTS = 100_000


@dataclass(frozen=True, eq=False)
class MatrixGameSolution:
    value: float
    row_strategy: np.ndarray
    column_strategy: np.ndarray

    def row_guarantee(self, loss: np.ndarray) -> float:
        """Largest loss the row strategy can suffer: max_j (qᵀL)_j."""
        return float((self.row_strategy @ loss).max())

    def column_guarantee(self, loss: np.ndarray) -> float:
        """Smallest loss the column strategy can force: min_i (Lp)_i."""
        return float((loss @ self.column_strategy).min())


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    others = np.arange(tableau.shape[0]) != row
    tableau[others] -= np.outer(tableau[others, col], tableau[row])


def _solve_tableau(tableau: np.ndarray, basis: np.ndarray, tol: float) -> int:
    """Maximisation tableau with the objective in the last row; Bland's rule throughout.

    Returns the number of pivots.

    Raises:
        RuntimeError: If the program is unbounded or the pivot limit is reached.
    """
    pivots = 0
    while True:
        candidates = np.flatnonzero(tableau[-1, :-1] < -tol)
        if candidates.size == 0:
            return pivots
        col = int(candidates[0])
        column = tableau[:-1, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            raise RuntimeError("Zero-sum LP is unbounded")
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = int(tied[np.argmin(basis[tied])])
        _pivot(tableau, row, col)
        basis[row] = col
        pivots += 1
        if pivots > _MAX_PIVOTS:
            raise RuntimeError(f"Zero-sum LP did not terminate within {_MAX_PIVOTS} pivots")


def solve_matrix_game(loss: np.ndarray) -> MatrixGameSolution:
    """Optimal mixed strategies of the zero-sum game with the given loss matrix.

    Args:
        loss (np.ndarray): Real matrix, rows are the minimiser's pure strategies.

    Returns:
        The game value with the optimal row (minimiser) and column (maximiser) strategies.

    Raises:
        ValueError: If the matrix is empty or not finite.
        RuntimeError: If the simplex iteration fails (never expected for a valid matrix).
    """
    loss = np.asarray(loss, dtype=float)
    if loss.ndim != 2 or loss.size == 0:
        raise ValueError(f"Loss matrix must be a nonempty 2-D array, got shape {loss.shape}")
    if not np.all(np.isfinite(loss)):
        raise ValueError("Loss matrix must be finite")
    tol = get_numeric_config().lp_tol
    shift = 1.0 - float(loss.min())
    positive = loss.T + shift
    n_cols, n_rows = positive.shape

    tableau = np.zeros((n_cols + 1, n_rows + n_cols + 1))
    tableau[:-1, :n_rows] = positive
    tableau[:-1, n_rows:-1] = np.eye(n_cols)
    tableau[:-1, -1] = 1.0
    tableau[-1, :n_rows] = -1.0
    basis = np.arange(n_rows, n_rows + n_cols)

    pivots = _solve_tableau(tableau, basis, tol)
    total = float(tableau[-1, -1])
    if total <= 0:
        raise RuntimeError("Zero-sum LP is infeasible")

    y = np.zeros(n_rows + n_cols)
    y[basis] = tableau[:-1, -1]
    row_strategy = np.clip(y[:n_rows], 0.0, None)
    row_strategy /= row_strategy.sum()
    column_strategy = np.clip(tableau[-1, n_rows:-1], 0.0, None)
    column_strategy /= column_strategy.sum()
    value = 1.0 / total - shift
    LOGGER.debug("Solved %d×%d game in %d pivots, value %.10f", n_rows, n_cols, pivots, value)
    return MatrixGameSolution(value, row_strategy, column_strategy)
