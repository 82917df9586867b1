"""Least-squares helpers shared by the AR fitter and the regression engine."""

from typing import Sequence

import numpy as np

from .errors import RankError

# A column whose component orthogonal to the preceding columns is smaller than
# this fraction of its own norm is treated as linearly dependent.
RANK_TOL = 1e-10


def check_rank(X: np.ndarray, names: Sequence[str]) -> None:
    """Raise RankError naming the first column that adds no new direction."""
    if X.shape[1] == 0:
        return
    if X.shape[0] < X.shape[1]:
        raise RankError(
            f"{X.shape[0]} rows cannot identify {X.shape[1]} columns", column=names[-1]
        )
    r = np.linalg.qr(X, mode="r")
    norms = np.linalg.norm(X, axis=0)
    for i, name in enumerate(names):
        if norms[i] == 0.0 or abs(r[i, i]) <= RANK_TOL * norms[i]:
            raise RankError(
                f"design matrix is rank deficient: column '{name}' is collinear "
                "with the preceding columns",
                column=name,
            )


def lstsq(X: np.ndarray, y: np.ndarray, names: Sequence[str]) -> np.ndarray:
    """Least-squares coefficients via a thin QR factorisation."""
    check_rank(X, names)
    q, r = np.linalg.qr(X, mode="reduced")
    return np.linalg.solve(r, q.T @ y)
