"""Damped Newton solver for the regularized equation F(v) + a*v = f_delta.

For monotone F and a > 0 the regularized equation has a unique solution;
Newton with residual-halving backtracking finds it from any reasonable
starting point.  Residual tolerances here are in the weighted L2 norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .hilbert import GridFunction, norm
from .operators import OperatorModel

__all__ = [
    "NewtonOptions",
    "RegularizedSolveReport",
    "SingularShiftError",
    "ConvergenceError",
    "solve_shifted_linear",
    "solve_regularized",
]


class SingularShiftError(RuntimeError):
    """The shifted matrix J + a*I factors with a numerically singular pivot."""

    def __init__(self, pivot_index: int):
        self.pivot_index = int(pivot_index)
        super().__init__(f"numerically singular pivot at index {self.pivot_index}")


class ConvergenceError(RuntimeError):
    """A regularized solve failed to reach the requested tolerance."""


@dataclass(frozen=True)
class NewtonOptions:
    """Solver knobs: absolute residual tolerance in the weighted norm,
    Newton iteration cap, and number of step-halvings allowed per step."""

    tol: float = 1e-12
    max_iter: int = 100
    backtracking: int = 30

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.backtracking < 0:
            raise ValueError(f"backtracking must be >= 0, got {self.backtracking}")


@dataclass
class RegularizedSolveReport:
    solution: GridFunction
    residual_norm: float
    iterations: int
    converged: bool


def solve_shifted_linear(jacobian: np.ndarray, a: float, rhs: GridFunction) -> GridFunction:
    """Solve (J + a*I) w = rhs by dense LU with partial pivoting."""
    if not a > 0:
        raise ValueError(f"shift a must be positive, got {a}")
    n = rhs.grid.n
    jacobian = np.asarray(jacobian, dtype=float)
    if jacobian.shape != (n, n):
        raise ValueError(f"jacobian shape {jacobian.shape} does not match grid n={n}")
    shifted = jacobian + a * np.eye(n)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(shifted)
    diag = np.diag(lu)
    bad = np.flatnonzero(~np.isfinite(diag) | (diag == 0.0))
    if bad.size:
        raise SingularShiftError(bad[0])
    return GridFunction(rhs.grid, scipy.linalg.lu_solve((lu, piv), rhs.values))


def _reg_residual(model, values, a, f_values):
    # residual of F(v) + a v - f_delta on raw arrays; None marks a point the
    # model cannot evaluate (overflow), so backtracking can reject it
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            fu = model.apply(GridFunction(model.grid, values)).values
        except ValueError:
            return None
        out = fu + a * values - f_values
    return out if np.all(np.isfinite(out)) else None


def solve_regularized(
    model: OperatorModel,
    f_delta: GridFunction,
    a: float,
    options: NewtonOptions | None = None,
    start: GridFunction | None = None,
) -> RegularizedSolveReport:
    """Solve F(v) + a*v = f_delta by damped Newton from v = start (default 0).

    Each step solves (F'(v) + a*I) s = F(v) + a*v - f_delta and halves the
    step until the weighted residual norm decreases, up to
    ``options.backtracking`` times.  Returns the best iterate with
    ``converged=False`` if progress stalls or the iteration cap is hit.
    """
    if not a > 0:
        raise ValueError(f"regularization parameter a must be positive, got {a}")
    opts = options or NewtonOptions()
    grid = model.grid
    if f_delta.grid != grid:
        raise ValueError("data and model live on different grids")
    v = np.zeros(grid.n) if start is None else start.values.copy()
    f_values = f_delta.values

    residual = _reg_residual(model, v, a, f_values)
    if residual is None:
        raise ValueError("cannot evaluate the model at the start point")
    res_norm = norm(GridFunction(grid, residual))
    iterations = 0
    for _ in range(opts.max_iter):
        if res_norm <= opts.tol:
            break
        jac = model.jacobian(GridFunction(grid, v))
        step = solve_shifted_linear(jac, a, GridFunction(grid, residual)).values
        scale = 1.0
        accepted = False
        for _ in range(opts.backtracking + 1):
            candidate = v - scale * step
            if np.all(np.isfinite(candidate)):
                cand_residual = _reg_residual(model, candidate, a, f_values)
                if cand_residual is not None:
                    cand_norm = norm(GridFunction(grid, cand_residual))
                    if cand_norm < res_norm:
                        v, residual, res_norm = candidate, cand_residual, cand_norm
                        accepted = True
                        break
            scale *= 0.5
        iterations += 1
        if not accepted:
            # no step length reduced the residual; report the best iterate
            return RegularizedSolveReport(
                GridFunction(grid, v), res_norm, iterations, res_norm <= opts.tol
            )
    return RegularizedSolveReport(
        GridFunction(grid, v), res_norm, iterations, res_norm <= opts.tol
    )
