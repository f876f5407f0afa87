"""Monotone operator models on [0, 1].

Each model is F(u) = B(u) + g(u) where

    B(u)(x) = integral_0^1 exp(-|x - y|) u(y) dy

is discretized with the grid's trapezoidal weights and g is a pointwise
monotone nonlinearity:

    arctan3   g(u) = arctan(u)^3
    cubic     g(u) = u^3
    linear    g(u) = 0          (F = B)
    identity  F(u) = u          (no kernel term)

The exp kernel is symmetric positive definite, and g is nondecreasing, so
every model is monotone with respect to the weighted inner product:
<F(u) - F(v), u - v> >= 0.
"""

from __future__ import annotations

import numpy as np

from .hilbert import GridFunction, GridMismatchError, QuadratureGrid

__all__ = ["MODEL_KINDS", "OperatorModel", "matvec"]

MODEL_KINDS = ("arctan3", "cubic", "linear", "identity")


def _g_arctan3(u):
    return np.arctan(u) ** 3


def _gprime_arctan3(u):
    return 3.0 * np.arctan(u) ** 2 / (1.0 + u * u)


def _g_cubic(u):
    return u ** 3


def _gprime_cubic(u):
    return 3.0 * u * u


_NONLINEARITY = {
    "arctan3": (_g_arctan3, _gprime_arctan3),
    "cubic": (_g_cubic, _gprime_cubic),
    "linear": (None, None),
    "identity": (None, None),
}


class OperatorModel:
    """One of the operator models above, bound to a grid.

    The discretized kernel matrix K_ij = w_j * exp(-|x_i - x_j|) is built
    once at construction and shared by apply/jacobian calls.
    """

    def __init__(self, kind: str, grid: QuadratureGrid):
        if kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
        self.kind = kind
        self.grid = grid
        x = grid.nodes
        kernel = np.exp(-np.abs(x[:, None] - x[None, :])) * grid.weights[None, :]
        kernel.flags.writeable = False
        self.kernel = kernel
        self._g, self._gprime = _NONLINEARITY[kind]

    def __repr__(self):
        return f"OperatorModel({self.kind!r}, n={self.grid.n})"

    def _check(self, u: GridFunction):
        if u.grid != self.grid:
            raise GridMismatchError(f"function on {u.grid!r}, model on {self.grid!r}")

    def apply_kernel(self, u: GridFunction) -> GridFunction:
        """The integral term B(u) alone, via the cached kernel matrix."""
        self._check(u)
        return GridFunction(self.grid, self.kernel @ u.values)

    def apply(self, u: GridFunction) -> GridFunction:
        """F(u)."""
        self._check(u)
        if self.kind == "identity":
            return GridFunction(self.grid, u.values)
        out = self.kernel @ u.values
        if self._g is not None:
            out = out + self._g(u.values)
        return GridFunction(self.grid, out)

    def jacobian(self, u: GridFunction) -> np.ndarray:
        """Dense derivative matrix F'(u) = K + diag(g'(u))."""
        self._check(u)
        n = self.grid.n
        if self.kind == "identity":
            return np.eye(n)
        jac = self.kernel.copy()
        if self._gprime is not None:
            jac[np.diag_indices(n)] += self._gprime(u.values)
        return jac


def matvec(matrix: np.ndarray, w: GridFunction) -> GridFunction:
    """Apply a dense matrix to a grid function's values."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (w.grid.n, w.grid.n):
        raise GridMismatchError(
            f"matrix shape {matrix.shape} does not match grid n={w.grid.n}"
        )
    return GridFunction(w.grid, matrix @ w.values)
