"""Operator models: kernel discretization, monotonicity, Jacobians."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dsm.hilbert import GridFunction, GridMismatchError, QuadratureGrid, inner, norm
from dsm.operators import MODEL_KINDS, OperatorModel, matvec


def kernel_image_of_one(x):
    # closed form of int_0^1 exp(-|x-y|) dy
    return 2.0 - np.exp(-x) - np.exp(x - 1.0)


@pytest.mark.parametrize("n", [30, 100, 300])
def test_kernel_closed_form_on_constant(n):
    # trapezoid error for this kernel stays below 5/n^2 at every node
    grid = QuadratureGrid(n)
    model = OperatorModel("linear", grid)
    one = GridFunction(grid, np.ones(n))
    image = model.apply_kernel(one)
    exact = kernel_image_of_one(grid.nodes)
    assert np.max(np.abs(image.values - exact)) <= 5.0 / n ** 2


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        OperatorModel("quartic", QuadratureGrid(10))


def test_apply_rejects_wrong_grid():
    model = OperatorModel("cubic", QuadratureGrid(10))
    with pytest.raises(GridMismatchError):
        model.apply(QuadratureGrid(11).zero())


def test_identity_is_identity():
    grid = QuadratureGrid(17)
    model = OperatorModel("identity", grid)
    u = grid.sample(np.cos)
    np.testing.assert_array_equal(model.apply(u).values, u.values)
    np.testing.assert_array_equal(model.jacobian(u), np.eye(17))


def test_linear_drops_nonlinearity():
    grid = QuadratureGrid(23)
    lin = OperatorModel("linear", grid)
    u = grid.sample(lambda x: x - 0.3)
    np.testing.assert_array_equal(lin.apply(u).values, lin.apply_kernel(u).values)


def test_arctan3_and_cubic_reduce_to_linear_at_zero():
    grid = QuadratureGrid(12)
    zero = grid.zero()
    for kind in ("arctan3", "cubic"):
        model = OperatorModel(kind, grid)
        np.testing.assert_allclose(model.apply(zero).values, 0.0, atol=1e-15)
        # g'(0) = 0 for both nonlinearities, so F'(0) is the kernel matrix
        np.testing.assert_array_equal(model.jacobian(zero), model.kernel)


def test_kernel_matrix_symmetric_in_weighted_inner_product():
    # K = E*W with E symmetric, so <Ku, v> = <u, Kv> in the weighted product
    grid = QuadratureGrid(40)
    model = OperatorModel("linear", grid)
    rng = np.random.default_rng(3)
    for _ in range(20):
        u = GridFunction(grid, rng.standard_normal(grid.n))
        v = GridFunction(grid, rng.standard_normal(grid.n))
        lhs = inner(model.apply_kernel(u), v)
        rhs = inner(u, model.apply_kernel(v))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)


def test_kernel_positive_semidefinite():
    grid = QuadratureGrid(60)
    model = OperatorModel("linear", grid)
    rng = np.random.default_rng(4)
    for _ in range(50):
        u = GridFunction(grid, rng.standard_normal(grid.n))
        assert inner(model.apply_kernel(u), u) >= -1e-12


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_monotonicity_of_F(kind):
    # <F(u)-F(v), u-v> >= 0: kernel part is PSD, pointwise part has g' >= 0
    grid = QuadratureGrid(50)
    model = OperatorModel(kind, grid)
    rng = np.random.default_rng(11)
    for _ in range(100):
        u = GridFunction(grid, 3.0 * rng.standard_normal(grid.n))
        v = GridFunction(grid, 3.0 * rng.standard_normal(grid.n))
        gap = inner(model.apply(u) - model.apply(v), u - v)
        assert gap >= -1e-10


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_jacobian_psd_in_weighted_inner_product(kind):
    grid = QuadratureGrid(35)
    model = OperatorModel(kind, grid)
    rng = np.random.default_rng(12)
    point = GridFunction(grid, rng.standard_normal(grid.n))
    jac = model.jacobian(point)
    for _ in range(30):
        w = GridFunction(grid, rng.standard_normal(grid.n))
        assert inner(matvec(jac, w), w) >= -1e-12


@pytest.mark.parametrize("kind", ["arctan3", "cubic", "linear"])
def test_jacobian_matches_finite_differences(kind):
    """Directional finite differences agree with the assembled Jacobian."""
    grid = QuadratureGrid(80)
    model = OperatorModel(kind, grid)
    rng = np.random.default_rng(21)
    eps = 1e-6
    u = GridFunction(grid, rng.standard_normal(grid.n))
    jac = model.jacobian(u)
    for _ in range(10):
        # small directions keep the second-order remainder well below the bound
        w = GridFunction(grid, 0.05 * rng.standard_normal(grid.n))
        fd = (1.0 / eps) * (model.apply(u + eps * w) - model.apply(u))
        jw = matvec(jac, w)
        gap = float(np.linalg.norm(fd.values - jw.values))
        assert gap <= 1e-6 * float(np.linalg.norm(jw.values)) + 1e-8


def test_matvec_shape_check():
    grid = QuadratureGrid(6)
    with pytest.raises(ValueError):
        matvec(np.eye(5), grid.zero())


def test_injectivity_probe():
    # F(u) = F(v) with u != v would break monotone solvability; probe it
    grid = QuadratureGrid(30)
    model = OperatorModel("cubic", grid)
    rng = np.random.default_rng(5)
    u = GridFunction(grid, rng.standard_normal(grid.n))
    v = GridFunction(grid, u.values + 0.1)
    assert norm(model.apply(u) - model.apply(v)) > 1e-4


bounded_values = st.floats(min_value=-5.0, max_value=5.0)


@given(
    arrays(np.float64, st.integers(min_value=2, max_value=30), elements=bounded_values)
)
@settings(max_examples=100, deadline=None)
def test_arctan3_bounded_by_cube_of_half_pi(values):
    grid = QuadratureGrid(len(values))
    model = OperatorModel("arctan3", grid)
    u = GridFunction(grid, values)
    nonlinear_part = model.apply(u) - model.apply_kernel(u)
    assert np.max(np.abs(nonlinear_part.values)) <= (np.pi / 2.0) ** 3


@given(
    arrays(np.float64, st.integers(min_value=2, max_value=30), elements=bounded_values)
)
@settings(max_examples=100, deadline=None)
def test_cubic_nonlinearity_is_odd(values):
    grid = QuadratureGrid(len(values))
    model = OperatorModel("cubic", grid)
    u = GridFunction(grid, values)
    g_u = model.apply(u) - model.apply_kernel(u)
    g_neg = model.apply(-u) - model.apply_kernel(-u)
    np.testing.assert_allclose(g_neg.values, -g_u.values, atol=1e-12)
