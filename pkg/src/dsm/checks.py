"""Executable checks of the analytic facts behind the regularized equation.

Every check here verifies, with explicit numeric margins, a property that
holds for monotone F and the schedules used by the drivers:

* along a decreasing regularization sweep, the data residual of the
  regularized solution decreases strictly while its norm increases;
* the regularized solutions with noisy and exact data stay within delta/a
  of each other, and the exact-data solution never exceeds the true
  solution's norm;
* for large a the regularized solution shrinks like 1/a;
* the residual-equals-C*delta crossing time exists and can be bracketed;
* two scalar integral inequalities for a(t) = d/(c+t)^b schedules;
* a Gronwall-type majorant g(t) stays strictly below a(t)/lam.

All norms in this module are quadrature-weighted.  Checks return a
:class:`CheckReport`; precondition violations raise ``ValueError``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .driver import ContinuousSchedule
from .hilbert import GridFunction, norm
from .operators import OperatorModel
from .regsolve import ConvergenceError, NewtonOptions, solve_regularized

__all__ = [
    "CheckReport",
    "Trajectory",
    "build_trajectory",
    "check_monotonicity",
    "check_perturbation_bounds",
    "check_large_a_limit",
    "find_crossing_time",
    "check_exponential_integral_bound",
    "check_weighted_integral_bound",
    "check_gronwall_majorant",
    "run_lemma_suite",
    "reports_to_csv",
    "format_reports",
]

_TINY = 1e-300


@dataclass
class CheckReport:
    """Outcome of one check: ``passed`` iff ``worst_margin >= -tolerance``."""

    name: str
    passed: bool
    worst_margin: float
    samples: int
    tolerance: float
    details: list = field(default_factory=list, repr=False)


def _report(name, margins, tolerance):
    margins = np.asarray(margins, dtype=float)
    worst = float(margins.min()) if margins.size else math.inf
    return CheckReport(
        name=name,
        passed=bool(worst >= -tolerance),
        worst_margin=worst,
        samples=int(margins.size),
        tolerance=float(tolerance),
        details=margins.tolist(),
    )


@dataclass
class Trajectory:
    """Regularized solutions swept over a strictly decreasing a-grid.

    ``residual_norms[k] = ||F(V_k) - f_delta||`` and
    ``solution_norms[k] = ||V_k||`` for the solution V_k at ``a_values[k]``;
    ``eq_residuals[k]`` is the solver's residual for the regularized
    equation itself, bounded by ``solver_tol``.
    """

    model: OperatorModel
    f_delta: GridFunction
    a_values: np.ndarray
    solutions: list
    residual_norms: np.ndarray
    solution_norms: np.ndarray
    eq_residuals: np.ndarray
    solver_tol: float


def _validate_a_grid(a_values):
    a_values = np.asarray(a_values, dtype=float)
    if a_values.ndim != 1 or a_values.size == 0:
        raise ValueError("a_values must be a nonempty 1-d sequence")
    if not np.all(a_values > 0):
        raise ValueError("a_values must be strictly positive")
    if not np.all(np.diff(a_values) < 0):
        raise ValueError("a_values must be strictly decreasing")
    return a_values


def build_trajectory(
    model: OperatorModel,
    f_delta: GridFunction,
    a_values,
    options: NewtonOptions | None = None,
) -> Trajectory:
    """Solve F(V) + a V = f_delta for every a, warm-starting down the grid."""
    a_values = _validate_a_grid(a_values)
    opts = options or NewtonOptions()
    solutions = []
    res_norms = np.empty(a_values.size)
    sol_norms = np.empty(a_values.size)
    eq_res = np.empty(a_values.size)
    start = None
    for k, a in enumerate(a_values):
        report = solve_regularized(model, f_delta, float(a), opts, start=start)
        if not report.converged:
            raise ConvergenceError(
                f"regularized solve did not converge at a={a:g} "
                f"(residual {report.residual_norm:.3e})"
            )
        v = report.solution
        solutions.append(v)
        res_norms[k] = norm(model.apply(v) - f_delta)
        sol_norms[k] = norm(v)
        eq_res[k] = report.residual_norm
        start = v
    return Trajectory(
        model=model,
        f_delta=f_delta,
        a_values=a_values,
        solutions=solutions,
        residual_norms=res_norms,
        solution_norms=sol_norms,
        eq_residuals=eq_res,
        solver_tol=opts.tol,
    )


def check_monotonicity(traj: Trajectory, rtol: float = 1e-9) -> CheckReport:
    """Residual norms strictly decrease and solution norms strictly increase
    along decreasing a, with per-step relative tolerance ``rtol``."""
    _validate_a_grid(traj.a_values)
    zero = traj.model.grid.zero()
    if norm(traj.model.apply(zero) - traj.f_delta) == 0.0:
        raise ValueError("data coincides with F(0); sweep is degenerate")
    phi = traj.residual_norms
    psi = traj.solution_norms
    margins = []
    for k in range(phi.size - 1):
        margins.append((phi[k] - phi[k + 1]) / max(phi[k], _TINY))
        margins.append((psi[k + 1] - psi[k]) / max(psi[k + 1], _TINY))
    return _report("monotonicity", margins, rtol)


def check_perturbation_bounds(
    traj_noisy: Trajectory,
    traj_exact: Trajectory,
    exact: GridFunction,
    delta: float,
    tolerance: float | None = None,
) -> CheckReport:
    """At every a on a shared sweep, with V from exact data and V_d from
    data at distance delta:

        ||V_d - V|| <= delta/a,   ||V|| <= ||exact||,
        ||V_d||     <= ||exact|| + delta/a.
    """
    if not np.array_equal(traj_noisy.a_values, traj_exact.a_values):
        raise ValueError("trajectories must share the same a-grid")
    if traj_noisy.model.grid != traj_exact.model.grid:
        raise ValueError("trajectories must share the same grid")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    tol = tolerance
    if tol is None:
        tol = 10.0 * max(traj_noisy.solver_tol, traj_exact.solver_tol) + 1e-9
    y_norm = norm(exact)
    margins = []
    for k, a in enumerate(traj_noisy.a_values):
        v_d = traj_noisy.solutions[k]
        v = traj_exact.solutions[k]
        margins.append(delta / a - norm(v_d - v))
        margins.append(y_norm - traj_exact.solution_norms[k])
        margins.append(y_norm + delta / a - traj_noisy.solution_norms[k])
    return _report("perturbation_bounds", margins, tol)


def _weighted_operator_norm(matrix, weights, rng, steps=50):
    # spectral norm of W^(1/2) J W^(-1/2), i.e. the operator norm in the
    # weighted inner product, by power iteration on S^T S
    sqrt_w = np.sqrt(weights)
    s = sqrt_w[:, None] * matrix / sqrt_w[None, :]
    x = rng.standard_normal(matrix.shape[0])
    x /= np.linalg.norm(x)
    for _ in range(steps):
        y = s.T @ (s @ x)
        y_norm = np.linalg.norm(y)
        if y_norm == 0.0:
            return 0.0
        x = y / y_norm
    return float(np.linalg.norm(s @ x))


def check_large_a_limit(
    model: OperatorModel,
    f_delta: GridFunction,
    a_values=(1e2, 1e3, 1e4),
    tolerance: float = 1e-8,
    n_probe: int = 10,
    power_steps: int = 50,
    seed: int = 7,
) -> CheckReport:
    """For large a the regularized solution obeys ||V|| <= ||f_delta - F(0)||/a,
    and the residual stays within M1*||V|| of ||f_delta - F(0)||, where M1
    bounds the derivative norm near zero (sampled over random points in the
    weighted unit ball)."""
    a_values = np.asarray(a_values, dtype=float)
    if not np.all(a_values > 0):
        raise ValueError("a_values must be strictly positive")
    grid = model.grid
    zero = grid.zero()
    base = norm(f_delta - model.apply(zero))
    rng = np.random.default_rng(seed)
    m1 = 0.0
    for _ in range(n_probe):
        g = rng.standard_normal(grid.n)
        g_fn = GridFunction(grid, g)
        g_norm = norm(g_fn)
        radius = rng.random()
        point = GridFunction(grid, (radius / max(g_norm, _TINY)) * g)
        jac = model.jacobian(point)
        m1 = max(m1, _weighted_operator_norm(jac, grid.weights, rng, power_steps))
    margins = []
    for a in a_values:
        report = solve_regularized(model, f_delta, float(a))
        if not report.converged:
            raise ConvergenceError(f"regularized solve did not converge at a={a:g}")
        v = report.solution
        v_norm = norm(v)
        phi = norm(model.apply(v) - f_delta)
        margins.append(base / a - v_norm)
        margins.append(m1 * v_norm - abs(phi - base))
    return _report("large_a_limit", margins, tolerance)


def find_crossing_time(
    model: OperatorModel,
    f_delta: GridFunction,
    delta: float,
    C: float,
    schedule: ContinuousSchedule,
    tol: float = 1e-8,
    options: NewtonOptions | None = None,
    max_doublings: int = 30,
) -> float:
    """Bisection for the time t1 where the regularized residual
    phi(t) = ||F(V(a(t))) - f_delta|| equals C*delta.

    phi is continuous and strictly decreasing in t, so a sign change
    bracketed by doubling T (capped at 2**max_doublings) pins t1 down;
    returns t1 with |phi(t1) - C*delta| <= tol.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not C > 1.0:
        raise ValueError(f"C must be > 1, got {C}")
    target = C * delta
    zero = model.grid.zero()
    if norm(model.apply(zero) - f_delta) <= target:
        raise ValueError("C*delta is not below ||F(0) - f_delta||; no crossing")
    opts = options or NewtonOptions()
    state = {"start": None}

    def phi(t):
        report = solve_regularized(model, f_delta, float(schedule.a(t)), opts, state["start"])
        if not report.converged:
            raise ConvergenceError(f"regularized solve did not converge at t={t:g}")
        state["start"] = report.solution
        return norm(model.apply(report.solution) - f_delta)

    if phi(0.0) <= target:
        raise ValueError("phi(0) <= C*delta; a(0) is not large enough")
    lo, hi = 0.0, 1.0
    doublings = 0
    while phi(hi) >= target:
        lo, hi = hi, 2.0 * hi
        doublings += 1
        if doublings > max_doublings:
            raise RuntimeError(f"no crossing found up to T=2**{max_doublings}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        value = phi(mid)
        if abs(value - target) <= tol:
            return mid
        if value > target:
            lo = mid
        else:
            hi = mid
    raise RuntimeError("bisection failed to localize the crossing to tolerance")


def _simpson(fn, upper, panels):
    s = np.linspace(0.0, upper, panels + 1)
    f = fn(s)
    h = upper / panels
    return h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum())


def check_exponential_integral_bound(
    p: float, b: float, c: float, t_values, panels: int = 10_000
) -> CheckReport:
    """(p - b/c) * integral_0^t exp(p s)/(s + c)^b ds < exp(p t)/(c + t)^b
    for every t >= 0, evaluated by composite Simpson."""
    if not (p > 0 and b > 0 and c > 0):
        raise ValueError(f"p, b, c must be positive, got {(p, b, c)}")
    if panels < 2 or panels % 2:
        raise ValueError(f"panels must be a positive even count, got {panels}")
    t_values = np.asarray(t_values, dtype=float)
    if np.any(t_values < 0):
        raise ValueError("t_values must be nonnegative")
    factor = p - b / c
    margins = []
    for t in t_values:
        rhs = math.exp(p * t) / (c + t) ** b
        if t == 0.0:
            integral = 0.0
        else:
            integral = _simpson(lambda s: np.exp(p * s) / (s + c) ** b, float(t), panels)
        margins.append(rhs - factor * integral)
    return _report("exp_integral_bound", margins, 0.0)


def check_weighted_integral_bound(
    schedule: ContinuousSchedule,
    t_values,
    traj: Trajectory,
    tolerance: float = 0.0,
) -> CheckReport:
    """exp(-t/2) * integral_0^t exp(s/2) |a'(s)| ||V(s)|| ds <= a(t) ||V(t)|| / 2
    along a trajectory sampled on t_values for a schedule with c >= 6b.

    The trajectory must be built on a(t_values), densely enough for the
    trapezoid rule (step <= 0.01 * t_max).
    """
    if schedule.c < 6.0 * schedule.b:
        raise ValueError(
            f"schedule needs c >= 6b, got c={schedule.c}, b={schedule.b}"
        )
    t_values = np.asarray(t_values, dtype=float)
    if t_values.ndim != 1 or t_values.size < 2:
        raise ValueError("t_values must contain at least two points")
    if t_values[0] != 0.0:
        raise ValueError("t_values must start at 0")
    steps = np.diff(t_values)
    if not np.all(steps > 0):
        raise ValueError("t_values must be strictly increasing")
    t_max = float(t_values[-1])
    if steps.max() > 0.01 * t_max * (1.0 + 1e-12):
        raise ValueError("t grid too coarse: need step <= 0.01 * t_max")
    expected_a = schedule.a(t_values)
    if not np.allclose(traj.a_values, expected_a, rtol=1e-12, atol=0.0):
        raise ValueError("trajectory was not built on schedule.a(t_values)")
    psi = traj.solution_norms
    integrand = np.exp(0.5 * t_values) * schedule.adot_abs(t_values) * psi
    increments = 0.5 * steps * (integrand[:-1] + integrand[1:])
    cumulative = np.concatenate(([0.0], np.cumsum(increments)))
    lhs = np.exp(-0.5 * t_values) * cumulative
    rhs = 0.5 * expected_a * psi
    return _report("weighted_integral_bound", rhs - lhs, tolerance)


def check_gronwall_majorant(
    schedule: ContinuousSchedule,
    lam: float,
    c0: float,
    c1: float,
    g0: float,
    t_max: float = 100.0,
    dt: float = 1e-3,
) -> CheckReport:
    """Integrate g' = -g + (c0/a) g^2 + c1 |a'|/a with RK4 and confirm the
    solution stays strictly below a(t)/lam on [0, t_max].

    Preconditions (raised as ``ValueError`` when violated): for all t,
    c0 <= (lam/2)(1 - |a'|/a) and c1 |a'|/a <= (a/(2 lam))(1 - |a'|/a),
    both tightest at t = 0 for this schedule family, and lam*g0/a(0) < 1.
    """
    if not (lam > 0 and c0 > 0 and c1 > 0):
        raise ValueError(f"lam, c0, c1 must be positive, got {(lam, c0, c1)}")
    if g0 < 0:
        raise ValueError(f"g0 must be nonnegative, got {g0}")
    if not (t_max > 0 and dt > 0):
        raise ValueError("t_max and dt must be positive")
    d, c, b = schedule.d, schedule.c, schedule.b
    decay = 1.0 - b / c  # 1 - |a'|/a at t=0, the minimum over t >= 0
    if decay <= 0 or c0 > 0.5 * lam * decay:
        raise ValueError(
            f"condition c0 <= (lam/2)(1 - |a'|/a) fails at t=0: "
            f"c0={c0}, bound={0.5 * lam * decay:g}"
        )
    if c1 * b / c > (d / c ** b) / (2.0 * lam) * decay:
        raise ValueError(
            f"condition c1|a'|/a <= (a/(2 lam))(1 - |a'|/a) fails at t=0: "
            f"lhs={c1 * b / c:g}, rhs={(d / c ** b) / (2.0 * lam) * decay:g}"
        )
    a0 = d / c ** b
    if lam * g0 / a0 >= 1.0:
        raise ValueError(f"need lam*g0/a(0) < 1, got {lam * g0 / a0:g}")

    def rhs(t, g):
        a = d / (c + t) ** b
        return -g + (c0 / a) * g * g + c1 * b / (c + t)

    steps = int(round(t_max / dt))
    g = g0
    t = 0.0
    worst = a0 / lam - g0
    for _ in range(steps):
        k1 = rhs(t, g)
        k2 = rhs(t + 0.5 * dt, g + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, g + 0.5 * dt * k2)
        k4 = rhs(t + dt, g + dt * k3)
        g = g + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
        margin = d / (c + t) ** b / lam - g
        if margin < worst:
            worst = margin
    return CheckReport(
        name="gronwall_majorant",
        passed=bool(worst > 0.0),
        worst_margin=float(worst),
        samples=steps + 1,
        tolerance=0.0,
    )


def gronwall_recipe(c0: float = 1.0, c1: float = 1.0, b: float = 1.0, c: float = 7.0):
    """Constructive parameters (schedule, lam, g0) that satisfy every
    precondition of :func:`check_gronwall_majorant` for given c0, c1."""
    lam = 4.0 * c0 / (1.0 - b / c)
    d = 4.0 * b * lam * c1
    schedule = ContinuousSchedule(d=d, c=c, b=b)
    g0 = schedule.a(0.0) / (2.0 * lam)
    return schedule, lam, g0


def _merge(name, reports):
    margins = [m for r in reports for m in (r.details if r.details else [r.worst_margin])]
    tol = max((r.tolerance for r in reports), default=0.0)
    merged = _report(name, margins, tol)
    merged.passed = all(r.passed for r in reports)
    return merged


def run_lemma_suite(
    kinds=("identity", "arctan3", "cubic"),
    n_points: int = 100,
    delta_rel: float = 0.01,
    sweep=None,
) -> list:
    """Run every check against each model kind, plus the model-independent
    scalar checks, and return the reports (names prefixed by model kind)."""
    from .harness import calibrate_noise, exact_solution, sine_noise
    from .hilbert import QuadratureGrid

    if sweep is None:
        sweep = np.logspace(1.0, -4.0, 20)
    reports = []
    for kind in kinds:
        grid = QuadratureGrid(n_points)
        model = OperatorModel(kind, grid)
        u_exact = exact_solution("step", grid)
        f = model.apply(u_exact)
        noise = sine_noise(grid)
        f_delta, delta = calibrate_noise(f, noise, delta_rel)

        traj = build_trajectory(model, f_delta, sweep)
        traj_exact = build_trajectory(model, f, sweep)

        r = check_monotonicity(traj)
        r.name = f"{kind}:{r.name}"
        reports.append(r)

        r = check_perturbation_bounds(traj, traj_exact, u_exact, norm(f_delta - f))
        r.name = f"{kind}:{r.name}"
        reports.append(r)

        r = check_large_a_limit(model, f_delta)
        r.name = f"{kind}:{r.name}"
        reports.append(r)

        crossing_schedule = ContinuousSchedule(d=1.0, c=7.0, b=1.0)
        t1 = find_crossing_time(model, f_delta, delta, 1.01, crossing_schedule)
        report = solve_regularized(model, f_delta, float(crossing_schedule.a(t1)))
        gap = abs(norm(model.apply(report.solution) - f_delta) - 1.01 * delta)
        reports.append(
            CheckReport(
                name=f"{kind}:discrepancy_crossing",
                passed=bool(gap <= 1e-8),
                worst_margin=float(1e-8 - gap),
                samples=1,
                tolerance=0.0,
            )
        )

        t_grid = np.linspace(0.0, 50.0, 101)
        traj_t = build_trajectory(model, f_delta, crossing_schedule.a(t_grid))
        r = check_weighted_integral_bound(crossing_schedule, t_grid, traj_t)
        r.name = f"{kind}:{r.name}"
        reports.append(r)

    rng = np.random.default_rng(2024)
    scalar_reports = []
    while len(scalar_reports) < 20:
        p = rng.uniform(0.2, 1.5)
        b = rng.uniform(0.3, 2.0)
        c = rng.uniform(0.5, 8.0)
        if p - b / c <= 0:
            continue
        t_values = np.sort(rng.uniform(0.0, 15.0, size=5))
        scalar_reports.append(check_exponential_integral_bound(p, b, c, t_values))
    reports.append(_merge("exp_integral_bound", scalar_reports))

    schedule, lam, g0 = gronwall_recipe()
    reports.append(check_gronwall_majorant(schedule, lam, 1.0, 1.0, g0))
    return reports


def reports_to_csv(reports, path):
    lines = ["name,passed,worst_margin,samples"]
    for r in reports:
        lines.append(f"{r.name},{str(r.passed).lower()},{r.worst_margin:.6g},{r.samples}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def format_reports(reports) -> str:
    rows = [("name", "passed", "worst_margin", "samples")]
    for r in reports:
        rows.append((r.name, str(r.passed).lower(), f"{r.worst_margin:.6g}", str(r.samples)))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    out = []
    for k, row in enumerate(rows):
        out.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if k == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out)
