"""Euler-like direct method for fractional variational problems.

The functional J[x] = integral_a^b L(t, x, x', D^alpha x) dt is discretized
on a uniform mesh: left-endpoint-free rectangular quadrature over the cells,
backward differences for x', and the truncated Grunwald-Letnikov sum for the
fractional derivative.  That turns J into a function Psi of the interior
node values, and minimizers are sought as solutions of the stationarity
system dPsi/dx_i = 0 (linear solve for quadratic Lagrangians, damped Newton
otherwise).

The three catalog problems with known minimizers come with dedicated system
assemblies, used as independent cross-checks of the generic machinery.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .operators import Mesh, SampledCurve, gl_left_all, gl_right_all, gl_weights
from .specfun import gamma, gen_binomial


class NewtonConvergenceError(RuntimeError):
    """Damped Newton failed to reach the residual tolerance."""


class SingularSystemError(RuntimeError):
    """A stationarity or collocation system was numerically singular."""


@dataclass(frozen=True)
class LagrangianSpec:
    """Integrand L(t, x, xdot, dalpha) with its three partial derivatives.

    All evaluators take the full argument tuple; Lagrangians that do not
    depend on xdot simply ignore that slot and set ``uses_xdot=False`` so
    the stationarity assembly skips the xdot chain terms.
    """

    L: Callable
    dL_dx: Callable
    dL_dxdot: Callable
    dL_ddalpha: Callable
    uses_xdot: bool = False


@dataclass(frozen=True)
class DirectProblem:
    """One-variable fractional variational problem with fixed endpoints."""

    a: float
    b: float
    x_a: float
    x_b: float
    alpha: float
    lagrangian: LagrangianSpec

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")


@dataclass(frozen=True)
class StationaritySystem:
    """Residual map of the discrete stationarity conditions dPsi/dx_i = 0.

    ``residual`` maps the interior values (x_1..x_{n-1}) to the scaled
    gradient dPsi/dx_i / h; it vanishes exactly at discrete minimizers.
    """

    n: int
    residual: Callable


def _assemble_state(problem: DirectProblem, n: int, interior: np.ndarray):
    """Full node vector, nodes, xdot and D^alpha arrays for given interior values."""
    mesh = Mesh(problem.a, problem.b, n)
    x = np.empty(n + 1)
    x[0] = problem.x_a
    x[-1] = problem.x_b
    x[1:-1] = interior
    t = mesh.nodes()
    h = mesh.h
    xdot = np.empty(n + 1)
    xdot[0] = 0.0  # never used: quadrature runs over i = 1..n
    xdot[1:] = (x[1:] - x[:-1]) / h
    w = gl_weights(problem.alpha, n).w
    dalpha = np.convolve(w, x)[: n + 1] / h**problem.alpha
    return mesh, t, h, x, xdot, dalpha


def discretize(problem: DirectProblem, n: int) -> Callable:
    """Discretized functional Psi(x_1..x_{n-1}) =
    h * sum_{i=1..n} L(t_i, x_i, (x_i - x_{i-1})/h, h^(-alpha) sum w_k x_{i-k})."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    lag = problem.lagrangian

    def psi(interior) -> float:
        interior = np.asarray(interior, dtype=float)
        _, t, h, x, xdot, dalpha = _assemble_state(problem, n, interior)
        total = 0.0
        for i in range(1, n + 1):
            total += lag.L(t[i], x[i], xdot[i], dalpha[i])
        return h * total

    return psi


def stationarity(problem: DirectProblem, n: int) -> StationaritySystem:
    """Stationarity residual (the gradient of Psi, scaled by 1/h):

        r_i = dL/dx(t_i) + h^(-alpha) sum_{k=0..n-i} w_k dL/dD(t_{i+k})
              + (1/h) [dL/dxdot(t_i) - dL/dxdot(t_{i+1})]    (xdot terms
              present only when the Lagrangian uses xdot)
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    lag = problem.lagrangian
    w = gl_weights(problem.alpha, n).w

    def residual(interior) -> np.ndarray:
        interior = np.asarray(interior, dtype=float)
        _, t, h, x, xdot, dalpha = _assemble_state(problem, n, interior)
        dLdD = np.array(
            [lag.dL_ddalpha(t[i], x[i], xdot[i], dalpha[i]) for i in range(n + 1)]
        )
        r = np.empty(n - 1)
        hma = h**-problem.alpha
        for i in range(1, n):
            r[i - 1] = lag.dL_dx(t[i], x[i], xdot[i], dalpha[i]) + hma * float(
                np.dot(w[: n - i + 1], dLdD[i:])
            )
            if lag.uses_xdot:
                r[i - 1] += (
                    lag.dL_dxdot(t[i], x[i], xdot[i], dalpha[i])
                    - lag.dL_dxdot(t[i + 1], x[i + 1], xdot[i + 1], dalpha[i + 1])
                ) / h
        return r

    return StationaritySystem(n, residual)


def solve_direct(
    problem: DirectProblem,
    n: int,
    newton_tol: float = 1e-10,
    max_iter: int = 50,
    linear: bool = False,
) -> SampledCurve:
    """Solve the discrete stationarity system on an n-subinterval mesh.

    ``linear=True`` performs a single dense solve (valid when the residual
    is affine in the unknowns, i.e. quadratic Lagrangians).  Otherwise a
    damped Newton iteration runs from the linear interpolant of the boundary
    values, with a forward-difference Jacobian, halving the step up to 30
    times whenever the residual norm does not decrease.
    """
    system = stationarity(problem, n)
    mesh = Mesh(problem.a, problem.b, n)
    t = mesh.nodes()
    guess = problem.x_a + (problem.x_b - problem.x_a) * (t[1:-1] - problem.a) / (
        problem.b - problem.a
    )
    if linear:
        interior = _solve_affine(system.residual, n - 1)
    else:
        interior = _newton(system.residual, guess, newton_tol, max_iter)
    x = np.empty(n + 1)
    x[0] = problem.x_a
    x[-1] = problem.x_b
    x[1:-1] = interior
    return SampledCurve(mesh, x)


def _solve_affine(residual: Callable, m: int) -> np.ndarray:
    rhs = residual(np.zeros(m))
    jac = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = 1.0
        jac[:, j] = residual(e) - rhs
    try:
        return np.linalg.solve(jac, -rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"affine stationarity system singular: {exc}") from exc


def _newton(
    residual: Callable, guess: np.ndarray, tol: float, max_iter: int
) -> np.ndarray:
    x = np.array(guess, dtype=float)
    r = residual(x)
    rnorm = np.max(np.abs(r))
    if rnorm < tol:
        return x
    for _ in range(max_iter):
        jac = _numeric_jacobian(residual, x, r)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(f"Newton Jacobian singular: {exc}") from exc
        damping = 1.0
        for _ in range(30):
            x_new = x + damping * step
            r_new = residual(x_new)
            rnorm_new = np.max(np.abs(r_new))
            if rnorm_new < rnorm or damping <= 2.0**-30:
                break
            damping *= 0.5
        x, r, rnorm = x_new, r_new, rnorm_new
        if rnorm < tol:
            return x
    raise NewtonConvergenceError(
        f"Newton did not reach tol={tol} within {max_iter} iterations "
        f"(residual norm {rnorm:.3e})"
    )


def _numeric_jacobian(residual: Callable, x: np.ndarray, r0: np.ndarray) -> np.ndarray:
    m = len(x)
    jac = np.empty((m, m))
    sqrt_eps = math.sqrt(np.finfo(float).eps)
    for j in range(m):
        step = sqrt_eps * (1.0 + abs(x[j]))
        xp = x.copy()
        xp[j] += step
        jac[:, j] = (residual(xp) - r0) / step
    return jac


# ---------------------------------------------------------------------------
# catalog problems and their dedicated assemblies
# ---------------------------------------------------------------------------


def _f1(t: float) -> float:
    """Target fractional derivative of Example 1: D^{1/2} t^2 = 2 t^{3/2} / Gamma(2.5)."""
    return 2.0 / gamma(2.5) * t**1.5


def example1_problem() -> DirectProblem:
    """Quadratic tracking of D^{1/2} t^2 on [0,1]; minimizer x(t) = t^2."""
    lag = LagrangianSpec(
        L=lambda t, x, xd, d: (d - _f1(t)) ** 2,
        dL_dx=lambda t, x, xd, d: 0.0,
        dL_dxdot=lambda t, x, xd, d: 0.0,
        dL_ddalpha=lambda t, x, xd, d: 2.0 * (d - _f1(t)),
        uses_xdot=False,
    )
    return DirectProblem(0.0, 1.0, 0.0, 1.0, 0.5, lag)


def example2_problem(alpha: float = 0.5) -> DirectProblem:
    """Lagrangian D^alpha x - (x')^2 on [0,1]; solved by the indirect module's
    closed form (see indirect.analytic_solution_example2)."""
    lag = LagrangianSpec(
        L=lambda t, x, xd, d: d - xd**2,
        dL_dx=lambda t, x, xd, d: 0.0,
        dL_dxdot=lambda t, x, xd, d: -2.0 * xd,
        dL_ddalpha=lambda t, x, xd, d: 1.0,
        uses_xdot=True,
    )
    return DirectProblem(0.0, 1.0, 0.0, 1.0, alpha, lag)


def example3_phi(t):
    """Fractional-derivative image of Example 3's minimizer 16t^5 - 20t^3 + 5t:

        phi(t) = 16 Gamma(6)/Gamma(5.5) t^4.5 - 20 Gamma(4)/Gamma(3.5) t^2.5
                 + 5/Gamma(1.5) t^0.5
    """
    return (
        16.0 * gamma(6.0) / gamma(5.5) * t**4.5
        - 20.0 * gamma(4.0) / gamma(3.5) * t**2.5
        + 5.0 / gamma(1.5) * t**0.5
    )


def example3_minimizer(t):
    return 16.0 * t**5 - 20.0 * t**3 + 5.0 * t


def example3_problem() -> DirectProblem:
    """Quartic tracking problem on [0,1] with oscillating minimizer
    16t^5 - 20t^3 + 5t; its stationarity system is nonlinear (cubic)."""
    lag = LagrangianSpec(
        L=lambda t, x, xd, d: (d - example3_phi(t)) ** 4,
        dL_dx=lambda t, x, xd, d: 0.0,
        dL_dxdot=lambda t, x, xd, d: 0.0,
        dL_ddalpha=lambda t, x, xd, d: 4.0 * (d - example3_phi(t)) ** 3,
        uses_xdot=False,
    )
    return DirectProblem(0.0, 1.0, 0.0, 1.0, 0.5, lag)


def example1_system(n: int):
    """Explicit normal equations of Example 1's quadratic Psi, as (matrix, rhs).

    With A_i = (-1)^i h^{3/2} binom(1/2, i), entry (j, m) is
    sum_{i=max(j,m)..n} A_{i-j} A_{i-m} and
    b_j = sum_{k=0..n-j} (2 h^2 A_k / Gamma(2.5)) t_{k+j}^{3/2} - A_{n-j} A_0 x_n,
    the x_0 column dropping out because x(0) = 0.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    h = 1.0 / n
    A = np.array([(-1.0) ** i * h**1.5 * gen_binomial(0.5, i) for i in range(n + 1)])
    t = np.arange(n + 1) * h
    mat = np.empty((n - 1, n - 1))
    for j in range(1, n):
        for m in range(1, n):
            lo = max(j, m)
            mat[j - 1, m - 1] = float(np.dot(A[lo - j : n + 1 - j], A[lo - m : n + 1 - m]))
    x_n = 1.0
    rhs = np.empty(n - 1)
    for j in range(1, n):
        rhs[j - 1] = (
            2.0 * h**2 / gamma(2.5) * float(np.dot(A[: n - j + 1], t[j:] ** 1.5))
            - A[n - j] * A[0] * x_n
        )
    return mat, rhs


def example2_system(n: int):
    """Tridiagonal [-1, 2, -1] system of Example 2 (alpha = 1/2), as (matrix, rhs):

        b_i = (h/2) sum_{k=0..n-i} (-1)^k h^{1/2} binom(1/2, k),  i = 1..n-1,

    with b_{n-1} boundary-adjusted by +x_n (and b_1 by +x_0 = 0).
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    h = 1.0 / n
    w = gl_weights(0.5, n).w  # w_k = (-1)^k binom(1/2, k)
    mat = np.zeros((n - 1, n - 1))
    np.fill_diagonal(mat, 2.0)
    idx = np.arange(n - 2)
    mat[idx, idx + 1] = -1.0
    mat[idx + 1, idx] = -1.0
    rhs = np.array([0.5 * h**1.5 * float(np.sum(w[: n - i + 1])) for i in range(1, n)])
    x_0, x_n = 0.0, 1.0
    rhs[0] += x_0
    rhs[-1] += x_n
    return mat, rhs


def example3_residual(xvec: np.ndarray, n: int) -> np.ndarray:
    """Nonlinear stationarity residual of Example 3 (up to the constant 4h^{1-alpha}):

        r_j = sum_{i=j..n} w_{i-j} (h^{-1/2} sum_{k=0..i} w_k x_{i-k} - phi(t_i))^3
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    xvec = np.asarray(xvec, dtype=float)
    if xvec.shape != (n - 1,):
        raise ValueError(f"expected {n - 1} interior values, got {xvec.shape}")
    h = 1.0 / n
    x = np.concatenate(([0.0], xvec, [1.0]))
    t = np.arange(n + 1) * h
    w = gl_weights(0.5, n).w
    d = np.convolve(w, x)[: n + 1] / h**0.5
    cubes = (d - example3_phi(t)) ** 3
    return np.array(
        [float(np.dot(w[: n - j + 1], cubes[j:])) for j in range(1, n)]
    )


def euler_lagrange_residual(curve: SampledCurve, problem: DirectProblem) -> SampledCurve:
    """Node-wise fractional Euler-Lagrange residual of a curve:

        dL/dx + D_b^alpha [dL/dD]  (- d/dt dL/dxdot when the Lagrangian
        uses xdot),

    with the left GL operator inside the partials, the right GL operator
    applied to the sampled dL/dD curve, and central differences for the
    outer d/dt (one-sided at the endpoints).
    """
    if curve.mesh.a != problem.a or curve.mesh.b != problem.b:
        raise ValueError("curve interval does not match the problem interval")
    lag = problem.lagrangian
    n = curve.mesh.n
    t = curve.mesh.nodes()
    h = curve.mesh.h
    x = curve.values
    xdot = np.gradient(x, h)
    dalpha = gl_left_all(curve, problem.alpha)
    dLdD = SampledCurve(
        curve.mesh,
        np.array([lag.dL_ddalpha(t[i], x[i], xdot[i], dalpha[i]) for i in range(n + 1)]),
    )
    res = gl_right_all(dLdD, problem.alpha)
    res += np.array(
        [lag.dL_dx(t[i], x[i], xdot[i], dalpha[i]) for i in range(n + 1)]
    )
    if lag.uses_xdot:
        dLdxd = np.array(
            [lag.dL_dxdot(t[i], x[i], xdot[i], dalpha[i]) for i in range(n + 1)]
        )
        res -= np.gradient(dLdxd, h)
    return SampledCurve(curve.mesh, res)
