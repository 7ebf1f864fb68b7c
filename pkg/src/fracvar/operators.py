"""Meshes, sampled curves, Grunwald-Letnikov finite differences, and error metrics.

The discrete operators act on function samples over a uniform grid
a = t_0 < t_1 < ... < t_n = b.  Curves are zero-extended outside [a, b],
which is what makes the truncated Grunwald-Letnikov sums well-defined at
every node.  Exact reference derivatives for the standard test functions
(powers, exponentials, powers of log) are provided as analytic oracles.
"""

import math
from dataclasses import dataclass

import numpy as np

from .specfun import gamma, mittag_leffler


class MeshMismatchError(ValueError):
    """Two curves that must share a mesh do not."""


@dataclass(frozen=True)
class Mesh:
    """Uniform grid on [a, b] with n subintervals; node t_i = a + i*h."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"mesh requires a < b, got a={self.a}, b={self.b}")
        if self.n < 1:
            raise ValueError(f"mesh requires n >= 1, got n={self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    def nodes(self) -> np.ndarray:
        return self.a + np.arange(self.n + 1) * self.h


@dataclass(frozen=True)
class SampledCurve:
    """Function values on the nodes of a mesh (length n+1, all finite)."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.mesh.n + 1,):
            raise ValueError(
                f"expected {self.mesh.n + 1} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("curve values must all be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, mesh: Mesh, f) -> "SampledCurve":
        return cls(mesh, np.array([f(t) for t in mesh.nodes()], dtype=float))


@dataclass(frozen=True)
class GlWeights:
    """Grunwald-Letnikov weights w_k = (-1)^k binom(alpha, k), k = 0..K.

    Built by the recurrence w_0 = 1, w_k = w_{k-1} * (k - 1 - alpha) / k,
    equivalent to the closed form; in particular w_1 = -alpha.
    """

    alpha: float
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        w.flags.writeable = False
        object.__setattr__(self, "w", w)


def gl_weights(alpha: float, K: int) -> GlWeights:
    """Weight table w_k = (-1)^k binom(alpha, k) for k = 0..K, alpha in (0,1)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if K < 0:
        raise ValueError(f"K must be nonnegative, got {K}")
    w = np.empty(K + 1)
    w[0] = 1.0
    for k in range(1, K + 1):
        w[k] = w[k - 1] * (k - 1.0 - alpha) / k
    return GlWeights(alpha, w)


def gl_left(curve: SampledCurve, alpha: float, i: int) -> float:
    """Left GL derivative at node i: h^(-alpha) * sum_{k=0..i} w_k x_{i-k}."""
    _check_index(curve, i)
    w = gl_weights(alpha, i).w
    x = curve.values
    return float(np.dot(w, x[i::-1])) / curve.mesh.h**alpha


def gl_right(curve: SampledCurve, alpha: float, i: int) -> float:
    """Right GL derivative at node i: h^(-alpha) * sum_{k=0..n-i} w_k x_{i+k}."""
    _check_index(curve, i)
    n = curve.mesh.n
    w = gl_weights(alpha, n - i).w
    x = curve.values
    return float(np.dot(w, x[i:])) / curve.mesh.h**alpha


def gl_left_all(curve: SampledCurve, alpha: float) -> np.ndarray:
    """Left GL derivative at every node at once (correlation form of gl_left)."""
    n = curve.mesh.n
    w = gl_weights(alpha, n).w
    x = curve.values
    d = np.convolve(w, x)[: n + 1]
    return d / curve.mesh.h**alpha


def gl_right_all(curve: SampledCurve, alpha: float) -> np.ndarray:
    """Right GL derivative at every node at once (mirror of gl_left_all)."""
    n = curve.mesh.n
    w = gl_weights(alpha, n).w
    x = curve.values
    d = np.convolve(w, x[::-1])[: n + 1][::-1]
    return d / curve.mesh.h**alpha


def gl_shifted_left(curve: SampledCurve, alpha: float, i: int) -> float:
    """Shifted left GL derivative: h^(-alpha) * sum_{k=0..i} w_k x(t_i - (k-1)h).

    The stencil references x at t_i + h, so i must not exceed n - 1.
    """
    _check_index(curve, i)
    n = curve.mesh.n
    if i + 1 > n:
        raise IndexError(f"shifted stencil needs node {i + 1}, mesh ends at {n}")
    w = gl_weights(alpha, i).w
    x = curve.values
    return float(np.dot(w, x[i + 1 : 0 : -1])) / curve.mesh.h**alpha


def diethelm_caputo(
    curve: SampledCurve, alpha: float, boundary_derivs, i: int
) -> float:
    """Diethelm backward finite difference value of the Caputo derivative.

    With ``boundary_derivs[k] = x^(k)(a)`` for k = 0..floor(alpha):

        h^(-alpha)/Gamma(2-alpha) * sum_{j=0..i} a_{i,j} *
            ( x_{i-j} - sum_k ((i-j)^k h^k / k!) x^(k)(a) )

    where a_{i,0} = 1, a_{i,j} = (j+1)^(1-alpha) - 2 j^(1-alpha) + (j-1)^(1-alpha)
    for 0 < j < i, and a_{i,i} = (1-alpha) i^(-alpha) - i^(1-alpha) + (i-1)^(1-alpha).
    The scheme is O(h^(2-alpha)) accurate.

    Only 0 < alpha < 1 is supported: for alpha in (1, 2) the three-case weight
    table contains 0^(1-alpha) at j = 1 and is not well-defined as stated.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(
            f"alpha must lie in (0, 1), got {alpha!r}; the backward-difference "
            "weight table is singular for alpha in (1, 2)"
        )
    _check_index(curve, i)
    m = math.floor(alpha)
    derivs = np.asarray(boundary_derivs, dtype=float)
    if derivs.shape != (m + 1,):
        raise ValueError(f"need boundary derivatives of orders 0..{m}")
    h = curve.mesh.h
    x = curve.values
    total = 0.0
    for j in range(i + 1):
        taylor = sum(
            derivs[k] * ((i - j) * h) ** k / math.factorial(k) for k in range(m + 1)
        )
        total += _diethelm_weight(alpha, i, j) * (x[i - j] - taylor)
    return total * h ** (-alpha) / gamma(2.0 - alpha)


def diethelm_weight(alpha: float, i: int, j: int) -> float:
    """Quadrature weight a_{i,j} of the Diethelm backward difference scheme."""
    if not 0 <= j <= i:
        raise ValueError(f"need 0 <= j <= i, got i={i}, j={j}")
    return _diethelm_weight(alpha, i, j)


def _diethelm_weight(alpha: float, i: int, j: int) -> float:
    s = 1.0 - alpha
    if j == 0:
        return 1.0
    if j < i:
        return (j + 1.0) ** s - 2.0 * j**s + (j - 1.0) ** s
    return (1.0 - alpha) * i ** (-alpha) - i**s + (i - 1.0) ** s


def rl_power_exact(nu: float, alpha: float, t: float, a: float) -> float:
    """Exact left Riemann-Liouville derivative of (t-a)^nu:

        Gamma(nu+1)/Gamma(nu+1-alpha) * (t-a)^(nu-alpha),  nu > -1, t > a.
    """
    if nu <= -1.0:
        raise ValueError(f"nu must exceed -1, got {nu!r}")
    if not t > a:
        raise ValueError(f"need t > a, got t={t}, a={a}")
    return gamma(nu + 1.0) / gamma(nu + 1.0 - alpha) * (t - a) ** (nu - alpha)


def rl_exp_exact(lam: float, alpha: float, t: float) -> float:
    """Exact left RL derivative (from 0) of exp(lam*t):

        t^(-alpha) * E_{1, 1-alpha}(lam * t),  t > 0.
    """
    if not t > 0.0:
        raise ValueError(f"need t > 0, got {t!r}")
    return t ** (-alpha) * mittag_leffler(1.0, 1.0 - alpha, lam * t)


def hadamard_logpow_exact(beta: float, alpha: float, t: float) -> float:
    """Exact left Hadamard derivative (terminal a = 1) of (ln t)^beta:

        Gamma(beta+1)/Gamma(beta+1-alpha) * (ln t)^(beta-alpha),  t > 1.
    """
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    if not t > 1.0:
        raise ValueError(f"need t > 1, got {t!r}")
    lt = np.log(t)
    return gamma(beta + 1.0) / gamma(beta + 1.0 - alpha) * lt ** (beta - alpha)


def l2_error(x: SampledCurve, y: SampledCurve) -> float:
    """L2 distance ( integral of (x-y)^2 )^(1/2), composite trapezoid rule."""
    _check_same_mesh(x, y)
    diff2 = (x.values - y.values) ** 2
    return float(np.sqrt(np.trapezoid(diff2, dx=x.mesh.h)))


def max_error(x: SampledCurve, y: SampledCurve) -> float:
    """Maximum node-wise deviation over the interior nodes i = 1..n-1.

    Endpoints carry prescribed boundary data, not approximations, so they
    are excluded.  Returns 0 when the mesh has no interior nodes.
    """
    _check_same_mesh(x, y)
    if x.mesh.n < 2:
        return 0.0
    return float(np.max(np.abs(x.values[1:-1] - y.values[1:-1])))


def _check_same_mesh(x: SampledCurve, y: SampledCurve) -> None:
    if x.mesh != y.mesh:
        raise MeshMismatchError(f"mesh mismatch: {x.mesh} vs {y.mesh}")


def _check_index(curve: SampledCurve, i: int) -> None:
    if not 0 <= i <= curve.mesh.n:
        raise IndexError(f"node index {i} outside 0..{curve.mesh.n}")
