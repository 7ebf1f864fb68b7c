import math

import numpy as np
import pytest

from fracvar.operators import (
    GlWeights,
    Mesh,
    MeshMismatchError,
    SampledCurve,
    diethelm_caputo,
    diethelm_weight,
    gl_left,
    gl_left_all,
    gl_right,
    gl_right_all,
    gl_shifted_left,
    gl_weights,
    hadamard_logpow_exact,
    l2_error,
    max_error,
    rl_exp_exact,
    rl_power_exact,
)
from fracvar.specfun import GammaPoleError, gamma, gen_binomial

GAMMA_25 = 1.3293403881791370


def curve_of(f, a=0.0, b=1.0, n=100):
    return SampledCurve.from_function(Mesh(a, b, n), f)


# ---------------------------------------------------------------------------
# mesh / curve plumbing
# ---------------------------------------------------------------------------


def test_mesh_validation_and_nodes():
    with pytest.raises(ValueError):
        Mesh(1.0, 0.0, 10)
    with pytest.raises(ValueError):
        Mesh(0.0, 1.0, 0)
    mesh = Mesh(0.0, 1.0, 4)
    assert mesh.h == 0.25
    assert np.allclose(mesh.nodes(), [0.0, 0.25, 0.5, 0.75, 1.0])


def test_sampled_curve_validation():
    mesh = Mesh(0.0, 1.0, 3)
    with pytest.raises(ValueError):
        SampledCurve(mesh, np.zeros(3))
    with pytest.raises(ValueError):
        SampledCurve(mesh, np.array([0.0, 1.0, np.nan, 2.0]))


# ---------------------------------------------------------------------------
# GL weights
# ---------------------------------------------------------------------------


def test_gl_weights_example():
    w = gl_weights(0.5, 2).w
    assert np.allclose(w, [1.0, -0.5, -0.125], atol=1e-15)


def test_gl_weights_zero_order():
    assert gl_weights(0.3, 0).w.tolist() == [1.0]


def test_gl_weights_match_closed_form():
    for alpha in (0.3, 0.5, 0.7):
        w = gl_weights(alpha, 50).w
        assert w[1] == pytest.approx(-alpha, abs=1e-15)
        for k in range(51):
            closed = (-1.0) ** k * gen_binomial(alpha, k)
            assert abs(w[k] - closed) <= 1e-12 * max(1.0, abs(closed))


def test_gl_weight_partial_sums_decrease_to_zero():
    # sum_k (-1)^k binom(alpha, k) telescopes to 0; partial sums shrink
    w = gl_weights(0.5, 10**4).w
    partial = np.cumsum(w)
    checkpoints = [partial[10], partial[100], partial[1000], partial[10**4]]
    assert all(p > 0 for p in checkpoints)
    assert all(a > b for a, b in zip(checkpoints, checkpoints[1:]))
    assert checkpoints[-1] < 0.01


def test_gl_weights_validation():
    with pytest.raises(ValueError):
        gl_weights(1.0, 5)
    with pytest.raises(ValueError):
        gl_weights(0.5, -1)


# ---------------------------------------------------------------------------
# GL operators
# ---------------------------------------------------------------------------


def test_gl_left_constant_at_origin():
    c = curve_of(lambda t: 3.0, n=10)
    assert gl_left(c, 0.5, 0) == pytest.approx(3.0 * c.mesh.h**-0.5, rel=1e-14)


def test_gl_left_zero_curve():
    c = curve_of(lambda t: 0.0, n=10)
    assert all(gl_left(c, 0.5, i) == 0.0 for i in range(11))


def test_gl_left_first_order_convergence_at_t1():
    # exact D^0.5 t^2 at t=1 is 2/Gamma(2.5); halving h should halve the error
    errors = []
    for n in (100, 200):
        c = curve_of(lambda t: t * t, n=n)
        errors.append(abs(gl_left(c, 0.5, n) - 2.0 / GAMMA_25))
    assert 1.6 <= errors[0] / errors[1] <= 2.4


@pytest.mark.parametrize("nu", [2, 3])
@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_gl_left_first_order_on_power_matrix(nu, alpha):
    def max_interior_err(n):
        c = curve_of(lambda t: t**nu, n=n)
        d = gl_left_all(c, alpha)
        t = c.mesh.nodes()
        return max(
            abs(d[i] - rl_power_exact(float(nu), alpha, t[i], 0.0)) for i in range(1, n)
        )

    ratio = max_interior_err(100) / max_interior_err(200)
    assert 1.6 <= ratio <= 2.4


def test_gl_left_all_matches_pointwise():
    c = curve_of(lambda t: t**3, n=50)
    d = gl_left_all(c, 0.3)
    for i in (0, 1, 25, 50):
        assert d[i] == pytest.approx(gl_left(c, 0.3, i), rel=1e-13)


def test_gl_right_mirror_of_left():
    # x(t) = (1-t)^2 at t=0 mirrors t^2 at t=1
    for n in (100, 200):
        c = curve_of(lambda t: (1.0 - t) ** 2, n=n)
        cl = curve_of(lambda t: t * t, n=n)
        assert gl_right(c, 0.5, 0) == pytest.approx(gl_left(cl, 0.5, n), rel=1e-12)


def test_gl_right_constant_at_right_end():
    c = curve_of(lambda t: 2.0, n=10)
    assert gl_right(c, 0.5, 10) == pytest.approx(2.0 * c.mesh.h**-0.5, rel=1e-14)


def test_gl_right_all_matches_pointwise():
    c = curve_of(lambda t: np.exp(t), n=40)
    d = gl_right_all(c, 0.7)
    for i in (0, 17, 40):
        assert d[i] == pytest.approx(gl_right(c, 0.7, i), rel=1e-13)


def test_gl_linearity():
    rng = np.random.default_rng(3)
    mesh = Mesh(0.0, 1.0, 30)
    x = SampledCurve(mesh, rng.standard_normal(31))
    y = SampledCurve(mesh, rng.standard_normal(31))
    combo = SampledCurve(mesh, 2.0 * x.values - 3.0 * y.values)
    for i in (0, 10, 30):
        left = gl_left(combo, 0.5, i)
        expect = 2.0 * gl_left(x, 0.5, i) - 3.0 * gl_left(y, 0.5, i)
        assert abs(left - expect) <= 1e-12 * max(1.0, abs(expect))
        right = gl_right(combo, 0.5, i)
        expect = 2.0 * gl_right(x, 0.5, i) - 3.0 * gl_right(y, 0.5, i)
        assert abs(right - expect) <= 1e-12 * max(1.0, abs(expect))


def test_gl_shifted_left_zero_and_single_term():
    c = curve_of(lambda t: 0.0, n=10)
    assert gl_shifted_left(c, 0.5, 3) == 0.0
    c = curve_of(lambda t: t, n=10)
    # i=0 stencil reads x_1 only
    assert gl_shifted_left(c, 0.5, 0) == pytest.approx(
        c.values[1] * c.mesh.h**-0.5, rel=1e-14
    )


def test_gl_shifted_left_interior_accuracy():
    n = 200
    c = curve_of(lambda t: t * t, n=n)
    t = c.mesh.nodes()
    i = n // 2
    exact = rl_power_exact(2.0, 0.5, t[i], 0.0)
    assert abs(gl_shifted_left(c, 0.5, i) - exact) < 10.0 * c.mesh.h


def test_gl_shifted_left_stencil_bounds():
    c = curve_of(lambda t: t, n=10)
    with pytest.raises(IndexError):
        gl_shifted_left(c, 0.5, 10)


# ---------------------------------------------------------------------------
# Diethelm scheme
# ---------------------------------------------------------------------------


def test_diethelm_weights_three_cases():
    alpha = 0.5
    assert diethelm_weight(alpha, 0, 0) == 1.0
    assert diethelm_weight(alpha, 5, 0) == 1.0
    for i, j in ((5, 2), (9, 4)):
        expect = (j + 1) ** (1 - alpha) - 2 * j ** (1 - alpha) + (j - 1) ** (1 - alpha)
        assert diethelm_weight(alpha, i, j) == pytest.approx(expect, rel=1e-14)
    i = 7
    expect = (1 - alpha) * i**-alpha - i ** (1 - alpha) + (i - 1) ** (1 - alpha)
    assert diethelm_weight(alpha, i, i) == pytest.approx(expect, rel=1e-14)


@pytest.mark.parametrize("nu", [2, 3])
def test_diethelm_convergence_order(nu):
    # t^nu with x(0) = 0: Caputo equals RL; theoretical order is 2 - alpha = 1.5
    def max_err(n):
        c = curve_of(lambda t: t**nu, n=n)
        t = c.mesh.nodes()
        return max(
            abs(
                diethelm_caputo(c, 0.5, [0.0], i)
                - rl_power_exact(float(nu), 0.5, t[i], 0.0)
            )
            for i in range(1, n)
        )

    order = math.log2(max_err(100) / max_err(200))
    assert order >= 1.3


def test_diethelm_validates_alpha_and_derivs():
    c = curve_of(lambda t: t, n=10)
    with pytest.raises(ValueError):
        diethelm_caputo(c, 1.0, [0.0], 5)
    with pytest.raises(ValueError):
        diethelm_caputo(c, 2.5, [0.0], 5)
    # weight table is singular on (1, 2); rejected with an explanatory error
    with pytest.raises(ValueError):
        diethelm_caputo(c, 1.5, [0.0, 0.0], 5)
    with pytest.raises(ValueError):
        diethelm_caputo(c, 0.5, [0.0, 0.0], 5)  # too many boundary derivatives


# ---------------------------------------------------------------------------
# exact reference derivatives
# ---------------------------------------------------------------------------


def test_rl_power_exact_values():
    assert rl_power_exact(2.0, 0.5, 1.0, 0.0) == pytest.approx(
        1.5045055561273501, rel=1e-13
    )
    for alpha in (0.3, 0.5, 0.9):
        for t in (0.2, 1.0, 3.0):
            assert rl_power_exact(alpha, alpha, t, 0.0) == pytest.approx(
                gamma(alpha + 1.0), rel=1e-13
            )
    # leading coefficient of the quintic test problem
    assert rl_power_exact(5.0, 0.5, 1.0, 0.0) == pytest.approx(
        gamma(6.0) / gamma(5.5), rel=1e-13
    )


def test_rl_power_exact_pole_propagates():
    with pytest.raises(GammaPoleError):
        rl_power_exact(-0.5, 0.5, 1.0, 0.0)  # Gamma(0) pole


def test_rl_exp_exact_zero_rate():
    for alpha in (0.3, 0.7):
        for t in (0.5, 2.0):
            assert rl_exp_exact(0.0, alpha, t) == pytest.approx(
                t**-alpha / gamma(1.0 - alpha), rel=1e-13
            )


def test_rl_exp_exact_golden():
    # t^(-1/2) E_{1,1/2}(2t) at t=1; series golden from the 200-term oracle
    assert rl_exp_exact(2.0, 0.5, 1.0) == pytest.approx(10.538428671807383, rel=1e-13)


def test_rl_exp_exact_vs_gl():
    n = 5000  # h = 1e-4 on [0, 0.5]
    c = SampledCurve.from_function(Mesh(0.0, 0.5, n), math.exp)
    assert abs(gl_left(c, 0.5, n) - rl_exp_exact(1.0, 0.5, 0.5)) < 2e-3


def test_hadamard_logpow_exact_values():
    assert hadamard_logpow_exact(1.0, 0.5, math.e) == pytest.approx(
        1.1283791670955126, rel=1e-13
    )
    for alpha in (0.3, 0.5):
        assert hadamard_logpow_exact(alpha, alpha, 2.0) == pytest.approx(
            gamma(alpha + 1.0), rel=1e-13
        )
    # sqrt(ln 2)/Gamma(1.5), cross-checked against a 50-digit quadrature of the
    # absolutely-continuous representation
    assert hadamard_logpow_exact(1.0, 0.5, 2.0) == pytest.approx(
        0.93943727869965133, rel=1e-13
    )


# ---------------------------------------------------------------------------
# error metrics
# ---------------------------------------------------------------------------


def test_errors_zero_for_identical():
    c = curve_of(lambda t: t**2, n=20)
    assert l2_error(c, c) == 0.0
    assert max_error(c, c) == 0.0


def test_l2_error_constant_difference():
    x = curve_of(lambda t: 1.5, n=50)
    y = curve_of(lambda t: 0.5, n=50)
    assert l2_error(x, y) == pytest.approx(1.0, rel=1e-13)


def test_l2_error_linear_difference():
    x = curve_of(lambda t: t, n=200)
    y = curve_of(lambda t: 0.0, n=200)
    assert l2_error(x, y) == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-4)


def test_max_error_interior_only():
    mesh = Mesh(0.0, 1.0, 4)
    base = SampledCurve(mesh, np.zeros(5))
    bumped = SampledCurve(mesh, np.array([0.0, 0.0, 0.3, 0.0, 0.0]))
    assert max_error(base, bumped) == pytest.approx(0.3)
    endpoints = SampledCurve(mesh, np.array([7.0, 0.0, 0.0, 0.0, -7.0]))
    assert max_error(base, endpoints) == 0.0


def test_errors_symmetric_and_mesh_checked():
    x = curve_of(lambda t: t, n=30)
    y = curve_of(lambda t: t**2, n=30)
    assert l2_error(x, y) == l2_error(y, x)
    assert max_error(x, y) == max_error(y, x)
    z = curve_of(lambda t: t, n=31)
    with pytest.raises(MeshMismatchError):
        l2_error(x, z)
    with pytest.raises(MeshMismatchError):
        max_error(x, z)


def test_gl_weights_frozen_values_are_immutable():
    w = gl_weights(0.5, 5)
    assert isinstance(w, GlWeights)
    with pytest.raises(ValueError):
        w.w[0] = 2.0
