"""fracvar: fractional derivatives and fractional variational problem solvers.

The package approximates Riemann-Liouville, Caputo, Grunwald-Letnikov and
Hadamard derivatives of order alpha in (0, 1) by finite differences and by
two expansion families (integer-order and moment-based), and solves scalar
fractional variational problems by a direct Euler-like discretization and by
indirect expansion-based reductions to classical boundary value problems.

Subpackages:

* ``specfun``    gamma, generalized binomials, Mittag-Leffler, Stirling function
* ``operators``  meshes, sampled curves, GL/Diethelm finite differences,
                 exact reference derivatives, error norms
* ``expansions`` integer-order and moment expansions with truncation bounds
* ``direct``     Euler-like direct method and the catalog problems
* ``indirect``   expansion-based reductions, closed forms, linear TPBVP solver
* ``cli``        the ``fracvar`` experiment harness (CSV output)
"""

from .specfun import (
    GammaPoleError,
    SeriesConvergenceError,
    gamma,
    gen_binomial,
    mittag_leffler,
    stirling_function,
)
from .operators import (
    GlWeights,
    Mesh,
    MeshMismatchError,
    SampledCurve,
    diethelm_caputo,
    gl_left,
    gl_right,
    gl_shifted_left,
    gl_weights,
    hadamard_logpow_exact,
    l2_error,
    max_error,
    rl_exp_exact,
    rl_power_exact,
)
from .expansions import (
    DerivativeBundle,
    ExpansionDomainError,
    HadamardMomentCoeffs,
    MomentCoeffs,
    b_table,
    bound_hadamard,
    bound_integer,
    bound_moment,
    expand_atanackovic,
    expand_caputo_left,
    expand_integer_left,
    expand_integer_right,
    expand_moment_left,
    expand_moment_right,
    hadamard_expand_integer,
    hadamard_expand_moment,
    hadamard_expand_moment_right,
    moment_coeffs,
    moments_vp,
)
from .direct import (
    DirectProblem,
    LagrangianSpec,
    NewtonConvergenceError,
    SingularSystemError,
    StationaritySystem,
    discretize,
    euler_lagrange_residual,
    example1_problem,
    example1_system,
    example2_problem,
    example2_system,
    example3_problem,
    example3_residual,
    solve_direct,
    stationarity,
)
from .indirect import (
    ClosedFormCoeffs,
    NonAffineSystemError,
    TpBvpSystem,
    analytic_solution_example2,
    assemble_tpbvp_example2,
    assemble_tpbvp_example4,
    exact_solution_example4,
    higher_order_el_residual,
    solve_example2_integer,
    solve_example2_moment_closed,
    solve_linear_tpbvp,
)

__version__ = "0.1.0"
