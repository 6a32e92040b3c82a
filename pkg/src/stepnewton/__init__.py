"""Stepsized Newton solvers driven by local-norm geometry, with a
benchmark harness that writes uniform iteration traces."""

from .oracle import (
    DerivativeReport,
    EvalBundle,
    EvaluationError,
    LinearTransformedOracle,
    check_derivatives,
    evaluate,
)
from .local_geometry import (
    FactorizationError,
    FactorizedHessian,
    NewtonData,
    factorize_spd,
    newton_data,
)
from .schedules import (
    ScheduleConfig,
    aicn_stepsize,
    damped_newton_b_stepsize,
    polynomial_ag_bound,
    regularization_root,
    rn_stepsize,
    rn_theta,
    unbounded_stepsize,
)
from .problems import (
    Dataset,
    LogisticProblem,
    ParseError,
    PolytopeProblem,
    QuadraticProblem,
    RosenbrockProblem,
    default_initial_point,
    generate_logistic,
    generate_polytope,
    generate_quadratic,
    load_libsvm,
    parse_libsvm,
)
from .solvers import (
    IterationRecord,
    StopCriteria,
    Trace,
    UNConfig,
    estimate_hessian_holder,
    minimize_scalar,
    run_armijo_newton,
    run_gradient_method,
    run_greedy_newton,
    run_grls,
    run_grn,
    run_scheduled_newton,
    run_un,
)
from .harness import (
    ExperimentConfig,
    RunSummary,
    estimate_fstar,
    fit_rate,
    load_trace_csv,
    run_batch,
    write_trace_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
