"""Newton-type solver drivers producing uniform iteration traces.

Every driver follows the same loop: evaluate the oracle, factorize the
(possibly shifted) Hessian, solve for the Newton direction n, measure
g_x = sqrt(<grad, n>), pick a stepsize, and move to x - alpha*n. They
differ only in how alpha is picked. Each visited iterate leaves one
:class:`IterationRecord`; the final iterate's record carries NaN in the
stepsize column since no step leaves it.
"""

import math
import time

import numpy as np

from dataclasses import dataclass
from scipy.linalg import solve_triangular

from . import schedules as sched
from .local_geometry import FactorizationError, factorize_spd, newton_data
from .oracle import EvaluationError, evaluate

TERMINATION_REASONS = (
    "local_grad_tol",
    "grad_tol",
    "max_iters",
    "max_seconds",
    "evaluation_failure",
)

# terminations that mean "an accuracy target was reached"
TOLERANCE_TERMINATIONS = ("local_grad_tol", "grad_tol")


@dataclass
class StopCriteria:
    """When to stop a run. Tolerances are checked before iteration caps;
    the local tolerance applies to g_x, grad_tol to the Euclidean norm."""

    local_grad_tol: float = 1e-10
    grad_tol: float = 0.0
    max_iters: int = 500
    max_seconds: float = math.inf


@dataclass
class IterationRecord:
    """One row of a run trace. Field order matches the trace CSV schema."""

    iter: int
    f: float
    grad_norm_l2: float
    local_grad_norm: float
    stepsize: float
    theta: float
    backtracks: int
    hessian_shift: float
    elapsed_seconds: float


@dataclass
class Trace:
    """Everything a run produced: per-iterate records, the visited points,
    and why it stopped."""

    records: list
    points: list
    termination: str

    @property
    def final_point(self):
        return self.points[-1]

    @property
    def iterations(self):
        """Number of executed steps (records that actually moved)."""
        return sum(1 for r in self.records if math.isfinite(r.stepsize))

    @property
    def total_backtracks(self):
        return int(sum(r.backtracks for r in self.records))

    def f_values(self):
        return np.array([r.f for r in self.records])

    def local_grad_norms(self):
        return np.array([r.local_grad_norm for r in self.records])

    def stepsizes(self):
        """Stepsizes of executed steps, terminal record excluded."""
        return np.array([r.stepsize for r in self.records if math.isfinite(r.stepsize)])


@dataclass
class UNConfig:
    """Backtracking solver knobs: initial scale sigma0, trial growth
    factor gamma > 1, norm exponent beta in [2/3, 1]."""

    sigma0: float = 1e-3
    gamma: float = 2.0
    beta: float = 1.0
    max_backtracks: int = 60

    def __post_init__(self):
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        if self.gamma <= 1:
            raise ValueError("gamma must exceed 1")
        if not 2.0 / 3.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [2/3, 1]")


class _Context:
    """Per-iterate work: evaluation bundle, factorization, Newton data."""

    __slots__ = ("bundle", "fact", "nd", "grad_norm_l2", "extra_shift")

    def __init__(self, bundle, fact, nd, grad_norm_l2, extra_shift=0.0):
        self.bundle = bundle
        self.fact = fact
        self.nd = nd
        self.grad_norm_l2 = grad_norm_l2
        self.extra_shift = extra_shift


class _Run:
    """Bookkeeping shared by all drivers: records, points, stop logic."""

    def __init__(self, oracle, x0, stop):
        self.oracle = oracle
        self.stop = stop if stop is not None else StopCriteria()
        self.x = np.array(x0, dtype=float, copy=True)
        self.records = []
        self.points = [self.x.copy()]
        self.start = time.perf_counter()
        self.termination = None

    def elapsed(self):
        return time.perf_counter() - self.start

    def prologue(self, want_hessian=True, shift_from_grad=None, force_reason=None):
        """Evaluate the current iterate and decide whether the run is over.

        Returns a :class:`_Context` to keep going, or None after writing
        the terminal record / setting the termination reason.
        ``shift_from_grad`` maps the Euclidean gradient norm to an extra
        diagonal shift applied before factorization.
        """
        k = len(self.records)
        try:
            bundle = evaluate(self.oracle, self.x, want_hessian)
            grad_norm_l2 = float(np.linalg.norm(bundle.gradient))
            fact = None
            nd = None
            extra = 0.0
            if want_hessian:
                H = bundle.hessian
                if shift_from_grad is not None:
                    extra = float(shift_from_grad(grad_norm_l2))
                    if extra > 0.0:
                        H = H + extra * np.eye(self.oracle.dim)
                fact = factorize_spd(H)
                nd = newton_data(fact, bundle.gradient)
        except (EvaluationError, FactorizationError):
            self.termination = "evaluation_failure"
            return None
        gx = nd.local_grad_norm if nd is not None else math.nan
        shift = extra + fact.shift if fact is not None else math.nan
        reason = force_reason
        if reason is None:
            if nd is not None and gx <= self.stop.local_grad_tol:
                reason = "local_grad_tol"
            elif grad_norm_l2 <= self.stop.grad_tol:
                reason = "grad_tol"
            elif k >= self.stop.max_iters:
                reason = "max_iters"
            elif self.elapsed() > self.stop.max_seconds:
                reason = "max_seconds"
        if reason is not None:
            self.records.append(IterationRecord(
                iter=k, f=bundle.value, grad_norm_l2=grad_norm_l2,
                local_grad_norm=gx, stepsize=math.nan, theta=math.nan,
                backtracks=0, hessian_shift=shift,
                elapsed_seconds=self.elapsed(),
            ))
            self.termination = reason
            return None
        return _Context(bundle, fact, nd, grad_norm_l2, extra)

    def step(self, ctx, alpha, theta, backtracks, x_new=None):
        """Record the executed step and advance the iterate."""
        if x_new is None:
            x_new = self.x - alpha * ctx.nd.direction
        k = len(self.records)
        shift = ctx.extra_shift + (ctx.fact.shift if ctx.fact is not None else math.nan)
        gx = ctx.nd.local_grad_norm if ctx.nd is not None else math.nan
        self.records.append(IterationRecord(
            iter=k, f=ctx.bundle.value, grad_norm_l2=ctx.grad_norm_l2,
            local_grad_norm=gx, stepsize=float(alpha), theta=float(theta),
            backtracks=int(backtracks), hessian_shift=shift,
            elapsed_seconds=self.elapsed(),
        ))
        self.x = np.asarray(x_new, dtype=float)
        self.points.append(self.x.copy())

    def fail(self, ctx, backtracks):
        """Terminal record for an iterate where no acceptable step exists."""
        k = len(self.records)
        shift = ctx.extra_shift + (ctx.fact.shift if ctx.fact is not None else math.nan)
        gx = ctx.nd.local_grad_norm if ctx.nd is not None else math.nan
        self.records.append(IterationRecord(
            iter=k, f=ctx.bundle.value, grad_norm_l2=ctx.grad_norm_l2,
            local_grad_norm=gx, stepsize=math.nan, theta=math.nan,
            backtracks=int(backtracks), hessian_shift=shift,
            elapsed_seconds=self.elapsed(),
        ))
        self.termination = "evaluation_failure"

    def finish(self):
        return Trace(records=self.records, points=self.points, termination=self.termination)


def run_scheduled_newton(oracle, x0, schedule, stop=None):
    """Newton iteration with a closed-form stepsize schedule.

    ``schedule`` is a :class:`~stepnewton.schedules.ScheduleConfig`; the
    damping theta is recorded only for the "rn" kind, where it is the
    quantity the schedule actually computes.
    """
    run = _Run(oracle, x0, stop)
    while run.termination is None:
        ctx = run.prologue()
        if ctx is None:
            break
        g = ctx.nd.local_grad_norm
        theta = math.nan
        if schedule.kind == "rn":
            theta = sched.rn_theta(schedule.q, schedule.M_q, g)
            alpha = sched.rn_stepsize(theta)
        elif schedule.kind == "aicn":
            alpha = sched.aicn_stepsize(schedule.sigma, g)
        elif schedule.kind == "damped_newton_b":
            alpha = sched.damped_newton_b_stepsize(schedule.L_sc, g)
        elif schedule.kind == "fixed":
            alpha = schedule.alpha
        elif schedule.kind == "unbounded":
            alpha = sched.unbounded_stepsize(schedule.sigma, schedule.beta, g)
        else:
            raise ValueError(f"unknown schedule kind {schedule.kind!r}")
        run.step(ctx, alpha, theta, backtracks=0)
    return run.finish()


def run_un(oracle, x0, config=None, stop=None):
    """Backtracking Newton that adapts its damping scale online.

    Trial j uses theta_j = gamma^j * sigma_k * g^beta and stepsize
    1/(1+theta_j). A trial point y is accepted once

        <grad f(y), n>  >=  ||grad f(y)||*^2 / (2 * alpha_j * theta_j),

    the dual norm taken in the current iterate's metric (one triangular
    solve per trial; trials need only gradients). After accepting trial
    j_k the scale relaxes a notch: sigma_{k+1} = gamma^(j_k - 1) * sigma_k,
    so the cumulative trial count stays within ~2 per iteration plus the
    cost of growing sigma0 up to the problem's own scale.
    """
    config = config if config is not None else UNConfig()
    run = _Run(oracle, x0, stop)
    sigma = config.sigma0
    while run.termination is None:
        ctx = run.prologue()
        if ctx is None:
            break
        g = ctx.nd.local_grad_norm
        n = ctx.nd.direction
        accepted = None
        for j in range(config.max_backtracks + 1):
            theta = config.gamma**j * sigma * g**config.beta
            if not math.isfinite(theta) or theta <= 0.0:
                break
            alpha = 1.0 / (1.0 + theta)
            y = run.x - alpha * n
            try:
                trial = evaluate(oracle, y)
            except EvaluationError:
                continue  # out of domain: damp harder
            dual = ctx.fact.dual_norm(trial.gradient)
            if float(trial.gradient @ n) >= dual * dual / (2.0 * alpha * theta):
                accepted = (j, theta, alpha, y)
                break
        if accepted is None:
            run.fail(ctx, backtracks=config.max_backtracks + 1)
            break
        j, theta, alpha, y = accepted
        # floor keeps theta positive after long stretches of j = 0
        sigma = max(sigma * config.gamma ** (j - 1), 1e-300)
        run.step(ctx, alpha, theta, backtracks=j, x_new=y)
    return run.finish()


def minimize_scalar(phi, lo, hi, evals=128):
    """Minimize a scalar function on [lo, hi] with a bounded budget.

    A 32-point coarse grid localizes the minimum, then golden-section
    refinement runs inside the two cells around the best grid point.
    When the interval is positive and spans several decades, half the
    grid is log-spaced: the minimum of a ray profile often sits orders
    of magnitude below hi, between the first two points of a uniform
    grid, and an objective with a decaying tail would pull the
    refinement away from such a dip. Non-finite values count as +inf.
    Returns the best sampled (x, phi(x)), which by construction is never
    worse than the best grid value. Total evaluations never exceed
    ``evals`` (at least 16 required).
    """
    if evals < 16:
        raise ValueError("evals must be at least 16")
    if not hi > lo:
        raise ValueError("need hi > lo")
    best = [math.nan, math.inf]

    def probe(t):
        v = phi(t)
        v = v if not math.isnan(v) else math.inf
        if v < best[1] or math.isnan(best[0]):
            best[0], best[1] = t, v
        return v

    grid_n = min(32, evals)
    if lo > 0.0 and hi / lo > 1e3:
        half = grid_n // 2
        xs = np.unique(np.concatenate([
            np.linspace(lo, hi, grid_n - half),
            np.geomspace(lo, hi, half),
        ]))
    else:
        xs = np.linspace(lo, hi, grid_n)
    values = [probe(t) for t in xs]
    used = len(xs)
    i = int(np.argmin(values))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, len(xs) - 1)]
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - ratio * (b - a)
    d = a + ratio * (b - a)
    if used + 2 > evals:
        return best[0], best[1]
    fc, fd = probe(c), probe(d)
    used += 2
    while used < evals and (b - a) > 1e-15 * max(1.0, abs(a) + abs(b)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = probe(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = probe(d)
        used += 1
    return best[0], best[1]


def run_grls(oracle, x0, alpha_max=8.0, unit_interval=False, evals=128, stop=None):
    """Linesearch on the gradient-ratio objective along the Newton ray.

    Picks alpha minimizing (f(y) - f(x)) / ||grad f(y)||*^2 over
    y = x - alpha*n, dual norm in the metric at x. The ratio rewards
    decreasing f and the next gradient simultaneously and is larger-range
    than plain linesearch: by default alpha ranges over (0, alpha_max];
    ``unit_interval`` restricts it to (0, 1]. A trial whose dual gradient
    norm falls below 1e-14 is accepted outright and ends the run as
    converged, since the ratio is no longer informative there.
    """
    run = _Run(oracle, x0, stop)
    hi = 1.0 if unit_interval else float(alpha_max)
    lo = hi * 1e-6
    while run.termination is None:
        ctx = run.prologue()
        if ctx is None:
            break
        n = ctx.nd.direction
        fx = ctx.bundle.value
        flat = {}

        def ratio(alpha):
            y = run.x - alpha * n
            try:
                out = evaluate(oracle, y)
            except EvaluationError:
                return math.inf
            dual = ctx.fact.dual_norm(out.gradient)
            if dual < 1e-14:
                flat[alpha] = y
                return -math.inf
            value = (out.value - fx) / (dual * dual)
            return value if math.isfinite(value) else math.inf

        alpha, value = minimize_scalar(ratio, lo, hi, evals)
        if value == -math.inf:
            run.step(ctx, alpha, math.nan, backtracks=0, x_new=flat[alpha])
            run.prologue(force_reason="local_grad_tol")
            break
        if value == math.inf:
            run.fail(ctx, backtracks=0)
            break
        run.step(ctx, alpha, math.nan, backtracks=0)
    return run.finish()


def run_greedy_newton(oracle, x0, alpha_max=8.0, unit_interval=False, evals=128, stop=None):
    """Exact-as-practical linesearch of f itself along the Newton ray."""
    run = _Run(oracle, x0, stop)
    hi = 1.0 if unit_interval else float(alpha_max)
    lo = hi * 1e-6
    while run.termination is None:
        ctx = run.prologue()
        if ctx is None:
            break
        n = ctx.nd.direction

        def value_on_ray(alpha):
            try:
                return evaluate(oracle, run.x - alpha * n).value
            except EvaluationError:
                return math.inf

        alpha, value = minimize_scalar(value_on_ray, lo, hi, evals)
        if value == math.inf:
            run.fail(ctx, backtracks=0)
            break
        run.step(ctx, alpha, math.nan, backtracks=0)
    return run.finish()


def run_armijo_newton(oracle, x0, c1=1e-4, shrink=0.5, stop=None):
    """Classical backtracking on the Newton direction.

    Accepts the first alpha in {1, shrink, shrink^2, ...} with
    f(x - alpha n) <= f(x) - c1 * alpha * <g, n>. Note <g, n> = g_x^2.
    """
    if not 0.0 < c1 < 1.0 or not 0.0 < shrink < 1.0:
        raise ValueError("need 0 < c1 < 1 and 0 < shrink < 1")
    run = _Run(oracle, x0, stop)
    while run.termination is None:
        ctx = run.prologue()
        if ctx is None:
            break
        n = ctx.nd.direction
        decrease = ctx.nd.local_grad_norm ** 2
        alpha = 1.0
        backtracks = 0
        while True:
            try:
                fy = evaluate(oracle, run.x - alpha * n).value
            except EvaluationError:
                fy = math.inf
            if fy <= ctx.bundle.value - c1 * alpha * decrease:
                break
            alpha *= shrink
            backtracks += 1
            if alpha < 1e-16:
                alpha = None
                break
        if alpha is None:
            run.fail(ctx, backtracks=backtracks)
            break
        run.step(ctx, alpha, math.nan, backtracks=backtracks)
    return run.finish()


def run_grn(oracle, x0, sigma=0.0, beta=1.0, stop=None):
    """Newton with a Euclidean gradient-norm diagonal regularization.

    Solves (H + sigma * ||g||_2^beta * I) d = -g and takes the unit step.
    sigma = 0 reduces to the plain full-step Newton method. The shift uses
    the Euclidean norm, so unlike the local-norm solvers this one is not
    affine invariant for sigma > 0. The trace's hessian_shift column holds
    the total applied shift (regularization plus any ladder shift).
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    run = _Run(oracle, x0, stop)
    shift_rule = (lambda gl2: sigma * gl2**beta) if sigma > 0 else None
    while run.termination is None:
        ctx = run.prologue(shift_from_grad=shift_rule)
        if ctx is None:
            break
        run.step(ctx, 1.0, math.nan, backtracks=0)
    return run.finish()


def run_gradient_method(oracle, x0, rule="armijo", L=None, c1=1e-4, shrink=0.5, stop=None):
    """First-order baseline: x <- x - eta * grad f(x).

    rule "fixed" uses the constant eta = 1/L; rule "armijo" backtracks
    from eta = 1 until f(x - eta g) <= f(x) - c1 * eta * ||g||^2. No
    Hessian is ever formed, so local_grad_norm and hessian_shift are NaN
    in the trace and only grad_tol (plus the caps) can stop the run.
    """
    if rule not in ("fixed", "armijo"):
        raise ValueError(f"unknown stepsize rule {rule!r}")
    if rule == "fixed" and (L is None or L <= 0):
        raise ValueError("rule 'fixed' needs a positive smoothness constant L")
    run = _Run(oracle, x0, stop)
    while run.termination is None:
        ctx = run.prologue(want_hessian=False)
        if ctx is None:
            break
        g = ctx.bundle.gradient
        backtracks = 0
        if rule == "fixed":
            eta = 1.0 / L
        else:
            eta = 1.0
            decrease = ctx.grad_norm_l2**2
            while True:
                try:
                    fy = evaluate(oracle, run.x - eta * g).value
                except EvaluationError:
                    fy = math.inf
                if fy <= ctx.bundle.value - c1 * eta * decrease:
                    break
                eta *= shrink
                backtracks += 1
                if eta < 1e-16:
                    eta = None
                    break
            if eta is None:
                run.fail(ctx, backtracks=backtracks)
                break
        run.step(ctx, eta, math.nan, backtracks=backtracks, x_new=run.x - eta * g)
    return run.finish()


def estimate_hessian_holder(oracle, anchors, q, radii=(0.25, 1.0), directions=8, seed=0):
    """Sampled estimate of the Hessian Hoelder constant in local norms.

    For anchor x and probe y = x + r*u (u scaled to local norm r), the
    pairwise constant is

        ||B^{-1/2} (H(y) - H(x)) B^{-1/2}||_2 / ||y - x||_x^(q-2)

    with B the (shifted) Hessian at x. Returns the max over all anchors,
    radii, and random directions; a lower bound on the true constant, so
    callers usually multiply by a safety factor. Valid for q in (2, 3]
    (Hessian-level smoothness).
    """
    if not 2.0 < q <= 3.0:
        raise ValueError("q must lie in (2, 3]")
    nu = q - 2.0
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x in anchors:
        x = np.asarray(x, dtype=float)
        Hx = evaluate(oracle, x, want_hessian=True).hessian
        fact = factorize_spd(Hx)
        for _ in range(directions):
            u = rng.standard_normal(oracle.dim)
            u = u / fact.local_norm(u)
            for r in radii:
                y = x + r * u
                try:
                    Hy = evaluate(oracle, y, want_hessian=True).hessian
                except EvaluationError:
                    continue
                delta = Hy - Hx
                w = solve_triangular(fact.chol, delta, lower=True, check_finite=False)
                w = solve_triangular(fact.chol, w.T, lower=True, check_finite=False)
                spectral = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (w + w.T)))))
                worst = max(worst, spectral / r**nu)
    return worst
