"""Closed-form stepsize schedules driven by the local gradient norm.

All schedules consume g_x = sqrt(<grad, n>) (the gradient norm in the
current Hessian metric) and produce a multiplier for the Newton
direction. A damping parameter theta maps to the stepsize 1/(1+theta).
"""

import math

from dataclasses import dataclass

SCHEDULE_KINDS = ("rn", "aicn", "damped_newton_b", "fixed", "unbounded")


@dataclass
class ScheduleConfig:
    """Which schedule to run and its constants.

    Only the constants relevant to ``kind`` are consulted:

    - "rn":              q in [2, 4], M_q >= 0
    - "aicn":            sigma >= 0
    - "damped_newton_b": L_sc >= 0
    - "fixed":           alpha > 0
    - "unbounded":       sigma >= 0, beta in (0, 1]
    """

    kind: str
    q: float = 3.0
    M_q: float = 1.0
    sigma: float = 1.0
    beta: float = 1.0
    L_sc: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "rn":
            if not 2.0 <= self.q <= 4.0:
                raise ValueError(f"q must lie in [2, 4], got {self.q}")
            if self.M_q < 0:
                raise ValueError("M_q must be nonnegative")
        elif self.kind == "aicn" and self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        elif self.kind == "damped_newton_b" and self.L_sc < 0:
            raise ValueError("L_sc must be nonnegative")
        elif self.kind == "fixed" and not 0.0 < self.alpha <= 1.0:
            raise ValueError("fixed stepsize must lie in (0, 1]")
        elif self.kind == "unbounded":
            if self.sigma < 0:
                raise ValueError("sigma must be nonnegative")
            if not self.beta > 0:
                raise ValueError("beta must be positive")


def rn_theta(q, M_q, g_x):
    """Damping theta = (9 M_q)^(1/(q-1)) * g_x^((q-2)/(q-1)).

    q in [2, 4] interpolates between constant damping (q = 2, where the
    g_x factor drops out) and damping that vanishes with the local
    gradient norm (q > 2). M_q = 0 gives theta = 0, a full Newton step.
    """
    if not 2.0 <= q <= 4.0:
        raise ValueError(f"q must lie in [2, 4], got {q}")
    if M_q < 0:
        raise ValueError("M_q must be nonnegative")
    if g_x < 0:
        raise ValueError("g_x must be nonnegative")
    return (9.0 * M_q) ** (1.0 / (q - 1.0)) * g_x ** ((q - 2.0) / (q - 1.0))


def rn_stepsize(theta):
    """Stepsize 1/(1+theta) for a nonnegative damping theta."""
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    return 1.0 / (1.0 + theta)


def aicn_stepsize(sigma, g_x):
    """Stepsize 2 / (1 + sqrt(1 + 2 sigma g_x))."""
    if sigma < 0 or g_x < 0:
        raise ValueError("sigma and g_x must be nonnegative")
    return 2.0 / (1.0 + math.sqrt(1.0 + 2.0 * sigma * g_x))


def damped_newton_b_stepsize(L_sc, g_x):
    """Stepsize 1 / (1 + L_sc * g_x), the classical self-concordant damping."""
    if L_sc < 0 or g_x < 0:
        raise ValueError("L_sc and g_x must be nonnegative")
    return 1.0 / (1.0 + L_sc * g_x)


def unbounded_stepsize(sigma, beta, g_x):
    """Stepsize ((sigma+1) * g_x^beta)^(-1/(1+beta)).

    Grows without bound as g_x -> 0, so it can overshoot arbitrarily near
    a minimizer; useful only as a diagnostic of where bounded schedules
    are conservative. g_x = 0 means the iterate is already stationary and
    no stepsize is defined.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if g_x == 0:
        raise ValueError("g_x = 0: converged, stepsize undefined")
    if g_x < 0:
        raise ValueError("g_x must be nonnegative")
    return ((sigma + 1.0) * g_x**beta) ** (-1.0 / (1.0 + beta))


def regularization_root(sigma, beta, g_x):
    """Positive root of P(a) = 1 - a - a^(1+beta) * sigma * g_x^beta.

    P(0) = 1, P is strictly decreasing on [0, 1], and P(1) <= 0, so the
    root is unique in (0, 1]; 80 bisection steps pin it down to
    |P(root)| <= 1e-12. The root equals the minimizer over [0, 1] of the
    model t -> -t g^2 + t^2 g^2 / 2 + sigma (t g)^(2+beta) / (2+beta).
    """
    if sigma < 0 or g_x < 0:
        raise ValueError("sigma and g_x must be nonnegative")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    c = sigma * g_x**beta
    if c == 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if 1.0 - mid - mid ** (1.0 + beta) * c > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def polynomial_ag_bound(coefficients, exponents, p):
    """Constants (A1, A2) with sum_k a_k x^(b_k) <= A1 + A2 x^p for x >= 0.

    Termwise weighted arithmetic-geometric mean: for 0 <= b <= p,
    x^b <= (p-b)/p + (b/p) x^p. Summing gives
    A1 = sum a_k (p - b_k) / p and A2 = sum a_k b_k / p.
    Requires nonnegative coefficients and exponents with max(b_k) <= p.
    """
    a = [float(v) for v in coefficients]
    b = [float(v) for v in exponents]
    if len(a) != len(b):
        raise ValueError("coefficients and exponents must have equal length")
    if not a:
        raise ValueError("empty polynomial")
    if p <= 0:
        raise ValueError("p must be positive")
    if any(v < 0 for v in a):
        raise ValueError("coefficients must be nonnegative")
    if any(v < 0 for v in b):
        raise ValueError("exponents must be nonnegative")
    if max(b) > p:
        raise ValueError(f"p = {p} is below the largest exponent {max(b)}")
    a1 = sum(ak * (p - bk) for ak, bk in zip(a, b)) / p
    a2 = sum(ak * bk for ak, bk in zip(a, b)) / p
    return a1, a2
