"""Hessian factorizations and the local norms they induce.

Every solver step works in the metric of the current Hessian (shifted
just enough to be positive definite). One Cholesky factorization per
iterate covers the Newton solve, the primal local norm, and the dual
norm used by backtracking acceptance tests.
"""

import math

import numpy as np

from dataclasses import dataclass
from scipy.linalg import cho_solve, solve_triangular


class FactorizationError(Exception):
    """The diagonal shift ladder hit its cap without reaching positive
    definiteness. Indicates a badly scaled or corrupted Hessian."""


@dataclass
class FactorizedHessian:
    """Cholesky factor of H + shift*I with the shift that made it work."""

    chol: np.ndarray  # lower triangular L with L L' = H + shift*I
    shift: float
    dim: int

    def solve(self, rhs):
        """Solve (H + shift*I) z = rhs."""
        return cho_solve((self.chol, True), rhs)

    def local_norm(self, v):
        """sqrt(v' (H + shift*I) v), computed as the 2-norm of L'v."""
        return float(np.linalg.norm(self.chol.T @ v))

    def dual_norm(self, g):
        """sqrt(g' (H + shift*I)^{-1} g); one triangular solve."""
        w = solve_triangular(self.chol, g, lower=True, check_finite=False)
        return float(np.linalg.norm(w))


def factorize_spd(hessian):
    """Factorize ``hessian``, shifting the diagonal only as much as needed.

    Shifts 0, tau0, 2*tau0, 4*tau0, ... are tried in order with
    tau0 = 1e-10 * max(1, trace/d); the first that admits a Cholesky
    factorization wins, so positive definite input keeps shift 0.
    Raises FactorizationError once the shift would exceed
    1e6 * max(1, ||H||_F).
    """
    H = np.asarray(hessian, dtype=float)
    d = H.shape[0]
    if H.ndim != 2 or H.shape != (d, d):
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    tau0 = 1e-10 * max(1.0, float(np.trace(H)) / d)
    cap = 1e6 * max(1.0, float(np.linalg.norm(H)))
    tau = 0.0
    while True:
        try:
            shifted = H if tau == 0.0 else H + tau * np.eye(d)
            chol = np.linalg.cholesky(shifted)
            return FactorizedHessian(chol=chol, shift=tau, dim=d)
        except np.linalg.LinAlgError:
            tau = tau0 if tau == 0.0 else 2.0 * tau
            if tau > cap:
                raise FactorizationError(
                    f"no positive definite shift below cap {cap:.3e}"
                ) from None


@dataclass
class NewtonData:
    """Newton direction and the gradient's norm in the (shifted) metric."""

    direction: np.ndarray  # n with (H + shift*I) n = gradient
    local_grad_norm: float  # sqrt(<gradient, n>)
    shift: float


def newton_data(fact, gradient):
    """Solve for the Newton direction and the local gradient norm.

    <g, n> = g' (H + shift*I)^{-1} g is nonnegative in exact arithmetic;
    roundoff can push it a hair below zero when the gradient is ~0, so it
    is clamped before the square root.
    """
    n = fact.solve(gradient)
    gn = float(gradient @ n)
    return NewtonData(direction=n, local_grad_norm=math.sqrt(max(gn, 0.0)), shift=fact.shift)
