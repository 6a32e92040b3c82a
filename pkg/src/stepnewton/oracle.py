"""Objective oracles and the evaluation contract shared by all solvers.

An oracle is any object with an integer attribute ``dim`` and a method
``evaluate(x, want_hessian=False)`` returning an :class:`EvalBundle`.
Oracles must be pure: repeated evaluation at the same point yields
bitwise-identical results. Solvers reach oracles through :func:`evaluate`
below, which enforces the contract (shapes, finiteness) in one place.
"""

import numpy as np

from dataclasses import dataclass


class EvaluationError(Exception):
    """An oracle produced a non-finite value, gradient, or Hessian.

    Solvers treat this as "the trial point left the domain" and either
    back off or terminate the run with an evaluation failure.
    """


@dataclass
class EvalBundle:
    """Objective value, gradient, and optionally the Hessian at one point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray | None = None


@dataclass
class DerivativeReport:
    """Scaled inf-norm errors of analytic derivatives against central
    differences. Both below ~1e-5 passes for well-scaled problems."""

    grad_error: float
    hess_error: float


def evaluate(oracle, x, want_hessian=False):
    """Evaluate ``oracle`` at ``x`` with contract checks.

    Raises ValueError on a dimension mismatch (a programming error) and
    EvaluationError when any requested quantity is non-finite (a runtime
    domain violation).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (oracle.dim,):
        raise ValueError(f"point has shape {x.shape}, oracle expects ({oracle.dim},)")
    out = oracle.evaluate(x, want_hessian)
    if not np.isfinite(out.value):
        raise EvaluationError(f"non-finite objective value {out.value!r}")
    if out.gradient.shape != (oracle.dim,):
        raise ValueError(f"gradient has shape {out.gradient.shape}, expected ({oracle.dim},)")
    if not np.all(np.isfinite(out.gradient)):
        raise EvaluationError("non-finite gradient entries")
    if want_hessian:
        if out.hessian is None:
            raise ValueError("oracle did not return a Hessian although one was requested")
        if out.hessian.shape != (oracle.dim, oracle.dim):
            raise ValueError(f"Hessian has shape {out.hessian.shape}, expected square")
        if not np.all(np.isfinite(out.hessian)):
            raise EvaluationError("non-finite Hessian entries")
    return out


def check_derivatives(oracle, x, step=1e-6):
    """Central-difference audit of the analytic gradient and Hessian at ``x``.

    Coordinate ``i`` is displaced by ``step * max(1, |x_i|)``. The gradient
    is compared against differences of values, the Hessian against
    differences of gradients; errors are inf-norm deviations scaled by
    ``max(1, norm_of_analytic_quantity)``.
    """
    x = np.asarray(x, dtype=float)
    ref = evaluate(oracle, x, want_hessian=True)
    d = oracle.dim
    fd_grad = np.zeros(d)
    fd_hess = np.zeros((d, d))
    for i in range(d):
        h = step * max(1.0, abs(x[i]))
        e = np.zeros(d)
        e[i] = h
        plus = evaluate(oracle, x + e)
        minus = evaluate(oracle, x - e)
        fd_grad[i] = (plus.value - minus.value) / (2.0 * h)
        fd_hess[:, i] = (plus.gradient - minus.gradient) / (2.0 * h)
    grad_scale = max(1.0, float(np.max(np.abs(ref.gradient))))
    hess_scale = max(1.0, float(np.max(np.abs(ref.hessian))))
    grad_error = float(np.max(np.abs(fd_grad - ref.gradient))) / grad_scale
    hess_error = float(np.max(np.abs(fd_hess - ref.hessian))) / hess_scale
    return DerivativeReport(grad_error=grad_error, hess_error=hess_error)


class LinearTransformedOracle:
    """Composition ``g(y) = f(A y)`` of a base oracle with a square matrix.

    Chain rule gives gradient ``A' grad_f(Ay)`` and Hessian ``A' H(Ay) A``.
    Useful for probing which solvers are invariant under a change of basis.
    """

    def __init__(self, base, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (base.dim, base.dim):
            raise ValueError(f"matrix shape {matrix.shape} does not match oracle dim {base.dim}")
        self.base = base
        self.matrix = matrix
        self.dim = base.dim

    def evaluate(self, y, want_hessian=False):
        out = self.base.evaluate(self.matrix @ y, want_hessian)
        grad = self.matrix.T @ out.gradient
        hess = None
        if want_hessian and out.hessian is not None:
            hess = self.matrix.T @ out.hessian @ self.matrix
        return EvalBundle(value=out.value, gradient=grad, hessian=hess)
