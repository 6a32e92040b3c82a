"""Benchmark objectives and their data plumbing.

Each problem class doubles as an oracle (``dim`` attribute plus an
``evaluate`` method returning an :class:`~stepnewton.oracle.EvalBundle`),
so solvers consume instances directly. Generators are deterministic in
their seed.
"""

import numpy as np

from dataclasses import dataclass
from scipy.special import expit

from .oracle import EvalBundle


class ParseError(Exception):
    """Malformed LIBSVM input."""


@dataclass
class Dataset:
    """Dense feature matrix (n, d) with one label per row."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d array")
        if self.features.shape[0] < 1 or self.features.shape[1] < 1:
            raise ValueError("need at least one row and one column")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("need exactly one label per feature row")


class LogisticProblem:
    """Binary logistic loss averaged over rows, plus a ridge term.

    f(x) = (1/n) sum_i log(1 + exp(-b_i <a_i, x>)) + (mu/2) ||x||^2
    with labels b_i in {-1, +1}. Any mu > 0 makes the Hessian uniformly
    positive definite. Values and gradients use the numerically safe
    log1p/expit forms, so large margins do not overflow.
    """

    def __init__(self, dataset, mu=1e-3):
        labels = set(np.unique(dataset.labels))
        if not labels <= {-1.0, 1.0}:
            raise ValueError(f"labels must be in {{-1, +1}}, got {sorted(labels)}")
        if mu < 0:
            raise ValueError("mu must be nonnegative")
        self.features = dataset.features
        self.labels = dataset.labels
        self.mu = float(mu)
        self.dim = dataset.features.shape[1]

    def evaluate(self, x, want_hessian=False):
        n = self.features.shape[0]
        t = self.labels * (self.features @ x)  # classification margins
        value = float(np.mean(np.logaddexp(0.0, -t)) + 0.5 * self.mu * (x @ x))
        s = expit(-t)  # 1 - sigmoid(t)
        grad = -(self.features.T @ (self.labels * s)) / n + self.mu * x
        hess = None
        if want_hessian:
            w = s * expit(t)
            hess = (self.features.T * w) @ self.features / n + self.mu * np.eye(self.dim)
        return EvalBundle(value=value, gradient=grad, hessian=hess)


class PolytopeProblem:
    """Sum of p-th powers of constraint violations:

    f(x) = sum_i max(<a_i, x> - b_i, 0)^p,  p >= 2.

    Zero exactly on the polytope {x : Ax <= b}. Only strictly positive
    margins contribute to derivatives; for p = 2 the Hessian weight jumps
    from 0 to 2 across each hyperplane (one-sided convention), for p > 2
    it decays continuously to 0.
    """

    def __init__(self, A, b, p=2.0):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError("need one offset per constraint row")
        if p < 2:
            raise ValueError("p must be at least 2")
        self.A = A
        self.b = b
        self.p = float(p)
        self.dim = A.shape[1]

    def evaluate(self, x, want_hessian=False):
        p = self.p
        m = self.A @ x - self.b
        active = m > 0
        ma = np.where(active, m, 0.0)
        value = float(np.sum(ma**p))
        grad = self.A.T @ (p * ma ** (p - 1.0))
        hess = None
        if want_hessian:
            # 0^(p-2) reads as 0 here, including p = 2 where numpy's 0^0 = 1
            # would otherwise switch inactive rows on
            w = np.where(active, p * (p - 1.0) * ma ** (p - 2.0), 0.0)
            hess = (self.A.T * w) @ self.A
        return EvalBundle(value=value, gradient=grad, hessian=hess)


class RosenbrockProblem:
    """Chained Rosenbrock function

    f(x) = sum_{i<d-1} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2.

    Nonconvex with global minimum 0 at the all-ones point. Hessians away
    from the valley floor are indefinite, which exercises the
    factorization shift ladder.
    """

    def __init__(self, dim):
        if dim < 2:
            raise ValueError("dim must be at least 2")
        self.dim = int(dim)

    def evaluate(self, x, want_hessian=False):
        xa, xb = x[:-1], x[1:]
        t = xb - xa**2
        value = float(np.sum(100.0 * t**2 + (1.0 - xa) ** 2))
        grad = np.zeros(self.dim)
        grad[:-1] += -400.0 * t * xa - 2.0 * (1.0 - xa)
        grad[1:] += 200.0 * t
        hess = None
        if want_hessian:
            hess = np.zeros((self.dim, self.dim))
            i = np.arange(self.dim - 1)
            hess[i, i] += 1200.0 * xa**2 - 400.0 * xb + 2.0
            hess[i + 1, i + 1] += 200.0
            hess[i, i + 1] += -400.0 * xa
            hess[i + 1, i] += -400.0 * xa
        return EvalBundle(value=value, gradient=grad, hessian=hess)


class QuadraticProblem:
    """f(x) = x' A x / 2 - b' x with symmetric positive definite A."""

    def __init__(self, A, b=None):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        self.A = A
        self.b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float)
        if self.b.shape != (A.shape[0],):
            raise ValueError("b must match A")
        self.dim = A.shape[0]

    def evaluate(self, x, want_hessian=False):
        Ax = self.A @ x
        value = float(0.5 * (x @ Ax) - self.b @ x)
        grad = Ax - self.b
        return EvalBundle(value=value, gradient=grad, hessian=self.A if want_hessian else None)

    def optimal_value(self):
        """Analytic minimum -b' A^{-1} b / 2."""
        return float(-0.5 * (self.b @ np.linalg.solve(self.A, self.b)))


def generate_quadratic(d, seed, cond=100.0):
    """Random SPD quadratic with log-spaced spectrum of condition ``cond``."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    half = 0.5 * np.log10(cond)
    eigs = np.logspace(-half, half, d)
    A = (q * eigs) @ q.T
    return QuadraticProblem(0.5 * (A + A.T))


def generate_logistic(n, d, seed, mu=1e-3):
    """Synthetic logistic instance.

    Rows are N(0, 1) scaled by 0.5/d, labels are signs of a planted linear
    model plus noise, so a fraction of rows is mislabeled and the data is
    not separable. The mild row scale keeps the Hessian's relative
    variation small, which is the regime where damped Newton schedules
    show their superlinear tail within a practical tolerance.
    """
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n, d)) * (0.5 / d)
    planted = rng.standard_normal(d)
    labels = np.sign(features @ planted + 0.5 * rng.standard_normal(n))
    labels[labels == 0] = 1.0
    return LogisticProblem(Dataset(features, labels), mu=mu)


def generate_polytope(n, d, seed, p=2.0):
    """Polytope violation instance with a planted boundary point.

    Rows a_i and a reference point x_star are N(0, 1); offsets
    b_i = <a_i, x_star> put x_star on every hyperplane, so f(x_star) = 0.
    Returns (problem, x_star).
    """
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, d))
    x_star = rng.standard_normal(d)
    return PolytopeProblem(A, A @ x_star, p=p), x_star


def default_initial_point(problem, seed=0):
    """Conventional starting points used throughout the benchmarks.

    Logistic starts at 10 * ones, polytope at ones (infeasible for
    generic data), Rosenbrock at a seeded draw from 20 * N(0, I), and
    quadratics at a seeded unit normal draw.
    """
    if isinstance(problem, LogisticProblem):
        return 10.0 * np.ones(problem.dim)
    if isinstance(problem, PolytopeProblem):
        return np.ones(problem.dim)
    if isinstance(problem, RosenbrockProblem):
        return 20.0 * np.random.default_rng(seed).standard_normal(problem.dim)
    if isinstance(problem, QuadraticProblem):
        return np.random.default_rng(seed).standard_normal(problem.dim)
    raise ValueError(f"no default initial point for {type(problem).__name__}")


def _remap_labels(raw):
    values = set(np.unique(raw))
    if values <= {-1.0, 1.0}:
        return raw
    if values == {0.0, 1.0} or values == {1.0, 2.0}:
        low = min(values)
        out = np.where(raw == low, -1.0, 1.0)
        return out
    raise ParseError(f"unsupported label set {sorted(values)}; need a two-class problem")


def parse_libsvm(source):
    """Parse LIBSVM-format text into a dense :class:`Dataset`.

    One ``label index:value ...`` row per line with 1-based, strictly
    increasing indices; blank lines and lines starting with '#' are
    skipped. The feature dimension is the largest index seen. Label sets
    {-1,+1}, {0,1}, and {1,2} are accepted, the smaller label mapping
    to -1. Malformed rows raise :class:`ParseError` with a line number.
    """
    text = source.read() if hasattr(source, "read") else str(source)
    rows = []
    labels = []
    width = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        try:
            label = float(parts[0])
        except ValueError:
            raise ParseError(f"line {lineno}: bad label {parts[0]!r}") from None
        entries = []
        previous = 0
        for token in parts[1:]:
            index_text, sep, value_text = token.partition(":")
            if not sep:
                raise ParseError(f"line {lineno}: expected index:value, got {token!r}")
            try:
                index = int(index_text)
                value = float(value_text)
            except ValueError:
                raise ParseError(f"line {lineno}: bad feature entry {token!r}") from None
            if index < 1:
                raise ParseError(f"line {lineno}: index {index} is not 1-based")
            if index <= previous:
                raise ParseError(f"line {lineno}: indices must be strictly increasing")
            previous = index
            entries.append((index, value))
        width = max(width, previous)
        rows.append(entries)
        labels.append(label)
    if not rows:
        raise ParseError("no data rows")
    features = np.zeros((len(rows), width))
    for r, entries in enumerate(rows):
        for index, value in entries:
            features[r, index - 1] = value
    return Dataset(features, _remap_labels(np.asarray(labels)))


def load_libsvm(path):
    """Read and parse an LIBSVM file from disk."""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_libsvm(handle)
