"""Experiment runner: configs in, per-run trace CSVs and summary JSONs out.

A batch is a list of run configs. Each run builds its problem and solver
from small dict specs, executes, and writes ``<label>.csv`` (the
iteration trace) plus ``<label>.json`` (the summary). The coordinator
adds one high-accuracy reference run per distinct problem so that
suboptimality f - f* can be estimated, then writes ``index.json`` last.
"""

import argparse
import json
import math
import os
import re
import time

import numpy as np

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

from . import problems as prob
from .schedules import ScheduleConfig
from .solvers import (
    TOLERANCE_TERMINATIONS,
    StopCriteria,
    run_armijo_newton,
    run_gradient_method,
    run_greedy_newton,
    run_grls,
    run_grn,
    run_scheduled_newton,
    run_un,
    UNConfig,
)

TRACE_HEADER = "iter,f,grad_norm_l2,local_grad_norm,stepsize,theta,backtracks,hessian_shift,elapsed_seconds"
TRACE_COLUMNS = tuple(TRACE_HEADER.split(","))

PROBLEM_KINDS = ("quadratic", "logistic", "polytope", "rosenbrock")
SOLVER_KINDS = ("rn", "aicn", "damped_newton_b", "fixed", "unbounded",
                "un", "grls", "gn", "armijo", "grn", "gm")

REFERENCE_STOP = StopCriteria(local_grad_tol=1e-14, max_iters=2000)


@dataclass
class ExperimentConfig:
    """One run: problem spec, solver spec, stopping rule, and output label.

    ``problem`` and ``solver`` are plain dicts with a "kind" key plus the
    constants that kind needs; see build_problem/build_runner. ``x0``
    overrides the problem's default initial point; otherwise ``x0_seed``
    feeds the seeded defaults. ``rate_window`` (start, end) selects the
    iterations for the log-log rate fit; None picks the second half.
    """

    label: str
    problem: dict
    solver: dict
    stop: StopCriteria = field(default_factory=StopCriteria)
    x0: list | None = None
    x0_seed: int = 0
    rate_window: tuple | None = None

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        stop = doc.get("stop", {})
        if isinstance(stop, dict):
            stop = StopCriteria(**stop)
        window = doc.get("rate_window")
        return cls(
            label=doc["label"],
            problem=dict(doc["problem"]),
            solver=dict(doc["solver"]),
            stop=stop,
            x0=doc.get("x0"),
            x0_seed=int(doc.get("x0_seed", 0)),
            rate_window=tuple(window) if window is not None else None,
        )


@dataclass
class RunSummary:
    """What a finished (or failed) run looked like, JSON-serializable."""

    label: str
    problem: dict
    solver: dict
    termination: str
    iterations: int = 0
    total_backtracks: int = 0
    wall_seconds: float = 0.0
    final_f: float | None = None
    f_star_estimate: float | None = None
    suboptimality: float | None = None
    rate_slope: float | None = None
    rate_window: list | None = None
    trace_path: str | None = None
    reference: bool = False
    error: str | None = None


def build_problem(spec):
    """Instantiate a problem oracle from its dict spec."""
    kind = spec.get("kind")
    if kind == "quadratic":
        return prob.generate_quadratic(
            d=int(spec["d"]), seed=int(spec.get("seed", 0)),
            cond=float(spec.get("cond", 100.0)))
    if kind == "logistic":
        mu = float(spec.get("mu", 1e-3))
        if "data" in spec:
            return prob.LogisticProblem(prob.load_libsvm(spec["data"]), mu=mu)
        return prob.generate_logistic(
            n=int(spec["n"]), d=int(spec["d"]), seed=int(spec.get("seed", 0)), mu=mu)
    if kind == "polytope":
        problem, _ = prob.generate_polytope(
            n=int(spec["n"]), d=int(spec["d"]), seed=int(spec.get("seed", 0)),
            p=float(spec.get("p", 2.0)))
        return problem
    if kind == "rosenbrock":
        return prob.RosenbrockProblem(int(spec["d"]))
    raise ValueError(f"unknown problem kind {kind!r}; expected one of {PROBLEM_KINDS}")


def build_runner(spec):
    """Map a solver dict spec onto a ``runner(oracle, x0, stop) -> Trace``."""
    kind = spec.get("kind")
    if kind in ("rn", "aicn", "damped_newton_b", "fixed", "unbounded"):
        schedule = ScheduleConfig(
            kind=kind,
            q=float(spec.get("q", 3.0)),
            M_q=float(spec.get("M", spec.get("M_q", 1.0))),
            sigma=float(spec.get("sigma", 1.0)),
            beta=float(spec.get("beta", 1.0)),
            L_sc=float(spec.get("L_sc", 1.0)),
            alpha=float(spec.get("alpha", 1.0)),
        )
        return lambda oracle, x0, stop: run_scheduled_newton(oracle, x0, schedule, stop)
    if kind == "un":
        config = UNConfig(
            sigma0=float(spec.get("sigma0", 1e-3)),
            gamma=float(spec.get("gamma", 2.0)),
            beta=float(spec.get("beta", 1.0)),
            max_backtracks=int(spec.get("max_backtracks", 60)),
        )
        return lambda oracle, x0, stop: run_un(oracle, x0, config, stop)
    if kind in ("grls", "gn"):
        runner = run_grls if kind == "grls" else run_greedy_newton
        alpha_max = float(spec.get("alpha_max", 8.0))
        unit = bool(spec.get("unit_interval", False))
        evals = int(spec.get("evals", 128))
        return lambda oracle, x0, stop: runner(
            oracle, x0, alpha_max=alpha_max, unit_interval=unit, evals=evals, stop=stop)
    if kind == "armijo":
        c1 = float(spec.get("c1", 1e-4))
        shrink = float(spec.get("shrink", 0.5))
        return lambda oracle, x0, stop: run_armijo_newton(oracle, x0, c1=c1, shrink=shrink, stop=stop)
    if kind == "grn":
        sigma = float(spec.get("sigma", 0.0))
        beta = float(spec.get("beta", 1.0))
        return lambda oracle, x0, stop: run_grn(oracle, x0, sigma=sigma, beta=beta, stop=stop)
    if kind == "gm":
        rule = spec.get("rule", "armijo")
        L = spec.get("L")
        c1 = float(spec.get("c1", 1e-4))
        shrink = float(spec.get("shrink", 0.5))
        return lambda oracle, x0, stop: run_gradient_method(
            oracle, x0, rule=rule, L=L, c1=c1, shrink=shrink, stop=stop)
    raise ValueError(f"unknown solver kind {kind!r}; expected one of {SOLVER_KINDS}")


def write_trace_csv(trace, path):
    """Write a run trace with the stable header; floats use repr so they
    round-trip exactly."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(TRACE_HEADER + "\n")
        for r in trace.records:
            fh.write(
                f"{r.iter},{r.f!r},{r.grad_norm_l2!r},{r.local_grad_norm!r},"
                f"{r.stepsize!r},{r.theta!r},{r.backtracks},{r.hessian_shift!r},"
                f"{r.elapsed_seconds!r}\n"
            )


def load_trace_csv(path):
    """Read a trace CSV back into a dict of numpy arrays keyed by column.

    Validates the header verbatim and reports the offending file on
    mismatch.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected trace header {header!r}")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if any(len(row) != len(TRACE_COLUMNS) for row in rows):
        raise ValueError(f"{path}: ragged trace rows")
    columns = {}
    for j, name in enumerate(TRACE_COLUMNS):
        values = [row[j] for row in rows]
        if name in ("iter", "backtracks"):
            columns[name] = np.array([int(v) for v in values])
        else:
            columns[name] = np.array([float(v) for v in values])
    return columns


def estimate_fstar(traces):
    """Best objective value seen across the traces, minus a relative margin.

    The margin 1e-12*(1+|min|) keeps every recorded suboptimality
    strictly positive. Using all recorded values (not only final ones)
    makes the estimate sane for non-monotone or diverged runs too.
    """
    values = [r.f for t in traces for r in t.records if math.isfinite(r.f)]
    if not values:
        raise ValueError("no finite objective values in traces")
    best = min(values)
    return best - 1e-12 * (1.0 + abs(best))


def fit_rate(trace, f_star, window):
    """Least-squares slope of log(f_k - f*) against log(k) over iterations
    ``window = (start, end)``, inclusive. Needs start >= 1 and positive
    suboptimality everywhere in the window."""
    start, end = window
    if start < 1:
        raise ValueError("rate window must start at iteration 1 or later")
    iters = []
    subopts = []
    for r in trace.records:
        if start <= r.iter <= end:
            gap = r.f - f_star
            if not gap > 0:
                raise ValueError(f"nonpositive suboptimality at iteration {r.iter}")
            iters.append(r.iter)
            subopts.append(gap)
    if len(iters) < 2:
        raise ValueError("rate window must cover at least two recorded iterations")
    slope = np.polyfit(np.log(iters), np.log(subopts), 1)[0]
    return float(slope)


def _problem_key(spec):
    return json.dumps(spec, sort_keys=True)


def _sanitize_label(label):
    return re.sub(r"[^A-Za-z0-9._-]+", "-", label.strip()) or "run"


def _worker_count(n_jobs):
    cap = os.environ.get("BENCH_THREADS")
    workers = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(workers, n_jobs))


def _execute(config, out_dir):
    """Run one config to a (trace, summary) pair; never raises."""
    summary = RunSummary(label=config.label, problem=config.problem,
                         solver=config.solver, termination="config_error")
    data_path = config.problem.get("data")
    if data_path is not None and not os.path.exists(data_path):
        summary.error = f"data file not found: {data_path}"
        return None, summary
    try:
        problem = build_problem(config.problem)
        runner = build_runner(config.solver)
        if config.x0 is not None:
            x0 = np.asarray(config.x0, dtype=float)
        else:
            x0 = prob.default_initial_point(problem, seed=config.x0_seed)
        started = time.perf_counter()
        trace = runner(problem, x0, config.stop)
        wall = time.perf_counter() - started
    except Exception as exc:  # recorded, batch keeps going
        summary.error = f"{type(exc).__name__}: {exc}"
        return None, summary
    path = os.path.join(out_dir, _sanitize_label(config.label) + ".csv")
    write_trace_csv(trace, path)
    summary.termination = trace.termination
    summary.iterations = trace.iterations
    summary.total_backtracks = trace.total_backtracks
    summary.wall_seconds = wall
    summary.final_f = float(trace.records[-1].f) if trace.records else None
    summary.trace_path = path
    return trace, summary


def _default_window(trace):
    executed = trace.iterations
    if executed < 4:
        return None
    return (max(1, executed // 2), executed)


def run_batch(configs, out_dir, reference=True):
    """Execute a batch of runs, plus one reference run per distinct problem.

    Writes one trace CSV and one summary JSON per run and an index.json
    at the end. Traces are deterministic given seeds (modulo the
    elapsed_seconds column, which records real wall time). Returns a list
    of (Trace, RunSummary), user runs first, reference runs after.
    """
    configs = [c if isinstance(c, ExperimentConfig) else ExperimentConfig.from_dict(c)
               for c in configs]
    labels = [_sanitize_label(c.label) for c in configs]
    if len(set(labels)) != len(labels):
        raise ValueError("run labels must be unique within a batch")
    os.makedirs(out_dir, exist_ok=True)

    jobs = list(configs)
    user_jobs = len(jobs)
    if reference:
        seen = {}
        for config in configs:
            key = _problem_key(config.problem)
            if key not in seen:
                seen[key] = config
        for i, (key, owner) in enumerate(seen.items()):
            jobs.append(ExperimentConfig(
                label=f"reference-{i}",
                problem=dict(owner.problem),
                solver={"kind": "gn"},
                stop=REFERENCE_STOP,
                x0=owner.x0,
                x0_seed=owner.x0_seed,
            ))

    with ThreadPoolExecutor(max_workers=_worker_count(len(jobs))) as pool:
        results = list(pool.map(lambda c: _execute(c, out_dir), jobs))

    by_problem = {}
    for config, (trace, _) in zip(jobs, results):
        if trace is not None:
            by_problem.setdefault(_problem_key(config.problem), []).append(trace)

    out = []
    index = []
    for position, (config, (trace, summary)) in enumerate(zip(jobs, results)):
        summary.reference = position >= user_jobs
        if trace is not None:
            group = by_problem.get(_problem_key(config.problem), [])
            f_star = estimate_fstar(group)
            summary.f_star_estimate = f_star
            summary.suboptimality = summary.final_f - f_star
            window = config.rate_window or _default_window(trace)
            if window is not None:
                summary.rate_window = list(window)
                try:
                    summary.rate_slope = fit_rate(trace, f_star, window)
                except ValueError:
                    summary.rate_slope = None
        with open(os.path.join(out_dir, _sanitize_label(config.label) + ".json"),
                  "w", encoding="utf-8") as fh:
            json.dump(asdict(summary), fh, indent=2)
        out.append((trace, summary))
        index.append(asdict(summary))

    with open(os.path.join(out_dir, "index.json"), "w", encoding="utf-8") as fh:
        json.dump({"runs": index}, fh, indent=2)
    return out


def batch_exit_code(results):
    """0 iff every non-reference run stopped on a tolerance criterion."""
    for _, summary in results:
        if summary.reference:
            continue
        if summary.termination not in TOLERANCE_TERMINATIONS:
            return 1
    return 0


def _add_cli_flags(parser):
    parser.add_argument("--config", help="JSON batch or single-run document")
    parser.add_argument("--out", help="output directory (default bench-out)")
    parser.add_argument("--label", help="run label (flag form)")
    parser.add_argument("--no-reference", action="store_true",
                        help="skip the automatic high-accuracy reference run")
    # problem
    parser.add_argument("--problem", choices=PROBLEM_KINDS)
    parser.add_argument("--data", help="LIBSVM file for the logistic problem")
    parser.add_argument("--mu", type=float, help="logistic ridge weight")
    parser.add_argument("--n", type=int, help="synthetic sample count")
    parser.add_argument("--d", type=int, help="problem dimension")
    parser.add_argument("--seed", type=int, help="problem generator seed")
    parser.add_argument("--p", type=float, help="polytope hinge power")
    parser.add_argument("--cond", type=float, help="quadratic condition number")
    # solver
    parser.add_argument("--solver", choices=SOLVER_KINDS)
    parser.add_argument("--q", type=float)
    parser.add_argument("--M", type=float)
    parser.add_argument("--sigma", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--L-sc", dest="L_sc", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--sigma0", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--max-backtracks", dest="max_backtracks", type=int)
    parser.add_argument("--alpha-max", dest="alpha_max", type=float)
    parser.add_argument("--unit-interval", dest="unit_interval", action="store_const", const=True)
    parser.add_argument("--evals", type=int)
    parser.add_argument("--c1", type=float)
    parser.add_argument("--shrink", type=float)
    parser.add_argument("--rule", choices=("fixed", "armijo"), help="gm stepsize rule")
    parser.add_argument("--L", type=float, help="gm smoothness constant for rule=fixed")
    # stopping and diagnostics
    parser.add_argument("--tol", type=float, help="local gradient norm tolerance")
    parser.add_argument("--grad-tol", dest="grad_tol", type=float)
    parser.add_argument("--max-iters", dest="max_iters", type=int)
    parser.add_argument("--max-seconds", dest="max_seconds", type=float)
    parser.add_argument("--x0-seed", dest="x0_seed", type=int)
    parser.add_argument("--rate-window", dest="rate_window", type=int, nargs=2,
                        metavar=("START", "END"))


_PROBLEM_FLAGS = ("data", "mu", "n", "d", "seed", "p", "cond")
_SOLVER_FLAGS = ("q", "M", "sigma", "beta", "L_sc", "alpha", "sigma0", "gamma",
                 "max_backtracks", "alpha_max", "unit_interval", "evals", "c1",
                 "shrink", "rule", "L")
_STOP_FLAGS = {"tol": "local_grad_tol", "grad_tol": "grad_tol",
               "max_iters": "max_iters", "max_seconds": "max_seconds"}


def _flag_overrides(args):
    problem = {k: getattr(args, k) for k in _PROBLEM_FLAGS if getattr(args, k) is not None}
    if args.problem is not None:
        problem["kind"] = args.problem
    solver = {k: getattr(args, k) for k in _SOLVER_FLAGS if getattr(args, k) is not None}
    if args.solver is not None:
        solver["kind"] = args.solver
    stop = {field_name: getattr(args, flag) for flag, field_name in _STOP_FLAGS.items()
            if getattr(args, flag) is not None}
    return problem, solver, stop


def _merge_run(doc, flag_problem, flag_solver, flag_stop, args, index):
    """Per-run config fields win over CLI flags, which win over defaults."""
    problem = {**flag_problem, **doc.get("problem", {})}
    solver = {**flag_solver, **doc.get("solver", {})}
    stop_doc = {**flag_stop, **doc.get("stop", {})}
    label = doc.get("label") or args.label or f"run-{index}"
    merged = {
        "label": label,
        "problem": problem,
        "solver": solver,
        "stop": stop_doc,
        "x0": doc.get("x0"),
        "x0_seed": doc.get("x0_seed", args.x0_seed if args.x0_seed is not None else 0),
        "rate_window": doc.get("rate_window", args.rate_window),
    }
    return ExperimentConfig.from_dict(merged)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Run Newton-type solver benchmarks and write iteration traces.")
    _add_cli_flags(parser)
    args = parser.parse_args(argv)
    flag_problem, flag_solver, flag_stop = _flag_overrides(args)

    reference = not args.no_reference
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        runs = doc.get("runs", [doc] if "problem" in doc else [])
        if not runs:
            parser.error("config document has no runs")
        out_dir = args.out or doc.get("out") or "bench-out"
        if "reference" in doc and not args.no_reference:
            reference = bool(doc["reference"])
        configs = [_merge_run(run, flag_problem, flag_solver, flag_stop, args, i)
                   for i, run in enumerate(runs)]
    else:
        if not flag_problem.get("kind") or not flag_solver.get("kind"):
            parser.error("flag form needs --problem and --solver (or use --config)")
        out_dir = args.out or "bench-out"
        configs = [_merge_run({}, flag_problem, flag_solver, flag_stop, args, 0)]

    results = run_batch(configs, out_dir, reference=reference)
    for _, summary in results:
        tag = " (reference)" if summary.reference else ""
        if summary.error:
            print(f"{summary.label}{tag}: {summary.termination} ({summary.error})")
        else:
            print(f"{summary.label}{tag}: {summary.termination} after "
                  f"{summary.iterations} iterations, f = {summary.final_f:.6e}")
    return batch_exit_code(results)


if __name__ == "__main__":
    raise SystemExit(main())
