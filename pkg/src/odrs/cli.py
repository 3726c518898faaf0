"""Command-line front end.

    odrs gen      --problem lasso --seed 7 --out lasso.txt
    odrs run      --solver odrs --lambda 1 --input lasso.txt --out trace.csv
    odrs sweep    --lambdas 0.1,1,10 --out sweep/
    odrs compare  --solvers drs,odrs,iodrs --lambda 1 --out compare.csv

Exit codes: 0 success, 1 I/O failure, 2 invalid parameters, 3 numerical
failure (divergence or an inner solve that did not converge).

Settings resolve as command-line flag, then ``--config`` JSON file, then
built-in default. JSON keys are the `RunSpec` field names, with ``lambda``
for the proximal step.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field, fields
from typing import List, Optional

import numpy as np

from . import diagnostics, problems, solvers
from .exceptions import InvalidSpec, NonFiniteIterate, OdrsError

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_DIVERGED = 3

PROBLEM_DEFAULTS = {
    "lasso": {"N": 1000, "n": 100, "k": 10, "sigma": 1e-3},
    "logistic": {"N": 500, "n": 20, "k": 5, "sigma": 1e-2},
}
DEFAULT_LAMBDAS = [0.1, 1.0, 10.0]
DEFAULT_SOLVERS = ["drs", "odrs", "iodrs"]
COMPARE_DELTA = 1e-3


@dataclass
class RunSpec:
    problem: str = "lasso"
    solver: str = "drs"
    lam: float = 1.0
    iterations: Optional[int] = None
    seed: int = 0
    output_path: Optional[str] = None
    N: Optional[int] = None
    n: Optional[int] = None
    k: Optional[int] = None
    sigma: Optional[float] = None
    scaling: str = "paper"
    input_path: Optional[str] = None
    lambdas: List[float] = field(default_factory=lambda: list(DEFAULT_LAMBDAS))
    solvers: List[str] = field(default_factory=lambda: list(DEFAULT_SOLVERS))
    delta: float = COMPARE_DELTA
    wall_clock: bool = False

    def validate(self):
        if self.problem not in PROBLEM_DEFAULTS:
            raise InvalidSpec(f"unknown problem {self.problem!r}")
        if self.solver not in solvers.SOLVER_KINDS:
            raise InvalidSpec(f"unknown solver {self.solver!r}")
        for s in self.solvers:
            if s not in solvers.SOLVER_KINDS:
                raise InvalidSpec(f"unknown solver {s!r}")
        for lam in [self.lam, *self.lambdas]:
            if not (lam > 0 and math.isfinite(lam)):
                raise InvalidSpec(f"lambda must be positive, got {lam}")
        if not self.lambdas:
            raise InvalidSpec("empty lambda list")
        if self.iterations is not None and self.iterations < 0:
            raise InvalidSpec(f"iterations must be >= 0, got {self.iterations}")
        if self.scaling not in ("paper", "classic"):
            raise InvalidSpec(f"unknown scaling {self.scaling!r}")
        if not self.delta > 0:
            raise InvalidSpec(f"delta must be positive, got {self.delta}")
        # SolverConfig carries the remaining invariants
        solvers.SolverConfig(lam=self.lam, iterations=self.iterations, seed=self.seed)
        return self

    def generator_params(self):
        params = dict(PROBLEM_DEFAULTS[self.problem])
        for key in ("N", "n", "k", "sigma"):
            if getattr(self, key) is not None:
                params[key] = getattr(self, key)
        return params


# JSON key -> RunSpec attribute
_CONFIG_KEYS = {f.name: f.name for f in fields(RunSpec)}
_CONFIG_KEYS["lambda"] = "lam"
del _CONFIG_KEYS["lam"]


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_common(p):
    p.add_argument("--config", help="JSON file with RunSpec fields")
    p.add_argument("--problem", choices=sorted(PROBLEM_DEFAULTS))
    p.add_argument("--input", dest="input_path", help="problem file written by `gen`")
    p.add_argument("--seed", type=int)
    p.add_argument("--N", type=int, dest="N", help="number of samples")
    p.add_argument("--n", type=int, dest="n", help="dimension")
    p.add_argument("--k", type=int, dest="k", help="nonzeros of the planted vector")
    p.add_argument("--sigma", type=float, help="noise level")
    p.add_argument("--scaling", choices=["paper", "classic"],
                   help="lasso targets b = A x0 / N + noise (paper) or A x0 + noise (classic)")
    p.add_argument("--out", dest="output_path")


def _add_solver_opts(p):
    p.add_argument("--lambda", type=float, dest="lam", help="proximal step")
    p.add_argument("--iters", type=int, dest="iterations")
    p.add_argument("--wall-clock", action="store_true", default=None, dest="wall_clock",
                   help="record wall time in elapsed_s (output no longer reproducible)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="odrs", description="Douglas-Rachford splitting experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a problem file")
    _add_common(p)

    p = sub.add_parser("run", help="run one solver and write its trace")
    _add_common(p)
    _add_solver_opts(p)
    p.add_argument("--solver", choices=solvers.SOLVER_KINDS)

    p = sub.add_parser("sweep", help="run one solver over several lambdas")
    _add_common(p)
    _add_solver_opts(p)
    p.add_argument("--solver", choices=solvers.SOLVER_KINDS)
    p.add_argument("--lambdas", type=_float_list)

    p = sub.add_parser("compare", help="run several solvers on one problem")
    _add_common(p)
    _add_solver_opts(p)
    p.add_argument("--solvers", type=_str_list)
    p.add_argument("--delta", type=float, help="objective band around the reference")
    return parser


def resolve_spec(args):
    """Merge flags over the JSON config over RunSpec defaults."""
    values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            config = json.load(fh)
        unknown = set(config) - set(_CONFIG_KEYS)
        if unknown:
            raise InvalidSpec(f"unknown config keys: {sorted(unknown)}")
        values.update({_CONFIG_KEYS[k]: v for k, v in config.items()})
    for f in fields(RunSpec):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    try:
        spec = RunSpec(**values)
    except TypeError as exc:
        raise InvalidSpec(str(exc)) from exc
    return spec.validate()


def load_problem(spec):
    if spec.input_path:
        return problems.read_problem(spec.input_path)
    params = spec.generator_params()
    if spec.problem == "lasso":
        return problems.generate_lasso(spec.seed, N=params["N"], n=params["n"], k=params["k"],
                                       noise_sigma=params["sigma"], scaling=spec.scaling)
    return problems.generate_logistic(spec.seed, N=params["N"], n=params["n"], k=params["k"],
                                      noise_sigma=params["sigma"])


def _fmt(v):
    return diagnostics.format_float(v)


def cmd_gen(spec, out=sys.stdout):
    if not spec.output_path:
        raise InvalidSpec("gen needs --out")
    problem = load_problem(spec)
    problems.write_problem(problem, spec.output_path)
    nnz = int(np.count_nonzero(problem.ground_truth)) if problem.ground_truth is not None else 0
    print(f"problem={problem.kind} N={problem.n_samples} n={problem.dim} "
          f"mu={_fmt(problem.mu)} nonzeros={nnz}", file=out)
    return EXIT_OK


@dataclass
class RunResult:
    solver: str
    lam: float
    x: Optional[np.ndarray]
    trace: list
    final_obj: float = math.nan
    final_eps: float = math.nan
    error: Optional[str] = None


def execute(problem, solver, lam, spec, sink):
    """Run one solver into `sink`; divergence is captured, not raised."""
    cfg = solvers.SolverConfig(lam=lam, iterations=spec.iterations, seed=spec.seed)
    clock = time.perf_counter if spec.wall_clock else None
    try:
        x, trace = solvers.run(problem, solver, cfg, trace_sink=sink, clock=clock)
    except NonFiniteIterate as exc:
        return RunResult(solver, lam, None, exc.trace, error=str(exc))
    eps = diagnostics.accuracy_measure(x, lam, problem.gradient, problem.prox_h)
    return RunResult(solver, lam, x, trace, problem.objective(x), float(np.linalg.norm(eps)))


def _summary_line(res):
    line = (f"solver={res.solver} lambda={_fmt(res.lam)} "
            f"final_obj={_fmt(res.final_obj)} final_eps={_fmt(res.final_eps)}")
    if res.error:
        line += " status=diverged"
    return line


def _run_to_csv(problem, solver, lam, spec, path):
    with diagnostics.CsvSink(path) as sink:
        return execute(problem, solver, lam, spec, sink)


def cmd_run(spec, out=sys.stdout):
    problem = load_problem(spec)
    path = spec.output_path or "trace.csv"
    res = _run_to_csv(problem, spec.solver, spec.lam, spec, path)
    print(_summary_line(res), file=out)
    if res.error:
        print(res.error, file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def sweep_filename(lam):
    return f"trace_lambda_{_fmt(lam)}.csv"


def cmd_sweep(spec, out=sys.stdout):
    problem = load_problem(spec)
    outdir = spec.output_path or "sweep"
    os.makedirs(outdir, exist_ok=True)
    results = []
    for lam in sorted(spec.lambdas):
        results.append(_run_to_csv(problem, spec.solver, lam, spec,
                                   os.path.join(outdir, sweep_filename(lam))))
    with open(os.path.join(outdir, "summary.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "solver", "final_obj", "final_eps", "status"])
        for res in results:
            w.writerow([_fmt(res.lam), res.solver, _fmt(res.final_obj), _fmt(res.final_eps),
                        "diverged" if res.error else "ok"])
    for res in results:
        print(_summary_line(res), file=out)
    return EXIT_DIVERGED if any(r.error for r in results) else EXIT_OK


def first_within(trace, target, delta):
    """First traced iteration whose objective is within `delta` of `target`."""
    for rec in trace:
        if abs(rec.objective - target) <= delta:
            return rec.t
    return None


def compare_columns(labels):
    cols = ["t"]
    for label in labels:
        cols += [f"{label}_objective", f"{label}_eps_norm", f"{label}_avg_regret"]
    return cols


def _labels(names):
    seen = {}
    out = []
    for s in names:
        seen[s] = seen.get(s, 0) + 1
        out.append(s if seen[s] == 1 else f"{s}_{seen[s]}")
    return out


def cmd_compare(spec, out=sys.stdout):
    if len(spec.solvers) < 2:
        raise InvalidSpec("compare needs at least two solvers")
    problem = load_problem(spec)
    labels = _labels(spec.solvers)
    results = [execute(problem, s, spec.lam, spec, diagnostics.ListSink()) for s in spec.solvers]

    by_t = {}
    for j, res in enumerate(results):
        for rec in res.trace:
            by_t.setdefault(rec.t, {})[j] = rec
    path = spec.output_path or "compare.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(compare_columns(labels))
        for t in sorted(by_t):
            row = [str(t)]
            for j in range(len(results)):
                rec = by_t[t].get(j)
                row += ([_fmt(rec.objective), _fmt(rec.eps_norm), _fmt(rec.avg_regret)]
                        if rec is not None else ["", "", ""])
            w.writerow(row)

    f_ref = problem.objective(problem.reference(1e-10))
    hits = {}
    for label, res in zip(labels, results):
        hits[label] = first_within(res.trace, f_ref, spec.delta)
        print(f"{_summary_line(res)} first_within_delta="
              f"{hits[label] if hits[label] is not None else 'never'}", file=out)
    reached = {k: v for k, v in hits.items() if v is not None}
    if reached:
        best = min(reached.values())
        first = ",".join(k for k, v in reached.items() if v == best)
    else:
        first = "none"
    print(f"reference_obj={_fmt(f_ref)} delta={_fmt(spec.delta)} first={first}", file=out)
    return EXIT_DIVERGED if any(r.error for r in results) else EXIT_OK


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare}


def main(argv=None, out=None):
    out = out if out is not None else sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = resolve_spec(args)
        return COMMANDS[args.command](spec, out=out)
    except InvalidSpec as exc:
        print(f"odrs: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except json.JSONDecodeError as exc:
        print(f"odrs: bad config file: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"odrs: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OdrsError as exc:
        print(f"odrs: numerical failure: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
