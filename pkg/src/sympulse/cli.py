"""Benchmark command line: ``sympulse {run,momentum,check,order}``.

Settings come from an optional flat JSON file (``--config``) and are
overridden by command-line flags. The Newton tolerance can also be set with
the ``SYMPULSE_NEWTON_TOL`` environment variable.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import discretization as disc
from .diagnostics import (
    PROBE_NEWTON,
    convergence_order,
    energy_drift,
    flow_jacobian_fd,
    symplectic_defect,
)
from .errors import ProblemNotFound, StepFailure
from .geometry_core import CotangentOfCotangent, PhasePoint, random_polynomial_field, verify_pairing_identity
from .integrator import CompositionScheme, Method, NewtonConfig, integrate, triple_jump
from .problems import Problem, get_problem
from .symmetry import momentum, momentum_drift

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

MAP_NAMES = ("theta", "midpoint", "euler", "square", "rigged")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: str = "oscillator"
    map: str = "theta"
    theta: float = 0.5
    adjoint: bool = False
    compose: str | None = None
    h: float = 0.1
    steps: int = 100
    out: str | None = None
    seed: int = 0
    h_list: list[float] = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    t_final: float = 1.0
    initial: list[float] | None = None
    newton_tol: float | None = None
    max_iter: int = 50
    probes: int = 20

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        try:
            self.theta = float(self.theta)
            self.h = float(self.h)
            self.steps = int(self.steps)
            self.seed = int(self.seed)
            self.t_final = float(self.t_final)
            self.h_list = [float(x) for x in self.h_list]
            self.max_iter = int(self.max_iter)
            self.probes = int(self.probes)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if self.map not in MAP_NAMES:
            raise ConfigError(f"unknown map {self.map!r}; known: {', '.join(MAP_NAMES)}")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError("theta must lie in [0, 1]")
        if self.steps < 0:
            raise ConfigError("steps must be >= 0")
        if self.newton_tol is not None and not float(self.newton_tol) > 0:
            raise ConfigError("newton_tol must be positive")

    def newton(self) -> NewtonConfig:
        tol = self.newton_tol
        env = os.environ.get("SYMPULSE_NEWTON_TOL")
        if env:
            try:
                tol = float(env)
            except ValueError:
                raise ConfigError(f"bad SYMPULSE_NEWTON_TOL={env!r}") from None
        return NewtonConfig(tol=1e-12 if tol is None else float(tol), max_iter=self.max_iter)


def parse_composition(text: str | None) -> CompositionScheme | None:
    if not text:
        return None
    kind, _, rest = text.partition(":")
    try:
        if kind == "triple-jump":
            return triple_jump(int(rest or 2))
        if kind == "gammas":
            gammas = [float(x) for x in rest.split(",") if x.strip()]
            total = sum(gammas)
            # renormalise only float noise from decimal input
            if gammas and abs(total - 1.0) < 1e-9:
                gammas[-1] += 1.0 - total
            return CompositionScheme(tuple(gammas), declared_order=1)
    except ValueError as exc:
        raise ConfigError(f"bad --compose {text!r}: {exc}") from None
    raise ConfigError(f"bad --compose {text!r}; use triple-jump:p or gammas:a,b,c")


def build_map(cfg: RunConfig, n: int) -> disc.DiscretizationMap:
    if cfg.map == "theta":
        R = disc.theta_map(cfg.theta, n)
    elif cfg.map == "midpoint":
        R = disc.midpoint_map(n)
    elif cfg.map == "euler":
        R = disc.theta_map(0.0, n)
    elif cfg.map == "square":
        R = disc.square_perturbed_map(n)
    else:
        R = disc.rigged_map(n)
    return disc.adjoint_map(R) if cfg.adjoint else R


def _initial(cfg: RunConfig, problem: Problem) -> PhasePoint:
    if cfg.initial is None:
        return problem.initial
    vals = [float(x) for x in cfg.initial]
    if len(vals) != 2 * problem.n:
        raise ConfigError(f"initial needs {2 * problem.n} values for {problem.name}")
    return PhasePoint.from_array(vals)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def trajectory_csv(traj, problem: Problem, with_momentum: bool) -> str:
    n = problem.n
    header = ["t"] + [f"q{i}" for i in range(n)] + [f"p{i}" for i in range(n)] + ["energy_err"]
    if with_momentum:
        header.append("momentum_err")
    header.append("newton_iters")
    _, e_series = energy_drift(traj, problem.hamiltonian)
    if with_momentum:
        _, m_series = momentum_drift(traj, problem.symmetry[1])
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for k, (t, s) in enumerate(zip(traj.times, traj.states)):
        row = [_fmt(t)] + [_fmt(x) for x in s.q] + [_fmt(x) for x in s.p] + [_fmt(e_series[k])]
        if with_momentum:
            row.append(_fmt(m_series[k]))
        row.append(str(traj.newton_iters[k]))
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def cmd_run(cfg: RunConfig, require_momentum: bool = False) -> int:
    problem = get_problem(cfg.problem)
    if require_momentum and problem.symmetry is None:
        raise ConfigError(f"problem {problem.name!r} declares no symmetry")
    method = Method(build_map(cfg, problem.n), parse_composition(cfg.compose))
    traj = integrate(method, problem.hamiltonian, cfg.h, cfg.steps, _initial(cfg, problem),
                     config=cfg.newton())
    _emit(trajectory_csv(traj, problem, problem.symmetry is not None), cfg.out)
    if traj.error is not None:
        print(f"error: {traj.error}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def run_checks(cfg: RunConfig) -> list[tuple[str, bool, str]]:
    """Run the structural checks and return ``(name, passed, detail)`` rows."""
    problem = get_problem(cfg.problem)
    n = problem.n
    R = build_map(cfg, n)
    rng = np.random.default_rng(cfg.seed)
    rows = []

    tol = 1e-10 if R.has_analytic_jacobian else 1e-6
    ax = disc.check_axioms(R, sample_count=100, tol=tol, rng=rng)
    rows.append(("axioms", ax.passed,
                 f"zero_section_defect={ax.zero_section_defect:.3e} "
                 f"rigidity_defect={ax.rigidity_defect:.3e} tol={tol:.0e}"))

    if problem.symmetry is not None:
        action, _ = problem.symmetry
        sym = disc.check_symmetry_preservation(R, action, sample_count=100, tol=1e-10, rng=rng)
        rows.append(("symmetry", sym.passed,
                     f"defect={sym.max_defect:.3e} action={sym.description} tol=1e-10"))

    worst = 0.0
    for _ in range(100):
        fieldq = random_polynomial_field(n, rng)
        w = CotangentOfCotangent(*(rng.standard_normal(n) for _ in range(4)))
        worst = max(worst, verify_pairing_identity(fieldq, w))
    rows.append(("pairing", worst < 1e-10, f"residual={worst:.3e} tol=1e-10"))

    method = Method(R, parse_composition(cfg.compose))
    h = cfg.h
    worst = 0.0
    ok = True
    detail = ""
    for _ in range(cfg.probes):
        z = problem.sample_state(rng)
        try:
            jac = flow_jacobian_fd(lambda s: method.step(problem.hamiltonian, h, s, PROBE_NEWTON), z)
        except StepFailure as exc:
            ok = False
            detail = f" ({exc})"
            break
        worst = max(worst, symplectic_defect(jac))
    rows.append(("symplectic", ok and worst < 1e-5,
                 f"defect={worst:.3e} h={h:g} probes={cfg.probes} tol=1e-05{detail}"))
    return rows


def cmd_check(cfg: RunConfig) -> int:
    rows = run_checks(cfg)
    lines = [f"{'PASS' if ok else 'FAIL'}  {name:<11} {detail}" for name, ok, detail in rows]
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK if all(ok for _, ok, _ in rows) else EXIT_FAILURE


def cmd_order(cfg: RunConfig) -> int:
    if len(cfg.h_list) < 3:
        raise ConfigError("order needs at least three step sizes")
    problem = get_problem(cfg.problem)
    method = Method(build_map(cfg, problem.n), parse_composition(cfg.compose))
    try:
        est = convergence_order(problem, method, cfg.h_list, cfg.t_final,
                                initial=_initial(cfg, problem), config=cfg.newton())
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    except StepFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    buf = io.StringIO()
    buf.write("h,error\n")
    for h, e in zip(est.step_sizes, est.errors):
        buf.write(f"{_fmt(h)},{_fmt(e)}\n")
    buf.write(f"# slope={_fmt(est.slope)} r_squared={_fmt(est.r_squared)}\n")
    _emit(buf.getvalue(), cfg.out)
    if cfg.out is not None:
        print(f"slope={est.slope:.4f} r_squared={est.r_squared:.6f}")
    return EXIT_OK


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON file with run settings")
    common.add_argument("--problem")
    common.add_argument("--map", choices=MAP_NAMES)
    common.add_argument("--theta", type=float)
    common.add_argument("--adjoint", action="store_true", default=None)
    common.add_argument("--compose", help="triple-jump:p or gammas:a,b,c")
    common.add_argument("--h", type=float)
    common.add_argument("--steps", type=int)
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--h-list", dest="h_list", type=_float_list)
    common.add_argument("--t-final", dest="t_final", type=float)
    common.add_argument("--initial", type=_float_list, help="q0,..,p0,.. starting state")
    common.add_argument("--newton-tol", dest="newton_tol", type=float)

    parser = argparse.ArgumentParser(prog="sympulse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="integrate and write a trajectory CSV")
    sub.add_parser("momentum", parents=[common],
                   help="like run, but the problem must declare a symmetry")
    sub.add_parser("check", parents=[common], help="structural checks report")
    sub.add_parser("order", parents=[common], help="empirical convergence order")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        data[key] = value
    return RunConfig.from_mapping(data)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "momentum":
            return cmd_run(cfg, require_momentum=True)
        if args.command == "check":
            return cmd_check(cfg)
        return cmd_order(cfg)
    except (ConfigError, ProblemNotFound) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
