"""Experiment pipeline: solve -> recover bridge -> (simulate) -> write artifacts."""

import json
import logging
import math
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .control import BridgeSolution, build_solution, default_times
from .geometry import Group, make_grid, von_mises_so2, von_mises_so3_class
from .sde import simulate_bridge
from .sinkhorn import BridgeProblem, ConvergenceReport, solve
from .svg import waterfall_svg

log = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2

REPORT_KEYS = (
    "schema_version", "group", "grid_size", "sigma", "truncation",
    "converged", "iterations", "dH_final", "contraction_estimate",
    "marginal_residual_rho0", "marginal_residual_rho1",
    "boundary_error_rho0", "boundary_error_rho1", "mass_drift_max",
    "times", "argmax_trajectory", "shorter_arc", "argmax_monotone", "simulation",
)


def build_problem(cfg: ExperimentConfig) -> BridgeProblem:
    grid = make_grid(cfg.group, cfg.grid_size)
    if grid.group is Group.SO2:
        rho0 = von_mises_so2(grid, cfg.kappa, cfg.location0)
        rho1 = von_mises_so2(grid, cfg.kappa, cfg.location1)
    else:
        rho0 = von_mises_so3_class(grid, cfg.kappa, cfg.location0)
        rho1 = von_mises_so3_class(grid, cfg.kappa, cfg.location1)
    return BridgeProblem(grid, rho0, rho1, cfg.sigma, cfg.truncation)


def _wrap(a):
    return np.mod(np.asarray(a) + np.pi, 2.0 * np.pi) - np.pi


def on_shorter_arc(angles, start: float, end: float, slack: float) -> bool:
    """True when every angle lies on the shorter circular arc from ``start`` to ``end``."""
    span = _wrap(end - start)
    rel = _wrap(np.asarray(angles) - start)
    if span >= 0:
        return bool(np.all((rel >= -slack) & (rel <= span + slack)))
    return bool(np.all((rel <= slack) & (rel >= span - slack)))


def argmax_monotone(angles, slack: float) -> bool:
    d = np.diff(np.asarray(angles))
    return bool(np.all(d >= -slack) or np.all(d <= slack))


def _csv(path: Path, header, columns) -> None:
    rows = [",".join(header)]
    for row in zip(*columns):
        rows.append(",".join(str(v) if isinstance(v, (int, np.integer)) else f"{v:.17g}" for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")


def _time_tag(t: float) -> str:
    return f"{t:.4f}"


def make_report(cfg: ExperimentConfig, problem: BridgeProblem, report: ConvergenceReport,
                sol: BridgeSolution, sim=None) -> dict:
    grid = problem.grid
    argmax = sol.argmax_trajectory()
    slack = grid.spacing
    rho0, rho1 = problem.rho0.values, problem.rho1.values
    out = {
        "schema_version": 1,
        "group": cfg.group,
        "grid_size": grid.size,
        "sigma": cfg.sigma,
        "truncation": problem.kernel.truncation(grid) if grid.group is Group.SO2 else problem.kernel.l_max,
        "converged": report.converged,
        "iterations": report.iterations,
        "dH_final": report.terminal_residual,
        "contraction_estimate": report.contraction_estimate,
        "marginal_residual_rho0": report.residual_rho0,
        "marginal_residual_rho1": report.residual_rho1,
        "boundary_error_rho0": float(np.max(np.abs(sol.rho_opt[0] - rho0)) / np.max(rho0)),
        "boundary_error_rho1": float(np.max(np.abs(sol.rho_opt[-1] - rho1)) / np.max(rho1)),
        "mass_drift_max": float(np.max(np.abs(sol.masses() - 1.0))),
        "times": [float(t) for t in sol.times],
        "argmax_trajectory": [float(a) for a in argmax],
        "shorter_arc": None,
        "argmax_monotone": None,
        "simulation": None,
    }
    if grid.group is Group.SO2:
        out["shorter_arc"] = on_shorter_arc(argmax, cfg.location0, cfg.location1, slack)
    else:
        out["argmax_monotone"] = argmax_monotone(argmax, slack)
    if sim is not None:
        out["simulation"] = {
            "n_particles": cfg.n_particles,
            "n_steps": cfg.n_steps,
            "seed": cfg.seed,
            "tv": {f"{c:g}": float(v) for c, v in sorted(sim.tv.items())},
        }
    assert tuple(out) == REPORT_KEYS
    return out


def write_artifacts(out_dir: Path, problem: BridgeProblem, report: ConvergenceReport,
                    sol: BridgeSolution, summary: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = problem.grid
    _csv(out_dir / "convergence.csv", ["iteration", "dH_residual"],
         [list(range(1, report.iterations + 1)), report.dH_trace])
    for k, t in enumerate(sol.times):
        tag = _time_tag(t)
        _csv(out_dir / f"density_t{tag}.csv", ["node", "weight", "rho_opt"],
             [grid.nodes, grid.weights, sol.rho_opt[k]])
        _csv(out_dir / f"control_t{tag}.csv", ["node", "weight", "control"],
             [grid.nodes, grid.weights, sol.control[k]])

    angles = grid.nodes
    dens, r0, r1 = sol.rho_opt, problem.rho0.values, problem.rho1.values
    if grid.group is Group.SO2:
        # show [-pi, pi) so mass crossing theta = 0 stays contiguous
        order = np.argsort(_wrap(angles))
        angles, dens, r0, r1 = _wrap(angles)[order], dens[:, order], r0[order], r1[order]
        xlabel = "theta (rad)"
    else:
        xlabel = "rotation angle |omega| (rad)"
    svg = waterfall_svg(angles, sol.times, dens, r0, r1, xlabel,
                        title=f"Schrodinger bridge on {grid.group.value.upper()}")
    (out_dir / "solution.svg").write_text(svg)
    with open(out_dir / "report.json", "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=False)
        fh.write("\n")


def run_experiment(cfg: ExperimentConfig, out_dir=None):
    """Execute the pipeline; return ``(exit_code, summary_dict)``."""
    cfg.validate()
    out_dir = Path(out_dir if out_dir is not None else cfg.directory)
    problem = build_problem(cfg)
    potentials, report = solve(problem, cfg.tol, cfg.max_iter)
    log.info("sinkhorn: %d iterations, converged=%s", report.iterations, report.converged)
    sol = build_solution(problem, potentials, default_times(cfg.n_times))
    sim = None
    if cfg.simulate and report.converged:
        sim = simulate_bridge(sol, cfg.n_particles, cfg.n_steps, cfg.seed)
    summary = make_report(cfg, problem, report, sol, sim)
    write_artifacts(out_dir, problem, report, sol, summary)
    return (EXIT_OK if report.converged else EXIT_NOT_CONVERGED), summary


