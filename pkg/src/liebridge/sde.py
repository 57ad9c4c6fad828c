"""Closed-loop Monte Carlo for the controlled kinematic SDE.

Particles are advanced with the geometric Euler-Maruyama step

    R <- R exp( hat(Omega(R, t) dt + sigma sqrt(dt) xi) ),   xi ~ N(0, I),

which keeps every state exactly on the group.  On SO(2) states are stored
as angles (the exponential is then an angle increment); on SO(3) as 3x3
matrices.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Sequence

import numpy as np

from ._accel import interp_uniform
from .control import BridgeSolution, control_at, propagate_potentials
from .geometry import DensityGrid, Group, GroupGrid, exp_so3, log_so3, orthogonality_defect, rotation_angle

MIN_PARTICLES = 1000
DEFAULT_BINS = 64


@dataclass(frozen=True, eq=False)
class ParticleEnsemble:
    group: Group
    states: np.ndarray  # (n,) angles on SO(2), (n, 3, 3) rotations on SO(3)
    time: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "group", Group(self.group))
        object.__setattr__(self, "states", np.asarray(self.states, dtype=np.float64))

    @property
    def size(self) -> int:
        return self.states.shape[0]

    def angles(self) -> np.ndarray:
        """Angle on SO(2) in [0, 2pi); rotation angle in [0, pi] on SO(3)."""
        if self.group is Group.SO2:
            return self.states
        return rotation_angle(self.states)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def step(ens: ParticleEnsemble, control: Callable[[np.ndarray], np.ndarray], sigma: float,
         dt: float, rng: np.random.Generator) -> ParticleEnsemble:
    """Advance by ``dt``.  ``control`` maps the state array to body velocities (n, dim)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = ens.size
    dim = ens.group.algebra_dim
    omega = np.asarray(control(ens.states), dtype=np.float64).reshape(n, dim)
    incr = omega * dt
    if sigma > 0:
        incr = incr + sigma * np.sqrt(dt) * rng.standard_normal((n, dim))
    if ens.group is Group.SO2:
        new = np.mod(ens.states + incr[:, 0], 2.0 * np.pi)
    else:
        new = ens.states @ exp_so3(incr)
    return replace(ens, states=new, time=ens.time + dt)


def zero_control(states: np.ndarray) -> np.ndarray:
    return np.zeros((states.shape[0], 3 if states.ndim == 3 else 1))


def grid_control(grid: GroupGrid, values) -> Callable[[np.ndarray], np.ndarray]:
    """Feedback law from a control grid, linearly interpolated at each state's angle."""
    values = np.asarray(values, dtype=np.float64)
    if grid.group is Group.SO2:
        def field_so2(states):
            return interp_uniform(states, 0.0, grid.spacing, values, periodic=True)[:, None]
        return field_so2

    def field_so3(states):
        omega = log_so3(states)
        theta = np.linalg.norm(omega, axis=-1)
        mag = interp_uniform(theta, grid.nodes[0], grid.spacing, values, periodic=False)
        axis = omega / np.maximum(theta, 1e-12)[:, None]
        return mag[:, None] * axis
    return field_so3


# ---------------------------------------------------------------------------
# sampling the initial law
# ---------------------------------------------------------------------------

def sample_density(rho: DensityGrid, n: int, rng: np.random.Generator) -> np.ndarray:
    grid = rho.grid
    if grid.group is Group.SO2:
        # inverse CDF over the node cells, uniform inside each cell
        p = rho.values * grid.weights
        cdf = np.cumsum(p)
        cdf /= cdf[-1]
        idx = np.minimum(np.searchsorted(cdf, rng.random(n), side="right"), grid.size - 1)
        jitter = (rng.random(n) - 0.5) * grid.spacing
        return np.mod(grid.nodes[idx] + jitter, 2.0 * np.pi)
    return _sample_so3_class(rho, n, rng)


def _sample_so3_class(rho: DensityGrid, n: int, rng: np.random.Generator) -> np.ndarray:
    grid = rho.grid
    # rejection sampling of the angle: target rho(theta) sin^2(theta/2) on [0, pi]
    target = rho.values * np.sin(grid.nodes / 2.0) ** 2
    bound = 1.05 * np.max(target)
    angles = np.empty(0)
    while angles.size < n:
        m = 2 * (n - angles.size) + 64
        cand = rng.uniform(0.0, np.pi, m)
        dens = interp_uniform(cand, grid.nodes[0], grid.spacing, rho.values, periodic=False)
        accept = rng.random(m) * bound < dens * np.sin(cand / 2.0) ** 2
        angles = np.concatenate([angles, cand[accept]])
    angles = angles[:n]
    axis = rng.standard_normal((n, 3))
    axis /= np.linalg.norm(axis, axis=1, keepdims=True)
    return exp_so3(angles[:, None] * axis)


# ---------------------------------------------------------------------------
# histograms
# ---------------------------------------------------------------------------

def bin_map(grid: GroupGrid, n_bins: int) -> np.ndarray:
    """Bin index of every grid node when rebinning to ``n_bins`` bins."""
    n_bins = min(n_bins, grid.size)
    return (np.arange(grid.size) * n_bins) // grid.size


def reference_histogram(rho: DensityGrid, n_bins: int = DEFAULT_BINS) -> np.ndarray:
    bins = bin_map(rho.grid, n_bins)
    return np.bincount(bins, weights=rho.values * rho.grid.weights, minlength=bins[-1] + 1)


def empirical_histogram(grid: GroupGrid, angles, n_bins: int = DEFAULT_BINS) -> np.ndarray:
    bins = bin_map(grid, n_bins)
    counts = np.bincount(bins[grid.node_index(angles)], minlength=bins[-1] + 1).astype(np.float64)
    return counts / counts.sum()


def total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


@dataclass
class SimulationResult:
    checkpoints: np.ndarray
    empirical: Dict[float, np.ndarray] = field(default_factory=dict)
    reference: Dict[float, np.ndarray] = field(default_factory=dict)
    tv: Dict[float, float] = field(default_factory=dict)
    max_orthogonality_defect: float = 0.0
    final: ParticleEnsemble = None


def simulate_bridge(solution: BridgeSolution, n_particles: int, n_steps: int, seed: int,
                    checkpoints: Sequence[float] = (0.5, 1.0), n_bins: int = DEFAULT_BINS,
                    track_defect: bool = False) -> SimulationResult:
    """Sample from rho_0, drive with the optimal control, compare marginals to rho_opt.

    The control is evaluated from the propagated potentials at every step time,
    so no interpolation in time is needed.
    """
    if n_particles < MIN_PARTICLES:
        raise ValueError(f"need at least {MIN_PARTICLES} particles, got {n_particles}")
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    problem = solution.problem
    grid = problem.grid
    dt = 1.0 / n_steps
    step_times = np.arange(n_steps + 1) * dt
    ckpt_steps = {int(round(c * n_steps)): float(c) for c in checkpoints}

    rng = make_rng(seed)
    ens = ParticleEnsemble(grid.group, sample_density(problem.rho0, n_particles, rng), 0.0, seed)
    log_phi, _ = propagate_potentials(problem, solution.potentials, step_times[:-1])

    result = SimulationResult(checkpoints=np.asarray(sorted(ckpt_steps.values())), final=ens)
    defect = 0.0

    def record(k):
        c = ckpt_steps[k]
        _, _, rho, _ = solution.fields_at(c)
        ref = reference_histogram(DensityGrid(grid, rho), n_bins)
        emp = empirical_histogram(grid, ens.angles(), n_bins)
        result.empirical[c] = emp
        result.reference[c] = ref
        result.tv[c] = total_variation(emp, ref)

    if 0 in ckpt_steps:
        record(0)
    for k in range(n_steps):
        ctrl = grid_control(grid, control_at(problem, log_phi[k]))
        ens = step(ens, ctrl, problem.sigma, dt, rng)
        if track_defect and grid.group is Group.SO3:
            defect = max(defect, orthogonality_defect(ens.states))
        if k + 1 in ckpt_steps:
            record(k + 1)
    result.max_orthogonality_defect = defect
    result.final = ens
    return result
