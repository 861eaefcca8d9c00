"""Implicit compact time stepper: one complex tridiagonal solve per step.

Each step solves ``L Psi^m = R Psi^{m-1} + g`` on the interior nodes, where

    ``L = (i hbar / tau) B - (1/2) (c_hbar A + B_V)``
    ``R = (i hbar / tau) B + (1/2) (c_hbar A + B_V)``

with A the negative second difference, B the compact average and ``B_V`` the
compact average of the pointwise product with the potential.  ``g`` collects
the known Dirichlet boundary values of both time levels through the stencil
weights that touch the boundary nodes; by default every such weight is
folded (``FOLD_FULL``), the alternative folds only the second-difference
weights (``FOLD_LAPLACIAN``).
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .mesh import Mesh
from .operators import _interior_weights, assemble_pencil, norm
from .stability import PhysicalParams

__all__ = [
    "FOLD_FULL",
    "FOLD_LAPLACIAN",
    "SchemeRun",
    "RunReport",
    "SingularSystemError",
    "ncn_step",
    "run_simulation",
    "mass_norm",
]

FOLD_FULL = "full"
FOLD_LAPLACIAN = "laplacian-only"

#: Thomas pivot guard, relative to the row scale
PIVOT_TOL = 1e-14


class SingularSystemError(RuntimeError):
    """The per-step tridiagonal system hit a negligible pivot (this scheme's
    instability shows up as growth, not singularity, so this should be rare)."""

    def __init__(self, step_index, row):
        super().__init__(f"singular step system at step {step_index}, row {row}")
        self.step_index = step_index
        self.row = row


@dataclass
class _StepMatrices:
    l_lower: np.ndarray
    l_diag: np.ndarray
    l_upper: np.ndarray
    r_lower: np.ndarray
    r_diag: np.ndarray
    r_upper: np.ndarray
    # weights multiplying the boundary values in the first and last rows
    l_left: complex
    r_left: complex
    l_right: complex
    r_right: complex


def _build_step_matrices(mesh, tau, params, potential, fold):
    pencil = assemble_pencil(mesh)
    ch = params.c_hbar
    v = potential
    # column-scaled averaging bands for the potential term (V applied at the
    # column's node before averaging)
    h_diag = ch * pencil.a_diag + pencil.b_diag * v[1:-1]
    h_upper = ch * pencil.a_upper + pencil.b_upper * v[2:-1]
    h_lower = ch * pencil.a_lower + pencil.b_lower * v[1:-2]
    zt = 1j * params.hbar / tau
    l_diag = zt * pencil.b_diag - 0.5 * h_diag
    l_upper = zt * pencil.b_upper - 0.5 * h_upper
    l_lower = zt * pencil.b_lower - 0.5 * h_lower
    r_diag = zt * pencil.b_diag + 0.5 * h_diag
    r_upper = zt * pencil.b_upper + 0.5 * h_upper
    r_lower = zt * pencil.b_lower + 0.5 * h_lower
    # stencil weights that would multiply the boundary nodes
    alpha, _, beta = _interior_weights(mesh)
    a_left = -1.0 / (mesh.steps[0] * mesh.avg_steps[0])
    a_right = -1.0 / (mesh.steps[-1] * mesh.avg_steps[-1])
    b_left = alpha[0] / 12.0
    b_right = beta[-1] / 12.0
    if fold == FOLD_FULL:
        h_left = ch * a_left + b_left * v[0]
        h_right = ch * a_right + b_right * v[-1]
        l_left = zt * b_left - 0.5 * h_left
        r_left = zt * b_left + 0.5 * h_left
        l_right = zt * b_right - 0.5 * h_right
        r_right = zt * b_right + 0.5 * h_right
    elif fold == FOLD_LAPLACIAN:
        l_left = -0.5 * ch * a_left
        r_left = 0.5 * ch * a_left
        l_right = -0.5 * ch * a_right
        r_right = 0.5 * ch * a_right
    else:
        raise ValueError(f"unknown folding mode {fold!r}")
    return _StepMatrices(l_lower, l_diag, l_upper, r_lower, r_diag, r_upper,
                         l_left, r_left, l_right, r_right)


@dataclass
class SchemeRun:
    """State of one time-stepped run (strictly sequential in the step index)."""

    mesh: Mesh
    tau: float
    state: np.ndarray
    params: PhysicalParams = field(default_factory=PhysicalParams)
    potential: np.ndarray | None = None
    fold: str = FOLD_FULL
    step_index: int = 0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        n_nodes = len(self.mesh)
        if callable(self.potential):
            self.potential = np.asarray(self.potential(self.mesh.nodes), dtype=float)
        elif self.potential is None:
            self.potential = np.zeros(n_nodes)
        else:
            self.potential = np.asarray(self.potential, dtype=float)
        if self.potential.shape != (n_nodes,):
            raise ValueError("potential must give one real value per node")
        self.state = np.asarray(self.state, dtype=complex)
        if self.state.shape != (n_nodes,):
            raise ValueError(f"state length {self.state.size}, expected {n_nodes}")
        self._matrices = _build_step_matrices(
            self.mesh, self.tau, self.params, self.potential, self.fold)


def ncn_step(run, boundary_new=(0.0, 0.0)):
    """Advance one step; returns the new state (also stored on the run)."""
    m = run._matrices
    v = run.state[1:-1]
    rhs = kernels.tridiag_matvec(m.r_lower, m.r_diag, m.r_upper, v)
    rhs[0] += m.r_left * run.state[0] - m.l_left * boundary_new[0]
    rhs[-1] += m.r_right * run.state[-1] - m.l_right * boundary_new[1]
    x, fail = kernels.tridiag_solve(m.l_lower, m.l_diag, m.l_upper, rhs, PIVOT_TOL)
    if fail >= 0:
        raise SingularSystemError(run.step_index + 1, fail)
    new_state = np.empty_like(run.state)
    new_state[0] = boundary_new[0]
    new_state[1:-1] = x
    new_state[-1] = boundary_new[1]
    run.state = new_state
    run.step_index += 1
    return new_state


@dataclass(frozen=True)
class RunReport:
    """Mass history, optional max-norm error against an exact solution, and
    step metadata of one finished run."""

    mass_series: np.ndarray
    max_error: float | None
    wall_time: float
    final_state: np.ndarray
    intervals: int
    steps: int
    tau: float


def run_simulation(run, M, exact=None):
    """Step a fresh run M times; track mass every step.

    If ``exact(x, t)`` is supplied, the Dirichlet boundary values are sampled
    from it and the max-norm error is taken over all nodes (boundary
    included) and all time levels (the initial one included).
    """
    if M < 1:
        raise ValueError("need at least one step")
    if run.step_index != 0:
        raise ValueError("run_simulation expects a fresh run (step_index 0)")
    t_begin = time.perf_counter()
    nodes = run.mesh.nodes
    mass = np.empty(M + 1)
    mass[0] = norm(run.mesh, run.state)
    max_err = None
    if exact is not None:
        max_err = float(np.max(np.abs(exact(nodes, 0.0) - run.state)))
    ends = nodes[[0, -1]]
    for m in range(1, M + 1):
        t = m * run.tau
        if exact is not None:
            vals = np.asarray(exact(ends, t), dtype=complex)
            boundary = (vals[0], vals[1])
        else:
            boundary = (0.0, 0.0)
        state = ncn_step(run, boundary)
        mass[m] = norm(run.mesh, state)
        if exact is not None:
            err = float(np.max(np.abs(exact(nodes, t) - state)))
            if err > max_err:
                max_err = err
    return RunReport(
        mass_series=mass,
        max_error=max_err,
        wall_time=time.perf_counter() - t_begin,
        final_state=run.state,
        intervals=run.mesh.intervals,
        steps=M,
        tau=run.tau,
    )


def mass_norm(mesh, state):
    """Weighted l2 mass of a grid function (interior nodes)."""
    return norm(mesh, state)
