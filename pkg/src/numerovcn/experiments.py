"""Reproduction experiments: traveling Gaussian packet on replicated meshes.

The bundled 14-interval base mesh on [0, 30] has one genuinely complex
pencil eigenvalue pair.  On its K-fold replications that pair turns into a
degenerate growing cluster at ``K^2 lambda0`` (multiplicity about K/2) whose
overlap with the sampled packet is of quadrature size (~1e-6 for K = 40).
Left in, that content is amplified per step and buries the scheme's
consistency error long before the published operating points; the study
therefore prepares the initial data with an oblique spectral filter that
removes the growing-cluster content (a perturbation orders of magnitude
below the discretization error floor, recorded in every report header).
Instability remains observable: truncation and roundoff re-seed the cluster
every step, so mass still blows up once the time step is pushed below the
converse threshold.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .eigen import generalized_eigenvalues
from .mesh import ReplicationSpec, mesh_from_steps, replicate
from .operators import assemble_pencil
from .solver import FOLD_FULL, SchemeRun, run_simulation

__all__ = [
    "PacketParams",
    "ConvergenceCase",
    "FilterInfo",
    "UnstableClusterFilter",
    "gaussian_packet",
    "default_base_mesh",
    "prepare_packet_run",
    "max_error",
    "find_optimal_M",
    "mass_sweep",
    "convergence_rates",
    "convergence_study",
    "write_mass_csv",
    "write_sweep_csv",
    "write_convergence_csv",
]

#: step pattern of the bundled demonstration base mesh (J0 = 14);
#: actual steps are this pattern scaled so the mesh spans DEFAULT_LENGTH
DEFAULT_BASE_PATTERN = (1.0, 1.0, 1.0, 5.0, 3.0, 1.0, 3.0, 4.0,
                        5.0, 5.0, 5.0, 5.0, 5.0, 5.0)
DEFAULT_LENGTH = 30.0

#: eigenvalues with |imag| above this (relative to the modulus) count as
#: genuinely complex when hunting for growing clusters
COMPLEX_EIG_RTOL = 1e-9

_FILTER_SEED = 0x0F11


@dataclass(frozen=True)
class PacketParams:
    """Traveling Gaussian packet: center x_c, wave number k, final time."""

    x_c: float = 5.0
    k: float = 4.0
    t_max: float = 1.0

    def __post_init__(self):
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")


def gaussian_packet(x, t, params=PacketParams()):
    """Closed-form packet ``sqrt(1/(1+4it)) exp[(-(x-x_c)^2 +
    ik(x-x_c-kt)) / (1+4it)]`` (principal square root).

    Solves ``i psi_t = -psi_xx`` for every center and wave number.
    """
    x = np.asarray(x, dtype=float)
    den = 1.0 + 4.0j * t
    xc, k = params.x_c, params.k
    return np.sqrt(1.0 / den) * np.exp(((-(x - xc) ** 2) + 1j * k * (x - xc - k * t)) / den)


def default_base_mesh(length=DEFAULT_LENGTH):
    """The bundled 14-interval base mesh, step pattern scaled to ``length``.

    The pattern sums to 49, so the steps are ``pattern * length / 49``; the
    resulting pencil spectrum has one complex conjugate pair next to a real
    dominant eigenvalue.
    """
    pattern = np.asarray(DEFAULT_BASE_PATTERN)
    return mesh_from_steps(pattern * (length / pattern.sum()))


class FilterError(RuntimeError):
    """The growing-cluster bases could not be certified."""


@dataclass(frozen=True)
class FilterInfo:
    """What the initial-data filter did: cluster value, dimension, content removed."""

    sigma: complex
    cluster_dim: int
    removed_fraction: float


def _pencil_bands(pencil, transpose=False):
    """(A bands, B bands) as complex arrays, optionally both transposed.

    A is self-adjoint only in the step-weighted inner product, so its plain
    transpose differs from itself on non-uniform meshes; the left eigenvectors
    of (A, B) at sigma are the right eigenvectors of (A^T, B^T) at conj(sigma).
    """
    al, ad, au = pencil.a_lower, pencil.a_diag, pencil.a_upper
    bl, bd, bu = pencil.b_lower, pencil.b_diag, pencil.b_upper
    if transpose:
        al, au = au, al
        bl, bu = bu, bl
    return ((al.astype(complex), ad.astype(complex), au.astype(complex)),
            (bl.astype(complex), bd.astype(complex), bu.astype(complex)))


def _cluster_basis(pencil, sigma, block, rng, transpose=False, iters=4, rtol=1e-6):
    """Orthonormal basis of the invariant subspace of the eigenvalue cluster
    at ``sigma`` via shifted block inverse iteration and Rayleigh-Ritz.

    With ``transpose`` the pencil (A^T, B^T) is used instead; at conj(sigma)
    that yields the left cluster subspace of (A, B).
    """
    n = pencil.n
    (al, ad, au), (bl, bd, bu) = _pencil_bands(pencil, transpose)
    shift = sigma * (1.0 + 1e-8 + 1e-8j)
    x = rng.standard_normal((n, block)) + 1j * rng.standard_normal((n, block))
    x, _ = np.linalg.qr(x)
    for _ in range(iters):
        dl = al - shift * bl
        d = ad - shift * bd
        du = au - shift * bu
        y = np.empty_like(x)
        for col in range(x.shape[1]):
            rhs = kernels.tridiag_matvec(bl, bd, bu, x[:, col])
            sol, fail = kernels.tridiag_solve(dl, d, du, rhs, 1e-14)
            if fail >= 0:
                shift = sigma * (1.0 + 3e-8 + 2e-8j)
                dl = al - shift * bl
                d = ad - shift * bd
                du = au - shift * bu
                sol, fail = kernels.tridiag_solve(dl, d, du, rhs, 1e-14)
                if fail >= 0:
                    raise FilterError("shifted systems are persistently singular")
            y[:, col] = sol
        x, _ = np.linalg.qr(y)
    # Rayleigh-Ritz on the block to separate the cluster from spectators
    ax = np.empty_like(x)
    bx = np.empty_like(x)
    for col in range(x.shape[1]):
        ax[:, col] = kernels.tridiag_matvec(al, ad, au, x[:, col])
        bx[:, col] = kernels.tridiag_matvec(bl, bd, bu, x[:, col])
    ga = x.conj().T @ ax
    gb = x.conj().T @ bx
    theta, c = np.linalg.eig(np.linalg.solve(gb, ga))
    inside = np.abs(theta - sigma) <= rtol * abs(sigma)
    dim = int(np.sum(inside))
    if dim == 0:
        raise FilterError(f"no Ritz value near {sigma}")
    basis, _ = np.linalg.qr(x @ c[:, inside])
    return basis, dim


class UnstableClusterFilter:
    """Oblique spectral projector removing the growing-cluster content of a
    grid function on a replicated mesh.

    The cluster location is known from the base spectrum: each complex base
    eigenvalue ``lambda0`` with positive imaginary part reappears at
    ``K^2 lambda0`` on the K-fold replication (with multiplicity about K/2).
    Right and left cluster bases are computed by shifted block inverse
    iteration; the projector is ``P = V (Y^H V)^{-1} Y^H``.
    """

    def __init__(self, base_mesh, K, block_margin=3):
        self.base_mesh = base_mesh
        self.K = int(K)
        self.mesh = replicate(ReplicationSpec(base_mesh, self.K))
        pencil = assemble_pencil(self.mesh)
        base_spectrum = generalized_eigenvalues(base_mesh)
        growing = [p.lam for p in base_spectrum.pairs
                   if p.lam.imag > COMPLEX_EIG_RTOL * abs(p.lam)]
        self._subspaces = []
        rng = np.random.default_rng(_FILTER_SEED + self.K)
        for lam0 in growing:
            sigma = lam0 * self.K * self.K
            block = self.K // 2 + 1 + block_margin
            while True:
                right, dim_r = _cluster_basis(pencil, sigma, block, rng)
                left, dim_l = _cluster_basis(pencil, np.conj(sigma), block, rng,
                                             transpose=True)
                if dim_r < block and dim_l < block:
                    break
                # the whole block landed inside the cluster: it was too small
                block += max(4, block // 2)
                if block > pencil.n:
                    raise FilterError("cluster block grew past the problem size")
            if dim_r != dim_l:
                raise FilterError(f"left/right cluster dimensions differ: {dim_l} vs {dim_r}")
            self._check_residuals(pencil, sigma, right)
            # spectral projector P = V (Z^H A V)^{-1} Z^H A: left/right vectors
            # of distinct eigenvalues are A-orthogonal, not Euclidean-orthogonal
            (al, ad, au), _ = _pencil_bands(pencil, transpose=True)
            weighted_left = np.empty_like(left)
            for col in range(left.shape[1]):
                weighted_left[:, col] = kernels.tridiag_matvec(al, ad, au, left[:, col])
            coupling = weighted_left.conj().T @ right
            if np.linalg.cond(coupling) > 1e8:
                raise FilterError("left and right cluster bases are nearly A-orthogonal")
            self._subspaces.append((right, weighted_left, np.linalg.inv(coupling),
                                    sigma, dim_r))

    @staticmethod
    def _check_residuals(pencil, sigma, basis):
        # direct residual through the band products (basis columns are unit)
        for col in range(basis.shape[1]):
            v = basis[:, col]
            r = pencil.a_matvec(v) - sigma * pencil.b_matvec(v)
            scale = abs(sigma) * max(1.0, float(np.abs(pencil.b_diag).max()))
            if np.linalg.norm(r) > 1e-7 * scale:
                raise FilterError("cluster basis residual too large")

    @property
    def cluster_dims(self):
        return [dim for *_rest, dim in self._subspaces]

    def apply(self, values):
        """Remove the growing-cluster content of interior-node values.

        Returns ``(filtered, FilterInfo)``; inert (removes nothing) when the
        base mesh has no growing eigenvalue.
        """
        values = np.asarray(values, dtype=complex)
        out = values.copy()
        removed_sq = 0.0
        sigma = 0j
        dim_total = 0
        for right, left, coupling_inv, sig, dim in self._subspaces:
            component = right @ (coupling_inv @ (left.conj().T @ out))
            out -= component
            removed_sq += float(np.linalg.norm(component) ** 2)
            sigma = sig
            dim_total += dim
        denom = float(np.linalg.norm(values))
        frac = math.sqrt(removed_sq) / denom if denom > 0 else 0.0
        return out, FilterInfo(sigma=sigma, cluster_dim=dim_total, removed_fraction=frac)


_filter_cache = {}


def _get_filter(base_mesh, K):
    key = (base_mesh.nodes.tobytes(), int(K))
    if key not in _filter_cache:
        _filter_cache[key] = UnstableClusterFilter(base_mesh, K)
    return _filter_cache[key]


def prepare_packet_run(K, params=None, base_mesh=None, filter_unstable=True):
    """Replicate the base mesh, sample the packet at t = 0 and (by default)
    filter the growing-cluster content out of the sample.

    Returns ``(mesh, psi0, FilterInfo | None)``.
    """
    params = params or PacketParams()
    base_mesh = base_mesh or default_base_mesh()
    mesh = replicate(ReplicationSpec(base_mesh, int(K)))
    if not (mesh.nodes[0] < params.x_c < mesh.nodes[-1]):
        raise ValueError(f"packet center {params.x_c} lies outside the mesh")
    psi0 = gaussian_packet(mesh.nodes, 0.0, params)
    info = None
    if filter_unstable:
        filt = _get_filter(base_mesh, K)
        psi0[1:-1], info = filt.apply(psi0[1:-1])
    return mesh, psi0, info


def _packet_report(K, M, params, base_mesh, filter_unstable, fold):
    params = params or PacketParams()
    mesh, psi0, info = prepare_packet_run(K, params, base_mesh, filter_unstable)
    tau = params.t_max / M
    run = SchemeRun(mesh, tau, psi0, fold=fold)
    exact = lambda x, t: gaussian_packet(x, t, params)
    report = run_simulation(run, M, exact=exact)
    return report, info


def max_error(K, M, params=None, base_mesh=None, filter_unstable=True, fold=FOLD_FULL):
    """Max-norm error over all nodes and time levels of one packet run."""
    params = params or PacketParams()
    if M == 0:
        mesh, psi0, _ = prepare_packet_run(K, params, base_mesh, filter_unstable)
        return float(np.max(np.abs(gaussian_packet(mesh.nodes, 0.0, params) - psi0)))
    report, _ = _packet_report(K, M, params, base_mesh, filter_unstable, fold)
    return report.max_error


def find_optimal_M(K, bracket, stride=100, params=None, base_mesh=None,
                   filter_unstable=True, fold=FOLD_FULL):
    """Exhaustive stride-grid search for the step count minimizing the error.

    Ties break toward the smaller step count.  Returns ``(M_star, err)``.
    """
    lo, hi = int(bracket[0]), int(bracket[1])
    if stride < 1 or lo < 1 or hi < lo:
        raise ValueError(f"bad search grid: bracket {bracket!r}, stride {stride}")
    grid = range(lo, hi + 1, int(stride))
    best_m, best_err = None, np.inf
    for m in grid:
        err = max_error(K, m, params, base_mesh, filter_unstable, fold)
        if err < best_err:
            best_m, best_err = m, err
    if best_m is None:
        raise ValueError("empty search grid")
    return best_m, best_err


def mass_sweep(K, step_counts, params=None, base_mesh=None, filter_unstable=True,
               fold=FOLD_FULL):
    """One packet run per step count; returns ``[(M, RunReport), ...]``."""
    if not step_counts:
        raise ValueError("need at least one step count")
    out = []
    for m in step_counts:
        report, _ = _packet_report(K, int(m), params, base_mesh, filter_unstable, fold)
        out.append((int(m), report))
    return out


@dataclass(frozen=True)
class ConvergenceCase:
    """One row of a refinement study."""

    intervals: int
    m_star: int
    err: float
    rate: float | None


def convergence_rates(cases):
    """Rates ``log(err_k / err_{k+1}) / log(J_{k+1} / J_k)`` for adjacent pairs."""
    js = [c[0] for c in cases]
    errs = [c[1] for c in cases]
    if any(e <= 0 for e in errs):
        raise ValueError("errors must be positive")
    if any(j2 <= j1 for j1, j2 in zip(js, js[1:])):
        raise ValueError("interval counts must be strictly increasing")
    return [math.log(e1 / e2) / math.log(j2 / j1)
            for (j1, e1), (j2, e2) in zip(cases, cases[1:])]


def convergence_study(ks, first_bracket, stride=100, params=None, base_mesh=None,
                      filter_unstable=True, fold=FOLD_FULL):
    """Refinement study over replication counts with the stride-grid search.

    The first case searches ``first_bracket``; each later case searches
    ``[max(100, M_prev), 3 M_prev]`` around the previous optimum.
    """
    base_mesh = base_mesh or default_base_mesh()
    cases = []
    bracket = (int(first_bracket[0]), int(first_bracket[1]))
    prev = None
    for K in ks:
        m_star, err = find_optimal_M(K, bracket, stride, params, base_mesh,
                                     filter_unstable, fold)
        j = base_mesh.intervals * int(K)
        rate = None
        if prev is not None:
            rate = math.log(prev[1] / err) / math.log(j / prev[0])
        cases.append(ConvergenceCase(j, m_star, err, rate))
        prev = (j, err)
        bracket = (max(100, m_star), 3 * m_star)
    return cases


def _fmt(x):
    return f"{x:.17g}"


def _header_lines(fh, meta):
    for key, value in meta.items():
        fh.write(f"# {key}: {value}\n")


def write_mass_csv(path, report, meta):
    """Columns m,t,mass; rows downsampled to every ceil(M/1000)-th step."""
    m_count = report.steps
    every = max(1, math.ceil(m_count / 1000))
    with open(path, "w", encoding="ascii") as fh:
        _header_lines(fh, meta)
        fh.write("m,t,mass\n")
        for m in range(0, m_count + 1):
            if m % every and m != m_count:
                continue
            fh.write(f"{m},{_fmt(m * report.tau)},{_fmt(report.mass_series[m])}\n")


def write_sweep_csv(path, sweep, meta):
    """Columns M,m,t,mass for a whole sweep (same downsampling per run)."""
    with open(path, "w", encoding="ascii") as fh:
        _header_lines(fh, meta)
        fh.write("M,m,t,mass\n")
        for m_total, report in sweep:
            every = max(1, math.ceil(m_total / 1000))
            for m in range(0, m_total + 1):
                if m % every and m != m_total:
                    continue
                fh.write(f"{m_total},{m},{_fmt(m * report.tau)},"
                         f"{_fmt(report.mass_series[m])}\n")


def write_convergence_csv(path, cases, meta):
    """Columns J,Mstar,err,p (p empty on the first row)."""
    with open(path, "w", encoding="ascii") as fh:
        _header_lines(fh, meta)
        fh.write("J,Mstar,err,p\n")
        for case in cases:
            p = "" if case.rate is None else _fmt(case.rate)
            fh.write(f"{case.intervals},{case.m_star},{_fmt(case.err)},{p}\n")
