"""Full complex spectrum of the tridiagonal pencil A w = lambda B w.

The pencil is reduced to the standard eigenproblem on ``M = A^{-1} B`` (A is
symmetric positive definite tridiagonal, so the columns are obtained by
tridiagonal solves).  The spectrum of M is computed by balancing, Householder
reduction to upper Hessenberg form and implicitly shifted double-step QR
iteration with deflation; pencil eigenvalues are ``lambda = 1/mu``, and near
zero ``mu`` are reported as discarded (infinite) modes rather than silently
dropped.  Eigenvectors are recovered by inverse iteration on ``A - lambda B``.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .mesh import ReplicationSpec, extend, replicate
from .operators import assemble_pencil

__all__ = [
    "EigenPair",
    "SpectrumReport",
    "EigenSolveError",
    "matrix_eigenvalues",
    "generalized_eigenvalues",
    "pencil_residual",
    "check_proposition1",
]

#: QR sweeps allowed per eigenvalue before declaring failure
QR_ITERATION_BUDGET = 40
#: subdiagonal deflation threshold, relative to the adjacent diagonal moduli
QR_DEFLATION_TOL = 1e-14
#: |mu| below this times ||M||_inf counts as an infinite pencil eigenvalue
DISCARD_TOL = 1e-12
#: conjugate pairs must match to this relative tolerance
PAIRING_TOL = 1e-8

_VECTOR_SEED = 0x5EED


class EigenSolveError(RuntimeError):
    """QR iteration failed to converge within its sweep budget."""


@dataclass(frozen=True)
class EigenPair:
    """One converged eigenpair: value, interior-node vector, relative residual.

    The vector has unit Euclidean length and zero phase at its first
    significant entry.
    """

    lam: complex
    vector: np.ndarray
    residual: float

    @property
    def lam_re(self):
        return self.lam.real

    @property
    def lam_im(self):
        return self.lam.imag


@dataclass(frozen=True)
class SpectrumReport:
    """Spectrum sorted by descending modulus (ties: descending imaginary part)."""

    pairs: list
    n_real: int
    n_complex: int
    n_discarded: int

    @property
    def eigenvalues(self):
        return np.array([p.lam for p in self.pairs])


def _banded_norm_inf(lower, diag, upper):
    n = diag.size
    row = np.abs(diag).astype(float)
    if n > 1:
        row[1:] += np.abs(lower)
        row[:-1] += np.abs(upper)
    return float(row.max())


def _solve_tridiag(dl, d, du, rhs):
    x, fail = kernels.tridiag_solve(dl, d, du, rhs, 1e-14)
    return x, fail


def pencil_m_matrix(pencil):
    """Dense ``M = A^{-1} B``, columns solved through the tridiagonal kernel."""
    n = pencil.n
    dl = pencil.a_lower.astype(complex)
    d = pencil.a_diag.astype(complex)
    du = pencil.a_upper.astype(complex)
    b = pencil.b_dense().astype(complex)
    m = np.empty((n, n))
    for j in range(n):
        col, fail = _solve_tridiag(dl, d, du, b[:, j])
        if fail >= 0:
            raise EigenSolveError(f"positive definite factorization broke at row {fail}")
        m[:, j] = col.real
    return m


def matrix_eigenvalues(m):
    """Eigenvalues of a real square matrix via balance + Hessenberg + QR."""
    h = np.array(m, dtype=float, copy=True)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("need a square matrix")
    if h.shape[0] == 1:
        return h[0, :1].astype(complex)
    kernels.balance_inplace(h)
    kernels.hessenberg_inplace(h)
    re, im, fail = kernels.hessenberg_eigvals(h, QR_ITERATION_BUDGET, QR_DEFLATION_TOL)
    if fail >= 0:
        raise EigenSolveError(
            f"QR iteration exceeded {QR_ITERATION_BUDGET} sweeps on the block ending at index {fail}")
    return re + 1j * im


def _pair_conjugates(lams):
    """Symmetrize non-real eigenvalues into exact conjugate pairs."""
    lams = list(lams)
    out = []
    pos = [l for l in lams if l.imag > 0]
    neg = [l for l in lams if l.imag < 0]
    n_complex = 0
    for l in lams:
        if l.imag == 0:
            out.append(l)
    if len(pos) != len(neg):
        raise EigenSolveError("unpaired complex eigenvalue in a real pencil spectrum")
    used = [False] * len(neg)
    for lp in pos:
        best, best_d = -1, np.inf
        for i, ln in enumerate(neg):
            if used[i]:
                continue
            dist = abs(lp - np.conj(ln))
            if dist < best_d:
                best, best_d = i, dist
        if best < 0 or best_d > PAIRING_TOL * abs(lp):
            raise EigenSolveError(
                f"eigenvalue {lp} has no conjugate partner within {PAIRING_TOL:g} relative")
        used[best] = True
        sym = 0.5 * (lp + np.conj(neg[best]))
        out.append(sym)
        out.append(np.conj(sym))
        n_complex += 2
    return out, n_complex


def _inverse_iteration(pencil, lam, rng):
    """A few inverse-iteration steps on (A - lambda B) from a random start."""
    n = pencil.n
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    shift = lam
    best_v, best_res = v, np.inf
    a_inf = _banded_norm_inf(pencil.a_lower, pencil.a_diag, pencil.a_upper)
    b_inf = _banded_norm_inf(pencil.b_lower, pencil.b_diag, pencil.b_upper)
    for attempt in range(3):
        dl = pencil.a_lower - shift * pencil.b_lower
        d = pencil.a_diag - shift * pencil.b_diag
        du = pencil.a_upper - shift * pencil.b_upper
        ok = True
        for _ in range(5):
            w, fail = _solve_tridiag(dl.astype(complex), d.astype(complex),
                                     du.astype(complex), v)
            if fail >= 0:
                ok = False
                break
            v = w / np.linalg.norm(w)
            res = _residual(pencil, lam, v, a_inf, b_inf)
            if res < best_res:
                best_res, best_v = res, v
            if res < 1e-13:
                break
        if ok and best_res < 1e-10:
            break
        # exactly singular shift: nudge it off the eigenvalue and retry
        shift = lam * (1.0 + 3e-13 * (attempt + 1)) + 1e-300
    v = best_v
    mags = np.abs(v)
    first = int(np.argmax(mags > 1e-8 * mags.max()))
    phase = v[first] / abs(v[first])
    v = v * np.conj(phase)
    return v / np.linalg.norm(v), best_res


def _residual(pencil, lam, v, a_inf=None, b_inf=None):
    if a_inf is None:
        a_inf = _banded_norm_inf(pencil.a_lower, pencil.a_diag, pencil.a_upper)
    if b_inf is None:
        b_inf = _banded_norm_inf(pencil.b_lower, pencil.b_diag, pencil.b_upper)
    r = pencil.a_matvec(v) - lam * pencil.b_matvec(v)
    return float(np.linalg.norm(r) / (np.linalg.norm(v) * (a_inf + abs(lam) * b_inf)))


def generalized_eigenvalues(mesh):
    """Solve the pencil eigenproblem on a mesh and return the sorted spectrum."""
    pencil = assemble_pencil(mesh)
    m = pencil_m_matrix(pencil)
    mu = matrix_eigenvalues(m)
    m_scale = float(np.max(np.sum(np.abs(m), axis=1)))
    keep = np.abs(mu) >= DISCARD_TOL * m_scale
    n_discarded = int(np.sum(~keep))
    lams, n_complex = _pair_conjugates(1.0 / mu[keep])
    order = sorted(range(len(lams)), key=lambda i: (-abs(lams[i]), -lams[i].imag))
    rng = np.random.default_rng(_VECTOR_SEED + pencil.n)
    pairs = []
    for i in order:
        lam = complex(lams[i])
        vec, res = _inverse_iteration(pencil, lam, rng)
        pairs.append(EigenPair(lam, vec, res))
    return SpectrumReport(
        pairs=pairs,
        n_real=len(lams) - n_complex,
        n_complex=n_complex,
        n_discarded=n_discarded,
    )


def pencil_residual(mesh, lam, vector):
    """Relative pencil residual of a candidate eigenpair on interior nodes."""
    vector = np.asarray(vector, dtype=complex)
    pencil = assemble_pencil(mesh)
    if vector.shape != (pencil.n,):
        raise ValueError(f"vector length {vector.size}, expected {pencil.n}")
    if not np.any(vector):
        raise ValueError("zero vector has no residual")
    return _residual(pencil, complex(lam), vector)


def check_proposition1(base_mesh, pair, K):
    """Residual of the extended eigenpair ``(K^2 lambda, Pi_K w)`` on the
    replicated mesh (small residual certifies the replication law)."""
    replicated = replicate(ReplicationSpec(base_mesh, K))
    padded = np.zeros(base_mesh.intervals + 1, dtype=complex)
    padded[1:-1] = pair.vector
    extended = extend(base_mesh, padded, K)
    return pencil_residual(replicated, pair.lam * K * K, extended[1:-1])
