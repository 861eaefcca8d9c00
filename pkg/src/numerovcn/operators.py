"""Discrete calculus on a mesh: compact three-point averaging, the negative
second difference, the weighted inner product, and tridiagonal pencil assembly.

Grid functions are plain complex (or real) arrays of length J+1 aligned with
the nodes of a :class:`~numerovcn.mesh.Mesh`; membership in the
zero-boundary space means entries 0 and J are exactly zero.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .mesh import MeshError

__all__ = [
    "NumerovWeights",
    "Pencil",
    "numerov_weights",
    "weights_nonnegative",
    "apply_numerov",
    "apply_neg_laplacian",
    "inner_product",
    "norm",
    "assemble_pencil",
]

#: ratio band on which both outer averaging weights stay non-negative
RATIO_LOW = 2.0 / (np.sqrt(5.0) + 1.0)
RATIO_HIGH = (np.sqrt(5.0) + 1.0) / 2.0


@dataclass(frozen=True)
class NumerovWeights:
    """Averaging weights (alpha, gamma, beta) at one interior node.

    The stencil is ``(alpha W_- + 10 gamma W + beta W_+) / 12`` and the
    weights satisfy ``(alpha + 10 gamma + beta) / 12 = 1``.
    """

    alpha: float
    gamma: float
    beta: float


def _check_steps(h, h_plus):
    if not (np.isfinite(h) and h > 0.0):
        raise MeshError(f"left step must be finite and > 0, got {h!r}")
    if not (np.isfinite(h_plus) and h_plus > 0.0):
        raise MeshError(f"right step must be finite and > 0, got {h_plus!r}")


def numerov_weights(h, h_plus):
    """Weights at a node with left step h and right step h_plus.

    alpha = 2 - h_plus^2 / (h hbar),  gamma = 1 + (h_plus - h)^2 / (5 h h_plus),
    beta = 2 - h^2 / (h_plus hbar),   hbar = (h + h_plus) / 2.

    On a uniform pair all three equal 1.
    """
    _check_steps(h, h_plus)
    hbar = 0.5 * (h + h_plus)
    alpha = 2.0 - h_plus * h_plus / (h * hbar)
    gamma = 1.0 + (h_plus - h) ** 2 / (5.0 * h * h_plus)
    beta = 2.0 - h * h / (h_plus * hbar)
    return NumerovWeights(alpha, gamma, beta)


def weights_nonnegative(h, h_plus):
    """True iff both outer weights are non-negative, i.e. iff
    ``2/(sqrt 5 + 1) <= h_plus/h <= (sqrt 5 + 1)/2``."""
    _check_steps(h, h_plus)
    ratio = h_plus / h
    return RATIO_LOW <= ratio <= RATIO_HIGH


def _interior_weights(mesh):
    """Vectorized (alpha, gamma, beta) over the interior nodes."""
    h = mesh.steps[:-1]
    hp = mesh.steps[1:]
    hbar = mesh.avg_steps
    alpha = 2.0 - hp * hp / (h * hbar)
    gamma = 1.0 + (hp - h) ** 2 / (5.0 * h * hp)
    beta = 2.0 - h * h / (hp * hbar)
    return alpha, gamma, beta


def apply_numerov(mesh, values):
    """Compact average at the interior nodes: (alpha W_- + 10 gamma W + beta W_+)/12."""
    values = np.asarray(values)
    alpha, gamma, beta = _interior_weights(mesh)
    return (alpha * values[:-2] + 10.0 * gamma * values[1:-1] + beta * values[2:]) / 12.0


def apply_neg_laplacian(mesh, values):
    """Negative second difference at the interior nodes.

    Exact on quadratics: affine input gives 0, ``x^2`` gives the constant -2.
    """
    values = np.asarray(values)
    h = mesh.steps[:-1]
    hp = mesh.steps[1:]
    fwd = (values[2:] - values[1:-1]) / hp
    bwd = (values[1:-1] - values[:-2]) / h
    return -(fwd - bwd) / mesh.avg_steps


def inner_product(mesh, u, w):
    """Weighted sesquilinear product ``sum_j u_j conj(w_j) hbar_j`` over interior nodes."""
    u = np.asarray(u)
    w = np.asarray(w)
    return complex(np.sum(u[1:-1] * np.conj(w[1:-1]) * mesh.avg_steps))


def norm(mesh, u):
    """Weighted l2 norm over interior nodes."""
    u = np.asarray(u)
    return float(np.sqrt(np.sum(np.abs(u[1:-1]) ** 2 * mesh.avg_steps)))


@dataclass(frozen=True)
class Pencil:
    """Tridiagonal matrix pair (A, B) on the interior nodes.

    A is the negative second difference (symmetric positive definite), B the
    compact averaging operator (nonsymmetric on non-uniform meshes).  Bands
    follow the convention ``lower[i] = M[i+1, i]``, ``upper[i] = M[i, i+1]``.
    """

    a_lower: np.ndarray
    a_diag: np.ndarray
    a_upper: np.ndarray
    b_lower: np.ndarray
    b_diag: np.ndarray
    b_upper: np.ndarray

    @property
    def n(self):
        return self.a_diag.size

    def a_dense(self):
        return (np.diag(self.a_diag) + np.diag(self.a_lower, -1)
                + np.diag(self.a_upper, 1))

    def b_dense(self):
        return (np.diag(self.b_diag) + np.diag(self.b_lower, -1)
                + np.diag(self.b_upper, 1))

    def a_matvec(self, x):
        return kernels.tridiag_matvec(
            self.a_lower.astype(complex), self.a_diag.astype(complex),
            self.a_upper.astype(complex), np.asarray(x, dtype=complex))

    def b_matvec(self, x):
        return kernels.tridiag_matvec(
            self.b_lower.astype(complex), self.b_diag.astype(complex),
            self.b_upper.astype(complex), np.asarray(x, dtype=complex))

    def a_minors_positive(self):
        """All leading principal minors of A positive (det recurrence pivots)."""
        pivot = self.a_diag[0]
        if pivot <= 0.0:
            return False
        for i in range(1, self.n):
            pivot = self.a_diag[i] - self.a_lower[i - 1] * self.a_upper[i - 1] / pivot
            if pivot <= 0.0:
                return False
        return True


def assemble_pencil(mesh):
    """Matrices of the negative second difference and the compact average on
    the interior nodes, with the zero-boundary columns dropped."""
    h = mesh.steps[:-1]
    hp = mesh.steps[1:]
    hbar = mesh.avg_steps
    alpha, gamma, beta = _interior_weights(mesh)
    a_diag = (1.0 / h + 1.0 / hp) / hbar
    a_upper = -1.0 / (hp[:-1] * hbar[:-1])   # row i, column i+1
    a_lower = -1.0 / (h[1:] * hbar[1:])      # row i+1, column i
    b_diag = 10.0 * gamma / 12.0
    b_upper = beta[:-1] / 12.0
    b_lower = alpha[1:] / 12.0
    for arr in (a_diag, a_upper, a_lower, b_diag, b_upper, b_lower):
        arr.setflags(write=False)
    return Pencil(a_lower, a_diag, a_upper, b_lower, b_diag, b_upper)
