"""Non-uniform interval meshes: construction, mirror replication, extension.

A mesh on ``[x0, x0 + X]`` is stored as its node array; steps and averaged
steps are derived caches.  ``replicate`` tiles ``[x0, x0 + X]`` with K scaled
copies of a base mesh, alternating direct and mirrored orientation, and
``extend`` maps a grid function on the base mesh to the replicated mesh by
copying on direct blocks and negated reflection on mirrored blocks.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Mesh",
    "MeshError",
    "ReplicationSpec",
    "mesh_from_steps",
    "replicate",
    "extend",
    "read_mesh_steps",
    "write_mesh_steps",
]

#: relative slack allowed between the step sum and the mesh length
LENGTH_CONSISTENCY_TOL = 1e-12


class MeshError(ValueError):
    """Raised for invalid mesh construction input."""


@dataclass(frozen=True)
class Mesh:
    """Nodes ``x_0 < x_1 < ... < x_J`` with derived step caches.

    Attributes
    ----------
    nodes : ndarray, shape (J+1,)
    steps : ndarray, shape (J,)
        ``h_j = x_j - x_{j-1}``, indexed from 0 (i.e. ``steps[j-1]`` is h_j).
    avg_steps : ndarray, shape (J-1,)
        ``(h_j + h_{j+1}) / 2`` at the interior nodes ``j = 1 .. J-1``.
    """

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.ascontiguousarray(np.asarray(self.nodes, dtype=float))
        if nodes.ndim != 1 or nodes.size < 3:
            raise MeshError("a mesh needs at least 3 nodes (one interior node)")
        if not np.all(np.isfinite(nodes)):
            raise MeshError("mesh nodes must be finite")
        steps = np.diff(nodes)
        if np.any(steps <= 0.0):
            j = int(np.argmax(steps <= 0.0)) + 1
            raise MeshError(f"nodes not strictly increasing at step {j}")
        length = nodes[-1] - nodes[0]
        if abs(steps.sum() - length) > LENGTH_CONSISTENCY_TOL * length:
            raise MeshError("step sum disagrees with mesh length")
        nodes.setflags(write=False)
        steps.setflags(write=False)
        avg = (steps[:-1] + steps[1:]) / 2.0
        avg.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "_steps", steps)
        object.__setattr__(self, "_avg_steps", avg)

    @property
    def steps(self):
        return self._steps

    @property
    def avg_steps(self):
        return self._avg_steps

    @property
    def origin(self):
        return float(self.nodes[0])

    @property
    def length(self):
        """Total extent X."""
        return float(self.nodes[-1] - self.nodes[0])

    @property
    def intervals(self):
        """Number of intervals J."""
        return self.nodes.size - 1

    @property
    def mean_step(self):
        """X / J."""
        return self.length / self.intervals

    def __len__(self):
        return self.nodes.size

    def __repr__(self):
        return (f"Mesh(J={self.intervals}, X={self.length:.6g}, "
                f"origin={self.origin:.6g}, mean_step={self.mean_step:.6g})")


def mesh_from_steps(steps, origin=0.0):
    """Build a mesh from positive step lengths by cumulative summation."""
    steps = np.asarray(steps, dtype=float)
    if steps.ndim != 1 or steps.size == 0:
        raise MeshError("steps must be a non-empty 1-d sequence")
    bad = ~np.isfinite(steps) | (steps <= 0.0)
    if np.any(bad):
        j = int(np.argmax(bad)) + 1
        raise MeshError(f"invalid step {j}: {steps[j - 1]!r} (must be finite and > 0)")
    if steps.size < 2:
        raise MeshError("need at least 2 steps (one interior node)")
    nodes = np.empty(steps.size + 1)
    nodes[0] = origin
    np.cumsum(steps, out=nodes[1:])
    nodes[1:] += origin
    return Mesh(nodes)


@dataclass(frozen=True)
class ReplicationSpec:
    """A base mesh together with a replication count K >= 1."""

    base: Mesh
    K: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise MeshError(f"replication count must be a positive integer, got {self.K!r}")
        object.__setattr__(self, "K", int(self.K))

    @property
    def intervals(self):
        return self.base.intervals * self.K


def replicate(spec):
    """Tile the base interval with K scaled copies, mirroring every other one.

    With base nodes ``y_0 .. y_{J0}`` on ``[0, X]`` (after shifting the origin
    out), the replicated nodes are

        ``x[2k*J0 + l]     = 2k X/K + y_l / K``
        ``x[(2k-1)*J0 + l] = 2k X/K - y_{J0-l} / K``

    for ``0 <= l <= J0 - 1``, plus ``x_J = X``.  Steps around every junction
    node ``k*J0`` come out equal by construction; this is verified after
    assembly.
    """
    base, K = spec.base, spec.K
    j0 = base.intervals
    x0 = base.origin
    length = base.length
    y = base.nodes - x0          # base offsets on [0, X]
    j_total = j0 * K
    nodes = np.empty(j_total + 1)
    for block in range(K):
        lo = block * j0
        if block % 2 == 0:
            k = block // 2
            nodes[lo:lo + j0] = 2.0 * k * length / K + y[:j0] / K
        else:
            k = (block + 1) // 2
            nodes[lo:lo + j0] = 2.0 * k * length / K - y[j0:0:-1] / K
    nodes[j_total] = length
    nodes += x0
    mesh = Mesh(nodes)
    if K > 1:
        steps = mesh.steps
        junctions = np.arange(j0, j_total, j0)
        before = steps[junctions - 1]
        after = steps[junctions]
        if not np.allclose(before, after, rtol=1e-13, atol=0.0):
            raise MeshError("replication broke the mirror property at a junction")
    return mesh


def extend(base, values, K):
    """Extension operator onto the K-fold replicated mesh.

    Copies ``values`` on direct blocks and negates the reflected values on
    mirrored blocks.  ``values`` must vanish at both base endpoints; the
    result vanishes at both endpoints and at every junction node ``k*J0``.
    """
    values = np.asarray(values)
    j0 = base.intervals
    if values.shape != (j0 + 1,):
        raise MeshError(f"grid function has length {values.size}, expected {j0 + 1}")
    if values[0] != 0 or values[j0] != 0:
        raise MeshError("extension is defined only for functions vanishing at both endpoints")
    if int(K) != K or K < 1:
        raise MeshError(f"replication count must be a positive integer, got {K!r}")
    K = int(K)
    out = np.zeros(j0 * K + 1, dtype=np.result_type(values.dtype, np.float64))
    for block in range(K):
        lo = block * j0
        if block % 2 == 0:
            out[lo:lo + j0] = values[:j0]
        else:
            out[lo:lo + j0] = -values[j0:0:-1]
    out[j0 * K] = 0
    return out


def read_mesh_steps(path):
    """Read the plain-text mesh format: one step per line, optional
    ``# origin <value>`` header."""
    origin = 0.0
    steps = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "origin":
                    origin = float(parts[1])
                continue
            try:
                steps.append(float(line))
            except ValueError as exc:
                raise MeshError(f"{path}:{lineno}: not a number: {line!r}") from exc
    if not steps:
        raise MeshError(f"{path}: no steps found")
    return mesh_from_steps(steps, origin=origin)


def write_mesh_steps(mesh, path):
    """Write the plain-text mesh format (17 significant digits)."""
    with open(path, "w", encoding="ascii") as fh:
        if mesh.origin != 0.0:
            fh.write(f"# origin {mesh.origin:.17g}\n")
        for h in mesh.steps:
            fh.write(f"{h:.17g}\n")
