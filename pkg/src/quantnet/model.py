"""Problem model: communication graph, block-structured QP, projections, constants.

The global decision vector is split into per-subsystem blocks.  Each
subsystem i owns a block x_i and a local cost over the concatenation of its
own block and its neighbours' blocks (its neighbourhood vector).  Costs are
quadratic, x_N^T H_i x_N + h_i^T x_N, and constraints are per-subsystem
boxes.
"""

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DisconnectedGraph,
    InvalidEdge,
    InvalidStepSize,
    NotStronglyConvex,
    SchemaError,
)

# Positive definiteness test: smallest eigenvalue must exceed this fraction
# of the largest one.
PD_RELATIVE_TOL = 1e-10


@dataclass(frozen=True)
class Topology:
    """Undirected communication graph with reflexive neighbour sets.

    ``neighbor_sets[i]`` is the sorted tuple of subsystems i exchanges
    messages with, always including i itself.  ``degree`` is the maximum
    neighbourhood size (self included).
    """

    M: int
    neighbor_sets: tuple
    degree: int

    def neighbors(self, i):
        return self.neighbor_sets[i]

    def edges(self):
        """Canonical undirected edge list [(i, j), i < j], self loops omitted."""
        out = []
        for i, nbrs in enumerate(self.neighbor_sets):
            out.extend((i, j) for j in nbrs if j > i)
        return out


def build_topology(M, edges):
    """Build a :class:`Topology` from an undirected edge list.

    Parameters
    ----------
    M : int
        Number of subsystems.
    edges : iterable of (int, int)
        Undirected edges; endpoints must lie in [0, M).  Self loops are
        redundant (every subsystem is its own neighbour) and ignored.

    Raises
    ------
    InvalidEdge
        On out-of-range endpoints or M < 1.
    DisconnectedGraph
        If the resulting graph is not connected.
    """
    if M < 1:
        raise InvalidEdge("need at least one subsystem, got M=%r" % (M,))
    nbrs = [{i} for i in range(M)]
    for a, b in edges:
        if not (0 <= a < M and 0 <= b < M):
            raise InvalidEdge("edge (%r, %r) out of range for M=%d" % (a, b, M))
        nbrs[a].add(b)
        nbrs[b].add(a)

    # breadth-first search from node 0
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in nbrs[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    if len(seen) != M:
        missing = sorted(set(range(M)) - seen)
        raise DisconnectedGraph("unreachable subsystems: %s" % missing)

    neighbor_sets = tuple(tuple(sorted(s)) for s in nbrs)
    degree = max(len(s) for s in neighbor_sets)
    return Topology(M=M, neighbor_sets=neighbor_sets, degree=degree)


@dataclass(frozen=True)
class BoxSet:
    """Axis-aligned box {v : lower <= v <= upper}, coordinate-wise."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise DimensionMismatch("box bounds must be 1-d arrays of equal length")
        if np.any(lower > upper):
            raise ValueError("box is empty: lower > upper somewhere")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self):
        return self.lower.size

    def contains(self, v, tol=0.0):
        v = np.asarray(v, dtype=float)
        return bool(np.all(v >= self.lower - tol) and np.all(v <= self.upper + tol))


def concat_boxes(boxes):
    """Product of boxes as a single box over the stacked coordinates."""
    return BoxSet(
        np.concatenate([b.lower for b in boxes]),
        np.concatenate([b.upper for b in boxes]),
    )


def project_box(box, v):
    """Euclidean projection onto a box (coordinate-wise clamp)."""
    v = np.asarray(v, dtype=float)
    if v.shape != box.lower.shape:
        raise DimensionMismatch(
            "vector of length %d vs box of dimension %d" % (v.size, box.dim)
        )
    return np.clip(v, box.lower, box.upper)


class SelectionMaps:
    """Pure index maps between the global vector, neighbourhoods and blocks.

    ``gather(i, x)`` extracts the neighbourhood vector of subsystem i from
    the global vector (neighbours in ascending index order, self included);
    ``scatter_add(i, out, v)`` accumulates a neighbourhood vector back into
    global coordinates (the transpose map).  ``block(j, i, v)`` extracts
    subsystem i's block from subsystem j's neighbourhood vector.
    """

    def __init__(self, topology, block_dims):
        if len(block_dims) != topology.M:
            raise DimensionMismatch("one block dimension per subsystem required")
        self.topology = topology
        self.block_dims = tuple(int(m) for m in block_dims)
        starts = np.zeros(topology.M + 1, dtype=int)
        np.cumsum(self.block_dims, out=starts[1:])
        self.block_starts = starts
        self.gather_indices = []
        self.local_ranges = []  # per i: {j: (lo, hi) inside the neighbourhood vector}
        for i in range(topology.M):
            idx = []
            ranges = {}
            pos = 0
            for j in topology.neighbor_sets[i]:
                mj = self.block_dims[j]
                idx.append(np.arange(starts[j], starts[j] + mj))
                ranges[j] = (pos, pos + mj)
                pos += mj
            self.gather_indices.append(np.concatenate(idx))
            self.local_ranges.append(ranges)

    @property
    def dim(self):
        return int(self.block_starts[-1])

    def neighborhood_dim(self, i):
        return self.gather_indices[i].size

    def block_slice(self, i):
        return slice(int(self.block_starts[i]), int(self.block_starts[i + 1]))

    def gather(self, i, x):
        return x[self.gather_indices[i]]

    def scatter_add(self, i, out, v):
        out[self.gather_indices[i]] += v
        return out

    def block(self, j, i, v_neighborhood):
        lo, hi = self.local_ranges[j][i]
        return v_neighborhood[lo:hi]


class DistributedQP:
    """Block-structured QP: sum_i x_N^T H_i x_N + h_i^T x_N over box constraints.

    ``H[i]`` is a symmetric matrix over subsystem i's neighbourhood vector
    (symmetrised on construction), ``h[i]`` the matching linear term, and
    ``boxes[i]`` the box constraint on block i alone.
    """

    def __init__(self, topology, H, h, boxes):
        M = topology.M
        if not (len(H) == len(h) == len(boxes) == M):
            raise DimensionMismatch("need H, h and a box for each of the %d subsystems" % M)
        self.topology = topology
        self.boxes = list(boxes)
        self.m = tuple(b.dim for b in self.boxes)
        self.maps = SelectionMaps(topology, self.m)
        self.H = []
        self.h = []
        for i in range(M):
            dim_i = self.maps.neighborhood_dim(i)
            Hi = np.asarray(H[i], dtype=float)
            hi = np.asarray(h[i], dtype=float).reshape(-1)
            if Hi.shape != (dim_i, dim_i):
                raise DimensionMismatch(
                    "H[%d] must be %dx%d, got %r" % (i, dim_i, dim_i, Hi.shape)
                )
            if hi.shape != (dim_i,):
                raise DimensionMismatch("h[%d] must have length %d" % (i, dim_i))
            self.H.append(0.5 * (Hi + Hi.T))
            self.h.append(hi)
        self._neighborhood_boxes = [
            concat_boxes([self.boxes[j] for j in topology.neighbor_sets[i]])
            for i in range(M)
        ]
        self._global_box = concat_boxes(self.boxes)
        self._x_star = None  # cached reference optimum, set lazily

    @property
    def dim(self):
        return self.maps.dim

    @property
    def m_bar(self):
        return max(self.m)

    def neighborhood_box(self, i):
        return self._neighborhood_boxes[i]

    @property
    def global_box(self):
        return self._global_box


def local_gradient(qp, i, x_neighborhood):
    """Gradient of subsystem i's cost at its neighbourhood vector: 2 H_i v + h_i."""
    v = np.asarray(x_neighborhood, dtype=float)
    if v.shape != qp.h[i].shape:
        raise DimensionMismatch(
            "neighborhood vector for subsystem %d must have length %d" % (i, qp.h[i].size)
        )
    return 2.0 * (qp.H[i] @ v) + qp.h[i]


def global_gradient(qp, x):
    """Gradient of the summed cost: scatter-sum of the local gradients."""
    x = np.asarray(x, dtype=float)
    if x.shape != (qp.dim,):
        raise DimensionMismatch("global vector must have length %d" % qp.dim)
    out = np.zeros(qp.dim)
    for i in range(qp.topology.M):
        qp.maps.scatter_add(i, out, local_gradient(qp, i, qp.maps.gather(i, x)))
    return out


def objective_value(qp, x):
    """Summed cost at a global point (excluding any carried constant offset)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (qp.dim,):
        raise DimensionMismatch("global vector must have length %d" % qp.dim)
    total = 0.0
    for i in range(qp.topology.M):
        v = qp.maps.gather(i, x)
        total += v @ (qp.H[i] @ v) + qp.h[i] @ v
    return float(total)


def global_hessian(qp):
    """Dense Hessian of the summed cost, sum_i E_i^T (2 H_i) E_i."""
    n = qp.dim
    Hg = np.zeros((n, n))
    for i in range(qp.topology.M):
        idx = qp.maps.gather_indices[i]
        Hg[np.ix_(idx, idx)] += 2.0 * qp.H[i]
    return Hg


@dataclass(frozen=True)
class ProblemConstants:
    """Curvature constants of the problem and the gradient step size.

    sigma_f and L are the extreme eigenvalues of the global Hessian, L_i the
    spectral norms of the local Hessians (of the gradients 2 H_i v + h_i),
    gamma = sigma_f / L, and tau = tau_fraction / L.
    """

    sigma_f: float
    L: float
    L_i: tuple
    L_max: float
    gamma: float
    tau: float


def compute_constants(qp, tau_fraction=0.99):
    """Compute :class:`ProblemConstants` by a dense symmetric eigensolve.

    ``tau_fraction`` must lie in (0, 1]; the resulting step is
    tau = tau_fraction / L.  The worst-case convergence envelopes assume the
    full step tau = 1/L, so envelope-certified runs should use 1.0.

    Raises
    ------
    NotStronglyConvex
        If the smallest Hessian eigenvalue is not positive within tolerance.
    InvalidStepSize
        If tau_fraction is outside (0, 1].
    """
    if not (0.0 < tau_fraction <= 1.0):
        raise InvalidStepSize("tau_fraction must lie in (0, 1], got %r" % (tau_fraction,))
    eigs = np.linalg.eigvalsh(global_hessian(qp))
    sigma_f, L = float(eigs[0]), float(eigs[-1])
    if sigma_f <= PD_RELATIVE_TOL * max(L, 0.0):
        raise NotStronglyConvex(
            "global Hessian has smallest eigenvalue %.3e (largest %.3e)" % (sigma_f, L)
        )
    L_i = tuple(
        float(2.0 * np.max(np.abs(np.linalg.eigvalsh(qp.H[i]))))
        for i in range(qp.topology.M)
    )
    return ProblemConstants(
        sigma_f=sigma_f,
        L=L,
        L_i=L_i,
        L_max=max(L_i),
        gamma=sigma_f / L,
        tau=tau_fraction / L,
    )


# --- JSON document form ----------------------------------------------------
#
# {"schema": "1", "M": int, "edges": [[i, j], ...],
#  "blocks": [{"i", "neighbors", "H", "h", "lower", "upper"}, ...],
#  "constant_offset": float (optional)}
#
# Matrices are dense row-major nested lists; floats round-trip exactly via
# Python's shortest-repr decimal serialisation.

_QP_KEYS = {"schema", "M", "edges", "blocks", "constant_offset"}
_BLOCK_KEYS = {"i", "neighbors", "H", "h", "lower", "upper"}


def qp_to_document(qp, constant_offset=None):
    doc = {
        "schema": "1",
        "M": qp.topology.M,
        "edges": [list(e) for e in qp.topology.edges()],
        "blocks": [
            {
                "i": i,
                "neighbors": list(qp.topology.neighbor_sets[i]),
                "H": qp.H[i].tolist(),
                "h": qp.h[i].tolist(),
                "lower": qp.boxes[i].lower.tolist(),
                "upper": qp.boxes[i].upper.tolist(),
            }
            for i in range(qp.topology.M)
        ],
    }
    if constant_offset is not None:
        doc["constant_offset"] = float(constant_offset)
    return doc


def _check_keys(mapping, allowed, what, required=()):
    unknown = set(mapping) - allowed
    if unknown:
        raise SchemaError("unknown %s fields: %s" % (what, sorted(unknown)))
    missing = set(required) - set(mapping)
    if missing:
        raise SchemaError("missing %s fields: %s" % (what, sorted(missing)))


def qp_from_document(doc):
    """Rebuild a :class:`DistributedQP` (and optional constant offset) from a document."""
    if not isinstance(doc, dict):
        raise SchemaError("expected a JSON object")
    _check_keys(doc, _QP_KEYS, "problem", required=("schema", "M", "edges", "blocks"))
    if doc.get("schema") != "1":
        raise SchemaError("unsupported schema %r" % (doc.get("schema"),))
    topology = build_topology(doc["M"], [tuple(e) for e in doc["edges"]])
    blocks = sorted(doc["blocks"], key=lambda b: b["i"])
    H, h, boxes = [], [], []
    for i, blk in enumerate(blocks):
        _check_keys(blk, _BLOCK_KEYS, "block", required=_BLOCK_KEYS)
        if blk["i"] != i:
            raise SchemaError("blocks must cover subsystems 0..M-1 exactly once")
        if tuple(blk["neighbors"]) != topology.neighbor_sets[i]:
            raise SchemaError(
                "block %d neighbor list disagrees with the edge list" % i
            )
        H.append(np.array(blk["H"], dtype=float))
        h.append(np.array(blk["h"], dtype=float))
        boxes.append(BoxSet(np.array(blk["lower"]), np.array(blk["upper"])))
    qp = DistributedQP(topology, H, h, boxes)
    return qp, doc.get("constant_offset")


def save_qp(qp, path, constant_offset=None):
    with open(path, "w") as fh:
        json.dump(qp_to_document(qp, constant_offset), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_qp(path):
    with open(path) as fh:
        return qp_from_document(json.load(fh))
