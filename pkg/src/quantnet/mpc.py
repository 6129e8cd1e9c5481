"""Seeded distributed-MPC instances and their condensation into block QPs.

Each subsystem has linear dynamics driven by its own state and the inputs of
its neighbours, z_i(t+1) = A_i z_i(t) + sum_j B_ij u_j(t), quadratic stage
and terminal costs, a box on the inputs, and a fixed initial state.
Eliminating the predicted states through the dynamics leaves a QP in the
stacked input sequences whose coupling pattern equals the communication
graph; the state-independent part of the cost is returned as a separate
constant offset.
"""

import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .algorithms import reference_solution
from .errors import DimensionMismatch, GenerationFailed, SchemaError
from .model import BoxSet, DistributedQP, build_topology, compute_constants

log = logging.getLogger(__name__)

ACTIVE_TOL = 1e-8  # a coordinate this close to a bound counts as active


@dataclass
class MpcInstance:
    """Distributed MPC data; inputs are the only decision variables after condensing."""

    topology: object
    horizon: int
    A: list          # per-subsystem state matrix
    B: list          # per-subsystem list of input matrices, aligned with the neighbour order
    Q: list          # stage state weights
    R: list          # stage input weights
    P: list          # terminal state weights
    z0: list         # initial states
    u_lower: list    # per-subsystem input bounds, one entry per input coordinate
    u_upper: list
    meta: dict = field(default_factory=dict)

    @property
    def n_states(self):
        return [a.shape[0] for a in self.A]

    @property
    def n_inputs(self):
        return [b[0].shape[1] for b in self.B]


def _spectral_radius(A):
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def _controllable(A, B):
    n = A.shape[0]
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return np.linalg.matrix_rank(np.hstack(blocks)) == n


def _random_connected_topology(rng, M, edge_density):
    edges = [(int(rng.integers(0, v)), v) for v in range(1, M)]
    tree = {tuple(sorted(e)) for e in edges}
    candidates = [
        (i, j) for i in range(M) for j in range(i + 1, M) if (i, j) not in tree
    ]
    rng.shuffle(candidates)
    extra = int(round(edge_density * len(candidates)))
    edges.extend(candidates[:extra])
    return build_topology(M, edges)


def random_instance(seed, M, n_states, n_inputs, horizon, edge_density=0.2,
                    unstable=True, input_gain=0.25, target_active=0.5,
                    scale_trials=25):
    """Generate a seeded random instance on a connected graph.

    Local dynamics are dense, controllable through the subsystem's own
    inputs, and (by default) unstable with spectral radius in (1, 1.1].
    Input matrices are dense Gaussian scaled by ``input_gain``; unit gain
    makes the condensed QP so ill-conditioned (sigma_f/L around 1e-3) that
    nothing converges at desk scale, while 0.25 keeps the ratio near 1e-2.
    Inputs are boxed to [-0.4, 0.3] per coordinate, all cost weights are
    identities, and the initial states are rescaled so that at least
    ``target_active`` of the optimal QP variables sit at their bounds
    (best effort within ``scale_trials`` reference solves).

    Raises
    ------
    GenerationFailed
        If a controllable, non-degenerate (A, B) pair cannot be drawn for
        some subsystem within the retry budget.
    ValueError
        If M < 2 or horizon < 1.
    """
    if M < 2:
        raise ValueError("need at least two subsystems, got M=%d" % M)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    rng = np.random.default_rng(seed)
    topology = _random_connected_topology(rng, M, edge_density)

    A, B, Q, R, P, z0 = [], [], [], [], [], []
    u_lower = [np.full(n_inputs, -0.4) for _ in range(M)]
    u_upper = [np.full(n_inputs, 0.3) for _ in range(M)]
    for i in range(M):
        for attempt in range(100):
            Ai = rng.standard_normal((n_states, n_states))
            Bii = input_gain * rng.standard_normal((n_states, n_inputs))
            radius = _spectral_radius(Ai)
            if radius < 1e-9:
                continue
            if unstable:
                Ai *= rng.uniform(1.01, 1.1) / radius
            else:
                Ai *= rng.uniform(0.5, 0.9) / radius
            if _controllable(Ai, Bii):
                break
        else:
            raise GenerationFailed("no controllable pair for subsystem %d in 100 draws" % i)
        A.append(Ai)
        blocks = []
        for j in topology.neighbor_sets[i]:
            blocks.append(
                Bii if j == i else input_gain * rng.standard_normal((n_states, n_inputs))
            )
        B.append(blocks)
        Q.append(np.eye(n_states))
        R.append(np.eye(n_inputs))
        P.append(np.eye(n_states))
        z0.append(rng.standard_normal(n_states))

    instance = MpcInstance(
        topology=topology, horizon=horizon, A=A, B=B, Q=Q, R=R, P=P, z0=z0,
        u_lower=u_lower, u_upper=u_upper,
        meta={"seed": int(seed), "edge_density": float(edge_density)},
    )
    return _scale_initial_states(instance, target_active, scale_trials)


def _active_fraction(qp, x):
    lower = qp.global_box.lower
    upper = qp.global_box.upper
    at_bound = (x - lower <= ACTIVE_TOL) | (upper - x <= ACTIVE_TOL)
    return float(np.mean(at_bound))


def _fraction_at_scale(instance, scale):
    trial = replace(instance, z0=[scale * z for z in instance.z0])
    qp, _ = condense(trial)
    constants = compute_constants(qp, tau_fraction=1.0)
    return _active_fraction(qp, reference_solution(qp, constants)), trial


def _scale_initial_states(instance, target_active, scale_trials):
    """Rescale all initial states by one scalar until enough variables are active.

    Doubles the scale until the target fraction is reached, then bisects
    towards the smallest sufficient scale.  Best effort: if the budget runs
    out, the scale with the highest observed fraction is kept.
    """
    trials = 0
    best_any = None         # (fraction, scale, instance) with the highest fraction seen
    best_sufficient = None  # smallest scale meeting the target
    lo, scale = 0.0, 1.0
    while trials < scale_trials:
        fraction, trial = _fraction_at_scale(instance, scale)
        trials += 1
        if best_any is None or fraction > best_any[0]:
            best_any = (fraction, scale, trial)
        if fraction >= target_active:
            best_sufficient = (fraction, scale, trial)
            break
        lo = scale
        scale *= 2.0
    if best_sufficient is not None:
        hi = best_sufficient[1]
        for _ in range(max(0, min(5, scale_trials - trials))):
            mid = 0.5 * (lo + hi)
            fraction, trial = _fraction_at_scale(instance, mid)
            trials += 1
            if fraction >= target_active:
                hi = mid
                best_sufficient = (fraction, mid, trial)
            else:
                lo = mid
        fraction, scale, chosen = best_sufficient
    else:
        fraction, scale, chosen = best_any
        log.info("active-fraction target %.2f not reached; best %.3f at scale %g",
                 target_active, fraction, scale)
    chosen.meta = dict(instance.meta)
    chosen.meta.update({"scale": float(scale), "active_fraction": float(fraction)})
    return chosen


def _block_diag(blocks):
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def condense(mpc):
    """Eliminate the predicted states, returning (DistributedQP, constant offset).

    For each subsystem the stacked prediction over t = 1..N is an affine map
    of the neighbourhood input sequences; substituting it into the quadratic
    cost yields the per-subsystem H and h over the neighbourhood inputs.  The
    offset collects all input-independent cost terms (including the t = 0
    stage cost of the fixed initial state), so condensed objective + offset
    equals the simulated MPC cost for any input choice.
    """
    M = mpc.topology.M
    N = mpc.horizon
    H, h, boxes = [], [], []
    offset = 0.0
    for i in range(M):
        ns = mpc.A[i].shape[0]
        powers = [np.eye(ns)]
        for _ in range(N):
            powers.append(mpc.A[i] @ powers[-1])
        prediction_of_z0 = np.vstack(powers[1:]) @ mpc.z0[i]  # states for t = 1..N

        gammas = []
        for Bij in mpc.B[i]:
            ni = Bij.shape[1]
            if Bij.shape[0] != ns:
                raise DimensionMismatch("input matrix rows must match the state dimension")
            gamma = np.zeros((N * ns, N * ni))
            for t in range(1, N + 1):
                for step in range(t):
                    gamma[(t - 1) * ns : t * ns, step * ni : (step + 1) * ni] = (
                        powers[t - 1 - step] @ Bij
                    )
            gammas.append(gamma)
        input_map = np.hstack(gammas)

        state_weight = _block_diag([mpc.Q[i]] * (N - 1) + [mpc.P[i]])
        Hi = input_map.T @ state_weight @ input_map
        # own input cost sits on subsystem i's slice of the neighbourhood vector
        pos = mpc.topology.neighbor_sets[i].index(i)
        ni = mpc.B[i][pos].shape[1]
        start = sum(b.shape[1] for b in mpc.B[i][:pos]) * N
        own = slice(start, start + N * ni)
        Hi[own, own] += _block_diag([mpc.R[i]] * N)
        hi = 2.0 * input_map.T @ (state_weight @ prediction_of_z0)
        offset += float(
            prediction_of_z0 @ (state_weight @ prediction_of_z0)
            + mpc.z0[i] @ (mpc.Q[i] @ mpc.z0[i])
        )
        H.append(Hi)
        h.append(hi)
        boxes.append(BoxSet(np.tile(mpc.u_lower[i], N), np.tile(mpc.u_upper[i], N)))
    return DistributedQP(mpc.topology, H, h, boxes), offset


# --- JSON document form ----------------------------------------------------

_MPC_KEYS = {"schema", "M", "edges", "horizon", "subsystems", "meta"}
_SUBSYSTEM_KEYS = {"i", "neighbors", "A", "B", "Q", "R", "P", "z0", "u_lower", "u_upper"}


def mpc_to_document(mpc):
    return {
        "schema": "1",
        "M": mpc.topology.M,
        "edges": [list(e) for e in mpc.topology.edges()],
        "horizon": mpc.horizon,
        "subsystems": [
            {
                "i": i,
                "neighbors": list(mpc.topology.neighbor_sets[i]),
                "A": mpc.A[i].tolist(),
                "B": [b.tolist() for b in mpc.B[i]],
                "Q": mpc.Q[i].tolist(),
                "R": mpc.R[i].tolist(),
                "P": mpc.P[i].tolist(),
                "z0": mpc.z0[i].tolist(),
                "u_lower": np.asarray(mpc.u_lower[i]).tolist(),
                "u_upper": np.asarray(mpc.u_upper[i]).tolist(),
            }
            for i in range(mpc.topology.M)
        ],
        "meta": mpc.meta,
    }


def mpc_from_document(doc):
    if not isinstance(doc, dict):
        raise SchemaError("expected a JSON object")
    unknown = set(doc) - _MPC_KEYS
    if unknown:
        raise SchemaError("unknown instance fields: %s" % sorted(unknown))
    missing = {"schema", "M", "edges", "horizon", "subsystems"} - set(doc)
    if missing:
        raise SchemaError("missing instance fields: %s" % sorted(missing))
    if doc.get("schema") != "1":
        raise SchemaError("unsupported schema %r" % (doc.get("schema"),))
    topology = build_topology(doc["M"], [tuple(e) for e in doc["edges"]])
    subsystems = sorted(doc["subsystems"], key=lambda s: s["i"])
    A, B, Q, R, P, z0, u_lower, u_upper = [], [], [], [], [], [], [], []
    for i, sub in enumerate(subsystems):
        unknown = set(sub) - _SUBSYSTEM_KEYS
        if unknown:
            raise SchemaError("unknown subsystem fields: %s" % sorted(unknown))
        missing = _SUBSYSTEM_KEYS - set(sub)
        if missing:
            raise SchemaError("missing subsystem fields: %s" % sorted(missing))
        if sub["i"] != i or tuple(sub["neighbors"]) != topology.neighbor_sets[i]:
            raise SchemaError("subsystem %d disagrees with the edge list" % i)
        A.append(np.array(sub["A"], dtype=float))
        B.append([np.array(b, dtype=float) for b in sub["B"]])
        Q.append(np.array(sub["Q"], dtype=float))
        R.append(np.array(sub["R"], dtype=float))
        P.append(np.array(sub["P"], dtype=float))
        z0.append(np.array(sub["z0"], dtype=float))
        u_lower.append(np.array(sub["u_lower"], dtype=float))
        u_upper.append(np.array(sub["u_upper"], dtype=float))
    return MpcInstance(
        topology=topology, horizon=int(doc["horizon"]), A=A, B=B, Q=Q, R=R, P=P,
        z0=z0, u_lower=u_lower, u_upper=u_upper, meta=doc.get("meta", {}),
    )


def save_mpc(mpc, path):
    with open(path, "w") as fh:
        json.dump(mpc_to_document(mpc), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_mpc(path):
    with open(path) as fh:
        return mpc_from_document(json.load(fh))
