"""Shared test problems and oracles."""

import numpy as np

import quantnet as qn

# frozen acceptance instance (seed scan: gamma ~ 0.0295, n_min 14/20)
ACCEPTANCE_PARAMS = dict(seed=3, M=6, n_states=2, n_inputs=2, horizon=5, edge_density=0.3)


def single_block_qp(H, h, lower, upper):
    """One-subsystem QP with an explicit box."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    box = qn.BoxSet(np.atleast_1d(lower).astype(float), np.atleast_1d(upper).astype(float))
    return qn.DistributedQP(qn.build_topology(1, []), [H], [h], [box])


def coupled_pair_qp(H0=None, H1=None, h0=None, h1=None, bound=1.0):
    """Two fully coupled subsystems, one variable each."""
    topo = qn.build_topology(2, [(0, 1)])
    H = [np.eye(2) if H0 is None else np.asarray(H0, float),
         np.eye(2) if H1 is None else np.asarray(H1, float)]
    h = [np.zeros(2) if h0 is None else np.asarray(h0, float),
         np.zeros(2) if h1 is None else np.asarray(h1, float)]
    boxes = [qn.BoxSet([-bound], [bound]), qn.BoxSet([-bound], [bound])]
    return qn.DistributedQP(topo, H, h, boxes)


def random_qp(rng, M=4, m=2, extra_edges=2, box_halfwidth=1.0, definite_boost=0.5):
    """Random connected block QP with a positive definite global Hessian."""
    edges = [(i, i + 1) for i in range(M - 1)]
    pool = [(i, j) for i in range(M) for j in range(i + 2, M)]
    if pool and extra_edges:
        picks = rng.choice(len(pool), size=min(extra_edges, len(pool)), replace=False)
        edges += [pool[p] for p in np.atleast_1d(picks)]
    topo = qn.build_topology(M, edges)
    H, h, boxes = [], [], []
    for i in range(M):
        dim = m * len(topo.neighbor_sets[i])
        G = rng.standard_normal((dim, dim)) / np.sqrt(dim)
        Hi = G.T @ G + definite_boost * np.eye(dim)
        H.append(Hi)
        h.append(rng.standard_normal(dim))
        lo = -box_halfwidth * np.ones(m) + 0.1 * rng.standard_normal(m)
        boxes.append(qn.BoxSet(lo, lo + 2 * box_halfwidth))
    return qn.DistributedQP(topo, H, h, boxes)


def grid_search_intervals(coeffs, bits, rounds=5, points=200):
    """Brute-force minimiser of c_alpha + c_beta over the design inequalities.

    Expands a square grid until some point is feasible, then repeatedly
    refines a window around the incumbent minimum.  Returns
    (total, c_alpha, c_beta) or None when no feasible box is found.
    """
    s = 2.0 ** (bits + 1)

    def scan(lo_a, hi_a, lo_b, hi_b):
        A, B = np.meshgrid(np.linspace(lo_a, hi_a, points),
                           np.linspace(lo_b, hi_b, points), indexing="ij")
        ok = (
            (coeffs.a_const + coeffs.a_by_var * A / s + coeffs.a_by_grad * B / s <= A / 2)
            & (coeffs.b_const + coeffs.b_by_var * A / s + coeffs.b_by_grad * B / s <= B / 2)
        )
        total = np.where(ok, A + B, np.inf)
        at = np.unravel_index(np.argmin(total), total.shape)
        return total[at], A[at], B[at]

    hi = 1.0
    best = (np.inf, None, None)
    while hi < 1e12:
        best = scan(0.0, hi, 0.0, hi)
        if np.isfinite(best[0]):
            break
        hi *= 4.0
    if not np.isfinite(best[0]):
        return None
    window_a = window_b = hi / points
    for _ in range(rounds):
        cand = scan(max(best[1] - 8 * window_a, 0.0), best[1] + 8 * window_a,
                    max(best[2] - 8 * window_b, 0.0), best[2] + 8 * window_b)
        if cand[0] < best[0]:
            best = cand
        window_a *= 16.0 / points
        window_b *= 16.0 / points
    return best


def random_feasible_coeffs(rng):
    """Random positive design coefficients with a feasible bit count."""
    from quantnet.design import DesignCoefficients

    while True:
        coeffs = DesignCoefficients(
            "pgm", 0.9,
            a_const=float(rng.uniform(0.1, 5.0)),
            a_by_var=float(rng.uniform(0.0, 20.0)),
            a_by_grad=float(rng.uniform(0.0, 20.0)),
            b_const=float(rng.uniform(0.1, 5.0)),
            b_by_var=float(rng.uniform(0.0, 20.0)),
            b_by_grad=float(rng.uniform(0.0, 20.0)),
        )
        bits = int(rng.integers(3, 10))
        try:
            qn.min_intervals(coeffs, bits)
        except qn.Infeasible:
            continue
        return coeffs, bits


def finite_difference_gradient(f, x, step=1e-6):
    """Central finite differences, the gradient oracle."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2 * step)
    return g


def simulate_mpc_cost(mpc, u_blocks):
    """Dynamics-simulation cost oracle, independent of the condenser.

    ``u_blocks[i]`` is subsystem i's stacked input sequence of length
    horizon * n_inputs_i, time-major.
    """
    N = mpc.horizon
    M = mpc.topology.M
    z = [np.asarray(mpc.z0[i], dtype=float).copy() for i in range(M)]
    total = 0.0
    inputs_at = []
    for i in range(M):
        ni = mpc.B[i][mpc.topology.neighbor_sets[i].index(i)].shape[1]
        inputs_at.append(np.asarray(u_blocks[i]).reshape(N, ni))
    for t in range(N):
        for i in range(M):
            total += z[i] @ (mpc.Q[i] @ z[i]) + inputs_at[i][t] @ (mpc.R[i] @ inputs_at[i][t])
        z_next = []
        for i in range(M):
            nxt = mpc.A[i] @ z[i]
            for pos, j in enumerate(mpc.topology.neighbor_sets[i]):
                nxt = nxt + mpc.B[i][pos] @ inputs_at[j][t]
            z_next.append(nxt)
        z = z_next
    for i in range(M):
        total += z[i] @ (mpc.P[i] @ z[i])
    return float(total)
