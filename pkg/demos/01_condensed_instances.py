#!/usr/bin/env python3
"""Generate a seeded networked control instance and condense it into a block QP.

Each subsystem has unstable linear dynamics driven by its own state and the
inputs of its graph neighbours.  Eliminating the predicted states through the
dynamics leaves a quadratic program over the stacked input sequences whose
coupling pattern equals the communication graph.  The script verifies the
elimination by simulating the dynamics at random inputs and comparing costs.
"""

import numpy as np

import quantnet as qn

instance = qn.random_instance(seed=3, M=6, n_states=2, n_inputs=2, horizon=5,
                              edge_density=0.3)
qp, offset = qn.condense(instance)
constants = qn.compute_constants(qp, tau_fraction=1.0)

print("communication graph edges:", instance.topology.edges())
print("degree (largest neighbourhood incl. self):", instance.topology.degree)
print("decision variables after condensing:", qp.dim)
print("fraction of variables at bounds at the optimum: %.2f"
      % instance.meta["active_fraction"])
print("curvature: sigma_f=%.3f  L=%.3f  gamma=%.4f"
      % (constants.sigma_f, constants.L, constants.gamma))

rng = np.random.default_rng(0)
print("\ncondensed objective + offset vs simulated rollout cost:")
for trial in range(3):
    blocks = [rng.uniform(-0.4, 0.3, size=m) for m in qp.m]
    condensed = qn.objective_value(qp, np.concatenate(blocks)) + offset

    # simulate the rollout directly
    N = instance.horizon
    z = [z0.copy() for z0 in instance.z0]
    cost = 0.0
    stacked = [u.reshape(N, -1) for u in blocks]
    for t in range(N):
        for i in range(6):
            cost += z[i] @ z[i] + stacked[i][t] @ stacked[i][t]
        z = [
            instance.A[i] @ z[i]
            + sum(instance.B[i][p] @ stacked[j][t]
                  for p, j in enumerate(instance.topology.neighbor_sets[i]))
            for i in range(6)
        ]
    cost += sum(z[i] @ z[i] for i in range(6))
    print("  draw %d: condensed %.10f   simulated %.10f   |gap| %.2e"
          % (trial, condensed, cost, abs(condensed - cost)))
