#!/usr/bin/env python3
"""The quantizer grid, the wire codec, and per-edge bit accounting.

Walks one scalar through the uniform mid-value quantizer, shows the packed
bytes of a vector message, and runs one synchronous round on a two-node
network to show what each direction of each link carries.
"""

import numpy as np

import quantnet as qn

print("== scalar quantization ==")
q = qn.UniformQuantizer(bits=3, interval=2.0, mid=np.zeros(1))
print("bits=3, interval=2.0, step=%.3f, levels %s"
      % (q.step, [round(j * q.step, 3) for j in range(-4, 5)]))
for value in (0.0, 0.3, -0.6, 0.125, 1.4):
    msg = qn.quantize(q, np.array([value]))
    print("  %+6.3f -> level %+d -> %+6.3f (error %.3f%s)"
          % (value, msg.indices[0], msg.reconstructed[0],
             abs(value - msg.reconstructed[0]),
             ", saturated" if msg.saturated else ""))

print("\n== wire bytes ==")
q = qn.UniformQuantizer(bits=4, interval=1.0, mid=np.zeros(5))
msg = qn.quantize(q, np.array([0.1, -0.2, 0.49, 0.0, -0.05]),
                  sender=7, kind="gradient", iteration=42)
data = qn.encode(msg)
print("levels %s -> %d bytes: %s" % (msg.indices.tolist(), len(data), data.hex()))
print("  7 header bytes (sender u16, kind u8, iteration u32), then 5 levels at "
      "%d bits each" % (msg.bits + 1))
back = qn.decode(data, q)
print("decoded sender=%d kind=%s iteration=%d levels=%s"
      % (back.sender, back.kind, back.iteration, back.indices.tolist()))

print("\n== one synchronous round on a two-node line ==")
topo = qn.build_topology(2, [(0, 1)])
H = [np.eye(4), np.eye(4)]
h = [np.zeros(4), np.full(4, 0.3)]
boxes = [qn.BoxSet([-1, -1], [1, 1])] * 2
qp = qn.DistributedQP(topo, H, h, boxes)
constants = qn.compute_constants(qp, tau_fraction=1.0)
config = qn.RunConfig("quantized-pgm", kappa=0.9, bits=6, c_alpha=4.0,
                      c_beta=16.0, max_iterations=3)
ledger = qn.BitLedger()
state = qn.init_run_state(qp, "pgm")
for _ in range(3):
    state = qn.step_quantized_pgm(qp, constants, config, state, ledger)
print("each node sends its 2 variables plus its 4-entry neighbourhood gradient,")
print("so each direction carries 6 scalars * 6 bits = %d bits per round"
      % ledger.bits_at((0, 1), 0))
print("cumulative after 3 rounds, edge 0->1: %d bits (nominal), %d on the wire"
      % (ledger.cumulative((0, 1)), ledger.total_wire_bits() // 2))
ledger.to_csv("/dev/stdout")
