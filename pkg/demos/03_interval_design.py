#!/usr/bin/env python3
"""Quantizer parameter design: minimal bits and initial intervals.

For a chosen interval decrease rate kappa, the designer finds the smallest
bit count n for which initial intervals (C_alpha for variables, C_beta for
gradients) exist that provably keep every transmitted value inside its
shrinking interval, then tabulates the minimal intervals for each n.  More
bits allow smaller initial intervals.  Writes the table as CSV next to this
script; plots it when matplotlib is importable.
"""

from pathlib import Path

import quantnet as qn

instance = qn.random_instance(seed=3, M=6, n_states=2, n_inputs=2, horizon=5,
                              edge_density=0.3)
qp, _ = qn.condense(instance)
constants = qn.compute_constants(qp, tau_fraction=1.0)
x_star, R, phi_gap = qn.reference_gap(qp, constants)

out_dir = Path(__file__).resolve().parent / "out"
out_dir.mkdir(exist_ok=True)

tables = {}
for variant in ("pgm", "apgm"):
    kappa = qn.default_kappa(variant, constants.gamma)
    inputs = qn.DesignInputs(constants=constants, M=qp.topology.M,
                             degree=qp.topology.degree, m_bar=qp.m_bar,
                             kappa=kappa, R=R, phi_gap=phi_gap)
    result = qn.design_quantizers(inputs, variant, extra_bits=10)
    tables[variant] = result
    print("%s: kappa=%.4f (admissible above %.4f), minimal bits n_min=%d"
          % (variant, kappa, qn.kappa_bounds(variant, constants.gamma)[0],
             result.n_min))
    print("    n     C_alpha        C_beta")
    for point in result.points:
        print("  %3d   %.6e   %.6e" % (point.bits, point.c_alpha, point.c_beta))
    csv_path = out_dir / ("design_%s.csv" % variant)
    with open(csv_path, "w") as fh:
        fh.write("n,C_alpha,C_beta\n")
        for point in result.points:
            fh.write("%d,%r,%r\n" % (point.bits, point.c_alpha, point.c_beta))
    print("    table written to %s\n" % csv_path)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharex=False)
    for ax, variant in zip(axes, ("pgm", "apgm")):
        result = tables[variant]
        ns = [p.bits for p in result.points]
        ax.semilogy(ns, [p.c_alpha for p in result.points], "o-", label="C_alpha")
        ax.semilogy(ns, [p.c_beta for p in result.points], "s-", label="C_beta")
        ax.set_xlabel("bits n")
        ax.set_title("%s (kappa=%.3f)" % (variant, result.kappa))
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_dir / "interval_design.png", dpi=120)
    print("plot written to %s" % (out_dir / "interval_design.png"))
except ImportError:
    print("matplotlib not available; skipped the plot")
