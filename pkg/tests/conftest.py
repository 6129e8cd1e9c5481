import sys
from dataclasses import dataclass
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import quantnet as qn
from helpers import ACCEPTANCE_PARAMS


@dataclass
class Problem:
    instance: object
    offset: float
    qp: object
    constants: object
    x_star: object
    R: float
    phi_gap: float


@pytest.fixture(scope="session")
def acceptance_problem():
    """The frozen seeded MPC instance used across the suite (full step size)."""
    instance = qn.random_instance(**ACCEPTANCE_PARAMS)
    qp, offset = qn.condense(instance)
    constants = qn.compute_constants(qp, tau_fraction=1.0)
    x_star, R, phi_gap = qn.reference_gap(qp, constants)
    return Problem(instance=instance, offset=offset, qp=qp, constants=constants,
                   x_star=x_star, R=R, phi_gap=phi_gap)


def designed_run(problem, variant, iters=300, extra_bits=0):
    """Quantized run at the designer's minimal parameters (midpoint kappa)."""
    qp, constants = problem.qp, problem.constants
    kappa = qn.default_kappa(variant, constants.gamma)
    inputs = qn.DesignInputs(
        constants=constants, M=qp.topology.M, degree=qp.topology.degree,
        m_bar=qp.m_bar, kappa=kappa, R=problem.R, phi_gap=problem.phi_gap,
    )
    result = qn.design_quantizers(inputs, variant, extra_bits=max(extra_bits, 2))
    point = result.point(result.n_min + extra_bits)
    config = qn.RunConfig(
        "quantized-%s" % variant, kappa=kappa, bits=point.bits,
        c_alpha=point.c_alpha, c_beta=point.c_beta,
        max_iterations=iters, designed=True,
    )
    head = problem.R if variant == "pgm" else problem.phi_gap
    trace = qn.run_quantized(qp, constants, config, head=head, x_star=problem.x_star)
    return trace, result, config


@pytest.fixture(scope="session")
def designed_traces(acceptance_problem):
    """Designed 300-iteration runs at n_min and n_min+2 for both variants."""
    out = {}
    for variant in ("pgm", "apgm"):
        for extra in (0, 2):
            trace, result, config = designed_run(acceptance_problem, variant, extra_bits=extra)
            out[(variant, extra)] = trace
    return out
