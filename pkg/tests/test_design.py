"""Designer: coefficients, interval LP vs grid oracle, envelopes, rates."""

import math

import numpy as np
import pytest

import quantnet as qn
from quantnet.design import DesignCoefficients
from helpers import grid_search_intervals, random_feasible_coeffs
from quantnet.model import ProblemConstants


def make_constants(sigma, L, L_max=None, L_i=None, tau_fraction=1.0):
    L_i = L_i if L_i is not None else (L_max if L_max is not None else L,)
    return ProblemConstants(sigma_f=sigma, L=L, L_i=tuple(L_i),
                            L_max=max(L_i), gamma=sigma / L, tau=tau_fraction / L)


def make_inputs(sigma, L, kappa, R=1.0, phi_gap=1.0, M=1, degree=1, m_bar=1, L_max=None):
    return qn.DesignInputs(
        constants=make_constants(sigma, L, L_max=L_max), M=M, degree=degree,
        m_bar=m_bar, kappa=kappa, R=R, phi_gap=phi_gap,
    )


# --- rate constants -----------------------------------------------------------

def test_rate_constants_reference_values():
    assert qn.rate_constant("pgm", 0.1907) == pytest.approx(0.8093, abs=5e-4)
    assert qn.rate_constant("apgm", 0.1907) == pytest.approx(0.7505, abs=5e-4)


def test_rate_constants_hand_values():
    assert qn.rate_constant("pgm", 0.25) == 0.75
    assert qn.rate_constant("apgm", 0.25) == pytest.approx(math.sqrt(0.5))
    assert qn.rate_constant("pgm", 1.0) == 0.0
    assert qn.rate_constant("apgm", 1.0) == 0.0


def test_kappa_admissibility():
    with pytest.raises(qn.InadmissibleKappa):
        qn.coefficients_pgm(make_inputs(0.5, 1.0, kappa=0.4))  # below 1-gamma
    with pytest.raises(qn.InadmissibleKappa):
        qn.coefficients_apgm(make_inputs(0.5, 1.0, kappa=0.5))
    # gamma = 1 admits any kappa in (0, 1) for both variants
    lo, hi = qn.kappa_bounds("apgm", 1.0)
    assert lo == 0.0 and hi == 1.0
    assert qn.default_kappa("pgm", 0.2) == pytest.approx((0.8 + 1) / 2)


# --- coefficient formulas --------------------------------------------------------

def test_pgm_constant_coefficient():
    coeffs = qn.coefficients_pgm(make_inputs(0.5, 1.0, kappa=0.75, R=1.0))
    assert coeffs.a_const == pytest.approx(1.75 / 0.75, rel=1e-12)


def test_pgm_variable_coefficient_exact_value():
    # independent rational/CAS evaluation of the printed formula:
    # M=1, m_bar=1, d=1, L=2, sigma=1 (gamma=0.5), L_max=2, kappa=3/4
    coeffs = qn.coefficients_pgm(make_inputs(1.0, 2.0, kappa=0.75, R=1.0, L_max=2.0))
    assert coeffs.a_by_var == pytest.approx(25.232828269944998, rel=1e-12)
    assert coeffs.a_by_grad == pytest.approx(7.0, rel=1e-12)


def test_pgm_constant_coefficient_kappa_limit():
    # (kappa+1)/kappa -> 2 as kappa -> 1
    R = 3.0
    coeffs = qn.coefficients_pgm(make_inputs(0.5, 1.0, kappa=1 - 1e-9, R=R))
    assert coeffs.a_const == pytest.approx(2.0 * R, rel=1e-6)


def test_apgm_constant_coefficient():
    coeffs = qn.coefficients_apgm(make_inputs(1.0, 1.0, kappa=0.8, phi_gap=1.0))
    assert coeffs.a_const == pytest.approx(2 * 1.8 / 0.8, rel=1e-12)


def test_apgm_coefficient_ratio_identity():
    # b_const / a_const = L_max (2k^2 + 3k + 1) / (k (k + 1)), checked symbolically
    rng = np.random.default_rng(20)
    for _ in range(20):
        sigma = float(rng.uniform(0.1, 1.0))
        L = sigma / float(rng.uniform(0.05, 0.6))
        gamma = sigma / L
        lo, _ = qn.kappa_bounds("apgm", gamma)
        kappa = float(rng.uniform(lo + 1e-3, 0.999))
        L_max = float(rng.uniform(0.5, 3.0)) * L
        inputs = make_inputs(sigma, L, kappa=kappa, phi_gap=float(rng.uniform(0.1, 5)),
                             L_max=L_max, M=3, degree=2, m_bar=4)
        coeffs = qn.coefficients_apgm(inputs)
        expect = L_max * (2 * kappa**2 + 3 * kappa + 1) / (kappa * (kappa + 1))
        assert coeffs.b_const / coeffs.a_const == pytest.approx(expect, rel=1e-10)


def test_coefficients_positive_for_admissible_kappa():
    rng = np.random.default_rng(21)
    for _ in range(30):
        sigma = float(rng.uniform(0.05, 1.0))
        L = sigma / float(rng.uniform(0.02, 0.8))
        for variant in ("pgm", "apgm"):
            lo, _ = qn.kappa_bounds(variant, sigma / L)
            kappa = float(rng.uniform(lo, 1.0)) if lo < 0.999 else 0.9995
            if not lo < kappa < 1:
                continue
            inputs = make_inputs(sigma, L, kappa=kappa, R=float(rng.uniform(0.1, 5)),
                                 phi_gap=float(rng.uniform(0.1, 5)),
                                 M=int(rng.integers(1, 6)), degree=int(rng.integers(1, 4)),
                                 m_bar=int(rng.integers(1, 5)))
            c = qn.coefficients(inputs, variant)
            for v in (c.a_const, c.a_by_var, c.a_by_grad, c.b_const, c.b_by_var, c.b_by_grad):
                assert v > 0


# --- minimal intervals (two-variable LP) -------------------------------------------

def test_min_intervals_trivial_decoupled():
    coeffs = DesignCoefficients("pgm", 0.9, a_const=1.0, a_by_var=0.0, a_by_grad=0.0,
                                b_const=2.0, b_by_var=0.0, b_by_grad=0.0)
    assert qn.min_intervals(coeffs, 4) == (2.0, 4.0)


def test_min_intervals_diagonal_scaling():
    # a2 = b3 = s/4 shrinks the halves to quarters: c = 1 / (1/2 - 1/4) = 4
    for bits in (2, 5):
        s = 2.0 ** (bits + 1)
        coeffs = DesignCoefficients("pgm", 0.9, 1.0, s / 4, 0.0, 1.0, 0.0, s / 4)
        ca, cb = qn.min_intervals(coeffs, bits)
        assert (ca, cb) == (4.0, 4.0)
        got = grid_search_intervals(coeffs, bits)
        assert got[0] == pytest.approx(ca + cb, rel=5e-3)


def test_min_intervals_feasibility_threshold():
    # a2 = b3 = 8 needs 2**(n+1) > 16, so n >= 4
    coeffs = DesignCoefficients("pgm", 0.9, 1.0, 8.0, 0.0, 1.0, 0.0, 8.0)
    for bits in (1, 2, 3):
        with pytest.raises(qn.Infeasible):
            qn.min_intervals(coeffs, bits)
    qn.min_intervals(coeffs, 4)
    assert qn.min_bits(coeffs) == 4


def test_min_bits_trivial_and_callable():
    coeffs = DesignCoefficients("pgm", 0.9, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0)
    assert qn.min_bits(coeffs) == 1
    assert qn.min_bits(lambda n: coeffs) == 1


def test_min_bits_exhausted():
    coeffs = DesignCoefficients("pgm", 0.9, 1.0, float("inf"), 0.0, 1.0, 0.0, 0.0)
    with pytest.raises(qn.NoFeasibleBits):
        qn.min_bits(coeffs)


def test_min_intervals_matches_grid_oracle():
    rng = np.random.default_rng(22)
    for _ in range(50):
        coeffs, bits = random_feasible_coeffs(rng)
        ca, cb = qn.min_intervals(coeffs, bits)
        oracle = grid_search_intervals(coeffs, bits)
        assert oracle is not None
        assert oracle[0] == pytest.approx(ca + cb, rel=5e-3)
        # grid points are feasible, so the closed form can only be better
        assert ca + cb <= oracle[0] + 1e-9


def test_min_intervals_constraints_active_and_optimal():
    rng = np.random.default_rng(23)
    for _ in range(20):
        coeffs, bits = random_feasible_coeffs(rng)
        ca, cb = qn.min_intervals(coeffs, bits)
        s = 2.0 ** (bits + 1)
        slack_a = ca / 2 - (coeffs.a_const + coeffs.a_by_var * ca / s + coeffs.a_by_grad * cb / s)
        slack_b = cb / 2 - (coeffs.b_const + coeffs.b_by_var * ca / s + coeffs.b_by_grad * cb / s)
        assert abs(slack_a) <= 1e-9 * max(1.0, ca)
        assert abs(slack_b) <= 1e-9 * max(1.0, cb)
        # shrinking the optimum by 1% violates some constraint
        fa, fb = 0.99 * ca, 0.99 * cb
        assert (
            coeffs.a_const + coeffs.a_by_var * fa / s + coeffs.a_by_grad * fb / s > fa / 2
            or coeffs.b_const + coeffs.b_by_var * fa / s + coeffs.b_by_grad * fb / s > fb / 2
        )


def test_min_intervals_monotone_in_bits():
    rng = np.random.default_rng(24)
    for _ in range(20):
        coeffs, bits = random_feasible_coeffs(rng)
        ca1, cb1 = qn.min_intervals(coeffs, bits)
        ca2, cb2 = qn.min_intervals(coeffs, bits + 1)
        assert ca2 <= ca1 + 1e-12 and cb2 <= cb1 + 1e-12


# --- envelopes -------------------------------------------------------------------

def test_error_envelope_constant_example():
    grad_coeff, prox_coeff = qn.error_envelope_constants(
        "pgm", M=1, m_bar=1, degree=1, L_max=2.0, kappa=0.9, bits=3,
        c_alpha=1.0, c_beta=1.0)
    assert grad_coeff == pytest.approx(3.0 / 16.0)
    assert prox_coeff == pytest.approx(0.5 * math.sqrt(2) / 16.0)


def test_theorem_envelope_no_quantization_reduces_to_rate():
    constants = make_constants(0.5, 1.0)
    for k in range(5):
        got = qn.theorem_envelope("pgm", constants, 0.75, 0.0, 0.0, head=2.0, k=k)
        assert got == pytest.approx(0.75 ** (k + 1) * 2.0, rel=1e-12)


def test_theorem_envelope_geometric_ratio():
    constants = make_constants(0.3, 1.5, L_max=2.0)
    prev = qn.theorem_envelope("pgm", constants, 0.9, 1.0, 0.5, head=1.0, k=0)
    for k in range(1, 6):
        cur = qn.theorem_envelope("pgm", constants, 0.9, 1.0, 0.5, head=1.0, k=k)
        assert cur / prev == pytest.approx(0.9, rel=1e-12)
        prev = cur
    prev = qn.theorem_envelope("apgm", constants, 0.95, 1.0, 0.5, head=1.0, k=0)
    for k in range(1, 6):
        cur = qn.theorem_envelope("apgm", constants, 0.95, 1.0, 0.5, head=1.0, k=k)
        assert cur / prev == pytest.approx(0.95, rel=1e-12)
        prev = cur


def test_proposition_envelope_zero_errors():
    constants = make_constants(0.5, 1.0)
    zeros = [0.0] * 10
    for k in (0, 4, 9):
        got = qn.proposition_envelope("pgm", constants, 2.0, zeros, zeros, k)
        assert got == pytest.approx(0.5 ** (k + 1) * 2.0, rel=1e-12)


def test_proposition_envelope_single_term():
    # one iteration with |e| = L, eps = 0, gamma = 0.5: sum contributes
    # (1-gamma)^0 * |e|/L = 1 on top of (1-gamma) * head
    constants = make_constants(0.5, 1.0)
    got = qn.proposition_envelope("pgm", constants, 3.0, [1.0], [0.0], 0)
    assert got == pytest.approx(0.5 * 3.0 + 1.0, rel=1e-12)


def test_proposition_envelope_series_too_short():
    constants = make_constants(0.5, 1.0)
    with pytest.raises(qn.SeriesTooShort):
        qn.proposition_envelope("pgm", constants, 1.0, [0.0], [0.0], 3)


def test_geometric_closed_form_matches_theorem_envelope():
    # the two printed formulas are one geometric-series identity apart
    rng = np.random.default_rng(25)
    for _ in range(30):
        sigma = float(rng.uniform(0.05, 0.9))
        L = sigma / float(rng.uniform(0.05, 0.7))
        constants = make_constants(sigma, L, L_max=float(rng.uniform(0.5, 2.0)) * L)
        gamma = constants.gamma
        kappa = float(rng.uniform(*qn.kappa_bounds("pgm", gamma)))
        grad_coeff = float(rng.uniform(0.0, 5.0))
        prox_coeff = float(rng.uniform(0.0, 5.0))
        head = float(rng.uniform(0.1, 4.0))
        for k in (0, 3, 17):
            lhs = qn.geometric_proposition_envelope(constants, kappa, grad_coeff,
                                                    prox_coeff, head, k)
            rhs = qn.theorem_envelope("pgm", constants, kappa, grad_coeff,
                                      prox_coeff, head, k)
            assert lhs == pytest.approx(rhs, rel=1e-9)


def test_finite_sum_below_theorem_envelope():
    # the literal finite-sum bound with geometric error series never exceeds
    # the closed-form envelope
    constants = make_constants(0.2, 1.0, L_max=1.5)
    kappa = 0.9
    grad_coeff, prox_coeff = 2.0, 0.7
    e = [grad_coeff * kappa**p for p in range(40)]
    eps = [(prox_coeff * kappa**p) ** 2 for p in range(40)]
    for k in (0, 5, 20, 39):
        literal = qn.proposition_envelope("pgm", constants, 1.0, e, eps, k)
        closed = qn.theorem_envelope("pgm", constants, kappa, grad_coeff, prox_coeff, 1.0, k)
        assert literal <= closed * (1 + 1e-12)


def test_design_quantizers_pipeline():
    inputs = make_inputs(1.0, 20.0, kappa=0.975, R=2.0, phi_gap=5.0,
                         M=4, degree=3, m_bar=6, L_max=30.0)
    result = qn.design_quantizers(inputs, "pgm", extra_bits=5)
    assert result.n_min >= 1
    assert [p.bits for p in result.points] == list(range(result.n_min, result.n_min + 6))
    alphas = [p.c_alpha for p in result.points]
    betas = [p.c_beta for p in result.points]
    assert all(b <= a for a, b in zip(alphas, alphas[1:]))
    assert all(b <= a for a, b in zip(betas, betas[1:]))
    with pytest.raises(qn.Infeasible):
        qn.min_intervals(qn.coefficients(inputs, "pgm"), result.n_min - 1)
