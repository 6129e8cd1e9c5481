"""Quantizer parameter design and theoretical convergence envelopes.

Designing a refining quantizer for the distributed algorithms means picking
a bit count n and initial intervals (C_alpha for variables, C_beta for
gradients) so that every transmitted value provably stays inside its
shrinking interval.  The sufficient conditions are two linear inequalities
in (C_alpha, C_beta),

    a_const + a_by_var * C_alpha/2**(n+1) + a_by_grad * C_beta/2**(n+1) <= C_alpha/2
    b_const + b_by_var * C_alpha/2**(n+1) + b_by_grad * C_beta/2**(n+1) <= C_beta/2,

whose coefficients depend on the problem constants, the interval decrease
rate kappa, and a bound on the initial distance to the optimum (plain
variant) or on the initial objective gap (accelerated variant).  Minimising
C_alpha + C_beta subject to both is a two-variable LP solved here in closed
form; the minimal n is the smallest one making it feasible.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InadmissibleKappa, Infeasible, NoFeasibleBits, SeriesTooShort

VARIANTS = ("pgm", "apgm")


def _check_variant(variant):
    if variant not in VARIANTS:
        raise ValueError("variant must be one of %s, got %r" % (VARIANTS, variant))


def rate_constant(variant, gamma):
    """Linear convergence constant of the exact algorithm: 1 - gamma, or
    sqrt(1 - sqrt(gamma)) for the accelerated variant."""
    _check_variant(variant)
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1], got %r" % (gamma,))
    if variant == "pgm":
        return 1.0 - gamma
    return math.sqrt(1.0 - math.sqrt(gamma))


def kappa_bounds(variant, gamma):
    """Open admissible range (lo, 1) for the interval decrease rate."""
    return rate_constant(variant, gamma), 1.0


def default_kappa(variant, gamma):
    """Midpoint of the admissible range."""
    lo, hi = kappa_bounds(variant, gamma)
    return 0.5 * (lo + hi)


def check_kappa(variant, gamma, kappa):
    lo, hi = kappa_bounds(variant, gamma)
    if not lo < kappa < hi:
        raise InadmissibleKappa(
            "kappa=%r outside the admissible range (%.6g, 1) for %s" % (kappa, lo, variant)
        )


@dataclass(frozen=True)
class DesignInputs:
    """Everything the interval design depends on.

    R bounds the distance from the start point to the optimum; phi_gap
    bounds the objective gap at the start point (used by the accelerated
    variant only).  Both must upper-bound the truth for the guarantees to
    hold; exact values from a reference solve give the tightest design.
    """

    constants: object  # ProblemConstants
    M: int
    degree: int
    m_bar: int
    kappa: float
    R: float
    phi_gap: float

    @classmethod
    def from_problem(cls, qp, constants, kappa, R, phi_gap):
        return cls(
            constants=constants,
            M=qp.topology.M,
            degree=qp.topology.degree,
            m_bar=qp.m_bar,
            kappa=kappa,
            R=R,
            phi_gap=phi_gap,
        )


@dataclass(frozen=True)
class DesignCoefficients:
    """Coefficients of the two interval-design inequalities (see module docstring)."""

    variant: str
    kappa: float
    a_const: float
    a_by_var: float
    a_by_grad: float
    b_const: float
    b_by_var: float
    b_by_grad: float


def coefficients_pgm(inputs):
    """Design-inequality coefficients for the plain distributed algorithm.

    Requires rate_constant('pgm', gamma) < kappa < 1.
    """
    c = inputs.constants
    check_kappa("pgm", c.gamma, inputs.kappa)
    if not inputs.R > 0.0:
        raise ValueError("R must be positive")
    k = inputs.kappa
    L, Lmax, gamma = c.L, c.L_max, c.gamma
    Mrm = inputs.M * math.sqrt(inputs.m_bar)
    Mrdm = inputs.M * math.sqrt(inputs.degree * inputs.m_bar)
    d = inputs.degree
    gap = (k + gamma - 1.0) * (1.0 - gamma)  # positive for admissible kappa, 0 at gamma=1
    with np.errstate(divide="ignore"):
        denom = np.float64(L * k * gap)
        a_const = (k + 1.0) * inputs.R / k
        a_by_var = (Mrm * k * (k + 1.0) * (d * Lmax + math.sqrt(L)) + Mrm * L * gap) / denom
        a_by_grad = Mrdm * (k + 1.0) / np.float64(L * gap)
        b_const = Lmax * (k + 1.0) * inputs.R / k
        b_by_var = (
            Lmax * Mrm * k * (k + 1.0) * (d * Lmax + math.sqrt(L))
            + Lmax * d * math.sqrt(inputs.m_bar) * L * (k + 1.0) * gap
        ) / denom
        b_by_grad = (
            Lmax * Mrdm * k * (k + 1.0) + L * math.sqrt(d * inputs.m_bar) * gap
        ) / denom
    return DesignCoefficients(
        variant="pgm",
        kappa=k,
        a_const=float(a_const),
        a_by_var=float(a_by_var),
        a_by_grad=float(a_by_grad),
        b_const=float(b_const),
        b_by_var=float(b_by_var),
        b_by_grad=float(b_by_grad),
    )


def coefficients_apgm(inputs):
    """Design-inequality coefficients for the accelerated distributed algorithm.

    Requires rate_constant('apgm', gamma) < kappa < 1 and a positive
    objective-gap bound.
    """
    c = inputs.constants
    check_kappa("apgm", c.gamma, inputs.kappa)
    if not inputs.phi_gap > 0.0:
        raise ValueError("phi_gap must be positive")
    k = inputs.kappa
    L, Lmax, sigma = c.L, c.L_max, c.sigma_f
    rho = rate_constant("apgm", c.gamma)
    Mrm = inputs.M * math.sqrt(inputs.m_bar)
    Mrdm = inputs.M * math.sqrt(inputs.degree * inputs.m_bar)
    d = inputs.degree
    root_gap = math.sqrt(inputs.phi_gap)
    gap = (k - rho) * rho  # 0 when gamma = 1 (rho = 0)
    poly = 2.0 * k * k + 3.0 * k + 1.0
    with np.errstate(divide="ignore"):
        denom = np.float64(sigma * k * gap)
        a_const = 2.0 * (k + 1.0) * root_gap / (k * math.sqrt(sigma))
        a_by_var = (
            6.0 * Mrm * (k + 1.0) * d * Lmax
            + Mrm * k * (k + 1.0) * (2.0 * math.sqrt(L) + math.sqrt(sigma))
            + sigma * Mrm * gap
        ) / denom
        a_by_grad = 2.0 * Mrdm * (k + 1.0) / np.float64(sigma * gap)
        b_const = 2.0 * Lmax * poly * root_gap / (k * k * math.sqrt(sigma))
        b_by_var = (Lmax * math.sqrt(inputs.m_bar) * poly / (k * k)) * (
            d
            + (6.0 * inputs.M * d * Lmax + inputs.M * k * (2.0 * math.sqrt(L) + math.sqrt(sigma)))
            / np.float64(sigma * gap)
        )
        b_by_grad = (
            2.0 * Lmax * Mrdm * poly + sigma * math.sqrt(d * inputs.m_bar) * gap
        ) / denom
    return DesignCoefficients(
        variant="apgm",
        kappa=k,
        a_const=float(a_const),
        a_by_var=float(a_by_var),
        a_by_grad=float(a_by_grad),
        b_const=float(b_const),
        b_by_var=float(b_by_var),
        b_by_grad=float(b_by_grad),
    )


def coefficients(inputs, variant):
    _check_variant(variant)
    return coefficients_pgm(inputs) if variant == "pgm" else coefficients_apgm(inputs)


def min_intervals(coeffs, bits):
    """Minimal (C_alpha, C_beta) for a given bit count, in closed form.

    With s = 2**(bits+1) the inequalities read

        (1/2 - a_by_var/s) C_alpha - (a_by_grad/s) C_beta >= a_const
        -(b_by_var/s) C_alpha + (1/2 - b_by_grad/s) C_beta >= b_const.

    Both boundary lines slope upward in the (C_alpha, C_beta) plane, so when
    the feasible wedge is nonempty the minimiser of C_alpha + C_beta is the
    vertex where both constraints are active: a 2x2 linear solve.  Feasibility
    requires both diagonal terms and the determinant to be positive and the
    vertex to be non-negative.

    Raises
    ------
    Infeasible
        If no non-negative pair satisfies both inequalities at this n.
    """
    if bits < 1:
        raise ValueError("bits must be at least 1")
    s = 2.0 ** (bits + 1)
    diag_var = 0.5 - coeffs.a_by_var / s
    diag_grad = 0.5 - coeffs.b_by_grad / s
    off_var = coeffs.a_by_grad / s
    off_grad = coeffs.b_by_var / s
    det = diag_var * diag_grad - off_var * off_grad
    if not (diag_var > 0.0 and diag_grad > 0.0 and det > 0.0):
        raise Infeasible("design inequalities infeasible at n=%d" % bits)
    c_alpha = (coeffs.a_const * diag_grad + coeffs.b_const * off_var) / det
    c_beta = (diag_var * coeffs.b_const + off_grad * coeffs.a_const) / det
    if c_alpha < 0.0 or c_beta < 0.0:
        raise Infeasible("design vertex is negative at n=%d" % bits)
    return c_alpha, c_beta


def min_bits(coeffs, n_cap=64):
    """Smallest bit count in [1, n_cap] with feasible intervals.

    ``coeffs`` may be a :class:`DesignCoefficients` or a callable n -> coefficients
    (the coefficients themselves do not depend on n; only the 2**(n+1)
    scaling in the inequalities does).
    """
    for n in range(1, n_cap + 1):
        c = coeffs(n) if callable(coeffs) else coeffs
        try:
            min_intervals(c, n)
        except Infeasible:
            continue
        return n
    raise NoFeasibleBits("no feasible bit count up to %d" % n_cap)


def error_envelope_constants(variant, M, m_bar, degree, L_max, kappa, bits, c_alpha, c_beta):
    """Coefficients (G, P) of the guaranteed error decay under a feasible design.

    When every transmitted value stays inside its interval, the gradient-side
    error norm is at most G * kappa**k and the square root of the projection
    error at most P * kappa**k.
    """
    _check_variant(variant)
    s = 2.0 ** (bits + 1)
    root_m = math.sqrt(m_bar)
    if variant == "pgm":
        grad_coeff = M * root_m * (L_max * degree * c_alpha + math.sqrt(degree) * c_beta) / s
    else:
        grad_coeff = (
            M
            * root_m
            * (3.0 * L_max * degree * c_alpha + kappa * math.sqrt(degree) * c_beta)
            / (kappa * s)
        )
    prox_coeff = 0.5 * math.sqrt(2.0) * M * root_m * c_alpha / s
    return grad_coeff, prox_coeff


@dataclass(frozen=True)
class DesignPoint:
    """A feasible design row: bit count, minimal intervals, envelope constants."""

    variant: str
    kappa: float
    bits: int
    c_alpha: float
    c_beta: float
    grad_coeff: float
    prox_coeff: float


@dataclass(frozen=True)
class DesignResult:
    """Designer output: minimal bits plus one :class:`DesignPoint` per tabled n."""

    variant: str
    kappa: float
    n_min: int
    points: tuple
    inputs: DesignInputs

    def point(self, bits):
        for p in self.points:
            if p.bits == bits:
                return p
        raise KeyError("no design point tabled for n=%d" % bits)


def design_quantizers(inputs, variant, extra_bits=10, n_cap=64):
    """Full design pipeline: coefficients, minimal n, per-n minimal intervals."""
    coeffs = coefficients(inputs, variant)
    n_min = min_bits(coeffs, n_cap=n_cap)
    points = []
    for n in range(n_min, n_min + extra_bits + 1):
        c_alpha, c_beta = min_intervals(coeffs, n)
        grad_coeff, prox_coeff = error_envelope_constants(
            variant,
            inputs.M,
            inputs.m_bar,
            inputs.degree,
            inputs.constants.L_max,
            inputs.kappa,
            n,
            c_alpha,
            c_beta,
        )
        points.append(
            DesignPoint(
                variant=variant,
                kappa=inputs.kappa,
                bits=n,
                c_alpha=c_alpha,
                c_beta=c_beta,
                grad_coeff=grad_coeff,
                prox_coeff=prox_coeff,
            )
        )
    return DesignResult(
        variant=variant, kappa=inputs.kappa, n_min=n_min, points=tuple(points), inputs=inputs
    )


def theorem_envelope(variant, constants, kappa, grad_coeff, prox_coeff, head, k):
    """Worst-case distance to the optimum after iteration k of a quantized run.

    ``head`` is the R bound for the plain variant and the objective-gap
    bound for the accelerated one.  The envelope decays geometrically with
    ratio kappa; validity requires a feasible design at these constants.
    """
    _check_variant(variant)
    check_kappa(variant, constants.gamma, kappa)
    with np.errstate(divide="ignore"):
        if variant == "pgm":
            tail = (grad_coeff + math.sqrt(2.0 * constants.L) * prox_coeff) * kappa / np.float64(
                constants.L * (kappa + constants.gamma - 1.0) * (1.0 - constants.gamma)
            )
            lead = head
        else:
            sigma = constants.sigma_f
            rho = rate_constant("apgm", constants.gamma)
            tail = (
                2.0 * grad_coeff
                + 2.0 * math.sqrt(2.0 * constants.L) * prox_coeff
                + math.sqrt(2.0 * sigma) * prox_coeff
            ) * kappa / np.float64(sigma * (kappa - rho) * rho)
            lead = 2.0 * math.sqrt(head) / math.sqrt(sigma)
    return float(kappa ** (k + 1) * (lead + tail))


def proposition_envelope(variant, constants, head, grad_err_norms, prox_errs, k):
    """Inexact-method distance bound at iteration k from realised error series.

    ``grad_err_norms[p]`` is the gradient-error norm and ``prox_errs[p]`` the
    projection error budget at iteration p, for p = 0..k.  ``head`` is the
    initial distance bound (plain) or objective-gap bound (accelerated).
    The sum is evaluated in the numerically stable form
    sum_p rate**(k - p) * weight_p.
    """
    _check_variant(variant)
    if len(grad_err_norms) <= k or len(prox_errs) <= k:
        raise SeriesTooShort("need error values for p = 0..%d" % k)
    e = np.asarray(grad_err_norms[: k + 1], dtype=float)
    eps = np.asarray(prox_errs[: k + 1], dtype=float)
    if np.any(eps < 0.0):
        raise ValueError("projection error budgets must be non-negative")
    L, sigma, gamma = constants.L, constants.sigma_f, constants.gamma
    powers = np.arange(k, -1, -1.0)
    if variant == "pgm":
        rate = 1.0 - gamma
        weights = e / L + math.sqrt(2.0 / L) * np.sqrt(eps)
        lead = rate ** (k + 1) * head
    else:
        rate = math.sqrt(1.0 - math.sqrt(gamma))
        weights = (2.0 / sigma) * (e + (math.sqrt(2.0 * L) + math.sqrt(sigma / 2.0)) * np.sqrt(eps))
        lead = rate ** (k + 1) * 2.0 * math.sqrt(head) / math.sqrt(sigma)
    return float(lead + np.sum(rate**powers * weights))


def geometric_proposition_envelope(constants, kappa, grad_coeff, prox_coeff, head, k):
    """Closed form of the plain-variant inexact bound under geometric errors.

    Feeding grad_err_norms[p] = G * kappa**p and prox_errs[p] = (P * kappa**p)**2
    into :func:`proposition_envelope` and bounding the partial geometric sum
    by its limit (and the rate powers by kappa powers) collapses the bound to

        kappa**(k+1) * (head + (G + sqrt(2 L) P) / (L (1 - gamma)) * kappa / (kappa + gamma - 1)),

    which is exactly the plain-variant :func:`theorem_envelope`.  Kept as an
    independent evaluation path for cross-checking the two formulas.
    """
    L, gamma = constants.L, constants.gamma
    check_kappa("pgm", gamma, kappa)
    per_step = (grad_coeff + math.sqrt(2.0 * L) * prox_coeff) / (L * (1.0 - gamma))
    series_limit = kappa / (kappa + gamma - 1.0)  # sum of ((1-gamma)/kappa)**r over r >= 0
    return kappa ** (k + 1) * (head + per_step * series_limit)
