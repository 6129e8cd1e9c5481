"""Projected-gradient runners: exact, inexact, and quantized-communication.

All runners share the same block-structured QP model and record one
:class:`IterationRecord` per iteration; row k always describes iteration k,
so ``err`` is the distance of the *updated* iterate to the reference optimum
and ``theorem_bound`` the matching theoretical envelope.

The quantized runners execute synchronous rounds: every subsystem quantizes
and broadcasts its variable block, re-projects the received neighbourhood,
evaluates its local gradient there, quantizes and broadcasts the gradient,
and finally takes a projected gradient step on its own block.  Messages go
through the wire codec on every exchange, so traces exercise exactly what a
deployment would transmit.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import design
from .errors import (
    InadmissibleKappa,
    InvalidStepSize,
    MalformedTrace,
    NegativeEpsilon,
    NonpositiveInterval,
    SchemaError,
)
from .model import local_gradient, global_gradient, objective_value, project_box
from .quantizer import BitLedger, UniformQuantizer, decode, encode, quantize

ALGORITHMS = (
    "exact-pgm",
    "exact-apgm",
    "inexact-pgm",
    "inexact-apgm",
    "quantized-pgm",
    "quantized-apgm",
)

REFERENCE_TOL = 1e-13
REFERENCE_MAX_ITER = 100_000


def momentum(gamma):
    """Acceleration coefficient (1 - sqrt(gamma)) / (1 + sqrt(gamma))."""
    root = math.sqrt(gamma)
    return (1.0 - root) / (1.0 + root)


def _variant_of(algorithm):
    return "apgm" if algorithm.endswith("apgm") else "pgm"


def _check_step(constants):
    if not 0.0 < constants.tau * constants.L <= 1.0 + 1e-12:
        raise InvalidStepSize(
            "tau*L = %r outside (0, 1]" % (constants.tau * constants.L,)
        )


@dataclass
class RunConfig:
    """Runner configuration; mirrors the JSON config document."""

    algorithm: str
    kappa: float = None
    bits: int = None
    c_alpha: float = None
    c_beta: float = None
    max_iterations: int = 100
    seed: int = 0
    designed: bool = False  # parameters came from the designer: envelopes are certified

    def validate(self, gamma=None):
        if self.algorithm not in ALGORITHMS:
            raise ValueError("unknown algorithm %r" % (self.algorithm,))
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.algorithm.startswith("quantized"):
            if self.bits is None or self.bits < 1:
                raise ValueError("quantized runs need bits >= 1")
            if self.c_alpha is None or self.c_beta is None or min(self.c_alpha, self.c_beta) <= 0:
                raise NonpositiveInterval("quantized runs need positive initial intervals")
            if self.kappa is None:
                raise InadmissibleKappa("quantized runs need kappa")
            if gamma is not None:
                design.check_kappa(_variant_of(self.algorithm), gamma, self.kappa)
        return self

    def to_json_dict(self):
        return {
            "schema": "1",
            "algorithm": self.algorithm,
            "kappa": self.kappa,
            "bits": self.bits,
            "c_alpha": self.c_alpha,
            "c_beta": self.c_beta,
            "max_iterations": self.max_iterations,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, doc):
        allowed = {"schema", "algorithm", "kappa", "bits", "c_alpha", "c_beta",
                   "max_iterations", "seed"}
        unknown = set(doc) - allowed
        if unknown:
            raise SchemaError("unknown config fields: %s" % sorted(unknown))
        if doc.get("schema") != "1":
            raise SchemaError("unsupported schema %r" % (doc.get("schema"),))
        if "algorithm" not in doc:
            raise SchemaError("config document needs an algorithm field")
        kwargs = {k: doc[k] for k in allowed - {"schema"} if k in doc and doc[k] is not None}
        return cls(**kwargs)


@dataclass(frozen=True)
class IterationRecord:
    """Diagnostics of one iteration (see module docstring for row semantics)."""

    k: int
    err: float
    theorem_bound: float
    e_norm: float
    e_bound: float
    eps_sqrt: float
    eps_bound: float
    bits_cum: int
    saturated: bool

    def __post_init__(self):
        values = (self.err, self.theorem_bound, self.e_norm, self.e_bound,
                  self.eps_sqrt, self.eps_bound)
        if not all(np.isfinite(v) and v >= 0.0 for v in values):
            raise ValueError("iteration %d produced a non-finite or negative record" % self.k)


_CSV_COLUMNS = ("k", "err", "theorem_bound", "e_norm", "e_bound_lemma",
                "eps_sqrt", "eps_bound_lemma", "bits_cum", "saturated")


@dataclass
class RunTrace:
    """Recorded run: per-iteration records plus scalar metadata."""

    records: list
    meta: dict
    x_star: np.ndarray = None
    final_x: np.ndarray = None

    def errors(self):
        return np.array([r.err for r in self.records])

    def bounds(self):
        return np.array([r.theorem_bound for r in self.records])

    def envelope_violations(self, rtol=1e-9):
        return sum(1 for r in self.records if r.err > r.theorem_bound * (1.0 + rtol))

    def any_saturation(self):
        return any(r.saturated for r in self.records)

    def to_csv(self, path):
        meta_items = " ".join(
            "%s=%s" % (key, _format_meta(value))
            for key, value in sorted(self.meta.items())
            if isinstance(value, (bool, int, float, str))
        )
        with open(path, "w", newline="") as fh:
            fh.write("# schema=1 %s\n" % meta_items)
            writer = csv.writer(fh)
            writer.writerow(_CSV_COLUMNS)
            for r in self.records:
                writer.writerow(
                    [r.k, repr(r.err), repr(r.theorem_bound), repr(r.e_norm),
                     repr(r.e_bound), repr(r.eps_sqrt), repr(r.eps_bound),
                     r.bits_cum, int(r.saturated)]
                )

    @classmethod
    def from_csv(cls, path):
        try:
            with open(path) as fh:
                first = fh.readline()
                if not first.startswith("# schema=1"):
                    raise MalformedTrace("%s: missing schema comment line" % path)
                meta = {}
                for token in first[1:].split()[1:]:
                    key, _, raw = token.partition("=")
                    meta[key] = _parse_meta(raw)
                reader = csv.reader(fh)
                header = next(reader, None)
                if header is None or tuple(header) != _CSV_COLUMNS:
                    raise MalformedTrace("%s: unexpected column header %r" % (path, header))
                records = [
                    IterationRecord(
                        k=int(row[0]), err=float(row[1]), theorem_bound=float(row[2]),
                        e_norm=float(row[3]), e_bound=float(row[4]), eps_sqrt=float(row[5]),
                        eps_bound=float(row[6]), bits_cum=int(row[7]),
                        saturated=bool(int(row[8])),
                    )
                    for row in reader if row
                ]
        except OSError as exc:
            raise MalformedTrace("cannot read trace %s: %s" % (path, exc))
        except (ValueError, IndexError) as exc:
            raise MalformedTrace("trace %s is malformed: %s" % (path, exc))
        if not records:
            raise MalformedTrace("trace %s holds no iterations" % path)
        return cls(records=records, meta=meta)


def _format_meta(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_meta(raw):
    if raw in ("true", "false"):
        return raw == "true"
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    return raw


def fit_rate(trace, window=0.5):
    """Least-squares log-linear convergence rate over the final window.

    Iterations whose error has collapsed below 1e-13 of the initial error are
    dropped (they sit on the floating-point floor of the reference optimum).
    """
    errs = trace.errors() if isinstance(trace, RunTrace) else np.asarray(trace, dtype=float)
    k = np.arange(errs.size)
    floor = max(errs[0], 1e-300) * 1e-13
    start = int(errs.size * (1.0 - window))
    sel = (k >= start) & (errs > floor)
    if np.count_nonzero(sel) < 2:
        sel = errs > floor
    if np.count_nonzero(sel) < 2:
        return 0.0
    slope = np.polyfit(k[sel], np.log(errs[sel]), 1)[0]
    return float(np.exp(slope))


# --- reference optimum ------------------------------------------------------


def reference_solution(qp, constants, tol=REFERENCE_TOL, max_iter=REFERENCE_MAX_ITER):
    """High-accuracy optimum via the exact accelerated method.

    Iterates until the step change drops below ``tol`` (or the iteration cap
    is hit) and caches the result on the problem instance.
    """
    if qp._x_star is not None:
        return qp._x_star
    _check_step(constants)
    eta = momentum(constants.gamma)
    x = project_box(qp.global_box, np.zeros(qp.dim))
    y = x
    for _ in range(max_iter):
        x_new = project_box(qp.global_box, y - constants.tau * global_gradient(qp, y))
        delta = np.linalg.norm(x_new - x)
        y = x_new + eta * (x_new - x)
        x = x_new
        if delta <= tol:
            break
    qp._x_star = x
    return x


def reference_gap(qp, constants, x0=None):
    """Reference optimum plus exact distance and objective-gap bounds at x0."""
    x_star = reference_solution(qp, constants)
    if x0 is None:
        x0 = project_box(qp.global_box, np.zeros(qp.dim))
    R = float(np.linalg.norm(x0 - x_star))
    phi_gap = max(objective_value(qp, x0) - objective_value(qp, x_star), 0.0)
    return x_star, R, phi_gap


# --- exact and inexact runners ----------------------------------------------


def _exact_head(variant, qp, constants, x0, x_star):
    if variant == "pgm":
        return float(np.linalg.norm(x0 - x_star))
    gap = max(objective_value(qp, x0) - objective_value(qp, x_star), 0.0)
    return 2.0 * math.sqrt(gap) / math.sqrt(constants.sigma_f)


def run_exact(qp, constants, variant, x0=None, iters=100, x_star=None):
    """Exact projected-gradient run (plain or accelerated) with an error trace.

    The start point defaults to the projection of the origin; a supplied x0
    is projected onto the feasible set first.
    """
    design._check_variant(variant)
    _check_step(constants)
    if x_star is None:
        x_star = reference_solution(qp, constants)
    x = project_box(qp.global_box, np.zeros(qp.dim) if x0 is None else np.asarray(x0, float))
    rate = design.rate_constant(variant, constants.gamma)
    head = _exact_head(variant, qp, constants, x, x_star)
    eta = momentum(constants.gamma)
    y = x
    records = []
    for k in range(iters):
        base = x if variant == "pgm" else y
        x_new = project_box(qp.global_box, base - constants.tau * global_gradient(qp, base))
        if variant == "apgm":
            y = x_new + eta * (x_new - x)
        x = x_new
        records.append(IterationRecord(
            k=k, err=float(np.linalg.norm(x - x_star)),
            theorem_bound=rate ** (k + 1) * head,
            e_norm=0.0, e_bound=0.0, eps_sqrt=0.0, eps_bound=0.0,
            bits_cum=0, saturated=False,
        ))
    meta = {"variant": "exact-%s" % variant, "tau": constants.tau, "head": head}
    return RunTrace(records=records, meta=meta, x_star=x_star, final_x=x)


def _inexact_projection(rng, box, v, exact, budget):
    """Feasible point whose projection objective excess is at most ``budget``.

    Starting from the exact projection, moves along the chord towards a
    random feasible point until the excess 0.5*|p - v|^2 - min reaches the
    budget (bisection; the low endpoint is returned so the excess never
    exceeds the budget).
    """
    if not np.all(np.isfinite(box.lower)) or not np.all(np.isfinite(box.upper)):
        raise ValueError("inexact projection sampling needs a bounded box")
    target_dir = rng.uniform(box.lower, box.upper) - exact
    quad = float(target_dir @ target_dir)
    if quad == 0.0:
        return exact
    lin = max(float((exact - v) @ target_dir), 0.0)

    def excess(t):
        return lin * t + 0.5 * quad * t * t

    target = min(budget, excess(1.0))
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if excess(mid) <= target:
            lo = mid
        else:
            hi = mid
    return exact + lo * target_dir


def run_inexact(qp, constants, variant, error_injector, iters=100, x0=None,
                x_star=None, seed=0):
    """Projected-gradient run with injected gradient and projection errors.

    ``error_injector(k)`` returns a pair (e, eps): a gradient perturbation
    vector (or None) and a non-negative projection error budget.  With both
    zero the trace is identical to :func:`run_exact`.  The recorded
    ``theorem_bound`` column is the running inexact-method envelope built
    from the injected series.
    """
    design._check_variant(variant)
    _check_step(constants)
    if x_star is None:
        x_star = reference_solution(qp, constants)
    rng = np.random.default_rng(seed)
    x = project_box(qp.global_box, np.zeros(qp.dim) if x0 is None else np.asarray(x0, float))
    rate = design.rate_constant(variant, constants.gamma)
    head = _exact_head(variant, qp, constants, x, x_star)
    L, sigma = constants.L, constants.sigma_f
    eta = momentum(constants.gamma)
    y = x
    running = 0.0  # stable evaluation of the envelope sum, sum_p rate**(k-p) w_p
    records = []
    for k in range(iters):
        e, eps = error_injector(k)
        if eps is None:
            eps = 0.0
        if eps < 0.0:
            raise NegativeEpsilon("projection error budget at k=%d is negative" % k)
        base = x if variant == "pgm" else y
        grad = global_gradient(qp, base)
        if e is not None:
            e = np.asarray(e, dtype=float)
            grad = grad + e
        pre_projection = base - constants.tau * grad
        x_new = project_box(qp.global_box, pre_projection)
        if eps > 0.0:
            x_new = _inexact_projection(rng, qp.global_box, pre_projection, x_new, eps)
        if variant == "apgm":
            y = x_new + eta * (x_new - x)
        x = x_new
        e_norm = 0.0 if e is None else float(np.linalg.norm(e))
        if variant == "pgm":
            weight = e_norm / L + math.sqrt(2.0 / L) * math.sqrt(eps)
        else:
            weight = (2.0 / sigma) * (e_norm + (math.sqrt(2.0 * L) + math.sqrt(sigma / 2.0))
                                      * math.sqrt(eps))
        running = rate * running + weight
        records.append(IterationRecord(
            k=k, err=float(np.linalg.norm(x - x_star)),
            theorem_bound=rate ** (k + 1) * head + running,
            e_norm=e_norm, e_bound=e_norm,
            eps_sqrt=math.sqrt(eps), eps_bound=math.sqrt(eps),
            bits_cum=0, saturated=False,
        ))
    meta = {"variant": "inexact-%s" % variant, "tau": constants.tau, "head": head,
            "seed": seed}
    return RunTrace(records=records, meta=meta, x_star=x_star, final_x=x)


# --- quantized distributed runners --------------------------------------------


@dataclass
class RunState:
    """Synchronous-round state; fields describe the last completed iteration.

    ``hat_x`` and ``hat_grad`` hold the reconstructed values every receiver
    agrees on; they double as the next round's quantizer mid-values, which is
    what keeps sender and receiver grids bit-identical without extra traffic.
    """

    variant: str
    k: int
    x: np.ndarray          # current iterate (after the update of iteration k-1)
    hat_x: np.ndarray      # reconstructed variables, global
    hat_grad: list         # reconstructed local gradients, neighbourhood-sized
    x_tilde: list          # re-projected neighbourhoods
    var_err: list          # variable quantization errors
    var_err_prev: list     # ... from one iteration earlier
    grad_err: list         # gradient quantization errors
    x_prev: np.ndarray
    y: np.ndarray = None       # accelerated iterate combination
    y_tilde: list = None       # accelerated gradient evaluation points
    saturated: bool = False


def init_run_state(qp, variant):
    """Round-zero state: start at the projected origin with zeroed error history."""
    design._check_variant(variant)
    x0 = project_box(qp.global_box, np.zeros(qp.dim))
    x_tilde = [
        project_box(qp.neighborhood_box(i), np.zeros(qp.maps.neighborhood_dim(i)))
        for i in range(qp.topology.M)
    ]
    hat_grad = [local_gradient(qp, i, x_tilde[i]) for i in range(qp.topology.M)]
    zeros_blocks = [np.zeros(m) for m in qp.m]
    zeros_nbhd = [np.zeros(qp.maps.neighborhood_dim(i)) for i in range(qp.topology.M)]
    return RunState(
        variant=variant, k=0, x=x0, hat_x=x0.copy(), hat_grad=hat_grad,
        x_tilde=x_tilde, var_err=zeros_blocks, var_err_prev=[b.copy() for b in zeros_blocks],
        grad_err=zeros_nbhd, x_prev=x0.copy(),
    )


def _broadcast(qp, config, k, kind, vectors, mids, interval, ledger):
    """Quantize per-subsystem vectors and push them through the wire codec.

    Returns the reconstructions every receiver decodes, the quantization
    errors, and whether any sender saturated.  Bits are accounted per
    directed edge (self-delivery is free).
    """
    recon, errs = [], []
    saturated = False
    for i, (v, mid) in enumerate(zip(vectors, mids)):
        q = UniformQuantizer(config.bits, interval, mid)
        wire = encode(quantize(q, v, sender=i, kind=kind, iteration=k))
        msg = decode(wire, q)
        recon.append(msg.reconstructed)
        errs.append(msg.reconstructed - v)
        saturated = saturated or msg.saturated
        if ledger is not None:
            for j in qp.topology.neighbor_sets[i]:
                if j != i:
                    ledger.record((i, j), k, v.size, config.bits)
    return recon, errs, saturated


def _step_quantized(qp, constants, config, state, ledger, accelerated):
    k = state.k
    maps = qp.maps
    M = qp.topology.M
    interval_var = config.c_alpha * config.kappa**k
    interval_grad = config.c_beta * config.kappa**k

    blocks = [state.x[maps.block_slice(i)] for i in range(M)]
    mids = [state.hat_x[maps.block_slice(i)] for i in range(M)]
    recon_x, var_err, sat_var = _broadcast(
        qp, config, k, "variable", blocks, mids, interval_var, ledger
    )
    hat_x = np.concatenate(recon_x)
    x_tilde = [
        project_box(qp.neighborhood_box(i), maps.gather(i, hat_x)) for i in range(M)
    ]

    if accelerated:
        eta = momentum(constants.gamma)
        y = state.x + eta * (state.x - state.x_prev)
        y_tilde = [x_tilde[i] + eta * (x_tilde[i] - state.x_tilde[i]) for i in range(M)]
        grads = [local_gradient(qp, i, y_tilde[i]) for i in range(M)]
    else:
        y, y_tilde = None, None
        grads = [local_gradient(qp, i, x_tilde[i]) for i in range(M)]

    recon_g, grad_err, sat_grad = _broadcast(
        qp, config, k, "gradient", grads, state.hat_grad, interval_grad, ledger
    )
    aggregate = np.zeros(qp.dim)
    for i in range(M):  # ascending sender order keeps the summation deterministic
        maps.scatter_add(i, aggregate, recon_g[i])
    base = y if accelerated else state.x
    x_next = project_box(qp.global_box, base - constants.tau * aggregate)

    return RunState(
        variant=state.variant, k=k + 1, x=x_next, hat_x=hat_x, hat_grad=recon_g,
        x_tilde=x_tilde, var_err=var_err, var_err_prev=state.var_err,
        grad_err=grad_err, x_prev=state.x, y=y, y_tilde=y_tilde,
        saturated=sat_var or sat_grad,
    )


def step_quantized_pgm(qp, constants, config, state, ledger=None):
    """One synchronous round of the plain quantized distributed algorithm."""
    return _step_quantized(qp, constants, config, state, ledger, accelerated=False)


def step_quantized_apgm(qp, constants, config, state, ledger=None):
    """One synchronous round of the accelerated quantized distributed algorithm."""
    return _step_quantized(qp, constants, config, state, ledger, accelerated=True)


@dataclass(frozen=True)
class ErrorMeasurement:
    """Realised inexactness of one round plus its quantization-error bounds."""

    e: np.ndarray
    e_norm: float
    eps: float
    eps_sqrt: float
    e_bound: float
    eps_sqrt_bound: float


def measure_errors(qp, state, constants=None):
    """Realised gradient error e and projection error eps of the last round.

    The gradient error is the gap between the aggregated reconstructed
    gradients actually used in the update and the true gradient at the point
    an exact method would have used; eps is half the squared distance between
    the iterate and its re-projected quantization.  Also returns upper bounds
    on |e| and sqrt(eps) in terms of the recorded quantization errors.
    """
    if state.k < 1:
        raise ValueError("measure_errors needs a state after at least one step")
    if constants is None:
        from .model import compute_constants

        constants = compute_constants(qp)
    maps = qp.maps
    M = qp.topology.M
    if state.variant == "apgm":
        base, points = state.y, state.y_tilde
    else:
        base, points = state.x_prev, state.x_tilde
    e = np.zeros(qp.dim)
    for i in range(M):
        contribution = (
            local_gradient(qp, i, points[i])
            + state.grad_err[i]
            - local_gradient(qp, i, maps.gather(i, base))
        )
        maps.scatter_add(i, e, contribution)

    tilde_diag = np.concatenate(
        [maps.block(i, i, state.x_tilde[i]) for i in range(M)]
    )
    eps = 0.5 * float(np.sum((state.x_prev - tilde_diag) ** 2))

    var_norms = np.array([np.linalg.norm(a) for a in state.var_err])
    grad_norms = np.array([np.linalg.norm(b) for b in state.grad_err])
    if state.variant == "apgm":
        root = math.sqrt(constants.gamma)
        current, previous = 2.0 / (1.0 + root), (1.0 - root) / (1.0 + root)
        prev_norms = np.array([np.linalg.norm(a) for a in state.var_err_prev])
    e_bound = 0.0
    for i in range(M):
        nbrs = list(qp.topology.neighbor_sets[i])
        if state.variant == "apgm":
            e_bound += constants.L_i[i] * float(
                current * var_norms[nbrs].sum() + previous * prev_norms[nbrs].sum()
            )
        else:
            e_bound += constants.L_i[i] * float(var_norms[nbrs].sum())
    e_bound += float(grad_norms.sum())
    eps_sqrt_bound = 0.5 * math.sqrt(2.0) * float(var_norms.sum())

    return ErrorMeasurement(
        e=e, e_norm=float(np.linalg.norm(e)), eps=eps, eps_sqrt=math.sqrt(eps),
        e_bound=e_bound, eps_sqrt_bound=eps_sqrt_bound,
    )


def run_quantized(qp, constants, config, head=None, x_star=None, ledger=None):
    """Full quantized run with envelope, error-bound and bit accounting.

    ``head`` is the distance bound (plain) or objective-gap bound
    (accelerated) used in the recorded envelope; by default the exact value
    from the reference solve.  Returns a :class:`RunTrace`; the bit ledger
    can be supplied to keep per-edge accounting across calls.
    """
    variant = _variant_of(config.algorithm)
    if not config.algorithm.startswith("quantized"):
        raise ValueError("run_quantized needs a quantized-* algorithm")
    config.validate(constants.gamma)
    _check_step(constants)
    if x_star is None:
        x_star = reference_solution(qp, constants)
    state = init_run_state(qp, variant)
    shifted_start = bool(np.any(state.x != 0.0))
    if head is None:
        if variant == "pgm":
            head = float(np.linalg.norm(state.x - x_star))
        else:
            head = max(objective_value(qp, state.x) - objective_value(qp, x_star), 0.0)
    grad_coeff, prox_coeff = design.error_envelope_constants(
        variant, qp.topology.M, qp.m_bar, qp.topology.degree, constants.L_max,
        config.kappa, config.bits, config.c_alpha, config.c_beta,
    )
    ledger = BitLedger() if ledger is None else ledger
    meta = {
        "variant": config.algorithm, "kappa": config.kappa, "bits": config.bits,
        "c_alpha": config.c_alpha, "c_beta": config.c_beta, "seed": config.seed,
        "designed": bool(config.designed), "head": float(head), "tau": constants.tau,
        "shifted_start": shifted_start,
    }
    records = []
    for k in range(config.max_iterations):
        state = (step_quantized_apgm if variant == "apgm" else step_quantized_pgm)(
            qp, constants, config, state, ledger
        )
        if k == 0 and variant == "apgm":
            meta["y_tilde0_feasible"] = all(
                qp.neighborhood_box(i).contains(state.y_tilde[i], tol=1e-12)
                for i in range(qp.topology.M)
            )
        measurement = measure_errors(qp, state, constants)
        bound = design.theorem_envelope(
            variant, constants, config.kappa, grad_coeff, prox_coeff, head, k
        )
        if not math.isfinite(bound):
            bound = 1e300  # gamma = 1 is degenerate: no finite design exists
        records.append(IterationRecord(
            k=k, err=float(np.linalg.norm(state.x - x_star)),
            theorem_bound=bound,
            e_norm=measurement.e_norm, e_bound=measurement.e_bound,
            eps_sqrt=measurement.eps_sqrt, eps_bound=measurement.eps_sqrt_bound,
            bits_cum=ledger.total_bits(), saturated=state.saturated,
        ))
    return RunTrace(records=records, meta=meta, x_star=x_star, final_x=state.x)
