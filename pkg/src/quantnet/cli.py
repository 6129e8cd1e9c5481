"""Command-line front end: generate, design, run, compare.

Exit codes: 0 success, 1 runtime or input errors, 2 usage errors (argparse),
3 envelope violation or quantizer saturation in a run whose parameters were
certified by the designer.  Verbosity is controlled by QUANTNET_LOG
(error, info or debug).
"""

import argparse
import json
import logging
import os
import sys

from . import design as design_mod
from .algorithms import (
    RunConfig,
    RunTrace,
    fit_rate,
    reference_gap,
    run_exact,
    run_quantized,
)
from .errors import QuantnetError
from .mpc import condense, random_instance, save_mpc
from .model import compute_constants, load_qp, save_qp
from .quantizer import BitLedger

log = logging.getLogger("quantnet")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ENVELOPE = 3

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = _LOG_LEVELS.get(os.environ.get("QUANTNET_LOG", "error").lower(), logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="quantnet",
        description="Distributed quantized proximal-gradient experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a seeded MPC instance and its condensed QP")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--M", type=int, required=True, help="number of subsystems (>= 2)")
    gen.add_argument("--states", type=int, default=3)
    gen.add_argument("--inputs", type=int, default=2)
    gen.add_argument("--horizon", type=int, default=11)
    gen.add_argument("--edge-density", type=float, default=0.2)
    gen.add_argument("--out", "-o", required=True, help="output directory")

    des = sub.add_parser("design", help="quantizer parameter design for both variants")
    des.add_argument("--instance", required=True, help="condensed QP JSON file")
    des.add_argument("--kappa", type=float, default=None,
                     help="interval decrease rate (default: admissible midpoint per variant)")
    des.add_argument("--tau-fraction", type=float, default=1.0)
    des.add_argument("--extra-bits", type=int, default=10,
                     help="table n from n_min to n_min + extra-bits")
    des.add_argument("--out", required=True, help="design JSON file")

    run = sub.add_parser("run", help="run a variant and write its trace CSV")
    run.add_argument("--instance", required=True)
    run.add_argument("--variant", required=True,
                     choices=["pgm", "apgm", "exact-pgm", "exact-apgm"],
                     help="pgm/apgm are the quantized distributed algorithms")
    run.add_argument("--config", default=None, help="JSON file mirroring the run config")
    run.add_argument("--kappa", type=float, default=None)
    run.add_argument("--bits", type=int, default=None)
    run.add_argument("--c-alpha", type=float, default=None)
    run.add_argument("--c-beta", type=float, default=None)
    run.add_argument("--auto-design", action="store_true",
                     help="derive bits and intervals from the designer")
    run.add_argument("--assert-envelope", action="store_true",
                     help="treat envelope violations or saturation as a failure (exit 3)")
    run.add_argument("--iters", type=int, default=300)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--tau-fraction", type=float, default=1.0,
                     help="step size as a fraction of 1/L (envelopes assume 1.0)")
    run.add_argument("--out", required=True, help="trace CSV file")
    run.add_argument("--ledger-out", default=None, help="optional per-edge bit ledger CSV")

    cmp_ = sub.add_parser("compare", help="summarise and compare trace CSVs")
    cmp_.add_argument("traces", nargs="+", help="two or more trace CSV files")
    cmp_.add_argument("--out", required=True, help="summary JSON file")
    return parser


def _cmd_generate(args, parser):
    if args.M < 2:
        parser.error("--M must be at least 2")
    instance = random_instance(
        seed=args.seed, M=args.M, n_states=args.states, n_inputs=args.inputs,
        horizon=args.horizon, edge_density=args.edge_density,
    )
    qp, offset = condense(instance)
    os.makedirs(args.out, exist_ok=True)
    mpc_path = os.path.join(args.out, "mpc.json")
    qp_path = os.path.join(args.out, "qp.json")
    save_mpc(instance, mpc_path)
    save_qp(qp, qp_path, constant_offset=offset)
    log.info("wrote %s and %s (active fraction %.3f)", mpc_path, qp_path,
             instance.meta.get("active_fraction", float("nan")))
    return EXIT_OK


def _design_section(qp, constants, kappa_arg, variant, R, phi_gap, extra_bits):
    kappa = kappa_arg if kappa_arg is not None else design_mod.default_kappa(
        variant, constants.gamma)
    if kappa_arg is not None:
        design_mod.check_kappa(variant, constants.gamma, kappa)
    inputs = design_mod.DesignInputs(
        constants=constants, M=qp.topology.M, degree=qp.topology.degree,
        m_bar=qp.m_bar, kappa=kappa, R=R, phi_gap=phi_gap,
    )
    try:
        result = design_mod.design_quantizers(inputs, variant, extra_bits=extra_bits)
    except (QuantnetError, ValueError) as exc:
        # degenerate problems (gamma = 1 or a zero-distance start) have no
        # finite design; report the rates and note the reason
        return {"kappa": kappa, "error": str(exc)}
    per_n = []
    for p in result.points:
        c1, c2 = design_mod.error_envelope_constants(
            "pgm", qp.topology.M, qp.m_bar, qp.topology.degree, constants.L_max,
            kappa, p.bits, p.c_alpha, p.c_beta)
        c3, c4 = design_mod.error_envelope_constants(
            "apgm", qp.topology.M, qp.m_bar, qp.topology.degree, constants.L_max,
            kappa, p.bits, p.c_alpha, p.c_beta)
        per_n.append({"n": p.bits, "C_alpha": p.c_alpha, "C_beta": p.c_beta,
                      "C1": c1, "C2": c2, "C3": c3, "C4": c4})
    return {"kappa": kappa, "n_min": result.n_min, "per_n": per_n}


def _cmd_design(args, parser):
    qp, _ = load_qp(args.instance)
    constants = compute_constants(qp, tau_fraction=args.tau_fraction)
    _, R, phi_gap = reference_gap(qp, constants)
    doc = {
        "schema": "1",
        "gamma": constants.gamma,
        "1-gamma": design_mod.rate_constant("pgm", constants.gamma),
        "sqrt(1-sqrt(gamma))": design_mod.rate_constant("apgm", constants.gamma),
        "sigma_f": constants.sigma_f,
        "L": constants.L,
        "L_max": constants.L_max,
        "R": R,
        "phi_gap": phi_gap,
        "pgm": _design_section(qp, constants, args.kappa, "pgm", R, phi_gap, args.extra_bits),
        "apgm": _design_section(qp, constants, args.kappa, "apgm", R, phi_gap, args.extra_bits),
    }
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    log.info("wrote %s", args.out)
    return EXIT_OK


def _quantized_config(args, qp, constants, R, phi_gap):
    algorithm = "quantized-%s" % args.variant
    variant = args.variant
    if args.config:
        with open(args.config) as fh:
            config = RunConfig.from_json_dict(json.load(fh))
        config.algorithm = algorithm
    else:
        config = RunConfig(algorithm=algorithm)
    for attr, value in (("kappa", args.kappa), ("bits", args.bits),
                        ("c_alpha", args.c_alpha), ("c_beta", args.c_beta)):
        if value is not None:
            setattr(config, attr, value)
    config.max_iterations = args.iters
    config.seed = args.seed
    if args.auto_design:
        kappa = config.kappa if config.kappa is not None else design_mod.default_kappa(
            variant, constants.gamma)
        design_mod.check_kappa(variant, constants.gamma, kappa)
        inputs = design_mod.DesignInputs(
            constants=constants, M=qp.topology.M, degree=qp.topology.degree,
            m_bar=qp.m_bar, kappa=kappa, R=R, phi_gap=phi_gap,
        )
        coeffs = design_mod.coefficients(inputs, variant)
        n_min = design_mod.min_bits(coeffs)
        bits = config.bits if config.bits is not None else n_min
        config.kappa = kappa
        config.bits = bits
        config.c_alpha, config.c_beta = design_mod.min_intervals(coeffs, bits)
        config.designed = True
        log.info("designed %s: n_min=%d, using n=%d, C_alpha=%.6g, C_beta=%.6g",
                 variant, n_min, bits, config.c_alpha, config.c_beta)
    return config


def _cmd_run(args, parser):
    qp, _ = load_qp(args.instance)
    constants = compute_constants(qp, tau_fraction=args.tau_fraction)
    if args.variant.startswith("exact-"):
        x_star, _, _ = reference_gap(qp, constants)
        trace = run_exact(qp, constants, args.variant.split("-")[1],
                          iters=args.iters, x_star=x_star)
        trace.to_csv(args.out)
        return EXIT_OK

    x_star, R, phi_gap = reference_gap(qp, constants)
    config = _quantized_config(args, qp, constants, R, phi_gap)
    head = R if args.variant == "pgm" else phi_gap
    ledger = BitLedger()
    trace = run_quantized(qp, constants, config, head=head, x_star=x_star, ledger=ledger)
    trace.to_csv(args.out)
    if args.ledger_out:
        ledger.to_csv(args.ledger_out)
    if config.designed or args.assert_envelope:
        violations = trace.envelope_violations()
        saturated = trace.any_saturation()
        if violations or saturated:
            print(
                "envelope check failed: %d violation(s), saturation=%s"
                % (violations, saturated),
                file=sys.stderr,
            )
            return EXIT_ENVELOPE
    return EXIT_OK


def _family(variant):
    return "apgm" if str(variant).endswith("apgm") else "pgm"


def _cmd_compare(args, parser):
    if len(args.traces) < 2:
        parser.error("compare needs at least two trace files")
    rows = []
    families = {"pgm": [], "apgm": []}
    for path in args.traces:
        trace = RunTrace.from_csv(path)
        rate = fit_rate(trace)
        variant = trace.meta.get("variant", "unknown")
        rows.append({
            "path": path,
            "variant": variant,
            "fitted_rate": rate,
            "envelope_violations": trace.envelope_violations(),
            "total_bits": trace.records[-1].bits_cum,
            "final_err": trace.records[-1].err,
            "iterations": len(trace.records),
        })
        families[_family(variant)].append(rate)
    ordering = {}
    if families["pgm"] and families["apgm"]:
        ordering = {
            "pgm_best_rate": min(families["pgm"]),
            "apgm_best_rate": min(families["apgm"]),
            "apgm_not_slower": min(families["apgm"]) <= min(families["pgm"]),
        }
    doc = {"schema": "1", "traces": rows, "rate_ordering": ordering}
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "design": _cmd_design,
    "run": _cmd_run,
    "compare": _cmd_compare,
}


def main(argv=None):
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, parser)
    except (QuantnetError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
