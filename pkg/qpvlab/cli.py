"""Command-line front end.

Every command except ``bound`` writes a JSON report envelope (to ``--output``
or standard output). Exit codes: 0 when the checked property holds, 2 when it
fails, 1 on usage or input errors.
"""

import argparse
import json
import sys
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from qpvlab.bloch import Z_PLUS, format_projector
from qpvlab.config import get_settings
from qpvlab.errors import InputFormatError, QpvError
from qpvlab.hmc import ChannelShape, check_all, component_bound, copy_isometry, load_instance
from qpvlab.logging_config import logger, setup_logging
from qpvlab.models import ProtocolConfig, ReportEnvelope, SearchConfig, SimulationConfig
from qpvlab.qpvsim import (
    acceptance_probability,
    assess_strategy,
    attack_channel,
    bb84_attack,
    final_state,
    load_strategy,
    run_adversarial,
    run_honest,
)
from qpvlab.stratsearch import distinct_basis_census, find_lambda_pairs, lemma1_scan, search_cheating
from qpvlab.utils import dump_report, parse_model, read_json, utc_timestamp

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PROPERTY = 2

ATTACK_TOL = 1e-9


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 instead of argparse's 2, which is reserved for failed checks."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {value}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def setup_arg_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Master seed (from --config, else 0, if omitted)")
    common.add_argument("--output", "-o", default=None, help="Report path (standard output if omitted)")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging and tracebacks")
    common.add_argument("--log-file", action="store_true", help="Also log to rotating files under LOG_DIR")

    parser = _Parser(
        prog="qpvlab",
        description="Single-qubit position-verification experiments",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check-hidden", parents=[common], help="Decide whether an instance is a hidden measurement")
    p.add_argument("instance", help="Instance JSON file")
    p.add_argument("--tol", type=float, default=None, help="Verdict tolerance (QPVLAB_VERDICT_TOL if omitted)")

    p = sub.add_parser("simulate", parents=[common], help="Run the protocol on random (P, z) draws")
    p.add_argument("--config", default=None, help="ProtocolConfig JSON file")
    p.add_argument("--runs", type=_positive_int, default=None, help="Number of runs (from --config, else 100, if omitted)")
    p.add_argument("--adversary", choices=["bb84"], default=None, help="Replace the prover by a built-in attack")
    p.add_argument("--strategy", default=None, help="Replace the prover by a strategy JSON file")

    p = sub.add_parser("verify-attack", parents=[common], help="Check the EPR attack against a basis set")
    p.add_argument("--basis", action="append", default=None,
                   help="Projector in the basis set (repeatable; replaces the Z/X default)")
    p.add_argument("--config", default=None, help="ProtocolConfig JSON file for timing and prior")

    p = sub.add_parser("search", parents=[common], help="Search for cheating strategies")
    p.add_argument("--config", default=None, help="SearchConfig JSON file")
    p.add_argument("--restarts", type=_positive_int, default=None, help="Override the restart count")
    p.add_argument("--max-iters", type=_positive_int, default=None, help="Override the ascent length")
    p.add_argument("--csv", default=None, help="Write per-restart plot data to this CSV file")

    p = sub.add_parser("lambda-scan", parents=[common], help="Find Lambda members and test the angle bound")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--channel", choices=["bb84", "copy"], help="Built-in channel")
    source.add_argument("--instance", help="Instance JSON file supplying U")
    p.add_argument("--attempts", type=_nonnegative_int, default=4, help="Random minimisation starts")

    p = sub.add_parser("bound", help="Print 4 * 7^(2n + 2)")
    p.add_argument("n", type=_nonnegative_int, help="Dimension of W")

    return parser


def _emit(args, seed: int, config: Dict[str, Any], payload: Dict[str, Any]) -> None:
    envelope = ReportEnvelope(
        tool_version=get_settings().version,
        command=args.command,
        seed=seed,
        config=config,
        generated_at=utc_timestamp(),
        payload=payload,
    )
    text = dump_report(envelope, args.output)
    if args.output is None:
        print(text)
    else:
        logger.info(f"Report written to {args.output}")


def _config_data(path: Optional[str], **overrides) -> Dict[str, Any]:
    """Config file contents with the flags that were actually passed laid on top.

    A report's embedded ``config`` fed back through ``--config`` reproduces it.
    """
    data = read_json(path) if path else {}
    if not isinstance(data, dict):
        raise InputFormatError(str(path), "config file must hold a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return data


def _seed(args) -> int:
    return 0 if args.seed is None else args.seed


def cmd_check_hidden(args) -> int:
    instance = load_instance(read_json(args.instance))
    verdicts = check_all(instance, args.tol)
    hidden = verdicts["definition1"].is_hidden
    logger.info(f"{args.instance}: hidden={hidden}")
    config = {
        "instance": args.instance,
        "tol": args.tol if args.tol is not None else get_settings().verdict_tol,
        "w_dim": instance.shape.w_dim,
        "v1_dim": instance.shape.v1_dim,
        "v2_dim": instance.shape.v2_dim,
        "P": format_projector(instance.P),
    }
    payload = {"is_hidden": hidden, "verdicts": {k: v.model_dump(mode="json") for k, v in verdicts.items()}}
    _emit(args, _seed(args), config, payload)
    return EXIT_OK if hidden else EXIT_PROPERTY


def _adversary(name: str):
    """None for the honest prover, the built-in attack, or a strategy loaded from a file."""
    if name == "honest":
        return None
    if name == "bb84":
        return bb84_attack()
    return load_strategy(read_json(name))


def cmd_simulate(args) -> int:
    data = _config_data(args.config, seed=args.seed, runs=args.runs, adversary=args.strategy or args.adversary)
    config = parse_model(SimulationConfig, data)
    strategy = _adversary(config.adversary)

    rng = np.random.default_rng(config.seed)
    projectors = config.projectors()
    runs = []
    for _ in range(config.runs):
        P = projectors[int(rng.integers(len(projectors)))]
        z = 0 if rng.random() < config.z_prior else 1
        run_seed = int(rng.integers(2**32))
        if strategy is None:
            report = run_honest(config, P, z, run_seed)
        else:
            report = run_adversarial(config, strategy, P, z, run_seed)
        runs.append(report.model_dump(mode="json"))

    accepted = sum(r["verdict"] == "ACCEPT" for r in runs)
    logger.info(f"{accepted} of {len(runs)} runs accepted")
    _emit(args, config.seed, config.model_dump(mode="json"), {"accepted": accepted, "runs": runs})
    return EXIT_OK if accepted == len(runs) else EXIT_PROPERTY


def _success_given_z(strategy, P, z: int) -> float:
    """Probability that both decoders output z when the verifiers chose z."""
    dec = strategy.decoders_for(P)
    K = final_state(strategy, P, z)
    return float(np.vdot(K, dec.alice[z] @ K @ dec.bob[z].T).real)


def cmd_verify_attack(args) -> int:
    data = _config_data(args.config, basis_set=args.basis, seed=args.seed)
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise InputFormatError("seed", f"expected an integer, got {seed!r}")
    config = parse_model(ProtocolConfig, data)
    strategy = bb84_attack()
    assessment = assess_strategy(config, strategy)

    per_z = {
        format_projector(P): {str(z): _success_given_z(strategy, P, z) for z in (0, 1)}
        for P in config.projectors()
    }
    acceptance = {format_projector(P): acceptance_probability(config, strategy, P) for P in config.projectors()}
    timeline = run_adversarial(config, strategy, config.projectors()[0], 0, seed)

    worst = min(min(acceptance.values()), min(p for z in per_z.values() for p in z.values()))
    ok = assessment.is_perfect and worst >= 1 - ATTACK_TOL
    payload = {
        "assessment": assessment.model_dump(mode="json"),
        "acceptance": acceptance,
        "acceptance_per_z": per_z,
        "timeline": timeline.model_dump(mode="json"),
        "verified": ok,
    }
    resolved = config.model_dump(mode="json")
    resolved["seed"] = seed
    _emit(args, seed, resolved, payload)
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_search(args) -> int:
    data = _config_data(args.config, seed=args.seed, restarts=args.restarts, max_iters=args.max_iters)
    config = parse_model(SearchConfig, data)

    def progress(i: int, value: float) -> None:
        print(f"restart {i} value {value:.12f}", file=sys.stderr, flush=True)

    result = search_cheating(config, on_restart=progress)
    if args.csv:
        df = pd.DataFrame([t.model_dump() for t in result.per_restart_trace])
        df["best_so_far"] = df["value"].cummax()
        df.to_csv(args.csv, index=False)
        logger.info(f"Plot data written to {args.csv}")

    _emit(args, config.seed, config.model_dump(mode="json"), result.model_dump(mode="json"))
    return EXIT_OK if result.certified_perfect else EXIT_PROPERTY


def _lambda_source(args):
    """(U, shape, planted initial points, description) for the requested channel."""
    if args.channel == "bb84":
        strategy = bb84_attack()
        U, shape = attack_channel(strategy)
        planted = []
        for P, U_P in strategy.U_family:
            dA, dB, _, _ = strategy.dims
            planted.append((P.bloch, (U_P @ strategy.psi.reshape(dA, dB)).reshape(-1)))
        return U, shape, planted, "bb84"
    if args.channel == "copy":
        U = copy_isometry(Z_PLUS)
        one = np.ones(1, dtype=complex)
        return U, ChannelShape(1, 2, 2), [(Z_PLUS.bloch, one), (-Z_PLUS.bloch, one)], "copy"
    instance = load_instance(read_json(args.instance))
    return instance.U, instance.shape, [(instance.P.bloch, instance.w)], args.instance


def cmd_lambda_scan(args) -> int:
    U, shape, planted, source = _lambda_source(args)
    pairs = find_lambda_pairs(U, shape, args.attempts, _seed(args), initial_points=planted)
    scan = lemma1_scan(pairs)
    census = distinct_basis_census(pairs)
    ceiling = component_bound(shape.w_dim)
    config = {
        "source": source,
        "attempts": args.attempts,
        "w_dim": shape.w_dim,
        "v1_dim": shape.v1_dim,
        "v2_dim": shape.v2_dim,
    }
    payload = {
        "pairs": [p.to_record().model_dump(mode="json") for p in pairs],
        "scan": scan.model_dump(mode="json"),
        "census": census,
        "component_bound": ceiling,
    }
    _emit(args, _seed(args), config, payload)
    return EXIT_OK if scan.violations == 0 and census <= ceiling else EXIT_PROPERTY


def cmd_bound(args) -> int:
    print(component_bound(args.n))
    return EXIT_OK


COMMANDS = {
    "check-hidden": cmd_check_hidden,
    "simulate": cmd_simulate,
    "verify-attack": cmd_verify_attack,
    "search": cmd_search,
    "lambda-scan": cmd_lambda_scan,
    "bound": cmd_bound,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = setup_arg_parser()
    args = parser.parse_args(argv)
    verbose = getattr(args, "verbose", False)
    try:
        setup_logging(level="DEBUG" if verbose else None, to_file=getattr(args, "log_file", False) or None)
        return COMMANDS[args.command](args)
    except (QpvError, ValidationError, json.JSONDecodeError, OSError) as e:
        if verbose:
            logger.exception(f"{args.command} failed")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
