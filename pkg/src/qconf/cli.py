"""Command-line front end (``qconf``).

Exit codes: 0 success, 1 validation or protocol failure, 2 usage error.
Tables are tab-separated with a header row; floats are printed with
``repr`` so they parse back exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import adversary as adv
from .codebook import PRESETS, build_codebook, preset_descriptor, validate_orthogonality
from .errors import CodebookError, ConfigError, InvalidOperandError
from .metrics import EfficiencyInput, as_percent, efficiency_p1, efficiency_p2
from .protocol import ConferenceConfig, decodes_correct, load_config, run_conference

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _row(*cells) -> str:
    return "\t".join(repr(c) if isinstance(c, float) else str(c) for c in cells)


# -- subcommands -------------------------------------------------------------


def cmd_run(args) -> int:
    try:
        spec = load_config(args.config, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = spec.config
    transcript = run_conference(cfg, spec.adversary, spec.insider)
    text = transcript.to_jsonl()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)

    for party, msgs in transcript.decoded.items():
        print(_row("decoded", party, json.dumps(msgs, sort_keys=True)))
    for e in transcript.of_type("abort"):
        print(_row("abort", f"hop {e.payload['hop']}", e.payload["reason"], e.payload["error_rate"]))
    for e in transcript.integrity_failures:
        print(_row("integrity", e.actor, e.payload["reason"]))
    for party in transcript.cheaters:
        print(_row("cheater", party))
    ok = not transcript.aborted and decodes_correct(cfg, transcript) and not transcript.cheaters
    print(_row("status", "ok" if ok else "failed"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_validate(args) -> int:
    target = args.target
    try:
        if os.path.exists(target):
            with open(target) as fh:
                desc = json.load(fh)
        elif target in PRESETS:
            desc = preset_descriptor(target)
        else:
            raise UsageError(f"{target!r} is neither a file nor a preset")
    except (OSError, json.JSONDecodeError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(desc, dict) and "codebook" in desc:
        # a run config: validate the codebook it embeds
        desc = {"protocol": desc.get("protocol", 2), **desc["codebook"]}
    try:
        cb = build_codebook(desc, check_states=False)
    except CodebookError as exc:
        print(f"FAIL: {exc}")
        return EXIT_FAIL
    report = validate_orthogonality(cb)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_curve(args) -> int:
    if not (0.0 <= args.fmin < args.fmax <= 1.0) or args.steps < 1:
        print("error: need 0 <= fmin < fmax <= 1 and steps >= 1", file=sys.stderr)
        return EXIT_USAGE
    print(_row("f", "e", "I_AE", "I_AB"))
    for i in range(args.steps + 1):
        f = args.fmin + (args.fmax - args.fmin) * i / args.steps
        r = adv.intercept_resend_analytics(f)
        print(_row(f, r.analytic_error_rate, r.i_ae, r.i_ab))
    print(_row("threshold", adv.solve_threshold()))
    return EXIT_OK


def cmd_efficiency(args) -> int:
    try:
        inp = EfficiencyInput(args.N, args.k, args.n, args.m)
    except InvalidOperandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    eta1, eta2 = efficiency_p1(inp), efficiency_p2(inp)
    eta = eta1 if args.protocol == 1 else eta2
    print(_row("N", "k", "n", "m", "protocol", "eta", "percent", "eta1", "eta2", "eta1_percent", "eta2_percent"))
    print(_row(
        inp.N, inp.k, inp.n, inp.m, args.protocol, eta, as_percent(eta),
        eta1, eta2, as_percent(eta1), as_percent(eta2),
    ))
    return EXIT_OK


SCENARIOS = {
    "intercept-resend": 1.0,
    "entangle-measure": 0.5,
    "escape": 5,
    "dishonest-announcer": None,
}


def _parse_scenario(text: str):
    name, _, param = text.partition(":")
    if name not in SCENARIOS:
        raise UsageError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}")
    if not param:
        return name, SCENARIOS[name]
    if SCENARIOS[name] is None:
        raise UsageError(f"scenario {name} takes no parameter")
    try:
        return name, type(SCENARIOS[name])(param)
    except ValueError:
        raise UsageError(f"bad parameter {param!r} for {name}") from None


def _stat_rows(observed: float, expected: float, n: int) -> tuple[float, bool]:
    sigma = math.sqrt(expected * (1 - expected) / n) if n else 0.0
    return sigma, abs(observed - expected) <= 3 * sigma + 1e-12


def cmd_attack(args) -> int:
    try:
        name, param = _parse_scenario(args.scenario)
        if name == "intercept-resend":
            spec = adv.InterceptorSpec(adv.INTERCEPT_RESEND, fraction=param)
        elif name == "entangle-measure":
            spec = adv.InterceptorSpec(adv.ENTANGLE_MEASURE, beta_sq=param)
        elif name == "escape" and param < 1:
            raise UsageError("escape needs m >= 1")
    except (UsageError, InvalidOperandError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    print(_row("quantity", "value"))
    print(_row("scenario", name))
    print(_row("trials", args.trials))
    if name in ("intercept-resend", "entangle-measure"):
        report = adv.simulate_decoy_attack(spec, args.trials, seed=args.seed)
        sigma, within = _stat_rows(report.observed_error_rate or 0.0, report.analytic_error_rate, report.comparisons)
        print(_row("parameter", float(param)))
        print(_row("comparisons", report.comparisons))
        print(_row("errors", report.errors))
        print(_row("observed_error_rate", report.observed_error_rate))
        print(_row("analytic_error_rate", report.analytic_error_rate))
        print(_row("sigma", sigma))
        print(_row("within_3sigma", within))
        if name == "intercept-resend":
            print(_row("I_AE", report.i_ae))
            print(_row("I_AB", report.i_ab))
        return EXIT_OK
    if name == "escape":
        observed = adv.simulate_escape(param, args.trials, seed=args.seed)
        expected = adv.escape_probability(param)
        sigma, within = _stat_rows(observed, expected, args.trials)
        print(_row("m", param))
        print(_row("observed_escape", observed))
        print(_row("analytic_escape", expected))
        print(_row("sigma", sigma))
        print(_row("within_3sigma", within))
        return EXIT_OK

    flagged = 0
    cb = build_codebook("table2-3p-1b")
    for t in range(args.trials):
        cfg = ConferenceConfig(
            cb, ["1", "1", "1"], decoys_per_hop=16, commitment_enabled=True, seed=args.seed + t
        )
        transcript = run_conference(cfg, insider=adv.DishonestAnnouncer())
        flagged += cb.receiver.id in transcript.cheaters
    print(_row("flagged", flagged))
    print(_row("flag_rate", flagged / args.trials))
    return EXIT_OK if flagged == args.trials else EXIT_FAIL


def cmd_presets(args) -> int:
    print(_row("name", "parties", "bits", "state", "travel"))
    for name in PRESETS:
        cb = build_codebook(name, check_states=False)
        bits = ",".join(str(b) for b in cb.bits_per_party)
        travel = ",".join(str(t) for t in cb.travel)
        print(_row(name, len(cb.parties), bits, cb.state, travel))
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qconf", description="Quantum conference protocol simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a conference from a JSON config", allow_abbrev=False)
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=_u64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a preset or codebook file")
    p.add_argument("target")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("curve", help="intercept-resend information curves", allow_abbrev=False)
    p.add_argument("--fmin", type=float, default=0.0)
    p.add_argument("--fmax", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=20)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("efficiency", help="qubit efficiency of both protocols", allow_abbrev=False)
    p.add_argument("--protocol", type=int, choices=(1, 2), required=True)
    p.add_argument("--N", type=_positive, required=True)
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--m", type=_positive, required=True)
    p.set_defaults(func=cmd_efficiency)

    p = sub.add_parser("attack", help="Monte-Carlo attack scenarios", allow_abbrev=False)
    p.add_argument("--scenario", required=True, help=f"one of {', '.join(SCENARIOS)}, optionally name:param")
    p.add_argument("--trials", type=_positive, required=True)
    p.add_argument("--seed", type=_u64, default=0)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("presets", help="list built-in codebooks")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
