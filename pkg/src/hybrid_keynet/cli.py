"""Command-line front end. Reports are JSON on stdout (or --output), diagnostics on stderr.

Exit codes: 0 success, 1 domain failure, 2 I/O or usage error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import report
from .access_analysis import (
    ElementBoundExceeded,
    LeafBoundExceeded,
    break_probability,
    check_leaves,
    derive_access_formula,
    minimal_access_structures,
)
from .protocols import ProtocolAbort, run_protocol
from .rate_models import link_rates
from .scenario import Scenario, ScenarioError, parse_scenario
from .switch_policy import SwitchConfig, parse_events, replay
from .topology import PathError, TopologyError, parse_topology, validate

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


class DomainFailure(Exception):
    """Carries a partially filled report out of a failed command."""

    def __init__(self, message: str, rep: dict | None = None):
        super().__init__(message)
        self.report = rep


def parse_sweep(text: str) -> tuple[float, float, float]:
    m = re.fullmatch(r"\s*([-+0-9.eE]+)\.\.([-+0-9.eE]+):([-+0-9.eE]+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected <from>..<to>:<step>, got {text!r}")
    try:
        start, stop, step = (float(g) for g in m.groups())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number in sweep {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("sweep needs step > 0 and to >= from")
    return start, stop, step


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="override the scenario seed")
    common.add_argument("--output", type=Path, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--reveal-secrets", action="store_true", help="include keys and transcript (desk tests only)")
    common.add_argument("--sweep", type=parse_sweep, metavar="FROM..TO:STEP", help="rate-vs-distance table")

    parser = argparse.ArgumentParser(prog="hybrid-keynet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("validate", parents=[common], help="check a topology")
    p.add_argument("topology", type=Path)
    for name, text in (("rate", "link and protocol key rates"), ("simulate", "run the configured protocol"),
                       ("analyze", "minimal access structures and break probability")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("topology", type=Path)
        p.add_argument("scenario", type=Path)
    p = sub.add_parser("switch", parents=[common], help="replay threat events through the switch policy")
    p.add_argument("topology", type=Path)
    p.add_argument("events", type=Path)
    p.add_argument("config", type=Path, nargs="?")
    return parser


def _load_topology(data: bytes):
    topology = parse_topology(data.decode("utf-8"))
    problems = validate(topology)
    if problems:
        raise DomainFailure("invalid topology: " + "; ".join(problems))
    return topology


def cmd_validate(args, inputs: dict[str, bytes]) -> dict:
    rep = report.envelope("validate", inputs)
    try:
        problems = validate(parse_topology(inputs["topology"].decode("utf-8")))
    except TopologyError as exc:
        problems = [str(exc)]
    rep["violations"] = problems
    rep["valid"] = not problems
    for line in problems:
        print(line, file=sys.stderr)
    if problems:
        raise DomainFailure(f"{len(problems)} violation(s)", rep)
    return rep


def _scenario(inputs: dict[str, bytes]) -> Scenario:
    return parse_scenario(inputs["scenario"].decode("utf-8"))


def cmd_rate(args, inputs: dict[str, bytes]):
    topology = _load_topology(inputs["topology"])
    scenario = _scenario(inputs)
    if args.sweep and args.format == "csv":
        return report.sweep_csv(report.sweep_rows(scenario, *args.sweep))
    rep = report.envelope("rate", inputs)
    rep["rates"] = report.rates_section(topology, scenario)
    if args.sweep:
        rep["rates"]["sweep"] = report.sweep_rows(scenario, *args.sweep)
    return rep


def cmd_simulate(args, inputs: dict[str, bytes]) -> dict:
    topology = _load_topology(inputs["topology"])
    scenario = _scenario(inputs)
    rep = report.envelope("simulate", inputs)
    if scenario.protocol is None:
        raise DomainFailure("scenario has no protocol to run", rep)
    seed = args.seed if args.seed is not None else scenario.seed
    if seed is None:
        raise DomainFailure("a seed is required to run a protocol (scenario 'seed' or --seed)", rep)
    try:
        result = run_protocol(topology, scenario.protocol, scenario.length_bits, seed,
                              rates=link_rates(topology, scenario.rates))
    except ProtocolAbort as exc:
        rep["session"] = {"status": "aborted", "reason": exc.reason, "link_id": exc.link_id,
                          "channel_id": exc.channel_id, "seed": seed}
        raise DomainFailure(f"protocol aborted: {exc.reason}", rep) from None
    rep["session"] = report.session_section(result, seed, args.reveal_secrets)
    rep["warnings"] = list(result.warnings)
    return rep


def cmd_analyze(args, inputs: dict[str, bytes]) -> dict:
    topology = _load_topology(inputs["topology"])
    scenario = _scenario(inputs)
    rep = report.envelope("analyze", inputs)
    if scenario.protocol is None:
        raise DomainFailure("scenario has no protocol to analyze", rep)
    formula = derive_access_formula(topology, scenario.protocol)
    missing = check_leaves(formula, topology)
    if missing:
        raise DomainFailure(f"formula names unknown elements: {missing}", rep)
    if not scenario.access_structures:
        rep["access"] = {"formula": str(formula)}
        return rep
    try:
        structures = minimal_access_structures(formula)
        analysis = break_probability(structures, topology) if scenario.break_probability else None
    except (LeafBoundExceeded, ElementBoundExceeded) as exc:
        rep["access"] = {"formula": str(formula), "error": str(exc)}
        raise DomainFailure(str(exc), rep) from None
    rep["access"] = report.access_section(formula, structures, analysis)
    return rep


def cmd_switch(args, inputs: dict[str, bytes]) -> dict:
    topology = _load_topology(inputs["topology"])
    config = SwitchConfig.from_dict(json.loads(inputs["config"].decode("utf-8")) if "config" in inputs else None)
    rep = report.envelope("switch", inputs)
    try:
        events = parse_events(inputs["events"].decode("utf-8"))
        state = replay(events, topology, config)
    except ValueError as exc:
        rep["switch"] = {"error": str(exc)}
        raise DomainFailure(str(exc), rep) from None
    rep["switch"] = report.switch_section(state, config)
    rep["warnings"] = [f"unknown threat target {t!r}" for t in state.unknown_targets]
    return rep


COMMANDS = {"validate": cmd_validate, "rate": cmd_rate, "simulate": cmd_simulate,
            "analyze": cmd_analyze, "switch": cmd_switch}
INPUTS = {"validate": ("topology",), "rate": ("topology", "scenario"), "simulate": ("topology", "scenario"),
          "analyze": ("topology", "scenario"), "switch": ("topology", "events", "config")}


def _emit(payload, args) -> None:
    text = payload if isinstance(payload, str) else report.dumps(payload)
    if args.output:
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_IO if exc.code else EXIT_OK
    if args.format == "csv" and not (args.command == "rate" and args.sweep):
        print("--format csv is only available for 'rate --sweep'", file=sys.stderr)
        return EXIT_IO
    try:
        inputs = {name: getattr(args, name).read_bytes()
                  for name in INPUTS[args.command] if getattr(args, name) is not None}
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        payload = COMMANDS[args.command](args, inputs)
        code = EXIT_OK
    except DomainFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        payload, code = exc.report, EXIT_DOMAIN
    except UnicodeDecodeError as exc:
        print(f"error: input is not UTF-8: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TopologyError, ScenarioError, PathError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        payload, code = None, EXIT_DOMAIN
    if payload is not None:
        try:
            _emit(payload, args)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    return code


def run() -> None:
    sys.exit(main())
