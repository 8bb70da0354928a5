"""Command line entry point.

Usage:
  rchtools simulate free_rigid_body
  rchtools verify acceptance
  rchtools verify path/to/scenario.json
  rchtools equivalence rotor_equivalence
  rchtools port rotor_gain_port
  rchtools list

Scenario arguments are file paths or names of bundled scenarios.
Exit codes: 0 success, 2 parse/validation failure, 3 numerical failure,
4 check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import systems as S
from .errors import NonFinite, ParseError, RCHError, ValidationError
from .scenario import RunSummary, ScenarioConfig, parse_scenario, run, run_equivalence, write_summary
from .suite import SUITES, run_suite
from .verify import CheckReport, check_port_balance, check_port_condition, rotor_chart, trivial_port

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_CHECK = 4


def bundled_scenarios() -> dict[str, str]:
    root = resources.files("rchtools") / "scenarios"
    return {p.name[: -len(".json")]: p.read_text(encoding="utf-8") for p in root.iterdir() if p.name.endswith(".json")}


def load(arg: str) -> ScenarioConfig:
    path = Path(arg)
    if path.exists():
        return parse_scenario(path.read_text(encoding="utf-8"))
    bundled = bundled_scenarios()
    if arg in bundled:
        return parse_scenario(bundled[arg])
    raise FileNotFoundError(f"no scenario file or bundled scenario named {arg!r}")


def _emit(args, text: str) -> None:
    if not args.quiet:
        print(text)


def _report_lines(args, reports) -> None:
    for r in reports:
        _emit(args, r.line())


def _finish(args, summary: RunSummary) -> int:
    for name, stats in summary.diagnostics.items():
        _emit(args, f"{name}: min={stats['min']:.6g} max={stats['max']:.6g} drift={stats['drift']:.3e}")
    _report_lines(args, summary.checks)
    _emit(args, f"wall time {summary.wall_time:.3f} s")
    return EXIT_OK if summary.passed else EXIT_CHECK


def cmd_simulate(args) -> int:
    config = load(args.scenario)
    return _finish(args, run(config, args.out_dir, seed=args.seed))


def cmd_verify(args) -> int:
    if args.target in SUITES and not Path(args.target).exists():
        records = []
        for criterion, report in run_suite(args.target, args.seed):
            records.append({"criterion": criterion, **report.to_dict()})
            _emit(args, report.line())
        out = Path(args.out_dir) / f"verify_{args.target}.json"
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
        failed = sum(not r["passed"] for r in records)
        _emit(args, f"{len(records) - failed}/{len(records)} checks passed")
        return EXIT_CHECK if failed else EXIT_OK
    config = load(args.target)
    return _finish(args, run(config, args.out_dir, with_checks=True, seed=args.seed))


def cmd_equivalence(args) -> int:
    config = load(args.scenario)
    if config.equivalence is None:
        raise ValidationError("equivalence", "scenario has no equivalence block")
    report = run_equivalence(config.equivalence, args.seed)
    summary = RunSummary(echo=config.to_dict(), wall_time=0.0, checks=[report])
    write_summary(Path(args.out_dir) / config.report_name(), summary)
    _report_lines(args, [report])
    return EXIT_OK if report.passed else EXIT_CHECK


def _port_checks(config: ScenarioConfig, seed):
    def balance(sys, traj) -> CheckReport:
        return check_port_balance(traj, sys)

    makers = [balance]
    if config.variant in (S.Variant.RIGID_BODY_ROTORS, S.Variant.HEAVY_TOP_ROTORS):
        lp = 3 if config.variant is S.Variant.RIGID_BODY_ROTORS else 6

        def condition(sys, traj) -> CheckReport:
            chart = rotor_chart(sys, traj.states[0, :lp])
            return check_port_condition(trivial_port(chart), chart, 1000, 1e-13, seed)

        makers.append(condition)
    return makers


def cmd_port(args) -> int:
    config = load(args.scenario)
    return _finish(args, run(config, args.out_dir, seed=args.seed, extra_checks=_port_checks(config, args.seed)))


def cmd_list(args) -> int:
    for name, text in sorted(bundled_scenarios().items()):
        cfg = parse_scenario(text)
        extra = f" [{cfg.control.kind}]" if cfg.control else ""
        print(f"{name}: {cfg.system}{extra}, {cfg.integrator.method} h={cfg.integrator.step:g} T={cfg.integrator.t_final:g}")
    print("suites: " + ", ".join(SUITES))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rchtools",
        description="Simulate and verify controlled Hamiltonian systems with symmetry.",
    )
    parser.add_argument("--out-dir", default=".", help="directory for CSV and JSON outputs (default: .)")
    parser.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="sampling seed (default 0x5EED)")
    parser.add_argument("--quiet", action="store_true", help="suppress console output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a scenario and write CSV + summary")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run a built-in suite or a scenario's checks")
    p.add_argument("target", help=f"suite name ({', '.join(SUITES)}) or scenario")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("equivalence", help="certify a scenario's closed-loop pairing")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_equivalence)

    p = sub.add_parser("port", help="energy balance and port condition along a scenario run")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_port)

    p = sub.add_parser("list", help="list bundled scenarios and suites")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonFinite as exc:
        print(f"numerical failure at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (RCHError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
