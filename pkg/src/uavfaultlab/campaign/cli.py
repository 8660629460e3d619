"""Command-line interface.

    uavfaultlab run scenario.yaml --out runs/demo [--seed N] [--log-rate HZ]
    uavfaultlab campaign matrix.yaml base.yaml --out campaign/ [--parallel N]
    uavfaultlab analyze telemetry.csv [...] [--rules rules.yaml] --out reports/
    uavfaultlab report campaign/index.json [--rules rules.yaml] [--plots]
"""

import argparse
import json
import os
import sys

from ..damage import RuleBase, RuleThresholds, classify, emit_report, extract_features
from ..errors import UavFaultLabError
from .runner import load_matrix, run_campaign
from .scenario import load_scenario
from .simloop import run_simulation
from .telemetry import read_telemetry


def build_parser():
    parser = argparse.ArgumentParser(
        prog="uavfaultlab",
        description="Fixed-wing UAV fault-injection laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--log-rate", type=float, default=None, help="Hz")
    p_run.add_argument("--bypass-faults", action="store_true",
                       help="skip the fault layer entirely")

    p_camp = sub.add_parser("campaign", help="run a fault-matrix campaign")
    p_camp.add_argument("matrix")
    p_camp.add_argument("base_scenario")
    p_camp.add_argument("--out", required=True)
    p_camp.add_argument("--parallel", type=int, default=1, metavar="N")

    p_an = sub.add_parser("analyze", help="classify telemetry files")
    p_an.add_argument("telemetry", nargs="+")
    p_an.add_argument("--rules", default=None, help="rule-threshold YAML")
    p_an.add_argument("--out", default=None, help="report directory")
    p_an.add_argument("--window", type=float, default=5.0)
    p_an.add_argument("--stride", type=float, default=2.5)

    p_rep = sub.add_parser("report", help="analyze + report a whole campaign")
    p_rep.add_argument("index")
    p_rep.add_argument("--rules", default=None)
    p_rep.add_argument("--out", default=None)
    p_rep.add_argument("--plots", action="store_true")
    return parser


def _rules(path):
    return RuleBase(RuleThresholds.load(path)) if path else RuleBase()


def cmd_run(args):
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario.seed = args.seed
    if args.log_rate is not None:
        scenario.log_hz = args.log_rate
    result = run_simulation(scenario, bypass_fault_layer=args.bypass_faults)
    out = args.out or os.path.join("runs", scenario.name)
    result.write(out)
    print(f"{scenario.name}: {result.termination} at t={result.t_final:.2f} s "
          f"-> {out}")
    return 0


def cmd_campaign(args):
    matrix = load_matrix(args.matrix)
    base = load_scenario(args.base_scenario)
    total = matrix.run_count()
    done = [0]

    def progress(run_id, termination, t_final):
        done[0] += 1
        print(f"[{done[0]:3d}/{total}] {run_id}: {termination} "
              f"(t={t_final:.1f} s)")

    run_campaign(matrix, base, args.out, parallel=args.parallel,
                 progress=progress)
    print(f"index written to {os.path.join(args.out, 'index.json')}")
    return 0


def cmd_analyze(args):
    rules = _rules(args.rules)
    reports = {}
    for path in args.telemetry:
        df = read_telemetry(path)
        features = extract_features(df, window=args.window, stride=args.stride)
        report = classify(features, rules, telemetry=df)
        run_id = os.path.basename(os.path.dirname(path)) or \
            os.path.splitext(os.path.basename(path))[0]
        reports[run_id] = report
        print(f"{run_id}: location={report.location} mode={report.mode} "
              f"mission={report.mission_impact} platform={report.platform_damage}")
    if args.out:
        emit_report(reports, {"runs": {}}, args.out)
        print(f"reports written to {args.out}")
    return 0


def cmd_report(args):
    with open(args.index) as fh:
        index = json.load(fh)
    base = os.path.dirname(os.path.abspath(args.index))
    rules = _rules(args.rules)
    reports = {}
    frames = {}
    for run_id, meta in sorted(index["runs"].items()):
        df = read_telemetry(os.path.join(base, meta["telemetry"]))
        features = extract_features(df)
        reports[run_id] = classify(features, rules, telemetry=df)
        frames[run_id] = df
    out = args.out or os.path.join(base, "reports")
    campaign = emit_report(reports, index, out, plots=args.plots,
                           telemetry_loader=lambda rid: frames[rid])
    if "location_accuracy" in campaign:
        print(f"location accuracy: {campaign['location_accuracy']:.3f} "
              f"over {campaign['n_runs']} runs")
    print(f"reports written to {out}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "campaign": cmd_campaign,
                "analyze": cmd_analyze, "report": cmd_report}
    try:
        return handlers[args.command](args)
    except UavFaultLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
