"""Command-line interface for synthesis runs and benchmarks.

Exit codes: 0 on success, 2 on configuration errors, 3 when at least one
trial in a batch failed (the batch artifact is still written).
"""

import argparse
import json
import sys

from gatesynth.bch import adjudicate_gbchd
from gatesynth.magnus import ProblemSpec
from gatesynth.numerics import action_integral
from gatesynth.workbench.bench import (
    BenchConfig,
    build_bench_generator,
    fidelity_csv,
    make_spec,
    records_to_json,
    run_fidelity_bench,
    run_timing_bench,
    run_trial,
    timing_csv,
)
from gatesynth.workbench.problemfile import (
    ProblemFileError,
    load_problem,
    matrix_to_json,
)
from gatesynth.workbench.targets import TargetGenerationError, gen_target

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRIAL = 3


def _add_common(sp):
    sp.add_argument("--system", choices=("ibmq3", "ising"), default="ibmq3")
    sp.add_argument("--qubits", type=int, default=2)
    sp.add_argument("--coupling", type=float, default=1.0)
    sp.add_argument("--horizon", type=float, default=0.5)
    sp.add_argument("--control-dim", type=int, default=3)
    sp.add_argument("--order", type=int, default=None)
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--relax-order", type=int, default=None)
    sp.add_argument("--ball", type=float, default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gatesynth",
        description="Symbolic gate synthesis with certified global optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="solve one continuous-control problem")
    _add_common(sp)
    sp.add_argument("--problem", default=None, help="JSON problem file")
    sp.add_argument("--trial", type=int, default=0, help="target stream index")

    sp = sub.add_parser("synth-pw", help="solve one piecewise-constant problem")
    _add_common(sp)
    sp.add_argument("--problem", default=None, help="JSON problem file")
    sp.add_argument("--trial", type=int, default=0, help="target stream index")

    sp = sub.add_parser("bench-fidelity", help="planted-target recovery batch")
    _add_common(sp)
    sp.add_argument("--control", choices=("poly", "piecewise"), default="poly")

    sp = sub.add_parser("bench-timing", help="build/solve timing over Ising sizes")
    _add_common(sp)
    sp.add_argument("--min-qubits", type=int, default=2)
    sp.add_argument("--max-qubits", type=int, default=6)

    sp = sub.add_parser("target-gen", help="emit planted targets as JSON")
    _add_common(sp)
    sp.add_argument("--problem", default=None, help="JSON problem file")

    sp = sub.add_parser("gbchd-report", help="compare the two product-log expansions")
    _add_common(sp)
    sp.add_argument("--samples", type=int, default=8)
    sp.set_defaults(control_dim=2)

    return parser


def _resolve_order(args, piecewise: bool) -> int:
    if args.order is not None:
        return args.order
    return 4 if piecewise else 3


def _resolve_trials(args, piecewise: bool) -> int:
    if args.trials is not None:
        return args.trials
    return 20 if piecewise else 50


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _progress_printer(quiet: bool):
    if quiet:
        return None

    def show(rec):
        print(f"  {rec!r}"[:200], file=sys.stderr)

    return show


def _spec_from_args(args, piecewise: bool) -> ProblemSpec:
    problem = getattr(args, "problem", None)
    if problem:
        spec = load_problem(problem)
        if piecewise and not spec.is_piecewise():
            raise ProblemFileError(
                "synth-pw requires a piecewise control model in the problem file"
            )
        return spec
    cfg = BenchConfig(
        system=args.system,
        qubits=args.qubits,
        coupling=args.coupling,
        control="piecewise" if piecewise else "poly",
        control_dim=args.control_dim,
        order=_resolve_order(args, piecewise),
        horizon=args.horizon,
        trials=1,
        base_seed=args.seed,
    )
    return make_spec(cfg)


def _handle_synth(args, piecewise: bool) -> int:
    spec = _spec_from_args(args, piecewise)
    order = _resolve_order(args, piecewise or spec.is_piecewise())
    cfg = BenchConfig(
        system=args.system,
        control="piecewise" if spec.is_piecewise() else "poly",
        control_dim=spec.m,
        order=order,
        horizon=spec.horizon,
        trials=1,
        base_seed=args.seed,
        relax_order=args.relax_order,
        radius=args.ball,
    )
    generator = build_bench_generator(spec, order)
    record = run_trial(spec, generator, cfg, args.trial)
    payload = records_to_json([record])[0]
    payload["system"] = spec.label
    payload["horizon"] = spec.horizon
    payload["order"] = order
    _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    return EXIT_OK if record.ok else EXIT_TRIAL


def _handle_bench_fidelity(args) -> int:
    piecewise = args.control == "piecewise"
    cfg = BenchConfig(
        system=args.system,
        qubits=args.qubits,
        coupling=args.coupling,
        control=args.control,
        control_dim=args.control_dim,
        order=_resolve_order(args, piecewise),
        horizon=args.horizon,
        trials=_resolve_trials(args, piecewise),
        base_seed=args.seed,
        relax_order=args.relax_order,
        radius=args.ball,
    )
    records, summary = run_fidelity_bench(cfg, progress=_progress_printer(args.quiet))
    if args.format == "json":
        body = json.dumps(
            {"records": records_to_json(records), "summary": summary},
            indent=2, sort_keys=True,
        )
    else:
        body = fidelity_csv(records)
    _emit(body, args.out)
    stream = sys.stdout if args.out else sys.stderr
    print(json.dumps(summary, sort_keys=True), file=stream)
    return EXIT_TRIAL if summary["failed"] else EXIT_OK


def _handle_bench_timing(args) -> int:
    cfg = BenchConfig(
        system="ising",
        qubits=args.min_qubits,
        coupling=args.coupling,
        control_dim=args.control_dim,
        order=_resolve_order(args, False),
        horizon=args.horizon,
        trials=args.trials if args.trials is not None else 5,
        base_seed=args.seed,
        relax_order=args.relax_order,
        radius=args.ball,
    )
    records, summary = run_timing_bench(
        cfg, n_min=args.min_qubits, n_max=args.max_qubits,
        progress=_progress_printer(args.quiet),
    )
    if args.format == "json":
        body = json.dumps(
            {"records": records_to_json(records), "summary": summary},
            indent=2, sort_keys=True,
        )
    else:
        body = timing_csv(records)
    _emit(body, args.out)
    stream = sys.stdout if args.out else sys.stderr
    print(json.dumps(summary, sort_keys=True), file=stream)
    return EXIT_TRIAL if summary["failed"] else EXIT_OK


def _handle_target_gen(args) -> int:
    spec = _spec_from_args(args, piecewise=False)
    count = args.trials if args.trials is not None else 1
    if count < 1:
        raise ValueError("trial count must be at least 1")
    targets = []
    for trial in range(count):
        t = gen_target(spec, args.seed, trial)
        targets.append({
            "trial": trial,
            "seed": args.seed,
            "x_star": [float(v) for v in t.x_star],
            "action": action_integral(spec, t.x_star),
            "unitary": matrix_to_json(t.unitary),
            "generator": matrix_to_json(t.generator),
        })
    _emit(json.dumps(targets, indent=2, sort_keys=True), args.out)
    return EXIT_OK


def _handle_gbchd_report(args) -> int:
    order = args.order if args.order is not None else 3
    pair_cfg = BenchConfig(
        system=args.system,
        qubits=args.qubits,
        coupling=args.coupling,
        control="piecewise",
        control_dim=args.control_dim,
        order=order,
        horizon=args.horizon,
        trials=1,
        base_seed=args.seed,
    )
    spec = make_spec(pair_cfg)
    report = adjudicate_gbchd(spec, n=order, samples=args.samples)
    _emit(json.dumps(report, indent=2, sort_keys=True), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            return _handle_synth(args, piecewise=False)
        if args.command == "synth-pw":
            return _handle_synth(args, piecewise=True)
        if args.command == "bench-fidelity":
            return _handle_bench_fidelity(args)
        if args.command == "bench-timing":
            return _handle_bench_timing(args)
        if args.command == "target-gen":
            return _handle_target_gen(args)
        if args.command == "gbchd-report":
            return _handle_gbchd_report(args)
        raise ValueError(f"unknown command {args.command!r}")
    except (ProblemFileError, TargetGenerationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
