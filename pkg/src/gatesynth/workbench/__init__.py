"""Problem ingestion, target generation, benchmarks, and the CLI."""

from gatesynth.workbench.bench import (
    BenchConfig,
    TimingRecord,
    TrialRecord,
    build_bench_generator,
    fidelity_csv,
    make_spec,
    run_fidelity_bench,
    run_timing_bench,
    run_trial,
    summarize_fidelity,
    summarize_timing,
    timing_csv,
)
from gatesynth.workbench.problemfile import (
    ProblemFileError,
    load_problem,
    matrix_to_json,
    parse_problem,
)
from gatesynth.workbench.targets import (
    PlantedTarget,
    TargetGenerationError,
    gen_target,
    trial_rng,
)

__all__ = [
    "BenchConfig",
    "PlantedTarget",
    "ProblemFileError",
    "TargetGenerationError",
    "TimingRecord",
    "TrialRecord",
    "build_bench_generator",
    "fidelity_csv",
    "gen_target",
    "load_problem",
    "make_spec",
    "matrix_to_json",
    "parse_problem",
    "run_fidelity_bench",
    "run_timing_bench",
    "run_trial",
    "summarize_fidelity",
    "summarize_timing",
    "timing_csv",
    "trial_rng",
]
