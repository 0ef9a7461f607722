import argparse
import sys

from timeloc.config import EXPERIMENTS, ExperimentConfig, resolve_config
from timeloc.context import RunContext
from timeloc.errors import ConfigurationError, TimelocException, UnknownExperiment
from timeloc.manifest_manager import ManifestManager
from timeloc.pipelines import run_experiment
from timeloc.pipelines.sweep import run_sweep

# verb -> experiments it may run; the first one is used when nothing else names an experiment
VERB_EXPERIMENTS: dict[str, tuple[str, ...]] = {
    "gen-disorder": ("gen-disorder",),
    "eff-spectrum": ("fig1", "custom"),
    "loclength": ("born-vs-tm",),
    "lattice": ("fig2", "lattice-sweep"),
    "classical": ("sos",),
    "floquet": ("levels", "eigenstate-compare"),
    "run": EXPERIMENTS,
    "sweep": EXPERIMENTS,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", help="Master seed of every random stream", type=int, default=None, dest="seed")
    common.add_argument("--threads", help="Worker processes for ensembles and sweeps", type=int, default=1, dest="threads")
    common.add_argument("--config", help="YAML config file", type=str, default=None, dest="config")
    common.add_argument("--set", help="Override a config value, e.g. --set physics.V=10 (repeatable)", action="append", default=[], dest="overrides")  # fmt: skip
    common.add_argument("--experiment", help="Named pipeline", type=str, default=None, dest="experiment", choices=EXPERIMENTS)
    common.add_argument("--output-dir", help="Run directory (default under $TIMELOC_OUTPUT_ROOT)", type=str, default=None, dest="output_dir")
    common.add_argument("--quiet", help="Silence progress output", action="store_true", default=False, dest="quiet")

    parser = argparse.ArgumentParser(prog="timeloc", description="Anderson localization in the time domain: disorder, effective models, Floquet checks")
    verbs = parser.add_subparsers(dest="verb", required=True)
    verbs.add_parser("gen-disorder", parents=[common], help="Write disorder coefficients, ring and line potentials")
    verbs.add_parser("eff-spectrum", parents=[common], help="Effective-model spectrum, tail fits and lab-frame density")
    verbs.add_parser("loclength", parents=[common], help="Born and transfer-matrix localization lengths")
    verbs.add_parser("lattice", parents=[common], help="Tight-binding reduction of the driven lattice")
    verbs.add_parser("classical", parents=[common], help="Poincare sections of the exact classical dynamics")
    verbs.add_parser("floquet", parents=[common], help="Quasienergies against the effective model")
    verbs.add_parser("run", parents=[common], help="Run whichever experiment the config names")
    sweep = verbs.add_parser("sweep", parents=[common], help="Run an experiment over values of one config field")
    sweep.add_argument("--axis", help="Config field to sweep", type=str, default=None, dest="axis")
    sweep.add_argument("--values", help="Comma separated values", type=str, default=None, dest="values")
    report = verbs.add_parser("report", help="Verify a run directory against its manifest")
    report.add_argument("run_dir", help="Run directory containing manifest.json", type=str)
    return parser


def resolve_for_verb(args: argparse.Namespace) -> ExperimentConfig:
    allowed = VERB_EXPERIMENTS[args.verb]
    if args.experiment is not None and args.experiment not in allowed:
        raise UnknownExperiment(f"`{args.verb}` runs one of {', '.join(allowed)}, not {args.experiment!r}")
    config = resolve_config(args.experiment, args.config, args.overrides, args.seed, args.output_dir)
    if config.experiment not in allowed:
        config = resolve_config(allowed[0], args.config, args.overrides, args.seed, args.output_dir)
    return config


def parse_values(text: str) -> list[float]:
    try:
        return [float(value) for value in text.split(",") if value.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"--values must be comma separated numbers, got {text!r}") from exc


def report_run(run_dir: str) -> int:
    manifest = ManifestManager.load_manifest(run_dir)
    print(f"[TIMELOC] {manifest['experiment']} (code {manifest['code_version']}), {len(manifest['files'])} files, wall time {manifest['wall_time_seconds']}s")
    for key, value in sorted(manifest["summary"].items()):
        print(f"[TIMELOC]     {key} = {value}")
    mismatched = ManifestManager.verify(run_dir)
    for relative in mismatched:
        print(f"[TIMELOC] Checksum mismatch: {relative}")
    return 1 if mismatched else 0


def main(argv: list[str] | None = None) -> None:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "report":
            sys.exit(report_run(args.run_dir))
        config = resolve_for_verb(args)
        context = RunContext(config, threads=args.threads, quiet=args.quiet)
        if args.verb == "sweep":
            values = parse_values(args.values) if args.values is not None else None
            run_sweep(context, args.axis, values)
        else:
            run_experiment(context)
    except UnknownExperiment as exc:
        print(f"[TIMELOC] {exc}", file=sys.stderr)
        sys.exit(2)
    except TimelocException as exc:
        print(f"[TIMELOC] {type(exc).__name__}: {exc}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
