"""
SocLearn - Command Line
Reproduction recipes for the naive accuracy curves, the rational bound, simulated
trials and their regression analysis
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .analytics import (
    REFERENCE_VALUES, density_regression, format_regression_table, gain_from_social_learning,
    independent_experiment_regression, independent_outcomes, misleading_interaction_regression,
    overall_accuracy_regression, robustness_sweep, trial_outcomes
)
from .config_loader import ConfigLoader, default_output_dir
from .exceptions import ConfigurationError, RegressionError, SoclearnError
from .herding import (
    against_signal_stats, evaluator_range, fraction_correct_histogram, mean_window_uncertainty,
    range_accuracy
)
from .models import (
    BehaviorKind, BehaviorModel, ChoiceProbVariant, EllVariant, IndependentTopology,
    NetworkParams, SEFlavor, SignalParams, TrialConfig
)
from .naive_exact import (
    PUBLISHED_NAIVE_ACCURACY, PUBLISHED_POSITIONS, CalibrationReport, VariantCalibrator,
    crossover_positions, naive_accuracy_curve
)
from .rational_bound import (
    PUBLISHED_BOUND_POSITIONS, PUBLISHED_RATIONAL_BOUND, BoundReconstruction,
    BoundReconstructionReport, constrained_accuracy_curve, has_published_bound
)
from .records import TrialBatch, read_many_records
from .reporting import write_curve_svg, write_curves, write_json, write_text
from .simulator import run_batch, sequential_config

logger = logging.getLogger(__name__)

COMMANDS = ("exact-naive", "rational-bound", "simulate", "analyze", "repro-all")
REPORTS = ("all", "density", "overall", "misleading", "independent", "robustness", "gain",
           "against-signal", "herding", "density-curves", "figure1")
REPORT_ALIASES = {"figure1": "density-curves"}


@dataclass
class RunConfig:
    """Fully resolved parameters of one command"""
    command: str
    q: List[float]
    agents: int
    mu: float
    sigma: float
    trials: int
    seed: int
    behavior: str
    topology: str
    ell_variant: str
    choice_variant: str
    se_flavor: SEFlavor
    fmt: str
    out: Path
    parallelism: int = 1
    naive_share: float = 1.0
    epsilon: float = 0.0
    inputs: List[Path] = field(default_factory=list)
    report: str = "all"
    svg: bool = False
    strict_bound: bool = False
    metadata: Dict[str, str] = field(default_factory=dict)

    @property
    def signal(self) -> SignalParams:
        return SignalParams(mu=self.mu, sigma=self.sigma)

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "RunConfig":
        loader = ConfigLoader(args.config)
        flags = {
            "q": args.q, "agents": args.agents, "mu": args.mu, "sigma": args.sigma,
            "trials": args.trials, "seed": args.seed, "behavior": args.behavior,
            "topology": args.topology, "ell_variant": args.ell_variant,
            "choice_variant": args.choice_variant, "se_flavor": args.se_flavor,
            "format": args.format, "out": args.out, "parallelism": args.parallelism,
            "naive_share": args.naive_share, "epsilon": args.epsilon, "input": args.input,
            "report": args.report, "svg": args.svg or None,
            "strict_bound": args.strict_bound or None,
        }
        merged = loader.resolve(args.command, flags)
        inputs = merged.get("input") or []
        if isinstance(inputs, str):
            inputs = inputs.split()
        try:
            se_flavor = SEFlavor(str(merged["se_flavor"]).upper())
        except ValueError:
            raise ConfigurationError(f"unknown SE flavor {merged['se_flavor']!r}") from None
        q = merged["q"]
        return cls(
            command=args.command,
            q=[float(value) for value in (q if isinstance(q, (list, tuple)) else [q])],
            agents=int(merged["agents"]), mu=float(merged["mu"]), sigma=float(merged["sigma"]),
            trials=int(merged["trials"]), seed=int(merged["seed"]),
            behavior=str(merged["behavior"]), topology=str(merged["topology"]),
            ell_variant=str(merged["ell_variant"]), choice_variant=str(merged["choice_variant"]),
            se_flavor=se_flavor, fmt=str(merged["format"]),
            out=Path(merged["out"]) if merged.get("out") else default_output_dir(),
            parallelism=int(merged["parallelism"]), naive_share=float(merged["naive_share"]),
            epsilon=float(merged["epsilon"]), inputs=[Path(p) for p in inputs],
            report=REPORT_ALIASES.get(str(merged["report"]), str(merged["report"])),
            svg=bool(merged.get("svg", False)),
            strict_bound=bool(merged.get("strict_bound", False)), metadata=loader.get_metadata(),
        )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    common.add_argument("--config", help="XML run-configuration file")
    common.add_argument("--out", help="output directory (default: $SOCLEARN_OUTPUT_DIR or ./soclearn-output)")
    common.add_argument("--format", choices=("csv", "json"), help="curve file format")
    common.add_argument("--q", type=float, nargs="+", help="link probabilities")
    common.add_argument("--agents", type=int, help="agents per trial")
    common.add_argument("--mu", type=float, help="signal mean magnitude")
    common.add_argument("--sigma", type=float, help="signal standard deviation")
    common.add_argument("--trials", type=int, help="simulated trials per density")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--behavior", choices=[kind.value for kind in BehaviorKind])
    common.add_argument("--topology", choices=("sequential", "independent"))
    common.add_argument("--ell-variant", choices=["calibrated"] + [v.value for v in EllVariant])
    common.add_argument("--choice-variant", choices=["calibrated"] + [v.value for v in ChoiceProbVariant])
    common.add_argument("--se-flavor", choices=[flavor.value for flavor in SEFlavor])
    common.add_argument("--parallelism", type=int, help="worker processes for simulation")
    common.add_argument("--naive-share", type=float, help="naive share for --behavior mixed")
    common.add_argument("--epsilon", type=float, help="action flip rate")
    common.add_argument("--input", nargs="+", help="trial-record CSV files to analyze")
    common.add_argument("--report", choices=REPORTS, help="analysis to run")
    common.add_argument("--svg", action="store_true", help="also write static SVG figures")
    common.add_argument("--strict-bound", action="store_true",
                        help="fail when the rational bound misses the published table")

    parser = argparse.ArgumentParser(prog="soclearn", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("exact-naive", parents=[common], help="exact accuracy of naive agents")
    subparsers.add_parser("rational-bound", parents=[common], help="lower bound for rational agents")
    subparsers.add_parser("simulate", parents=[common], help="simulate trials")
    subparsers.add_parser("analyze", parents=[common], help="regressions on trial records")
    subparsers.add_parser("repro-all", parents=[common], help="regenerate every table and figure")
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def resolve_variants(config: RunConfig) -> Tuple[EllVariant, ChoiceProbVariant, Optional[CalibrationReport]]:
    """Explicit variants win; 'calibrated' ones come from the published table"""
    report = None
    ell = None if config.ell_variant == "calibrated" else EllVariant(config.ell_variant)
    choice = None if config.choice_variant == "calibrated" else ChoiceProbVariant(config.choice_variant)
    if ell is None or choice is None:
        report = VariantCalibrator(config.signal).calibrate()
        best_ell, best_choice = report.best.pair
        ell = ell or best_ell
        choice = choice or best_choice
    return ell, choice, report


def behavior_model(config: RunConfig) -> BehaviorModel:
    kind = BehaviorKind(config.behavior)
    naive_share = config.naive_share if kind is BehaviorKind.MIXED else 1.0
    return BehaviorModel(kind=kind, naive_share=naive_share, epsilon=config.epsilon)


def _prepare_out(config: RunConfig) -> Path:
    config.out.mkdir(parents=True, exist_ok=True)
    return config.out


def _naive_curves(config: RunConfig, ell: EllVariant, choice: ChoiceProbVariant):
    behavior = behavior_model(config)
    return [
        naive_accuracy_curve(NetworkParams(q=q, n_agents=config.agents), config.signal, ell, choice,
                             naive_share=behavior.effective_naive_share, epsilon=behavior.epsilon)
        for q in config.q
    ]


def cmd_exact_naive(config: RunConfig) -> int:
    out = _prepare_out(config)
    ell, choice, report = resolve_variants(config)
    curves = _naive_curves(config, ell, choice)
    write_curves(curves, out / f"naive_accuracy.{config.fmt}", config.fmt)
    if report is not None:
        write_json(report.to_dict(), out / "calibration.json")
    if config.svg:
        write_curve_svg(curves, out / "naive_accuracy.svg",
                        title=f"naive agents ({ell.value}/{choice.value})")
    for curve in curves:
        print(f"q={curve.q:g} {ell.value}/{choice.value}: " + " ".join(
            f"{curve.at(p):.4f}" for p in PUBLISHED_POSITIONS if p <= len(curve)))
    return 0


def check_published_bound(config: RunConfig, out: Path) -> Optional[BoundReconstructionReport]:
    """Compare every constrained-profile rule with the published bound table, if it applies"""
    if not has_published_bound(config.signal, config.agents):
        logger.info("no published bound for mu=%g sigma=%g with %d agents", config.mu, config.sigma,
                    config.agents)
        return None
    reconstruction = BoundReconstruction(config.signal)
    report = reconstruction.evaluate()
    write_json(report.to_dict(), out / "bound_check.json")
    if not report.reproduces:
        print(f"published bound table not reproduced: closest rule {report.best.rule.value} "
              f"is off by {report.best.max_deviation:.4f} (bound_check.json)")
        if config.strict_bound:
            reconstruction.verify(report)
    return report


def cmd_rational_bound(config: RunConfig) -> int:
    out = _prepare_out(config)
    curves = [constrained_accuracy_curve(NetworkParams(q=q, n_agents=config.agents), config.signal)
              for q in config.q]
    write_curves(curves, out / f"rational_bound.{config.fmt}", config.fmt)
    if config.svg:
        write_curve_svg(curves, out / "rational_bound.svg", title="constrained one-neighbor bound")
    for curve in curves:
        print(f"q={curve.q:g} rational-bound: " + " ".join(
            f"{curve.at(p):.4f}" for p in PUBLISHED_BOUND_POSITIONS if p <= len(curve)))
    check_published_bound(config, out)
    return 0


def _simulation_configs(config: RunConfig, ell: EllVariant) -> List[Tuple[str, TrialConfig]]:
    behavior = behavior_model(config)
    variants = dict(signal=config.signal, behavior=behavior, ell_variant=ell,
                    choice_variant=ChoiceProbVariant.DERIVED_ARGUMENT)
    if config.topology == "independent":
        if len(config.q) != 2:
            raise ConfigurationError(
                f"the independent topology needs two link probabilities (--q SPARSE DENSE), got {config.q}")
        topology = IndependentTopology(q_sparse=min(config.q), q_dense=max(config.q))
        return [("independent", TrialConfig(topology=topology, **variants))]
    return [(f"q={q:g}", sequential_config(q, n_agents=config.agents, **variants)) for q in config.q]


def simulate_to(config: RunConfig, records_path: Path) -> Tuple[Dict[str, Any], TrialBatch]:
    """Run every configured arm into one record file; trial ids are unique across arms"""
    ell = (resolve_variants(config)[0] if config.ell_variant == "calibrated"
           else EllVariant(config.ell_variant))
    summaries: Dict[str, Any] = {}
    batches = []
    for arm, (label, trial_config) in enumerate(_simulation_configs(config, ell)):
        summary, batch = run_batch(trial_config, config.trials, config.seed,
                                   parallelism=config.parallelism,
                                   sink=records_path, sink_append=arm > 0,
                                   first_trial=arm * config.trials)
        summaries[label] = summary.to_dict()
        batches.append(batch)
    return summaries, TrialBatch.concat(batches)


def cmd_simulate(config: RunConfig) -> int:
    out = _prepare_out(config)
    summaries, _ = simulate_to(config, out / "records.csv")
    write_json({"seed": config.seed, "trials_per_arm": config.trials,
                "behavior": config.behavior, "arms": summaries, "run": config.metadata}, out / "summary.json")
    for label, summary in summaries.items():
        print(f"{label}: mean last-{summary['last_m']} fraction correct "
              f"{summary['mean_fraction_correct_last']:.4f}")
    return 0


def _guarded(name: str, compute, results: Dict[str, Any], tables: List[str], title: str) -> None:
    try:
        result = compute()
    except RegressionError as exc:
        logger.warning("%s skipped: %s", name, exc)
        results[name] = {"error": str(exc)}
        return
    results[name] = result.to_dict()
    tables.append(format_regression_table(result, title=title))


def analyze_batch(batch: TrialBatch, report: str, se_flavor: SEFlavor) -> Tuple[Dict[str, Any], List[str]]:
    """All requested analyses of one record batch, as a JSON-ready dict and text tables"""
    wanted = (lambda name: report in ("all", name))
    results: Dict[str, Any] = {}
    tables: List[str] = []

    if not batch.is_sequential:
        outcomes = independent_outcomes(batch)
        if wanted("independent"):
            _guarded("independent_experiment_regression",
                     lambda: independent_experiment_regression(outcomes, se_flavor),
                     results, tables, "Independent neighbors: evaluator accuracy on density")
            results["arm_accuracy"] = {
                str(o_q): float(np.mean([getattr(o, arm) for o in outcomes]))
                for o_q, arm in ((outcomes[0].q_sparse, "y_sparse"), (outcomes[0].q_dense, "y_dense"))
            }
        if wanted("against-signal"):
            results["against_signal"] = [row.to_dict() for row in against_signal_stats(batch, {
                "evaluators": evaluator_range(batch)})]
        return results, tables

    outcomes = trial_outcomes(batch)
    if wanted("density"):
        _guarded("density_regression", lambda: density_regression(outcomes, se_flavor),
                 results, tables, "Density regression: last-8 fraction correct")
    if wanted("overall"):
        _guarded("overall_accuracy_regression", lambda: overall_accuracy_regression(outcomes, se_flavor),
                 results, tables, "Overall fraction correct on density")
    if wanted("misleading"):
        _guarded("misleading_interaction_regression",
                 lambda: misleading_interaction_regression(outcomes, se_flavor),
                 results, tables, "Misleading early signals")
    if wanted("gain"):
        results["gain_from_social_learning"] = {str(q): gain for q, gain in
                                                gain_from_social_learning(outcomes).items()}
    if wanted("robustness") and batch.n_agents == 40:
        try:
            sweep = robustness_sweep(batch, se_flavor=se_flavor)
            results["robustness_sweep"] = {str(m): result.coefficient("NetworkDensity")
                                           for m, result in sweep.items()}
        except RegressionError as exc:
            logger.warning("robustness sweep skipped: %s", exc)
    if wanted("against-signal"):
        results["against_signal"] = [row.to_dict() for row in against_signal_stats(batch)]
    if wanted("herding"):
        arms = batch.split_by_q()
        results["overall_accuracy_histogram"] = {
            str(q): fraction_correct_histogram(arm, bins=batch.n_agents // 4).to_dict()
            for q, arm in arms.items()
        }
        if batch.n_agents >= 40:
            results["mean_window_uncertainty"] = {
                str(q): {"windows": values, "overall": float(np.mean(values))}
                for q, values in mean_window_uncertainty(batch).items()
            }
            results["accuracy_positions_10_20"] = {str(q): acc for q, acc in
                                                   range_accuracy(batch, 10, 20).items()}
    return results, tables


def density_comparison_curves(config: RunConfig):
    ell, choice, _ = resolve_variants(config)
    q_values = config.q if len(config.q) > 1 else [0.25, 0.75]
    return [naive_accuracy_curve(NetworkParams(q=q, n_agents=config.agents), config.signal, ell, choice)
            for q in q_values]


def cmd_analyze(config: RunConfig) -> int:
    out = _prepare_out(config)
    if config.report == "density-curves":
        curves = density_comparison_curves(config)
        write_curves(curves, out / "density_curves.csv", "csv")
        if config.svg:
            write_curve_svg(curves, out / "density_curves.svg", title="naive agents, sparse vs dense")
        return 0
    if not config.inputs:
        raise ConfigurationError("analyze needs --input trial-record files")
    batch = read_many_records(config.inputs)
    results, tables = analyze_batch(batch, config.report, config.se_flavor)
    results["reference_values"] = REFERENCE_VALUES
    results["run"] = config.metadata
    write_json(results, out / "analysis.json")
    text = "\n\n".join(tables)
    write_text(text, out / "tables.txt")
    if text:
        print(text)
    return 0


def _agreement(summary: Dict[str, Any], curve_values: np.ndarray) -> float:
    """Largest |simulated - exact| in binomial standard errors"""
    worst = 0.0
    for row, exact in zip(summary["positions"], curve_values):
        se = max(row["standard_error"], 1e-12)
        worst = max(worst, abs(row["accuracy"] - exact) / se)
    return worst


def _repro_dir(base: Path) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    target = base / f"repro-{stamp}"
    suffix = 1
    while target.exists():
        target = base / f"repro-{stamp}-{suffix}"
        suffix += 1
    target.mkdir(parents=True)
    return target


def cmd_repro_all(config: RunConfig) -> int:
    out = _repro_dir(config.out)
    logger.info("reproducing into %s", out)
    ell, choice, report = resolve_variants(config)
    if report is not None:
        write_json(report.to_dict(), out / "calibration.json")

    naive = {q: naive_accuracy_curve(NetworkParams(q=q, n_agents=40), config.signal, ell, choice)
             for q in (0.25, 0.75)}
    write_curves(list(naive.values()), out / "density_curves.csv", "csv")
    bound = constrained_accuracy_curve(NetworkParams(q=0.75, n_agents=40), config.signal)
    write_curves([bound], out / "rational_bound.csv", "csv")
    bound_report = check_published_bound(RunConfig(**{**config.__dict__, "agents": 40}), out)

    sequential = RunConfig(**{**config.__dict__, "q": [0.25, 0.75], "agents": 40,
                              "topology": "sequential", "ell_variant": ell.value})
    seq_summaries, seq_batch = simulate_to(sequential, out / "records_sequential.csv")
    write_json(seq_summaries, out / "summary_sequential.json")
    independent = RunConfig(**{**sequential.__dict__, "topology": "independent"})
    ind_summaries, ind_batch = simulate_to(independent, out / "records_independent.csv")
    write_json(ind_summaries, out / "summary_independent.json")

    seq_results, seq_tables = analyze_batch(seq_batch, "all", config.se_flavor)
    ind_results, ind_tables = analyze_batch(ind_batch, "all", config.se_flavor)
    write_json({"sequential": seq_results, "independent": ind_results}, out / "regressions.json")
    write_text("\n\n".join(seq_tables + ind_tables), out / "tables.txt")
    write_json(REFERENCE_VALUES, out / "reference_values.json")

    published = {q: np.array(values) for q, values in PUBLISHED_NAIVE_ACCURACY.items()}
    positions = np.array(PUBLISHED_POSITIONS) - 1
    checks = {
        "variants": {"ell": ell.value, "choice": choice.value},
        "naive_max_deviation": {str(q): float(np.max(np.abs(naive[q].values[positions] - published[q])))
                                for q in naive},
        "bound_max_deviation": float(np.max(np.abs(
            bound.values[positions] - np.array(PUBLISHED_RATIONAL_BOUND[0.75])))),
        "bound_monotone": bound.is_monotone(),
        "bound_reproduced": None if bound_report is None else bound_report.reproduces,
        "bound_closest_rule": None if bound_report is None else bound_report.best.rule.value,
        "late_sparse_above_dense": bool(np.all(naive[0.25].values[32:] > naive[0.75].values[32:])),
        "early_dense_above_sparse": bool(np.all(naive[0.75].values[1:5] > naive[0.25].values[1:5])),
        "crossovers": crossover_positions(naive[0.25], naive[0.75]),
        "simulation_max_abs_z": {
            label: _agreement(summary, naive[q].values)
            for (label, summary), q in zip(seq_summaries.items(), (0.25, 0.75))
        },
        "run": config.metadata,
    }
    if len(checks["crossovers"]) != 1:
        logger.warning("naive curves cross %d times: %s", len(checks["crossovers"]), checks["crossovers"])
    write_json(checks, out / "checks.json")
    print(out)
    return 0


HANDLERS = {
    "exact-naive": cmd_exact_naive,
    "rational-bound": cmd_rational_bound,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "repro-all": cmd_repro_all,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = RunConfig.from_namespace(args)
        return HANDLERS[config.command](config)
    except (SoclearnError, FileNotFoundError) as exc:
        print(f"soclearn: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
