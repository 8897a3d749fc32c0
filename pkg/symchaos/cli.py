"""
Command-line pipeline: analyze | identify | generate | sweep | compare.

Exit codes: 0 ok, 1 I/O or validation error, 2 not chaotic,
3 divergence guard tripped, 4 periodic windows found.
"""

import argparse
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from symchaos.chaos_metrics import (
    LyapunovEstimate,
    NotChaoticError,
    detect_periodicity,
    forecast_horizon,
    largest_lyapunov,
)
from symchaos.config import load_config
from symchaos.descriptors import Descriptor, SpectralWeights, normalize_all
from symchaos.maps import family_by_name
from symchaos.marking import Fragment, mark_fragments
from symchaos.pair_search import GaConfig, GeneticPairSearch, SymmetryPair, exhaustive_search
from symchaos.robust_gen import detect_windows, modulator_values, parse_modulator, simulate_robust, sweep_lyapunov
from symchaos.series_io import (
    EmbeddingConfig,
    ScalarSeries,
    embed,
    estimate_delay,
    estimate_dimension,
    load_series,
)
from symchaos.state_model import (
    DivergenceError,
    ForcingSpec,
    LinearForcedModel,
    compare_dynamics,
    identify,
    identify_output,
    simulate,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CHAOTIC = 2
EXIT_DIVERGENCE = 3
EXIT_WINDOWS = 4


@dataclass
class AnalysisReport:
    lyapunov: LyapunovEstimate
    embedding: EmbeddingConfig
    fragments: List[Fragment]
    best_pairs: List[SymmetryPair]
    horizon: Optional[float] = None
    warnings: List[str] = field(default_factory=list)
    descriptors: List[Descriptor] = field(default_factory=list)
    oracle_pairs: Optional[List[SymmetryPair]] = None
    ga_history: List[float] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        distances = [p.distance for p in self.best_pairs]
        if distances != sorted(distances):
            raise ValueError("best_pairs must be sorted by ascending distance")
        for pair in self.best_pairs:
            if pair.idx_b >= len(self.fragments):
                raise ValueError(f"pair ({pair.idx_a}, {pair.idx_b}) refers to a missing fragment")

    def to_dict(self):
        return {
            "lyapunov": self.lyapunov.to_dict(),
            "embedding": self.embedding.to_dict(),
            "fragments": [f.to_dict() for f in self.fragments],
            "descriptors": [d.to_dict() for d in self.descriptors],
            "best_pairs": [p.to_dict() for p in self.best_pairs],
            "oracle_pairs": None if self.oracle_pairs is None else [p.to_dict() for p in self.oracle_pairs],
            "ga_history": self.ga_history,
            "horizon": self.horizon,
            "warnings": self.warnings,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data):
        oracle = data.get("oracle_pairs")
        return cls(
            lyapunov=LyapunovEstimate.from_dict(data["lyapunov"]),
            embedding=EmbeddingConfig.from_dict(data["embedding"]),
            fragments=[Fragment.from_dict(f) for f in data["fragments"]],
            best_pairs=[SymmetryPair.from_dict(p) for p in data["best_pairs"]],
            horizon=data.get("horizon"),
            warnings=list(data.get("warnings", [])),
            descriptors=[Descriptor.from_dict(d) for d in data.get("descriptors", [])],
            oracle_pairs=None if oracle is None else [SymmetryPair.from_dict(p) for p in oracle],
            ga_history=list(data.get("ga_history", [])),
            seed=int(data.get("seed", 0)),
        )


def validate_report(path) -> AnalysisReport:
    """Re-read an analysis report and check it against the report invariants."""
    with open(path, "r", encoding="utf-8") as f:
        return AnalysisReport.from_dict(json.load(f))


def _write_json(data, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)


def _read_series(args, path) -> ScalarSeries:
    return load_series(path, column=args.column, has_header=args.header)


def _embedding_for(series: ScalarSeries, args, config, warnings: List[str]) -> EmbeddingConfig:
    lag = args.lag or estimate_delay(series)
    dim = args.dim
    if not dim:
        estimate = estimate_dimension(series, lag, max_dim=config["embedding"]["max_dim"],
                                      fnn_tol=config["embedding"]["fnn_tol"], ratio=config["embedding"]["fnn_ratio"])
        dim = estimate.dim
        if estimate.saturated:
            warnings.append(f"embedding dimension saturated at {dim}: FNN fraction never fell below tolerance")
    embedding = EmbeddingConfig(lag=lag, dim=dim)
    print(f"📊 Embedding: lag={embedding.lag}, dim={embedding.dim}")
    return embedding


def _weights(args) -> SpectralWeights:
    if args.betas:
        return SpectralWeights.parse(args.betas)
    return SpectralWeights.uniform(args.q)


def cmd_analyze(args, config) -> int:
    warnings: List[str] = []
    series = _read_series(args, args.input)
    embedding = _embedding_for(series, args, config, warnings)
    attractor = embed(series, embedding)

    # chaos gate before any symmetry work
    lyapunov = largest_lyapunov(attractor, horizon=args.horizon)
    if lyapunov.exponent <= args.min_lambda:
        raise NotChaoticError(
            f"largest Lyapunov exponent {lyapunov.exponent:.4g} <= {args.min_lambda}: "
            "series is not chaotic, symmetry search skipped"
        )
    print(f"✅ Largest Lyapunov exponent: {lyapunov.exponent:.4f} (R^2={lyapunov.quality:.3f})")

    fragments, warning = mark_fragments(attractor, args.coord, args.min_frag_len, args.prominence)
    if warning:
        warnings.append(warning)
    descriptors = normalize_all(attractor, fragments, args.M, args.q, n_jobs=args.jobs)
    w = _weights(args)

    # GA search, checked against the exhaustive optimum when the set is small
    best_pairs, oracle_pairs, history = [], None, []
    if len(descriptors) >= 2:
        ga_cfg = GaConfig(population=args.population, generations=args.generations,
                          elite=config["ga"]["elite"], tournament_k=config["ga"]["tournament_k"],
                          crossover_rate=config["ga"]["crossover_rate"],
                          mutation_rate=config["ga"]["mutation_rate"], seed=args.seed)
        search = GeneticPairSearch(descriptors, w, ga_cfg, n_jobs=args.jobs, progress=args.verbose)
        best_pairs = search.run(args.top_k)
        history = search.history
        if len(descriptors) <= config["ga"]["exhaustive_limit"]:
            oracle_pairs = exhaustive_search(descriptors, w, args.top_k)
            if oracle_pairs[0].distance < best_pairs[0].distance:
                warnings.append(
                    f"GA best distance {best_pairs[0].distance:.6g} above exhaustive optimum "
                    f"{oracle_pairs[0].distance:.6g}"
                )
    else:
        warnings.append(f"{len(descriptors)} fragment(s): no pair to search")

    horizon = forecast_horizon(lyapunov.exponent, args.delta0, args.delta_tol)
    report = AnalysisReport(lyapunov, embedding, fragments, best_pairs, horizon, warnings,
                            descriptors, oracle_pairs, history, args.seed)
    _write_json(report.to_dict(), args.output)

    if args.divergence_out:
        curve = pd.DataFrame({"step": np.arange(len(lyapunov.divergence)), "mean_log_divergence": lyapunov.divergence})
        curve.to_csv(args.divergence_out, index=False, na_rep="")

    print(f"📊 {len(fragments)} fragments, {len(best_pairs)} pair(s) reported, forecast horizon {horizon:.3f}")
    for msg in warnings:
        print(f"⚠️ {msg}")
    print(f"✅ Report written to {args.output}")
    return EXIT_OK


def _load_states(path: Path):
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    states = np.array(data["states"], dtype=float)
    outputs = None if data.get("outputs") is None else np.array(data["outputs"], dtype=float)
    forcing = ForcingSpec(**data["forcing"]) if "forcing" in data else None
    modulator = parse_modulator(data["modulator"]) if data.get("modulator") else None
    return states, outputs, forcing, modulator


def cmd_identify(args, config) -> int:
    path = Path(args.input)
    if not path.exists():
        raise FileNotFoundError(f"Input file not found: {path}")

    forcing = ForcingSpec(args.alpha, args.gamma)
    modulation = None
    if path.suffix.lower() == ".json":
        states, outputs, stored_forcing, modulator = _load_states(path)
        forcing = stored_forcing or forcing
        if modulator is not None:
            modulation = modulator_values(modulator, max(len(states) - 1, 1))
    else:
        series = _read_series(args, path)
        embedding = _embedding_for(series, args, config, [])
        states = embed(series, embedding).points
        outputs = None
        if args.output_column is not None:
            observed = load_series(path, column=args.output_column, has_header=args.header)
            outputs = observed.samples[:len(states)]

    A, psi_amp, residual = identify(states, forcing, modulation)
    print(f"📊 State residual (RMS): {residual:.3g}")
    C = None
    if outputs is not None:
        C, out_residual = identify_output(states, outputs)
        print(f"📊 Output residual (RMS): {out_residual:.3g}")

    model = LinearForcedModel(A=A, psi_amp=psi_amp, forcing=forcing, C=C, x0=states[0])
    model.save(args.output)
    print(f"✅ Model (n={model.n}, spectral radius {model.spectral_radius:.4f}) written to {args.output}")
    return EXIT_OK


def cmd_generate(args, config) -> int:
    model = LinearForcedModel.load(args.model)
    modulator = parse_modulator(args.modulator)
    if modulator is None:
        states, outputs = simulate(model, args.steps)
    else:
        states, outputs = simulate_robust(model, modulator, args.steps)

    frame = pd.DataFrame({"t": np.arange(outputs.size), "y": outputs})
    frame.to_csv(args.output, index=False, float_format="%.17g")

    gen = config["generate"]
    if outputs.size >= 3 * gen["max_period"]:
        period = detect_periodicity(outputs, gen["max_period"], gen["period_tol"])
        if period is None:
            logger.info(f"No period <= {gen['max_period']} in the generated output")
        else:
            logger.warning(f"Generated output is periodic with period {period}")

    if args.states_out:
        _write_json({
            "forcing": model.forcing.to_dict(),
            "modulator": None if modulator is None else modulator.to_spec(),
            "states": states.tolist(),
            "outputs": outputs.tolist(),
        }, args.states_out)
    print(f"✅ Wrote {outputs.size} outputs to {args.output}")
    return EXIT_OK


def cmd_sweep(args, config) -> int:
    family = family_by_name(args.family)
    result = sweep_lyapunov(family, args.lo, args.hi, args.steps, n_iter=args.iters, x0=args.x0,
                            seed=args.seed, n_transient=args.transient, n_jobs=args.jobs,
                            progress=args.verbose)
    report = detect_windows(result, args.smooth_tol)
    report.update({"family": family.name, "lo": args.lo, "hi": args.hi, "steps": args.steps,
                   "iters": args.iters, "seed": args.seed})

    result.to_csv(args.output)
    report_path = Path(args.report) if args.report else Path(args.output).with_suffix(".windows.json")
    _write_json(report, report_path)

    if report["windows"]:
        print(f"⚠️ {len(report['windows'])} periodic window(s) in {family.name} sweep, verdict: {report['verdict']}")
        return EXIT_WINDOWS
    print(f"✅ No periodic windows (smoothness {report['smoothness']:.3g}), verdict: {report['verdict']}")
    return EXIT_OK


def cmd_compare(args, config) -> int:
    original = _read_series(args, args.original)
    generated = _read_series(args, args.generated)
    warnings: List[str] = []
    embedding = _embedding_for(original, args, config, warnings)
    report = compare_dynamics(original, generated, embedding, K=args.top_k, coord=args.coord,
                              min_len=args.min_frag_len, prominence=args.prominence,
                              M=args.M, q=args.q, w=_weights(args))
    report["warnings"] = warnings + report["warnings"]
    _write_json(report, args.output)
    flag = "⚠️ Lyapunov mismatch" if report["lyapunov_mismatch"] else "✅ Lyapunov exponents agree"
    print(f"{flag}: {report['lambda_original']:.4f} vs {report['lambda_generated']:.4f}")
    return EXIT_OK


def build_parser(config=None) -> argparse.ArgumentParser:
    config = config or load_config()
    parser = argparse.ArgumentParser(prog="symchaos", description="Robust chaos from weak symmetry violations")
    subparsers = parser.add_subparsers(dest="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Seed for every stochastic step")
    common.add_argument("--lag", type=int, default=None, help="Embedding lag (estimated when omitted)")
    common.add_argument("--dim", type=int, default=None, help="Embedding dimension (estimated when omitted)")
    common.add_argument("--column", type=int, default=0, help="CSV column holding the series")
    common.add_argument("--header", action="store_true", help="CSV has a header row")
    common.add_argument("--coord", type=int, default=config["marking"]["coord"], help="Coordinate used for marking")
    common.add_argument("--min-frag-len", type=int, default=config["marking"]["min_len"])
    common.add_argument("--prominence", type=float, default=config["marking"]["prominence"])
    common.add_argument("--q", type=int, default=config["descriptors"]["q"], help="Harmonics per descriptor")
    common.add_argument("--M", type=int, default=config["descriptors"]["M"], help="Resampled points per fragment")
    common.add_argument("--betas", type=str, default=None, help="Comma-separated harmonic weights")
    common.add_argument("--top-k", type=int, default=config["ga"]["top_k"])
    common.add_argument("--jobs", type=int, default=1, help="joblib workers")
    common.add_argument("--verbose", action="store_true", help="DEBUG logging and progress bars")

    analyze = subparsers.add_parser("analyze", parents=[common], help="Full analysis of a scalar series")
    analyze.add_argument("input", help="Series CSV")
    analyze.add_argument("-o", "--output", default="report.json")
    analyze.add_argument("--horizon", type=int, default=config["lyapunov"]["horizon"])
    analyze.add_argument("--min-lambda", type=float, default=config["lyapunov"]["min_lambda"])
    analyze.add_argument("--delta0", type=float, default=config["lyapunov"]["delta0"])
    analyze.add_argument("--delta-tol", type=float, default=config["lyapunov"]["delta_tol"])
    analyze.add_argument("--population", type=int, default=config["ga"]["population"])
    analyze.add_argument("--generations", type=int, default=config["ga"]["generations"])
    analyze.add_argument("--divergence-out", default=None, help="CSV for the mean log-divergence curve")
    analyze.set_defaults(func=cmd_analyze)

    ident = subparsers.add_parser("identify", parents=[common], help="Identify A, psi_amp (and C)")
    ident.add_argument("input", help="Series CSV or states JSON")
    ident.add_argument("-o", "--output", default="model.json")
    ident.add_argument("--output-column", type=int, default=None, help="CSV column holding y for C")
    ident.add_argument("--alpha", type=float, default=ForcingSpec.alpha)
    ident.add_argument("--gamma", type=float, default=ForcingSpec.gamma)
    ident.set_defaults(func=cmd_identify)

    gen = subparsers.add_parser("generate", parents=[common], help="Simulate a model to a series CSV")
    gen.add_argument("model", help="Model JSON")
    gen.add_argument("-o", "--output", default="generated.csv")
    gen.add_argument("--steps", type=int, default=1000)
    gen.add_argument("--modulator", default="none", help='"p:v;breaks:t1,t2;q:q0,q1,q2" or "none"')
    gen.add_argument("--states-out", default=None, help="JSON with states and outputs")
    gen.set_defaults(func=cmd_generate)

    sweep = subparsers.add_parser("sweep", parents=[common], help="Lyapunov sweep of a map family")
    sweep.add_argument("--family", required=True, help="logistic, tent or skew-tent")
    sweep.add_argument("--lo", type=float, required=True)
    sweep.add_argument("--hi", type=float, required=True)
    sweep.add_argument("--steps", type=int, default=101)
    sweep.add_argument("--iters", type=int, default=10_000)
    sweep.add_argument("--transient", type=int, default=config["sweep"]["n_transient"])
    sweep.add_argument("--x0", type=float, default=None)
    sweep.add_argument("--smooth-tol", type=float, default=config["sweep"]["smooth_tol"])
    sweep.add_argument("-o", "--output", default="sweep.csv")
    sweep.add_argument("--report", default=None, help="Window report JSON (default: next to the CSV)")
    sweep.set_defaults(func=cmd_sweep)

    compare = subparsers.add_parser("compare", parents=[common], help="Compare two series' dynamics")
    compare.add_argument("original")
    compare.add_argument("generated")
    compare.add_argument("-o", "--output", default="comparison.json")
    compare.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    config = load_config()
    parser = build_parser(config)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR

    if not args.command:
        parser.print_help()
        return EXIT_ERROR

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s - %(levelname)s - %(message)s')

    try:
        return args.func(args, config)
    except NotChaoticError as e:
        print(f"❌ Not chaotic: {e}")
        return EXIT_NOT_CHAOTIC
    except DivergenceError as e:
        print(f"❌ Divergence at step {e.step}: {e}")
        return EXIT_DIVERGENCE
    except (OSError, ValueError, KeyError, TypeError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"❌ {e}")
        return EXIT_ERROR
