"""Command-line entry point: ``parrondo-sim {games,simulate,gen-data}``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .engine import (DEFAULT_SOURCE, FIXTURE_PREFIX, ExperimentConfig, load_config_prices,
                     run_experiment, run_repetition)
from .games import EPSILON_MAX, Game, GameParams, markov_drift, simulate_games
from .market import (SawtoothSpec, file_digest, fixture_path, generate_sawtooth,
                     load_fixture_spec, prices_to_csv)
from .report import (digest, ranking_table, single_run_csv, summaries_json, summary_csv,
                     trajectories_csv, write_outputs)
from .strategies import ALL_STRATEGIES, ReinvestMode, StrategyKind

Z_BAND = 3.0


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _epsilon(text: str) -> float:
    value = float(text)
    if not 0.0 <= value < EPSILON_MAX:
        raise argparse.ArgumentTypeError(f"epsilon must lie in [0, {EPSILON_MAX}), got {text}")
    return value


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {text}")
    return value


def _prob_list(text: str) -> tuple[float, ...]:
    return tuple(_probability(t) for t in text.split(",") if t.strip())


def _strategies(text: str) -> tuple[StrategyKind, ...]:
    if text.strip().lower() == "all":
        return ALL_STRATEGIES
    try:
        return tuple(StrategyKind.parse(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _endpoints(text: str) -> tuple[float, ...]:
    values = tuple(float(t) for t in text.split(","))
    bad = [v for v in values if not 0.0 < v < 100.0]
    if bad:
        raise argparse.ArgumentTypeError(f"endpoints must lie in (0, 100), got {bad}")
    return values


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=_u64, default=0, help="master seed (unsigned 64-bit)")
    shared.add_argument("--out", type=Path, default=None, help="output directory")
    shared.add_argument("--json", action="store_true", help="print JSON instead of text")
    shared.add_argument("--threads", type=_positive_int, default=1,
                        help="worker count; results do not depend on it")

    parser = argparse.ArgumentParser(prog="parrondo-sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("games", parents=[shared], help="Parrondo coin games: oracle vs simulation")
    g.add_argument("--epsilon", type=_epsilon, default=0.005)
    g.add_argument("--rounds", type=_positive_int, default=1_000_000)
    g.add_argument("--reps", type=_positive_int, default=100)
    g.add_argument("--modulus", type=_positive_int, default=3)
    g.add_argument("--mix-prob", type=_probability, default=0.5)

    s = sub.add_parser("simulate", parents=[shared], help="run the trading experiment")
    src = s.add_mutually_exclusive_group()
    src.add_argument("--fixture", choices=["table2"], default=None)
    src.add_argument("--data", type=Path, default=None, help="date,ticker,close CSV")
    s.add_argument("--reps", type=_positive_int, default=1000)
    s.add_argument("--days", type=_positive_int, default=252)
    s.add_argument("--strategies", type=_strategies, default=ALL_STRATEGIES,
                   help="comma list of bah,random,insider,blsh,blsr,brsh,bhsl or 'all'")
    s.add_argument("--hint-probs", type=_prob_list, default=(0.05,),
                   help="insider hint probabilities, e.g. 0.01,0.05,0.10")
    s.add_argument("--per-stock", type=float, default=10000.0)
    s.add_argument("--reinvest-mode", choices=[m.value for m in ReinvestMode],
                   default=ReinvestMode.MULTIPLICITY.value)
    s.add_argument("--config", type=Path, default=None,
                   help="ExperimentConfig JSON or a run manifest to replay")
    s.add_argument("--emit-single-run", action="store_true",
                   help="also write repetition 0's trajectories to single_run.csv")

    d = sub.add_parser("gen-data", parents=[shared], help="write a synthetic saw-tooth price CSV")
    spec = load_fixture_spec()
    d.add_argument("--days", type=_positive_int, default=spec.days)
    d.add_argument("--amplitude", type=float, default=spec.oscillation_amplitude)
    d.add_argument("--period", type=float, default=spec.oscillation_period)
    d.add_argument("--endpoints", type=_endpoints, default=spec.endpoints)
    d.add_argument("--tickers", type=lambda t: tuple(x.strip() for x in t.split(",")), default=None)
    d.set_defaults(seed=spec.seed)
    return parser


def cmd_games(args) -> int:
    params = GameParams(args.epsilon, args.modulus, args.mix_prob)
    rows = {}
    for game in Game:
        exact = markov_drift(params, game)
        est = simulate_games(params, game, args.rounds, args.reps, args.seed, args.threads)
        z = (est.drift - exact.drift_per_round) / est.stderr if est.stderr > 0 else math.nan
        rows[game.value] = {
            "analytic_drift": exact.drift_per_round,
            "stationary": list(exact.stationary),
            "simulated_drift": est.drift,
            "stderr": None if math.isnan(est.stderr) else est.stderr,
            "z": None if math.isnan(z) else z,
        }
    sim = {k: v["simulated_drift"] for k, v in rows.items()}
    paradox = sim["A"] < 0 and sim["B"] < 0 and sim["combined"] > 0
    agreement = all(r["z"] is not None and abs(r["z"]) <= Z_BAND for r in rows.values())
    report = {
        "epsilon": args.epsilon, "modulus": args.modulus, "mix_prob": args.mix_prob,
        "rounds": args.rounds, "reps": args.reps, "seed": args.seed,
        "games": rows, "paradox": paradox, "oracle_agreement": agreement,
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.json:
        sys.stdout.write(text)
    else:
        print(f"epsilon={args.epsilon} rounds={args.rounds} reps={args.reps} seed={args.seed}")
        print(f"{'game':<10}{'analytic':>12}{'simulated':>12}{'stderr':>11}{'z':>8}  stationary")
        for name, r in rows.items():
            z = "n/a" if r["z"] is None else f"{r['z']:+.2f}"
            se = "n/a" if r["stderr"] is None else f"{r['stderr']:.2e}"
            pi = ", ".join(f"{p:.4f}" for p in r["stationary"])
            print(f"{name:<10}{r['analytic_drift']:>+12.6f}{r['simulated_drift']:>+12.6f}"
                  f"{se:>11}{z:>8}  ({pi})")
        print(f"paradox (A<0, B<0, combined>0): {'PASS' if paradox else 'FAIL'}")
        print(f"oracle agreement (|z| <= {Z_BAND:g}): {'PASS' if agreement else 'FAIL'}")
    if args.out is not None:
        config = {k: report[k] for k in ("epsilon", "modulus", "mix_prob", "rounds", "reps")}
        write_outputs(args.out, {"games.json": text}, "games", config, args.seed)
    return 0


def _experiment_config(args) -> tuple[ExperimentConfig, str | None]:
    if args.config is not None:
        doc = json.loads(args.config.read_text(encoding="utf-8"))
        expected = doc.get("input_digest")
        if "config" in doc:
            doc = doc["config"]
        return ExperimentConfig.from_dict(doc), expected
    if args.data is not None:
        source = str(args.data)
    elif args.fixture is not None:
        source = FIXTURE_PREFIX + args.fixture
    else:
        source = DEFAULT_SOURCE
    config = ExperimentConfig(
        price_source=source, days=args.days, reps=args.reps, per_stock_value=args.per_stock,
        strategies=args.strategies, hint_probs=args.hint_probs, master_seed=args.seed,
        reinvest_mode=args.reinvest_mode)
    return config, None


def _source_digest(config: ExperimentConfig) -> str | None:
    source = config.price_source
    if isinstance(source, SawtoothSpec):
        return None
    if source.startswith(FIXTURE_PREFIX):
        path = fixture_path(source[len(FIXTURE_PREFIX):])
    else:
        path = Path(source)
        if not path.exists():
            raise FileNotFoundError(f"price data file not found: {path}")
    return "sha256:" + file_digest(path)


def cmd_simulate(args) -> int:
    config, expected_digest = _experiment_config(args)
    input_digest = _source_digest(config)
    if expected_digest and input_digest != expected_digest:
        print(f"warning: input data digest {input_digest} differs from manifest "
              f"{expected_digest}", file=sys.stderr)
    prices = load_config_prices(config)
    summaries = run_experiment(config, prices, threads=args.threads)

    if args.json:
        sys.stdout.write(json.dumps(summaries_json(summaries), indent=2) + "\n")
    else:
        print(ranking_table(summaries))

    out = args.out if args.out is not None else Path("results")
    files = {"summary.csv": summary_csv(summaries),
             "trajectories.csv": trajectories_csv(summaries)}
    if args.emit_single_run:
        files["single_run.csv"] = single_run_csv(run_repetition(config, 0, prices))
    write_outputs(out, files, "simulate", config.to_dict(), config.master_seed, input_digest)
    print(f"wrote {', '.join(files)} and run_manifest.json to {out}", file=sys.stderr)
    return 0


def cmd_gen_data(args) -> int:
    spec = SawtoothSpec(
        endpoints=args.endpoints, days=args.days, oscillation_amplitude=args.amplitude,
        oscillation_period=args.period, seed=args.seed, tickers=args.tickers or ())
    text = prices_to_csv(generate_sawtooth(spec))
    spec_text = json.dumps({"spec": spec.to_dict()}, indent=2) + "\n"
    out = args.out if args.out is not None else Path(".")
    write_outputs(out, {"prices.csv": text, "spec.json": spec_text}, "gen-data",
                  spec.to_dict(), spec.seed)
    if args.json:
        sys.stdout.write(json.dumps({"prices.csv": digest(text.encode())}) + "\n")
    print(f"wrote prices.csv ({spec.days} days x {len(spec.endpoints)} tickers) to {out}",
          file=sys.stderr)
    return 0


COMMANDS = {"games": cmd_games, "simulate": cmd_simulate, "gen-data": cmd_gen_data}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen-data" and not 0.0 <= args.amplitude < 0.2:
        parser.error("--amplitude must lie in [0, 0.2)")
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
