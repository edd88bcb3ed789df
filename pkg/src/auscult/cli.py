"""Command-line entry point.

Subcommands compose the library: generate a synthetic cohort, extract
features from a raster file, train an agent, evaluate checkpoints, replay
greedy episodes, serve the guided-examination HTTP API, and print the
most-auscultated-point histogram.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .cohort import CohortConfig, generate_cohort, load_cohort, save_cohort
from .env import AuscultationEnv, EnvConfig
from .errors import AuscultError
from .evaluate import cross_validate, cross_validate_fixed, evaluate_interactive
from .qnet import load_checkpoint, save_checkpoint
from .raster import FeatureConfig, extract_features, load_raster
from .trainer import TrainConfig, run_episode, train, write_curves


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auscult",
        description="interactive lung auscultation agent toolkit")
    parser.add_argument("--seed", dest="global_seed", type=int, default=0,
                        help="default seed for all subcommands")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cohort", help="generate a synthetic examination cohort")
    p.add_argument("--n", type=int, default=570)
    p.add_argument("--out", required=True)
    p.add_argument("--noise", type=float, default=0.05,
                   help="observation noise sigma")
    _add_seed(p)
    p.set_defaults(func=cmd_cohort)

    p = sub.add_parser("features", help="print the 8 features of a raster file")
    p.add_argument("--raster", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train an agent on a cohort")
    p.add_argument("--cohort", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--episodes", type=int, default=200)
    p.add_argument("--gamma", type=float, default=0.93)
    p.add_argument("--lr", type=float, default=0.0001)
    p.add_argument("--static", action="store_true",
                   help="train the exhaustive-sweep baseline")
    p.add_argument("--curves", help="prefix for learning-curve table files")
    _add_seed(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate across repeated fold partitions")
    p.add_argument("--model", help="fixed checkpoint to score (no retraining)")
    p.add_argument("--cohort", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--repeats", type=int, default=30)
    p.add_argument("--episodes", type=int, default=200,
                   help="training episodes per fold when retraining")
    p.add_argument("--static", action="store_true",
                   help="retrain the sweep baseline instead")
    p.add_argument("--out", help="write the full report document here")
    p.add_argument("--table", help="write the per-fold table here")
    _add_seed(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="replay greedy episodes, one line each")
    p.add_argument("--model", required=True)
    p.add_argument("--cohort", required=True)
    p.add_argument("--n", type=int, default=100)
    _add_seed(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the guided-examination HTTP service")
    p.add_argument("--model", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--idle-timeout", type=float, default=1800.0)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("histogram",
                       help="most-auscultated-point counts over greedy rollouts")
    p.add_argument("--model", required=True)
    p.add_argument("--cohort", required=True)
    _add_seed(p)
    p.set_defaults(func=cmd_histogram)

    return parser


def _add_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None)


def _seed(args) -> int:
    return args.seed if getattr(args, "seed", None) is not None else args.global_seed


def cmd_cohort(args) -> int:
    config = CohortConfig(seed=_seed(args), noise_sigma=args.noise)
    cohort = generate_cohort(args.n, config)
    save_cohort(cohort, args.out)
    print(f"wrote {len(cohort)} examinations to {args.out}")
    return 0


def cmd_features(args) -> int:
    raster = load_raster(args.raster)
    config = FeatureConfig(event_threshold=args.threshold,
                           pathology_threshold=args.threshold)
    features = extract_features(raster, config)
    print(",".join(repr(float(v)) for v in features.as_vector()))
    return 0


def cmd_train(args) -> int:
    cohort = load_cohort(args.cohort)
    config = TrainConfig(episodes=args.episodes, gamma=args.gamma,
                         lr=args.lr, seed=_seed(args))
    result = train(cohort, config, static=args.static)
    save_checkpoint(result.params, None, {
        "episodes": config.episodes,
        "seed": config.seed,
        "static": args.static,
        "updates": result.updates,
    }, args.out)
    if args.curves:
        write_curves(result, f"{args.curves}-rewards.tsv",
                     f"{args.curves}-aps.tsv")
    print(f"trained {config.episodes} episodes ({result.updates} updates); "
          f"checkpoint at {args.out}")
    return 0


def cmd_eval(args) -> int:
    cohort = load_cohort(args.cohort)
    if args.model:
        params, _, _ = load_checkpoint(args.model)
        report = cross_validate_fixed(params, cohort, args.folds,
                                      args.repeats, seed=_seed(args))
    else:
        config = TrainConfig(episodes=args.episodes, seed=_seed(args))
        report = cross_validate(cohort, config, args.folds, args.repeats,
                                seed=_seed(args), static=args.static)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report.as_document(), fh, indent=2)
    if args.table:
        with open(args.table, "w") as fh:
            fh.write(report.fold_table())
    print(f"folds={report.n_folds} repeats={report.n_repeats}")
    print(f"bac {report.mean_bac:.4f} +/- {report.std_bac:.4f}")
    print(f"f1_alarm {report.mean_f1_alarm:.4f} +/- {report.std_f1_alarm:.4f}")
    print(f"f1_not_alarm {report.mean_f1_not_alarm:.4f} "
          f"+/- {report.std_f1_not_alarm:.4f}")
    print(f"mean_aps {report.mean_aps:.4f} +/- {report.std_aps:.4f}")
    return 0


def cmd_simulate(args) -> int:
    params, _, _ = load_checkpoint(args.model)
    cohort = load_cohort(args.cohort)
    ss = np.random.SeedSequence(_seed(args))
    pick_ss, env_ss = ss.spawn(2)
    pick = np.random.default_rng(pick_ss)
    env = AuscultationEnv(EnvConfig(), rng=np.random.default_rng(env_ss))
    for i in range(args.n):
        exam = cohort[int(pick.integers(0, len(cohort)))]
        result = run_episode(params, env, exam, epsilon=0.0, rng=None)
        points = ",".join(str(a + 1) for a in result.actions if a < 12)
        if result.declared_label is None:
            outcome = "limit reached"
        else:
            verdict = "correct" if result.correct else "wrong"
            outcome = f"declare {result.declared_label} {verdict}"
        print(f"episode {i + 1}: exam {exam.id} label {exam.label} | "
              f"points [{points}] | {outcome} | "
              f"reward {result.total_reward:.2f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import GuideService, create_app

    params, _, metadata = load_checkpoint(args.model)
    model_id = str(metadata.get("name", "default")) if metadata else "default"
    service = GuideService({model_id: params},
                           metadata={model_id: metadata or {}},
                           idle_timeout=args.idle_timeout)
    uvicorn.run(create_app(service), host=args.host, port=args.port)
    return 0


def cmd_histogram(args) -> int:
    params, _, _ = load_checkpoint(args.model)
    cohort = load_cohort(args.cohort)
    report = evaluate_interactive(params, cohort, seed=_seed(args))
    for point, count in enumerate(report.point_counts, start=1):
        print(f"point {point:2d}: {count}")
    print(f"total auscultations: {sum(report.point_counts)}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AuscultError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
