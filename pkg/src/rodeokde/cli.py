"""Command-line surface: bench, features, plan, predict, gen."""

import argparse
import csv
import json
import os
import sys

import numpy as np

from .classifier import Classifier
from .datasets import DatasetManifest
from .evaluation import run_experiment
from .planner import Ex2Source, FrameSource, PlannerConfig, run_planner
from .reports import emit_reports
from .rodeo import RodeoConfig
from .synth import augment_noise, export_csv, generate_ex1, generate_ex2, generate_ex3


def _add_rodeo_args(p):
    p.add_argument("--c0", type=float, default=1.0, help="initial-bandwidth constant")
    p.add_argument("--beta", type=float, default=0.9, help="bandwidth shrink factor in (0,1)")
    p.add_argument("--tau0", type=float, default=-1.0, help="feature-selection cutpoint")
    p.add_argument("--cn", type=float, default=1.0, help="multiplier on ln(n_y) in the threshold")
    p.add_argument("--h-floor", type=float, default=1e-8)


def _add_experiment_args(p):
    p.add_argument("experiment", choices=["ex1", "ex2", "ex3", "manifest"])
    p.add_argument("--manifest", help="dataset manifest JSON (required for experiment=manifest)")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--train", type=int, default=None, help="training points per class")
    p.add_argument("--test", type=int, default=None, help="test points per class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--groups", help="comma-separated group ids for ex2/ex3 (e.g. 3,5)")
    p.add_argument("--group-count", type=int, default=2, help="number of groups for ex3")
    p.add_argument("--noise", type=int, default=0, help="appended N(0,1) noise columns (manifest)")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--priors", choices=["uniform", "proportional"], default="uniform")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--baseline", action="store_true", help="also run the fixed-bandwidth baseline")
    p.add_argument("--out", default=None, help="report output directory")
    p.add_argument("--no-figures", action="store_true")


def _rodeo_config(args) -> RodeoConfig:
    return RodeoConfig(
        c0=args.c0,
        shrink_factor=args.beta,
        cn_multiplier=args.cn,
        tau0=args.tau0,
        h_floor=args.h_floor,
    )


def _experiment_kwargs(parser, args):
    kwargs = {}
    manifest = None
    if args.experiment == "manifest":
        if not args.manifest:
            parser.error("experiment 'manifest' requires --manifest")
        manifest = DatasetManifest.from_json(args.manifest)
        if args.noise:
            manifest.noise_augment = args.noise
        if args.train is not None:
            manifest.per_class_train = args.train
        if args.test is not None:
            manifest.per_class_test = args.test
        kwargs["standardize"] = args.standardize
    else:
        defaults = {"ex1": (150, 100), "ex2": (200, 150), "ex3": (200, 150)}
        n_train, n_test = defaults[args.experiment]
        kwargs["n_train"] = args.train if args.train is not None else n_train
        kwargs["n_test"] = args.test if args.test is not None else n_test
        if args.groups:
            kwargs["groups"] = [int(g) for g in args.groups.split(",")]
        elif args.experiment == "ex2":
            kwargs["groups"] = [1, 2, 3, 4, 5]
        if args.experiment == "ex3":
            kwargs["group_count"] = args.group_count
    return kwargs, manifest


def _print_resolved(args, config: RodeoConfig, extra=None):
    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    resolved["rodeo_config"] = config.to_dict()
    if extra:
        resolved.update(extra)
    print("resolved configuration: " + json.dumps(resolved, sort_keys=True))


def cmd_bench(parser, args) -> int:
    config = _rodeo_config(args)
    kwargs, manifest = _experiment_kwargs(parser, args)
    _print_resolved(args, config)
    agg = run_experiment(
        args.experiment,
        trials=args.trials,
        seed=args.seed,
        config=config,
        priors=args.priors,
        n_jobs=args.threads,
        with_baseline=args.baseline,
        manifest=manifest,
        **kwargs,
    )
    doc = agg.to_dict()
    print(f"trials: {doc['trials']}")
    for metric in ("accuracy", "precision", "specificity"):
        mean = doc[metric]["mean"]
        std = doc[metric]["std"]
        std_s = f"{std:.4f}" if std is not None else "n/a"
        print(f"{metric}: mean={mean:.4f} std={std_s}")
    if agg.baseline_accuracies:
        print(f"baseline accuracy: mean={np.mean(agg.baseline_accuracies):.4f}")
    print(f"wall time per trial: mean={np.mean(agg.wall_times):.2f}s (not a reproducible quantity)")
    if args.out:
        written = emit_reports(agg, args.out, render_figures=not args.no_figures)
        print("wrote: " + ", ".join(written))
    if getattr(args, "save_model", None):
        from .classifier import fit as fit_classifier
        from .evaluation import _trial_data

        train, _, _ = _trial_data(args.experiment, (args.seed, 0), _bench_params(kwargs, manifest))
        clf = fit_classifier(train, config, priors=args.priors)
        with open(args.save_model, "w", encoding="utf-8") as fh:
            fh.write(clf.to_json())
        print(f"saved model: {args.save_model}")
    return 0


def _bench_params(kwargs, manifest):
    params = dict(kwargs)
    if manifest is not None:
        from .datasets import load_csv

        frame = load_csv(manifest)
        if manifest.noise_augment > 0:
            frame.features = augment_noise(frame.features, manifest.noise_augment, manifest.seed)
        params["frame"] = frame
        params.setdefault("n_train", manifest.per_class_train)
        params.setdefault("n_test", manifest.per_class_test)
    return params


def cmd_features(parser, args) -> int:
    config = _rodeo_config(args)
    kwargs, manifest = _experiment_kwargs(parser, args)
    _print_resolved(args, config)
    agg = run_experiment(
        args.experiment,
        trials=args.trials,
        seed=args.seed,
        config=config,
        priors=args.priors,
        n_jobs=args.threads,
        manifest=manifest,
        **kwargs,
    )
    for yi, lab in enumerate(agg.class_labels):
        z = agg.mean_z_matrix[yi]
        selected = sorted(int(j) + 1 for j in np.nonzero(z <= config.tau0)[0])
        print(f"class {lab}: relevant dimensions {selected}")
    if args.out:
        written = emit_reports(agg, args.out, render_figures=not args.no_figures)
        print("wrote: " + ", ".join(written))
    return 0


def cmd_plan(parser, args) -> int:
    config = _rodeo_config(args)
    try:
        planner_config = PlannerConfig(
            n0=args.n0,
            n_test=args.n_test,
            epsilon_star=args.epsilon_star,
            n_add_frac=args.n_add_frac,
        )
    except ValueError as exc:
        parser.error(str(exc))
    _print_resolved(args, config)
    if args.source == "ex2":
        groups = [int(g) for g in args.groups.split(",")] if args.groups else [1, 2, 3, 4, 5]
        source = Ex2Source(args.seed, groups=groups, max_per_class=args.max_per_class)
    else:
        if not args.manifest:
            parser.error("source 'manifest' requires --manifest")
        from .datasets import load_csv

        manifest = DatasetManifest.from_json(args.manifest)
        source = FrameSource(load_csv(manifest), args.seed)
    trace = run_planner(source, planner_config, config)
    print(f"status: {trace.status}")
    for rnd in trace.rounds:
        print(f"round {rnd.round}: N={rnd.N} sizes={rnd.sizes} epsilon={rnd.epsilon:.6g}")
    if trace.rounds:
        print(f"final sizes: {trace.final_sizes}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "trace.jsonl")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(trace.to_jsonl())
        print(f"wrote: {path}")
    return 0


def cmd_predict(parser, args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        clf = Classifier.from_json(fh.read())
    with open(args.queries, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = [row for row in reader if row]
    c = clf.data.class_count
    out_header = ["predicted"] + [f"p{lab}" for lab in clf.data.labels]
    lines = [",".join(out_header)]
    for row in rows:
        # tolerate a trailing label column from gen/export files
        if len(row) in (clf.data.d, clf.data.d + 1):
            feats = row[: clf.data.d]
        else:
            print(
                f"error: query row has {len(row)} columns, expected d={clf.data.d} features",
                file=sys.stderr,
            )
            return 2
        try:
            q = np.array([float(v) for v in feats])
        except ValueError:
            print("error: non-numeric feature value in query file", file=sys.stderr)
            return 2
        post = clf.posterior(q)
        lines.append(
            f"{post.predicted}," + ",".join(repr(float(p)) for p in post.posteriors)
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote: {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_gen(parser, args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if args.experiment == "ex1":
        train, X, y = generate_ex1(args.seed, args.train or 150, args.test or 100)
    elif args.experiment == "ex2":
        groups = [int(g) for g in args.groups.split(",")] if args.groups else [1, 2, 3, 4, 5]
        train, X, y, _ = generate_ex2(args.seed, groups, args.train or 200, args.test or 150)
    else:
        train, X, y, _ = generate_ex3(args.seed, args.train or 200, args.group_count,
                                      n_test=args.test or 150)
    train_X = np.vstack(train.class_samples)
    train_y = np.concatenate(
        [np.full(m.shape[0], lab) for lab, m in zip(train.labels, train.class_samples)]
    )
    if args.noise:
        train_X = augment_noise(train_X, args.noise, args.seed)
        X = augment_noise(X, args.noise, args.seed + 1)
    train_path = os.path.join(args.out, "train.csv")
    test_path = os.path.join(args.out, "test.csv")
    export_csv(train_path, train_X, train_y)
    export_csv(test_path, X, y)
    print(f"wrote: {train_path}, {test_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rodeokde",
        description="Sparse-KDE multi-class classification with local greedy bandwidth selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="run a classification benchmark and emit reports")
    _add_experiment_args(p)
    _add_rodeo_args(p)
    p.add_argument("--save-model", help="write the trial-0 fitted model as JSON")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("features", help="emit z-score and bandwidth reports per class")
    _add_experiment_args(p)
    _add_rodeo_args(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("plan", help="estimate per-class training sizes")
    p.add_argument("--source", choices=["ex2", "manifest"], default="ex2")
    p.add_argument("--manifest")
    p.add_argument("--groups", help="comma-separated group ids for the ex2 source")
    p.add_argument("--epsilon-star", type=float, required=True)
    p.add_argument("--n0", type=int, default=50)
    p.add_argument("--n-test", type=int, default=50)
    p.add_argument("--n-add-frac", type=float, default=0.1)
    p.add_argument("--max-per-class", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    _add_rodeo_args(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("predict", help="predict labels for a query CSV with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gen", help="export a synthetic dataset as CSV")
    p.add_argument("experiment", choices=["ex1", "ex2", "ex3"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train", type=int, default=None)
    p.add_argument("--test", type=int, default=None)
    p.add_argument("--groups")
    p.add_argument("--group-count", type=int, default=2)
    p.add_argument("--noise", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
