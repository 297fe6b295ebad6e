"""Seeded trial loops, classification metrics, and cross-trial aggregation.

A trial regenerates (or re-splits) its data from a per-trial derived seed,
fits the classifier, predicts the held-out points, and summarizes the
selected bandwidths per class. Aggregation across trials is order-fixed so
reports are byte-identical regardless of worker count.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .classifier import TrainingSet, fit
from .datasets import DatasetManifest, load_csv, standardize, stratified_split
from .features import summarize_bandwidths
from .rodeo import RodeoConfig
from .synth import augment_noise, generate_ex1, generate_ex2, generate_ex3


def accuracy(true_labels, predicted_labels) -> float:
    true_labels = np.asarray(true_labels)
    predicted_labels = np.asarray(predicted_labels)
    if true_labels.shape != predicted_labels.shape or true_labels.size == 0:
        raise ValueError("label vectors must be nonempty and of equal length")
    return float((true_labels == predicted_labels).mean())


def confusion_matrix(true_labels, predicted_labels, class_count: int) -> np.ndarray:
    """counts[t-1, p-1] for labels 1..c; rows = true, cols = predicted."""
    cm = np.zeros((class_count, class_count), dtype=np.int64)
    for t, p in zip(np.asarray(true_labels), np.asarray(predicted_labels)):
        cm[int(t) - 1, int(p) - 1] += 1
    return cm


def macro_precision_specificity(cm: np.ndarray) -> tuple:
    """One-vs-rest macro averages; classes with no predicted positives are
    excluded from the precision average."""
    cm = np.asarray(cm)
    c = cm.shape[0]
    total = cm.sum()
    precisions, specificities = [], []
    for y in range(c):
        tp = cm[y, y]
        fp = cm[:, y].sum() - tp
        fn = cm[y, :].sum() - tp
        tn = total - tp - fp - fn
        if tp + fp > 0:
            precisions.append(tp / (tp + fp))
        if tn + fp > 0:
            specificities.append(tn / (tn + fp))
    precision = float(np.mean(precisions)) if precisions else float("nan")
    specificity = float(np.mean(specificities)) if specificities else float("nan")
    return precision, specificity


@dataclass
class TrialResult:
    accuracy: float
    precision: float
    specificity: float
    z_matrix: np.ndarray  # (c, d) z-scores of mean selected bandwidths
    mean_bw_matrix: np.ndarray  # (c, d) mean selected bandwidths
    wall_time: float


@dataclass
class TrialAggregate:
    experiment: dict  # resolved experiment description (id, params, seed)
    class_labels: list
    accuracies: list
    precisions: list
    specificities: list
    wall_times: list
    mean_z_matrix: np.ndarray  # (c, d), mean over trials
    mean_bw_matrix: np.ndarray  # (c, d), mean over trials
    bw_quartiles: np.ndarray  # (c, d, 5): min, q1, median, q3, max over trials
    baseline_accuracies: list = field(default_factory=list)

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.accuracies, ddof=1)) if len(self.accuracies) > 1 else float("nan")

    def to_dict(self) -> dict:
        def _std(v):
            return float(np.std(v, ddof=1)) if len(v) > 1 else None

        doc = {
            "experiment": self.experiment,
            "class_labels": list(self.class_labels),
            "trials": len(self.accuracies),
            "accuracy": {"mean": float(np.mean(self.accuracies)), "std": _std(self.accuracies),
                         "per_trial": [float(v) for v in self.accuracies]},
            "precision": {"mean": float(np.mean(self.precisions)), "std": _std(self.precisions),
                          "per_trial": [float(v) for v in self.precisions]},
            "specificity": {"mean": float(np.mean(self.specificities)), "std": _std(self.specificities),
                            "per_trial": [float(v) for v in self.specificities]},
            "mean_z_matrix": self.mean_z_matrix.tolist(),
            "mean_bandwidth_matrix": self.mean_bw_matrix.tolist(),
        }
        if self.baseline_accuracies:
            doc["baseline_accuracy"] = {
                "mean": float(np.mean(self.baseline_accuracies)),
                "std": _std(self.baseline_accuracies),
                "per_trial": [float(v) for v in self.baseline_accuracies],
            }
        return doc

    def timings_dict(self) -> dict:
        """Wall times live outside metrics.json: they are hardware-dependent
        and would break the byte-identical-across-worker-counts guarantee."""
        return {
            "wall_time_sec": {
                "mean": float(np.mean(self.wall_times)),
                "per_trial": [float(v) for v in self.wall_times],
            }
        }


def _trial_data(experiment: str, trial_seed, params: dict):
    """Materialize (TrainingSet, X_test, y_test) for one trial."""
    if experiment == "ex1":
        return generate_ex1(trial_seed, params["n_train"], params["n_test"],
                            pool_size=params.get("pool_size", 1000))
    if experiment == "ex2":
        train, X, y, _ = generate_ex2(trial_seed, params["groups"], params["n_train"], params["n_test"])
        return train, X, y
    if experiment == "ex3":
        train, X, y, _ = generate_ex3(trial_seed, params["n_train"], params.get("group_count", 2),
                                      n_test=params["n_test"], groups=params.get("groups"))
        return train, X, y
    if experiment == "manifest":
        frame = params["frame"]
        train, X, y = stratified_split(
            frame, params["n_train"], params["n_test"], trial_seed
        )
        if params.get("standardize"):
            train, X = standardize(train, X)
        return train, X, y
    raise ValueError(f"unknown experiment id: {experiment!r}")


def run_trial(experiment: str, trial_seed, params: dict, config: RodeoConfig,
              priors: str = "uniform", with_baseline: bool = False):
    t0 = time.perf_counter()
    train, X_test, y_test = _trial_data(experiment, trial_seed, params)
    clf = fit(train, config, priors=priors)
    posts = clf.predict_batch(X_test)
    predicted = np.array([p.predicted for p in posts])
    cm = confusion_matrix(y_test, predicted, train.class_count)
    acc = accuracy(y_test, predicted)
    prec, spec = macro_precision_specificity(cm)
    # bandwidth summaries: per class, over the test points assigned to it,
    # falling back to all test points when a class receives none
    c, d = train.class_count, train.d
    z_matrix = np.zeros((c, d))
    bw_matrix = np.zeros((c, d))
    for yi, lab in enumerate(train.labels):
        mask = predicted == lab
        if not np.any(mask):
            mask = np.ones(len(posts), dtype=bool)
        bws = [posts[i].local_bandwidths[yi] for i in np.nonzero(mask)[0]]
        summary = summarize_bandwidths(bws, lab, config.tau0)
        z_matrix[yi] = summary.z_scores
        bw_matrix[yi] = summary.mean_bandwidths
    baseline_acc = None
    if with_baseline:
        base_pred = np.array([clf.baseline_fixed_bandwidth_posterior(q).predicted for q in X_test])
        baseline_acc = accuracy(y_test, base_pred)
    result = TrialResult(
        accuracy=acc,
        precision=prec,
        specificity=spec,
        z_matrix=z_matrix,
        mean_bw_matrix=bw_matrix,
        wall_time=time.perf_counter() - t0,
    )
    return result, baseline_acc, list(train.labels)


def run_experiment(experiment: str, trials: int, seed: int, config: RodeoConfig | None = None,
                   priors: str = "uniform", n_jobs: int = 1, with_baseline: bool = False,
                   manifest: DatasetManifest | None = None, **params) -> TrialAggregate:
    """Run seeded trials of one experiment design and aggregate the results."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    config = config or RodeoConfig()
    params = dict(params)
    if experiment == "manifest":
        if manifest is None:
            raise ValueError("manifest experiment needs a DatasetManifest")
        frame = load_csv(manifest)
        if manifest.noise_augment > 0:
            frame.features = augment_noise(frame.features, manifest.noise_augment, manifest.seed)
        params.setdefault("n_train", manifest.per_class_train)
        params.setdefault("n_test", manifest.per_class_test)
        params["frame"] = frame
        params.setdefault("standardize", False)

    trial_seeds = [(seed, t) for t in range(trials)]
    runner = Parallel(n_jobs=n_jobs) if n_jobs != 1 else None
    jobs = (delayed(run_trial)(experiment, ts, params, config, priors, with_baseline)
            for ts in trial_seeds)
    outputs = runner(jobs) if runner else [
        run_trial(experiment, ts, params, config, priors, with_baseline) for ts in trial_seeds
    ]
    results = [r for r, _, _ in outputs]
    labels = outputs[0][2]
    bw_stack = np.stack([r.mean_bw_matrix for r in results])  # (trials, c, d)
    quart = np.stack(
        [
            bw_stack.min(axis=0),
            np.percentile(bw_stack, 25, axis=0),
            np.percentile(bw_stack, 50, axis=0),
            np.percentile(bw_stack, 75, axis=0),
            bw_stack.max(axis=0),
        ],
        axis=-1,
    )
    exp_desc = {
        "id": experiment,
        "seed": seed,
        "trials": trials,
        "priors": priors,
        "config": config.to_dict(),
        "params": {k: v for k, v in params.items() if k != "frame"},
    }
    if manifest is not None:
        exp_desc["manifest"] = {
            "path": manifest.path,
            "class_filter": manifest.class_filter,
            "noise_augment": manifest.noise_augment,
        }
    return TrialAggregate(
        experiment=exp_desc,
        class_labels=labels,
        accuracies=[r.accuracy for r in results],
        precisions=[r.precision for r in results],
        specificities=[r.specificity for r in results],
        wall_times=[r.wall_time for r in results],
        mean_z_matrix=np.mean([r.z_matrix for r in results], axis=0),
        mean_bw_matrix=np.mean([r.mean_bw_matrix for r in results], axis=0),
        bw_quartiles=quart,
        baseline_accuracies=[b for _, b, _ in outputs if b is not None],
    )
