"""Per-class density stores, posterior-ratio classification, fixed-bandwidth baseline.

The method is memory-based: fitting validates and stores the per-class
training matrices; bandwidths are selected per query point at prediction
time. Class densities are combined in log-space and normalized with
log-sum-exp, so no posterior ever depends on an absolute density scale.
"""

import json
from dataclasses import dataclass

import numpy as np

from .rodeo import RodeoConfig, initial_bandwidth, select_local_bandwidths

MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TrainingSet:
    """Per-class feature matrices with contiguous integer labels 1..c."""

    labels: tuple  # class labels, sorted, contiguous 1..c
    class_samples: tuple  # one (n_y, d) matrix per label

    @classmethod
    def from_arrays(cls, X, y) -> "TrainingSet":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        labels = sorted(set(int(v) for v in y))
        groups = tuple(np.ascontiguousarray(X[y == lab]) for lab in labels)
        return cls(labels=tuple(labels), class_samples=groups)

    @classmethod
    def from_class_list(cls, classes) -> "TrainingSet":
        """classes: iterable of (label, samples matrix)."""
        labels = [int(lab) for lab, _ in classes]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate class labels")
        order = np.argsort(labels)
        labels = [labels[i] for i in order]
        mats = [np.ascontiguousarray(np.atleast_2d(np.asarray(m, dtype=np.float64))) for _, m in classes]
        mats = [mats[i] for i in order]
        return cls(labels=tuple(labels), class_samples=tuple(mats))

    def validate(self):
        c = len(self.labels)
        if c < 2:
            raise ValueError("need at least 2 classes")
        if list(self.labels) != list(range(1, c + 1)):
            raise ValueError(f"labels must be contiguous 1..c, got {self.labels}")
        dims = {m.shape[1] for m in self.class_samples}
        if len(dims) != 1:
            raise ValueError(f"inconsistent feature dimension across classes: {sorted(dims)}")
        for lab, m in zip(self.labels, self.class_samples):
            if m.shape[0] < 1:
                raise ValueError(f"class {lab} is empty")

    @property
    def d(self) -> int:
        return self.class_samples[0].shape[1]

    @property
    def class_count(self) -> int:
        return len(self.labels)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([m.shape[0] for m in self.class_samples])


@dataclass(frozen=True)
class ClassPosterior:
    log_densities: np.ndarray  # log p_y(x; H_y) per class
    posteriors: np.ndarray  # normalized across classes
    predicted: int  # class label (1..c)
    local_bandwidths: tuple  # one bandwidth vector per class


def _normalize(log_scores, labels, sizes):
    """Softmax in log-space with an all-underflow prior fallback."""
    log_scores = np.asarray(log_scores, dtype=np.float64)
    if np.all(np.isneginf(log_scores)):
        posteriors = sizes / sizes.sum()
        predicted = labels[int(np.argmax(sizes))]
        return posteriors, predicted
    m = np.max(log_scores)
    w = np.exp(log_scores - m)
    posteriors = w / w.sum()
    predicted = labels[int(np.argmax(posteriors))]
    return posteriors, predicted


class Classifier:
    """Immutable handle over a validated training set.

    priors: "uniform" scores classes by pure density ratio; "proportional"
    weights each class density by n_y / n.
    """

    def __init__(self, data: TrainingSet, config: RodeoConfig, priors: str = "uniform"):
        data.validate()
        if priors not in ("uniform", "proportional"):
            raise ValueError(f"unknown priors mode: {priors!r}")
        for lab, m in zip(data.labels, data.class_samples):
            try:
                initial_bandwidth(m.shape[0], config)
            except ValueError as exc:
                raise ValueError(f"class {lab}: {exc}") from exc
        self.data = data
        self.config = config
        self.priors = priors
        self.h0 = np.array([initial_bandwidth(m.shape[0], config) for m in data.class_samples])

    # -- prediction ------------------------------------------------------

    def posterior(self, query) -> ClassPosterior:
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.data.d,):
            raise ValueError(f"query has dimension {query.shape}, expected ({self.data.d},)")
        results = [
            select_local_bandwidths(query, m, self.config) for m in self.data.class_samples
        ]
        log_dens = np.array([r.log_density for r in results])
        scores = log_dens + self._log_priors()
        posteriors, predicted = _normalize(scores, self.data.labels, self.data.sizes.astype(float))
        return ClassPosterior(
            log_densities=log_dens,
            posteriors=posteriors,
            predicted=predicted,
            local_bandwidths=tuple(r.bandwidths for r in results),
        )

    def predict_batch(self, queries) -> list:
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        if queries.size == 0:
            return []
        return [self.posterior(q) for q in queries]

    def _log_priors(self):
        if self.priors == "proportional":
            sizes = self.data.sizes.astype(float)
            return np.log(sizes / sizes.sum())
        return np.zeros(self.data.class_count)

    # -- fixed-bandwidth baseline ----------------------------------------

    def _reference_bandwidths(self, samples):
        """Normal-reference rule h_j = sigma_j * (4 / ((d+2) n))^(1/(d+4))."""
        n, d = samples.shape
        if n < 2:
            sigma = np.full(d, self.config.h_floor)
        else:
            sigma = samples.std(axis=0, ddof=1)
            sigma = np.where(sigma > 0.0, sigma, self.config.h_floor)
        return sigma * (4.0 / ((d + 2) * n)) ** (1.0 / (d + 4))

    def baseline_fixed_bandwidth_posterior(self, query) -> ClassPosterior:
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.data.d,):
            raise ValueError(f"query has dimension {query.shape}, expected ({self.data.d},)")
        from .kernels import log_product_kernel_density

        bws = [self._reference_bandwidths(m) for m in self.data.class_samples]
        log_dens = np.array(
            [
                log_product_kernel_density(query, m, bw)
                for m, bw in zip(self.data.class_samples, bws)
            ]
        )
        scores = log_dens + self._log_priors()
        posteriors, predicted = _normalize(scores, self.data.labels, self.data.sizes.astype(float))
        return ClassPosterior(
            log_densities=log_dens,
            posteriors=posteriors,
            predicted=predicted,
            local_bandwidths=tuple(bws),
        )

    # -- persistence -----------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "schema_version": MODEL_SCHEMA_VERSION,
            "d": self.data.d,
            "c": self.data.class_count,
            "priors": self.priors,
            "config": self.config.to_dict(),
            "classes": [
                {"label": lab, "samples": m.tolist()}
                for lab, m in zip(self.data.labels, self.data.class_samples)
            ],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Classifier":
        doc = json.loads(text)
        if doc.get("schema_version") != MODEL_SCHEMA_VERSION:
            raise ValueError(f"unsupported model schema version: {doc.get('schema_version')}")
        data = TrainingSet.from_class_list(
            [(entry["label"], np.array(entry["samples"], dtype=np.float64)) for entry in doc["classes"]]
        )
        if data.d != doc["d"] or data.class_count != doc["c"]:
            raise ValueError("model document is inconsistent with its class matrices")
        return cls(data, RodeoConfig.from_dict(doc["config"]), priors=doc.get("priors", "uniform"))


def fit(data: TrainingSet, config: RodeoConfig, priors: str = "uniform") -> Classifier:
    return Classifier(data, config, priors=priors)
