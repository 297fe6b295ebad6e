"""Variable selection from selected bandwidths: aggregate, standardize, threshold.

Dimensions whose mean selected bandwidth sits well below the per-class
average (z-score at or under the cutpoint tau0) form that class's
high-impact variable set.
"""

from dataclasses import dataclass

import numpy as np

from .rodeo import select_local_bandwidths


@dataclass(frozen=True)
class BandwidthSummary:
    class_label: int
    mean_bandwidths: np.ndarray  # per dimension
    z_scores: np.ndarray  # per dimension, mean 0 / sample std 1
    relevant_set: frozenset  # 0-based dimension indices with z <= tau0


def mean_bandwidths(per_query_bandwidths) -> np.ndarray:
    """Elementwise mean over a stack of per-query bandwidth vectors."""
    stack = np.atleast_2d(np.asarray(per_query_bandwidths, dtype=np.float64))
    if stack.size == 0:
        raise ValueError("empty bandwidth list")
    return stack.mean(axis=0)


def z_scores(mean_bw) -> np.ndarray:
    """Center/scale mean bandwidths; all zeros when there is no spread."""
    mean_bw = np.asarray(mean_bw, dtype=np.float64)
    d = mean_bw.shape[0]
    if d < 2:
        raise ValueError("z-scores need at least 2 dimensions")
    std = mean_bw.std(ddof=1)
    if std == 0.0:
        return np.zeros(d)
    return (mean_bw - mean_bw.mean()) / std


def select_features(z, tau0: float) -> frozenset:
    """Indices with z_j <= tau0 (boundary inclusive)."""
    z = np.asarray(z, dtype=np.float64)
    return frozenset(int(j) for j in np.nonzero(z <= tau0)[0])


def class_feature_report(classifier, evaluation_points, class_label: int) -> BandwidthSummary:
    """Run bandwidth selection for each evaluation point against one class."""
    points = np.atleast_2d(np.asarray(evaluation_points, dtype=np.float64))
    if points.size == 0:
        raise ValueError("no evaluation points")
    idx = classifier.data.labels.index(class_label)
    samples = classifier.data.class_samples[idx]
    bws = [select_local_bandwidths(q, samples, classifier.config).bandwidths for q in points]
    return summarize_bandwidths(bws, class_label, classifier.config.tau0)


def summarize_bandwidths(per_query_bandwidths, class_label: int, tau0: float) -> BandwidthSummary:
    """Aggregate already-selected bandwidth vectors into a class summary."""
    mean_bw = mean_bandwidths(per_query_bandwidths)
    z = z_scores(mean_bw)
    return BandwidthSummary(
        class_label=class_label,
        mean_bandwidths=mean_bw,
        z_scores=z,
        relevant_set=select_features(z, tau0),
    )
