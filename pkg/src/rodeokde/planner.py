"""Adaptive per-class training-size planning.

Alternates density estimation (fit + predict + variable selection on a held
test set) with a resampling step that grows the total budget and splits it
across classes so that the per-class size term n^((2+r)/(4+r)) is
proportional to the estimated risk-bound constant B of each class. Stops
when the bound estimate A.B/N falls below the requested level.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .classifier import TrainingSet, fit
from .features import summarize_bandwidths
from .kernels import GAUSS_L2_SQ, second_partial_density
from .rodeo import RodeoConfig
from .synth import derived_rng, generate_ex2


class SourceExhausted(Exception):
    """A data source cannot supply the requested number of extra samples."""


@dataclass
class PlannerConfig:
    n0: int = 50
    n_test: int = 50
    epsilon_star: float = 1.0
    n_add_frac: float = 0.1  # growth per round, rounded up to a multiple of c
    min_per_class: int = 16
    max_rounds: int = 50

    def __post_init__(self):
        if self.epsilon_star <= 0.0:
            raise ValueError("epsilon_star must be positive")
        if self.n0 < self.min_per_class:
            raise ValueError(f"n0={self.n0} below the minimum class size {self.min_per_class}")
        if self.n_add_frac <= 0.0:
            raise ValueError("n_add_frac must be positive")


# -- bound components -----------------------------------------------------


def compute_A(n_y: int, r_hat: int) -> float:
    """Size term n^((2+r)/(4+r)) of the excess-risk bound."""
    if n_y < 1 or r_hat < 0:
        raise ValueError("need n_y >= 1 and r_hat >= 0")
    return float(n_y ** ((2.0 + r_hat) / (4.0 + r_hat)))


def compute_k_constants(selected_bw, n_y: int, r_hat: int) -> np.ndarray:
    """k_j = h_j * n^(1/(4+r)): the bandwidths' ratio to the optimal decay rate."""
    if r_hat < 1:
        raise ValueError("no relevant variables; B undefined")
    selected_bw = np.asarray(selected_bw, dtype=np.float64)
    return selected_bw * n_y ** (1.0 / (4.0 + r_hat))


def compute_B(density_vals, second_partials, k) -> tuple:
    """Importance-sampled bound constant.

    density_vals: f(x) at each evaluation point; second_partials: matrix
    (points, r) of f^(jj)(x) over the selected dimensions; k: length-r
    constants. Points with zero density are dropped (their count is
    returned). alpha = 1 for the Gaussian kernel; the kernel L2 factor is
    (2 sqrt(pi))^(-r/2).
    """
    f = np.asarray(density_vals, dtype=np.float64)
    fjj = np.atleast_2d(np.asarray(second_partials, dtype=np.float64))
    k = np.asarray(k, dtype=np.float64)
    r = k.shape[0]
    if f.size == 0:
        raise ValueError("empty evaluation point set")
    if r < 1:
        raise ValueError("no relevant variables; B undefined")
    good = f > 0.0
    dropped = int((~good).sum())
    if not np.any(good):
        raise ValueError("all evaluation points had zero density")
    f = f[good]
    fjj = fjj[good]
    curvature = np.abs(fjj @ (k**2))
    beta_r = GAUSS_L2_SQ ** (r / 2.0)
    first = 0.5 * np.mean(curvature / f)
    second = beta_r * np.prod(k) ** (-0.5) * np.mean(np.sqrt(f) / f)
    return float(first + second), dropped


def compute_epsilon(A, B, N: int) -> float:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape:
        raise ValueError("A and B must have equal length")
    if N < 1:
        raise ValueError("N must be >= 1")
    return float(A @ B / N)


def reallocate_sizes(B, r_hat, N: int, min_per_class) -> np.ndarray:
    """Integer sizes with sum N making n^((2+r)/(4+r)) proportional to B.

    min_per_class may be a scalar or per-class floors (used by the planner
    to never discard already-drawn samples). Classes with B = 0 receive
    their floor. Solved by monotone bisection on the proportionality scalar
    followed by largest-remainder rounding.
    """
    B = np.asarray(B, dtype=np.float64)
    r = np.asarray(r_hat, dtype=np.float64)
    c = B.shape[0]
    mins = np.broadcast_to(np.asarray(min_per_class, dtype=np.float64), (c,)).copy()
    if np.any(B < 0.0):
        raise ValueError("B components must be nonnegative")
    if N < mins.sum():
        raise ValueError(f"infeasible N={N}: floors sum to {int(mins.sum())}")
    expo = (4.0 + r) / (2.0 + r)  # inverse of the A exponent

    def sizes_at(t):
        with np.errstate(over="ignore"):
            raw = np.where(B > 0.0, (t * B) ** expo, 0.0)
        return np.maximum(raw, mins)

    if not np.any(B > 0.0):
        target = np.maximum(np.full(c, N / c), mins)
        # shrink the free mass if floors bind
        free = target == N / c
        if free.any():
            target[free] = (N - target[~free].sum()) / free.sum()
    else:
        lo, hi = 0.0, 1.0
        while sizes_at(hi).sum() < N:
            hi *= 2.0
            if hi > 1e300:
                raise ValueError("reallocation bisection failed to bracket")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if sizes_at(mid).sum() < N:
                lo = mid
            else:
                hi = mid
        target = sizes_at(hi)
        # bisection leaves a sub-integer slack; absorb it before rounding
        slack = N - target.sum()
        freeable = B > 0.0
        if abs(slack) > 0 and freeable.any():
            target[freeable] += slack / freeable.sum()
            target = np.maximum(target, mins)

    floors = np.maximum(np.floor(target), mins).astype(np.int64)
    remainder = int(N - floors.sum())
    if remainder < 0:
        # floors overshoot only via the min clamp; take back from the largest
        order = np.argsort(-(floors - mins), kind="stable")
        for idx in order:
            if remainder == 0:
                break
            take = min(-remainder, int(floors[idx] - mins[idx]))
            floors[idx] -= take
            remainder += take
    elif remainder > 0:
        frac = target - np.floor(target)
        order = np.argsort(-frac, kind="stable")
        for idx in order[:remainder]:
            floors[idx] += 1
    assert floors.sum() == N
    return floors


# -- data sources ----------------------------------------------------------


class Ex2Source:
    """Draws from the five-group synthetic design; optionally capped per class."""

    def __init__(self, seed: int, groups=(1, 2, 3, 4, 5), max_per_class: int | None = None):
        self.groups = tuple(sorted(set(int(g) for g in groups)))
        self.labels = tuple(range(1, len(self.groups) + 1))
        self.seed = seed
        self.max_per_class = max_per_class
        self._drawn = {lab: 0 for lab in self.labels}

    def draw(self, label: int, count: int) -> np.ndarray:
        if self.max_per_class is not None and self._drawn[label] + count > self.max_per_class:
            raise SourceExhausted(f"class {label}: pool of {self.max_per_class} exhausted")
        group = self.groups[label - 1]
        rng = derived_rng(self.seed, 2, group, 1000 + self._drawn[label])
        from .synth import EX2_DIMS, EX2_MEANS, EX2_STDS

        pool = rng.uniform(0.0, 1.0, size=(count, EX2_DIMS))
        mu = EX2_MEANS[group]
        pool[:, 0] = rng.normal(mu[0], EX2_STDS[0], size=count)
        pool[:, 1] = rng.normal(mu[1], EX2_STDS[1], size=count)
        self._drawn[label] += count
        return pool


class FrameSource:
    """Draws without replacement from a loaded LabeledFrame."""

    def __init__(self, frame, seed: int):
        self.frame = frame
        self.labels = tuple(sorted(frame.label_names))
        rng = derived_rng(seed, 11)
        self._remaining = {
            lab: list(rng.permutation(np.nonzero(frame.labels == lab)[0])) for lab in self.labels
        }

    def draw(self, label: int, count: int) -> np.ndarray:
        rem = self._remaining[label]
        if len(rem) < count:
            raise SourceExhausted(f"class {label}: only {len(rem)} rows left, need {count}")
        take, self._remaining[label] = rem[:count], rem[count:]
        return self.frame.features[np.array(take, dtype=int)]


# -- planner loop -----------------------------------------------------------


@dataclass
class PlannerRound:
    round: int
    N: int
    sizes: list
    epsilon: float
    A: list
    B: list
    r_hat: list
    dropped_points: int = 0

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "N": self.N,
            "sizes": list(self.sizes),
            "epsilon": self.epsilon,
            "A": list(self.A),
            "B": list(self.B),
            "r_hat": list(self.r_hat),
        }


@dataclass
class PlannerTrace:
    rounds: list = field(default_factory=list)
    status: str = "running"  # converged | exhausted | max_rounds

    @property
    def final_sizes(self) -> list:
        return self.rounds[-1].sizes if self.rounds else []

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r.to_dict()) for r in self.rounds) + "\n"


def default_n_add(N: int, c: int, frac: float) -> int:
    """ceil(frac*N) rounded up to a multiple of c, at least c."""
    raw = max(int(math.ceil(frac * N)), c)
    return int(math.ceil(raw / c) * c)


def run_planner(data_source, config: PlannerConfig, rodeo_config: RodeoConfig | None = None) -> PlannerTrace:
    rodeo_config = rodeo_config or RodeoConfig()
    labels = list(data_source.labels)
    c = len(labels)
    trace = PlannerTrace()
    try:
        train = {lab: data_source.draw(lab, config.n0) for lab in labels}
        test_X = np.vstack([data_source.draw(lab, config.n_test) for lab in labels])
    except SourceExhausted:
        trace.status = "exhausted"
        return trace

    for rnd in range(1, config.max_rounds + 1):
        sizes = np.array([train[lab].shape[0] for lab in labels])
        N = int(sizes.sum())
        tset = TrainingSet.from_class_list([(lab, train[lab]) for lab in labels])
        clf = fit(tset, rodeo_config, priors="proportional")
        posts = clf.predict_batch(test_X)
        predicted = np.array([p.predicted for p in posts])

        A = np.zeros(c)
        B = np.zeros(c)
        r_hat = np.zeros(c, dtype=int)
        dropped_total = 0
        for yi, lab in enumerate(labels):
            bws = np.array([p.local_bandwidths[yi] for p in posts])
            summary = summarize_bandwidths(bws, lab, rodeo_config.tau0)
            rel = sorted(summary.relevant_set)
            r_hat[yi] = len(rel)
            A[yi] = compute_A(int(sizes[yi]), r_hat[yi])
            if not rel:
                # no selected variables: the class contributes no bound mass
                continue
            k = compute_k_constants(summary.mean_bandwidths[rel], int(sizes[yi]), r_hat[yi])
            mask = predicted == lab
            if np.any(mask):
                pts = test_X[mask]
                dens = np.exp([posts[i].log_densities[yi] for i in np.nonzero(mask)[0]])
                local_bws = [posts[i].local_bandwidths[yi] for i in np.nonzero(mask)[0]]
            else:
                # no test point landed in this class; use its training points
                pts = train[lab]
                from .rodeo import select_local_bandwidths

                runs = [select_local_bandwidths(x, train[lab], rodeo_config) for x in pts]
                dens = np.array([r.density for r in runs])
                local_bws = [r.bandwidths for r in runs]
            fjj = np.array(
                [
                    [second_partial_density(x, train[lab], bw, j) for j in rel]
                    for x, bw in zip(pts, local_bws)
                ]
            )
            B[yi], dropped = compute_B(dens, fjj, k)
            dropped_total += dropped

        eps = compute_epsilon(A, B, N)
        trace.rounds.append(
            PlannerRound(
                round=rnd,
                N=N,
                sizes=[int(v) for v in sizes],
                epsilon=eps,
                A=[float(v) for v in A],
                B=[float(v) for v in B],
                r_hat=[int(v) for v in r_hat],
                dropped_points=dropped_total,
            )
        )
        if eps <= config.epsilon_star:
            trace.status = "converged"
            return trace

        n_new = N + default_n_add(N, c, config.n_add_frac)
        new_sizes = reallocate_sizes(B, r_hat, n_new, min_per_class=sizes)
        try:
            for yi, lab in enumerate(labels):
                extra = int(new_sizes[yi] - sizes[yi])
                if extra > 0:
                    train[lab] = np.vstack([train[lab], data_source.draw(lab, extra)])
        except SourceExhausted:
            trace.status = "exhausted"
            return trace

    trace.status = "max_rounds"
    return trace
