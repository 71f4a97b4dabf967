"""Self-directed learner for uniform-sphere data.

The run has four phases. A short prefix trains a starting direction with
the norm-preserving doubled update (w <- w - 2(w.x)x on mistakes). The
remaining points are split into 2k random buckets feeding two
independent arms; each arm consumes one bucket per round with a single
max-margin pass (predict in decreasing |w.x| order, update once on the
first mistake). Finally each arm labels everything the other arm
trained on, so no bucket's labels ever feed back into the hypothesis
that predicts it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .datasets import LabeledDataset, split_buckets
from .errors import DegenerateHypothesisError
from .geometry import RngStream, sample_sphere
from .perceptron import Hypothesis, UpdateRecord, margin_perceptron_pass
from .transcript import LabelOracle, Transcript

DEFAULT_C_PRIME = 4.0
DEFAULT_C_INIT = 10.0

PHASE_INIT = "init"
PHASE_TRAIN_W = "train-w"
PHASE_TRAIN_V = "train-v"
PHASE_CROSS = "cross-label"


@dataclass(frozen=True)
class SphereSchedule:
    """Budget and bucket plan for one run.

    T is the per-arm update budget ceil(c_prime * d * max(lnln n, 1) *
    ln(1/delta)), clamped to n/2. The bucket count k matches T but is
    further clamped to n/4 so buckets keep at least two points; when even
    the clamped budget exceeds half the data there is nothing to schedule
    and the run degrades to a single re-sorting arm (fallback).
    """

    n: int
    d: int
    delta: float
    c_prime: float
    T: int
    k: int
    N: int
    fallback: bool


def make_schedule(n: int, d: int, delta: float, c_prime: float = DEFAULT_C_PRIME) -> SphereSchedule:
    if n < 4:
        raise ValueError(f"need at least 4 points to schedule, got {n}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if c_prime <= 0.0:
        raise ValueError(f"c_prime must be positive, got {c_prime}")
    loglog = math.log(math.log(n))
    t_raw = math.ceil(c_prime * d * max(loglog, 1.0) * math.log(1.0 / delta))
    t_raw = max(1, t_raw)
    T = min(t_raw, n // 2)
    k = max(1, min(T, n // 4))
    N = n // (2 * k)
    return SphereSchedule(
        n=n, d=d, delta=delta, c_prime=c_prime, T=T, k=k, N=N,
        fallback=t_raw > n // 2,
    )


def init_prefix_size(n: int, d: int, delta: float) -> int:
    """Points reserved for the initializer: min(n/4, 50 d ln(1/delta))."""
    return max(1, min(n // 4, math.ceil(50.0 * d * math.log(1.0 / delta))))


def initialize_hypothesis(
    oracle: LabelOracle,
    prefix: np.ndarray,
    delta: float,
    rng: RngStream,
    c_init: float = DEFAULT_C_INIT,
) -> Hypothesis:
    """Train a starting direction on the reserved prefix.

    Starts from a random unit vector and applies the norm-preserving
    w <- w - 2(w.x)x on every mistake, walking the prefix in its given
    order. Stops once the mistake budget ceil(c_init * d * ln(1/delta))
    is spent or the prefix is exhausted; any unpredicted prefix points
    are left for the final labeling phase.
    """
    d = oracle.d
    budget = math.ceil(c_init * d * math.log(1.0 / delta))
    w = sample_sphere(d, rng)
    prefix = np.asarray(prefix, dtype=np.int64)
    pos = 0
    mistakes = 0
    while pos < prefix.size and mistakes < budget:
        rest = prefix[pos:]
        margins = oracle.points[rest] @ w
        preds = np.where(margins >= 0.0, 1, -1)
        revealed, hit = oracle.predict_until_mistake(rest, preds, margins, PHASE_INIT)
        pos += revealed
        if hit:
            x = oracle.points[rest[revealed - 1]]
            w = w - 2.0 * float(w @ x) * x
            mistakes += 1
    return Hypothesis(w)


@dataclass
class SphereRunResult:
    transcript: Transcript
    schedule: SphereSchedule
    hypothesis_w: Hypothesis
    hypothesis_v: Hypothesis | None

    @property
    def mistakes(self) -> int:
        return self.transcript.mistakes


def _fallback_run(oracle: LabelOracle, rng: RngStream) -> Hypothesis:
    """Single arm over the whole set, re-sorting by margin after every update."""
    h = Hypothesis(sample_sphere(oracle.d, rng.child(0)))
    while not oracle.all_predicted():
        try:
            result = margin_perceptron_pass(oracle, oracle.unpredicted_indices(), h, PHASE_TRAIN_W)
            h = result.hypothesis
        except DegenerateHypothesisError:
            # Mistake point parallel to w (certain at d=1): the projection
            # would zero w, but flipping it is the correct norm-preserving move.
            h = Hypothesis(-h.w)
    return h


def run_sphere(
    ds: LabeledDataset,
    schedule: SphereSchedule,
    rng: RngStream,
    c_init: float = DEFAULT_C_INIT,
    instrument: Callable[[str, int, UpdateRecord], None] | None = None,
) -> SphereRunResult:
    """Run the two-arm self-directed learner over one dataset.

    Predicts every index exactly once. The instrument callback, when
    given (and the dataset carries ground truth), receives an
    UpdateRecord per training update - diagnostics only, the learner
    never reads the truth itself.
    """
    if ds.n != schedule.n or ds.d != schedule.d:
        raise ValueError("schedule does not match the dataset shape")
    oracle = LabelOracle(ds)

    if schedule.fallback:
        h = _fallback_run(oracle, rng)
        return SphereRunResult(oracle.transcript, schedule, h, None)

    prefix_size = init_prefix_size(ds.n, ds.d, schedule.delta)
    prefix = np.arange(prefix_size, dtype=np.int64)
    h0 = initialize_hypothesis(oracle, prefix, schedule.delta, rng.child(0), c_init)
    h_w = h_v = h0

    rest = np.arange(prefix_size, ds.n, dtype=np.int64)
    buckets = split_buckets(rest.size, 2 * schedule.k, rng.child(1))
    truth = ds.ground_truth if instrument is not None else None

    for t in range(schedule.k):
        bucket_w = rest[buckets[t]]
        res_w = margin_perceptron_pass(oracle, bucket_w, h_w, PHASE_TRAIN_W, truth)
        h_w = res_w.hypothesis
        if instrument is not None and res_w.update_record is not None:
            instrument("w", t, res_w.update_record)

        bucket_v = rest[buckets[schedule.k + t]]
        res_v = margin_perceptron_pass(oracle, bucket_v, h_v, PHASE_TRAIN_V, truth)
        h_v = res_v.hypothesis
        if instrument is not None and res_v.update_record is not None:
            instrument("v", t, res_v.update_record)

    # Cross-labeling: w labels what v trained on, v labels what w trained
    # on, so no point is ever predicted by a hypothesis its label touched.
    w_side = rest[np.concatenate([buckets[t] for t in range(schedule.k)])]
    v_side = rest[np.concatenate([buckets[schedule.k + t] for t in range(schedule.k)])]
    mask = oracle.predicted_mask()

    todo_v = v_side[~mask[v_side]]
    margins = oracle.points[todo_v] @ h_w.w
    oracle.predict_bulk(todo_v, np.where(margins >= 0.0, 1, -1), margins, PHASE_CROSS)

    todo_w = w_side[~mask[w_side]]
    margins = oracle.points[todo_w] @ h_v.w
    oracle.predict_bulk(todo_w, np.where(margins >= 0.0, 1, -1), margins, PHASE_CROSS)

    # Prefix points the initializer never reached (its budget ran out).
    leftover = prefix[~oracle.predicted_mask()[prefix]]
    if leftover.size:
        margins = oracle.points[leftover] @ h_w.w
        oracle.predict_bulk(leftover, np.where(margins >= 0.0, 1, -1), margins, PHASE_CROSS)

    assert oracle.all_predicted()
    return SphereRunResult(oracle.transcript, schedule, h_w, h_v)
