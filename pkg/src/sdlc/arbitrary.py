"""Self-directed learning of arbitrary separable datasets.

A weak run puts the remaining points into isotropic position (recursing
into a dense subspace when the data is degenerate), starts from a random
unit guess in the working dimension k, and repeatedly predicts in order
of decreasing margin, updating on each mistake. Anti-concentration in
isotropic position makes a correct-on-a-1/(4k)-fraction run likely, and
an outer boosting loop retries and stacks weak runs until all but an
eps-fraction of the dataset is labeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .datasets import LabeledDataset
from .errors import DegenerateHypothesisError
from .forster import ForsterOutput, forster_transform, pullback_separator
from .geometry import RngStream, sample_sphere
from .perceptron import Hypothesis, mp_update
from .transcript import LabelOracle, Transcript

PHASE_WEAK = "weak"


@dataclass
class WeakRunResult:
    """One weak-learner attempt over a working set U of retained points."""

    labels: list[tuple[int, int]]
    mistakes: int
    terminated_by: str  # "coverage" | "budget"
    k: int
    working_size: int
    initial_correlation_ok: bool | None
    forster: ForsterOutput = field(repr=False)

    @property
    def coverage_target(self) -> float:
        return self.working_size / (4.0 * self.k)


def weak_sweep_budget(k: int) -> int:
    """Max-margin sweeps (and hence mistakes) allowed per weak run."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return max(1, math.ceil(5.0 * k * math.log(k)))


def weak_run(
    oracle: LabelOracle,
    rng: RngStream,
    indices: np.ndarray | None = None,
    phase: str = PHASE_WEAK,
    forster_delta: float | None = None,
    forster_max_iters: int | None = None,
) -> WeakRunResult:
    """Predict a chunk of the still-unlabeled points, aiming at a 1/(4k) fraction.

    Steps: isotropize the working points (keeping at least a k/d fraction
    in working dimension k), draw w uniformly from the unit sphere of
    that subspace, then sweep: predict retained points in decreasing
    |w . x| order until a mistake, update, re-sort, repeat. Every
    revealed label (corrected on a mistake) is accumulated in `labels`.
    Terminates by coverage once |labels| >= |U|/(4k), or by budget after
    5 k ln k sweeps (one sweep minimum, so k = 1 still gets its
    sign-fixing update).
    """
    if indices is None:
        indices = oracle.unpredicted_indices()
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        raise ValueError("weak_run needs at least one unpredicted point")
    if forster_delta is None:
        forster_delta = 1.0 / (2.0 * oracle.d)

    out = forster_transform(oracle.points[indices], forster_delta, forster_max_iters)
    U = out.transformed_points
    k = out.subspace_dim
    orig = indices[out.retained_indices]
    m = U.shape[0]

    h = Hypothesis(sample_sphere(k, rng.child(0)))
    initial_ok: bool | None = None
    truth = oracle.instrumentation_ground_truth
    if truth is not None:
        v_star = pullback_separator(out, truth)
        initial_ok = bool(h.w @ v_star >= 1.0 / (2.0 * math.sqrt(k)))

    budget = weak_sweep_budget(k)
    target = m / (4.0 * k)
    labels: list[tuple[int, int]] = []
    mistakes = 0
    remaining = np.arange(m)
    terminated_by = "budget"
    for _ in range(budget):
        if remaining.size == 0:
            break
        margins = U[remaining] @ h.w
        order = np.argsort(-np.abs(margins), kind="stable")
        ordered = remaining[order]
        preds = np.where(margins[order] >= 0.0, 1, -1)
        revealed, hit = oracle.predict_until_mistake(
            orig[ordered], preds, margins[order], phase)
        for j in range(revealed):
            lab = int(preds[j])
            if hit and j == revealed - 1:
                lab = -lab
            labels.append((int(orig[ordered[j]]), lab))
        remaining = np.sort(ordered[revealed:])
        if hit:
            mistakes += 1
            x = U[ordered[revealed - 1]]
            if k == 1:
                # The update annihilates any 1-D hypothesis; reverse instead.
                h = Hypothesis(-h.w)
            else:
                try:
                    h = mp_update(h, x)
                except DegenerateHypothesisError:
                    h = Hypothesis(-h.w)
        if len(labels) >= target:
            terminated_by = "coverage"
            break
    return WeakRunResult(labels, mistakes, terminated_by, k, m, initial_ok, out)


@dataclass(frozen=True)
class BoostBudget:
    """Outer-loop budget for boosting weak runs to (1 - eps) coverage."""

    eps: float
    delta: float
    alpha: float
    c: float
    runs_outer: int
    retries_per_round: int
    mistake_cap: int


def compute_boost_budget(
    d: int,
    eps: float,
    delta: float,
    c_hat: float = 0.3,
    alpha_hat: float | None = None,
) -> BoostBudget:
    """Round and retry counts for the boosting loop.

    alpha is the residual fraction a successful round leaves behind
    (default 1 - 1/(4d), matching the coverage target); c is the
    per-attempt success probability the retry count insures against.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if not 0.0 < c_hat <= 1.0:
        raise ValueError(f"c_hat must be in (0, 1], got {c_hat}")
    alpha = 1.0 - 1.0 / (4.0 * d) if alpha_hat is None else alpha_hat
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha_hat must be in (0, 1), got {alpha}")
    runs_outer = max(1, math.ceil(math.log(1.0 / eps) / math.log(1.0 / alpha)))
    retries = max(1, math.ceil(math.log(runs_outer / delta) / c_hat))
    per_run = weak_sweep_budget(d) + 1
    return BoostBudget(eps, delta, alpha, c_hat, runs_outer, retries,
                       runs_outer * retries * per_run)


@dataclass
class StrongRunResult:
    """Boosted run: transcript plus coverage and budget accounting."""

    transcript: Transcript
    budget: BoostBudget | None
    rounds_used: int
    attempts: int
    labeled_count: int
    n: int
    partial: bool

    @property
    def coverage(self) -> float:
        return self.labeled_count / self.n

    @property
    def mistakes(self) -> int:
        return self.transcript.mistakes


def strong_run(
    ds: LabeledDataset,
    eps: float,
    delta: float,
    rng: RngStream,
    c_hat: float = 0.3,
    alpha_hat: float | None = None,
) -> StrongRunResult:
    """Boost weak runs until at most an eps-fraction stays unlabeled.

    Each round retries the weak learner until one attempt terminates by
    coverage; budget-terminated attempts are aborted but their revealed
    predictions stay counted and their points stay removed. Exhausting
    the retries of a round (or the outer rounds) before reaching
    (1 - eps) coverage yields a partial result, not an exception.
    """
    oracle = LabelOracle(ds)
    n = oracle.n
    if eps >= 1.0:
        labeled = n - oracle.unpredicted_indices().size
        return StrongRunResult(oracle.transcript, None, 0, 0, labeled, n, False)
    budget = compute_boost_budget(oracle.d, eps, delta, c_hat, alpha_hat)
    attempts = 0
    rounds_used = 0
    for rnd in range(budget.runs_outer):
        if oracle.unpredicted_indices().size <= eps * n:
            break
        advanced = False
        for _ in range(budget.retries_per_round):
            if oracle.unpredicted_indices().size <= eps * n:
                advanced = True
                break
            result = weak_run(oracle, rng.child(attempts), phase=f"weak-round-{rnd}")
            attempts += 1
            if result.terminated_by == "coverage":
                advanced = True
                break
        rounds_used += 1
        if not advanced:
            break
    labeled = n - oracle.unpredicted_indices().size
    partial = labeled < (1.0 - eps) * n
    return StrongRunResult(oracle.transcript, budget, rounds_used, attempts,
                           labeled, n, partial)
