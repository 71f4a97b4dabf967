"""Monte-Carlo verifiers, the decay recurrence, and order baselines."""

import math

import numpy as np
import pytest

from sdlc.datasets import LabeledDataset, predict_labels
from sdlc.errors import InfeasibleParametersError, RegimeError
from sdlc.geometry import RngStream, sample_sphere, sample_sphere_batch
from sdlc.oracles import (
    OnlineMarginPerceptron,
    TailCheckResult,
    greedy_adversarial_order,
    mc_best_mistake_margin,
    mc_disagreement_mass,
    mc_max_margin_tail,
    random_order_run,
    simulate_superlinear,
    superlinear_rounds,
    superlinear_step,
)
from sdlc.perceptron import Hypothesis
from sdlc.transcript import LabelOracle


def vrng(n=0):
    return RngStream(n, 3)


# ------------------------------------------------------------ TailCheckResult

def test_tail_check_pass_rule():
    assert TailCheckResult(0.10, 0.09, 0.01, 100, {}).passed   # inside 3 sigma
    assert not TailCheckResult(0.13, 0.09, 0.01, 100, {}).passed
    assert TailCheckResult(0.0, 0.0, 0.0, 100, {}).passed


# -------------------------------------------------------- disagreement volume

def test_disagreement_mass_validation():
    with pytest.raises(ValueError):
        mc_disagreement_mass(1, 0.5, 100, 200, vrng())
    with pytest.raises(ValueError):
        mc_disagreement_mass(3, 0.0, 100, 200, vrng())
    with pytest.raises(ValueError):
        mc_disagreement_mass(3, math.pi, 100, 200, vrng())
    with pytest.raises(ValueError):
        mc_disagreement_mass(3, 0.5, 100, 50, vrng())
    with pytest.raises(ValueError):
        mc_disagreement_mass(3, 0.5, 100, 200, vrng(), check="median")


def test_disagreement_mass_orthogonal_directions():
    res = mc_disagreement_mass(3, math.pi / 2, 2000, 300, vrng(1))
    assert res.details["target"] == pytest.approx(0.5)
    assert res.passed
    assert abs(res.details["mean"] - 0.5) <= 5 * res.std_err + 1e-12


def test_disagreement_mass_small_angle():
    res = mc_disagreement_mass(3, 0.01, 5000, 300, vrng(2))
    assert res.details["target"] == pytest.approx(0.01 / math.pi)
    assert res.passed


def test_disagreement_mass_tail_mode():
    res = mc_disagreement_mass(4, math.pi / 4, 1000, 400, vrng(3), check="tail")
    assert res.bound == pytest.approx(0.01)
    assert "threshold" in res.details
    assert res.passed


# ------------------------------------------------------- conditioned max margin

def test_max_margin_validation():
    with pytest.raises(InfeasibleParametersError):
        mc_max_margin_tail(3, 1e-5, 10, 0.5, 1, 200, vrng())
    with pytest.raises(ValueError):
        mc_max_margin_tail(3, 0.5, 10, 1.5, 1, 200, vrng())
    with pytest.raises(ValueError):
        mc_max_margin_tail(3, 0.5, 0, 0.5, 1, 200, vrng())
    with pytest.raises(ValueError):
        mc_max_margin_tail(3, 0.5, 10, 0.5, 3, 200, vrng())


def test_max_margin_case1_reference_bound():
    res = mc_max_margin_tail(3, math.pi / 2, 100, 0.5, 1, 200, vrng(0))
    assert res.bound == pytest.approx(math.exp(-50.0 * math.sqrt(0.75)))
    assert res.details["case"] == 1
    assert res.details["threshold"] == pytest.approx(0.5 * math.sin(math.pi / 4))
    assert res.empirical == 0.0
    assert res.passed


def test_max_margin_case2_cells():
    res = mc_max_margin_tail(4, 1.0, 50, 0.5, 2, 500, vrng(4))
    assert res.details["threshold"] == pytest.approx(0.5 * math.sin(1.0))
    assert res.bound == pytest.approx(math.exp(-50.0 * 0.25 ** 2 / 2.0))
    assert res.passed
    tight = mc_max_margin_tail(2, math.pi / 2, 5, 0.7, 2, 800, vrng(5))
    assert tight.passed


# --------------------------------------------------------- best mistake margin

def test_best_mistake_margin_validation():
    with pytest.raises(ValueError):
        mc_best_mistake_margin(4, 0.5, 1000, 0.5, 1, 200, vrng())
    with pytest.raises(RegimeError):
        mc_best_mistake_margin(4, 0.5, 100, 8.0, 2, 200, vrng())
    with pytest.raises(RegimeError):
        mc_best_mistake_margin(4, 0.5, 10_000, 4.0, 1, 200, vrng(), c=1.5)
    with pytest.raises(RegimeError):
        mc_best_mistake_margin(4, 0.5, 100_000, 1.0, 1, 200, vrng(), c=3.0)


def test_best_mistake_margin_bound_value():
    res = mc_best_mistake_margin(4, 0.5, 10_000, 8.0, 2, 50, vrng(1))
    assert res.bound == pytest.approx(2.0 * math.exp(-4.0))
    assert res.empirical == 0.0 and res.passed
    assert res.details["case"] == 2


def test_best_mistake_margin_case1_picks_c():
    res = mc_best_mistake_margin(4, 0.5, 10_000, 4.0, 1, 200, vrng(2))
    assert res.details["c"] >= 2.0
    assert res.bound == pytest.approx(2.0 * math.exp(-2.0))
    assert res.passed


# ------------------------------------------------------------ decay recurrence

def test_superlinear_reference_values():
    assert superlinear_rounds(0.5, 0.01, 1.0, 0.1) == 10
    assert superlinear_rounds(0.125, 1e-6, 1.0, 0.1) == 37
    assert superlinear_step(1.0, 0.5, 0.01) == pytest.approx(0.1)
    assert superlinear_step(0.1, 0.5, 0.01) == pytest.approx(0.0316227766016838)


def test_superlinear_deterministic_chain_hits_target():
    rho, kappa = 0.5, 0.01
    T = superlinear_rounds(rho, kappa, 1.0, 0.1)
    xi = 1.0
    for _ in range(T):
        xi = superlinear_step(xi, rho, kappa)
    assert xi <= math.e ** 2 * kappa


def test_superlinear_validation():
    with pytest.raises(ValueError):
        superlinear_rounds(0.0, 0.01, 1.0, 0.1)
    with pytest.raises(ValueError):
        superlinear_rounds(0.5, 1.5, 1.0, 0.1)
    with pytest.raises(ValueError):
        simulate_superlinear(0.5, 0.01, 1.0, 0.5, 0.1, 200, vrng())
    with pytest.raises(ValueError):
        simulate_superlinear(0.5, 0.01, 1.0, 0.8, 0.1, 200, vrng(), xi0=2.0)


def test_superlinear_simulation_within_delta():
    res = simulate_superlinear(0.5, 0.01, 1.0, 2.0 / 3.0, 0.1, 5000, vrng(6))
    assert res.details["rounds"] == 10
    assert res.passed


def test_superlinear_start_below_target():
    res = simulate_superlinear(0.5, 0.5, 1.0, 2.0 / 3.0, 0.1, 200, vrng(7), xi0=0.01)
    assert res.empirical == 0.0


# ------------------------------------------------------------------ baselines

def test_online_perceptron_d1_flip():
    p = OnlineMarginPerceptron(Hypothesis(np.array([1.0])))
    p.update(np.array([1.0]))
    assert p.hypothesis.w.tolist() == [-1.0]


def test_random_order_consistent_start_never_errs():
    rng = RngStream(7, 2)
    pts = sample_sphere_batch(500, 4, RngStream(7, 0))
    w0 = sample_sphere(4, rng.child(1))
    ds = LabeledDataset(pts, predict_labels(pts, w0), w0)
    transcript = random_order_run(ds, rng)
    assert transcript.mistakes == 0
    assert len(transcript) == 500


def test_random_order_full_coverage_and_phase():
    from sdlc.datasets import gen_uniform_sphere

    ds = gen_uniform_sphere(300, 3, RngStream(5, 0))
    transcript = random_order_run(ds, RngStream(5, 2))
    assert sorted(transcript.predicted_indices()) == list(range(300))
    assert transcript.phases() == ["random-order"]


def test_random_order_matches_unblocked_reference():
    from sdlc.datasets import gen_uniform_sphere

    ds = gen_uniform_sphere(500, 4, RngStream(5, 0))
    rng = RngStream(5, 2)
    fast = random_order_run(ds, rng)

    # reference: same order and start, one oracle call per point
    ref_rng = RngStream(5, 2)
    order = ref_rng.child(0).gen.permutation(ds.n)
    learner = OnlineMarginPerceptron(Hypothesis(sample_sphere(ds.d, ref_rng.child(1))))
    oracle = LabelOracle(ds)
    for idx in order:
        x = ds.points[idx]
        margin = learner.hypothesis.margin(x)
        pred = 1 if margin >= 0.0 else -1
        truth = oracle.predict(int(idx), pred, margin, "random-order")
        if truth != pred:
            learner.update(x)

    got = [(r.index, r.prediction, r.truth) for r in fast.records()]
    want = [(r.index, r.prediction, r.truth) for r in oracle.transcript.records()]
    assert got == want


def test_random_order_d1_small():
    ds = LabeledDataset(np.array([[1.0], [-1.0]]), [1, -1], np.array([1.0]))
    transcript = random_order_run(ds, RngStream(0, 2))
    assert transcript.mistakes <= 2


def test_greedy_needs_learner_or_rng():
    ds = LabeledDataset(np.eye(2), [1, 1])
    with pytest.raises(ValueError):
        greedy_adversarial_order(ds)


def test_greedy_single_point():
    ds = LabeledDataset(np.array([[1.0, 0.0]]), [1])
    transcript = greedy_adversarial_order(ds, rng=RngStream(0, 2))
    assert len(transcript) == 1
    assert transcript.phases() == ["greedy-order"]


def test_greedy_accepts_prebuilt_learner():
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    ds = LabeledDataset(pts, predict_labels(pts, np.array([1.0, 1.0])))
    learner = OnlineMarginPerceptron(Hypothesis(np.array([1.0, 1.0])))
    transcript = greedy_adversarial_order(ds, learner=learner)
    assert transcript.mistakes == 0


def test_greedy_order_is_harder_than_random():
    from sdlc.datasets import gen_uniform_sphere

    worse = 0
    for seed in range(5):
        ds = gen_uniform_sphere(2000, 5, RngStream(seed, 0))
        rand = random_order_run(ds, RngStream(seed, 2)).mistakes
        greedy = greedy_adversarial_order(ds, rng=RngStream(seed, 2)).mistakes
        if greedy > rand:
            worse += 1
    assert worse == 5
