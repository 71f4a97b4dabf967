"""Dataset generators, bucketing, and file round-trips."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdlc.datasets import (
    ARBITRARY_FAMILIES,
    LabeledDataset,
    export_csv,
    gen_arbitrary,
    gen_uniform_sphere,
    load_jsonl,
    predict_labels,
    save_jsonl,
    split_buckets,
)
from sdlc.errors import MalformedRecordError
from sdlc.geometry import RngStream


# ------------------------------------------------------------ LabeledDataset

def test_dataset_validation():
    pts = np.array([[1.0, 0.0], [0.0, 1.0]])
    ds = LabeledDataset(pts, [1, -1])
    assert ds.n == 2 and ds.d == 2 and ds.ground_truth is None
    with pytest.raises(ValueError):
        LabeledDataset(pts, [1, 0])
    with pytest.raises(ValueError):
        LabeledDataset(pts, [1])
    with pytest.raises(ValueError):
        LabeledDataset(np.array([np.inf, 0.0]).reshape(1, 2), [1])
    with pytest.raises(ValueError):
        LabeledDataset(np.zeros(4), [1, 1, 1, 1])


def test_consistency_check_requires_truth():
    ds = LabeledDataset(np.eye(2), [1, 1])
    with pytest.raises(ValueError):
        ds.consistent_with_ground_truth()


# ------------------------------------------------------------ uniform sphere

def test_gen_uniform_rejects_bad_sizes():
    with pytest.raises(ValueError):
        gen_uniform_sphere(0, 3, RngStream(0))
    with pytest.raises(ValueError):
        gen_uniform_sphere(5, 0, RngStream(0))


def test_gen_uniform_labels_and_norms():
    ds = gen_uniform_sphere(200, 4, RngStream(0))
    assert ds.consistent_with_ground_truth()
    assert np.all(np.abs(np.linalg.norm(ds.points, axis=1) - 1.0) <= 1e-9)
    assert set(np.unique(ds.labels)) <= {-1, 1}


def test_gen_uniform_deterministic_per_seed():
    a = gen_uniform_sphere(50, 3, RngStream(9, 0))
    b = gen_uniform_sphere(50, 3, RngStream(9, 0))
    c = gen_uniform_sphere(50, 3, RngStream(10, 0))
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.labels, b.labels)
    assert not np.array_equal(a.points, c.points)


def test_gen_uniform_label_balance():
    # sign(w* . x) splits the sphere in half; 10^5 draws pin the fraction.
    ds = gen_uniform_sphere(100_000, 3, RngStream(2))
    assert abs(float(np.mean(ds.labels == 1)) - 0.5) <= 0.01


# --------------------------------------------------------- arbitrary families

def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        gen_arbitrary("spiral", 10, 2, None, RngStream(0))


@pytest.mark.parametrize("family", ARBITRARY_FAMILIES)
def test_families_unit_norm_and_consistent(family):
    ds = gen_arbitrary(family, 300, 4, {}, RngStream(5))
    assert ds.n == 300 and ds.d == 4
    assert np.all(np.abs(np.linalg.norm(ds.points, axis=1) - 1.0) <= 1e-9)
    assert ds.consistent_with_ground_truth()


def test_subspace_degenerate_rank_one():
    ds = gen_arbitrary("subspace_degenerate", 40, 3, {"rho": 1.0, "k": 1}, RngStream(1))
    # every point is +/- one direction
    u = ds.points[0]
    dots = ds.points @ u
    assert np.all(np.abs(np.abs(dots) - 1.0) <= 1e-9)


def test_low_margin_floor():
    gamma = 0.3
    ds = gen_arbitrary("low_margin", 4, 2, {"gamma": gamma}, RngStream(2))
    margins = np.abs(ds.points @ ds.ground_truth)
    assert np.all(margins >= gamma - 1e-9)
    # the construction puts every point exactly at the margin
    assert np.all(margins <= gamma + 1e-9)


def test_low_margin_rejects_bad_gamma():
    with pytest.raises(ValueError):
        gen_arbitrary("low_margin", 4, 2, {"gamma": 1.5}, RngStream(0))


def test_clustered_separable_by_feasibility_oracle():
    ds = gen_arbitrary("clustered", 1000, 5, {}, RngStream(3))
    # classical additive perceptron as an independent separability check:
    # margin_floor 0.02 bounds its updates by (1/0.02)^2, far under the cap
    w = np.zeros(5)
    updates = 0
    for _ in range(100):
        wrong = np.flatnonzero(np.where(ds.points @ w >= 0.0, 1, -1) != ds.labels)
        if wrong.size == 0:
            break
        w = w + ds.labels[wrong[0]] * ds.points[wrong[0]]
        updates += 1
    else:
        pytest.fail("perceptron failed to separate the clustered family")
    assert updates <= 2500


def test_clustered_param_validation():
    with pytest.raises(ValueError):
        gen_arbitrary("clustered", 10, 3, {"num_clusters": 0}, RngStream(0))
    with pytest.raises(ValueError):
        gen_arbitrary("clustered", 10, 3, {"spread": -1.0}, RngStream(0))


def test_grid_small_case_exact():
    ds = gen_arbitrary("grid", 8, 2, {}, RngStream(0))
    r2 = 1.0 / math.sqrt(2.0)
    # the full radius-1 shell of the integer lattice, lexicographic
    expected = [
        (-r2, -r2), (-1.0, 0.0), (-r2, r2), (0.0, -1.0),
        (0.0, 1.0), (r2, -r2), (1.0, 0.0), (r2, r2),
    ]
    assert np.allclose(ds.points, np.asarray(expected), atol=1e-12)


def test_grid_runaway_size_rejected():
    with pytest.raises(ValueError):
        gen_arbitrary("grid", 7000, 2, {}, RngStream(0))


# -------------------------------------------------------------------- buckets

def test_split_buckets_examples():
    singles = split_buckets(4, 4, RngStream(0))
    assert sorted(int(b[0]) for b in singles) == [0, 1, 2, 3]
    sizes = sorted(len(b) for b in split_buckets(10, 4, RngStream(1)))
    assert sizes == [2, 2, 3, 3]


def test_split_buckets_validation():
    with pytest.raises(ValueError):
        split_buckets(3, 4, RngStream(0))
    with pytest.raises(ValueError):
        split_buckets(3, 0, RngStream(0))


def test_split_buckets_seed_sensitivity():
    a = split_buckets(10_000, 100, RngStream(0))
    b = split_buckets(10_000, 100, RngStream(1))
    assert sorted(len(x) for x in a) == sorted(len(x) for x in b)
    assert any(not np.array_equal(x, y) for x, y in zip(a, b))


@given(st.integers(min_value=1, max_value=500), st.data())
def test_split_buckets_partitions(n, data):
    k = data.draw(st.integers(min_value=1, max_value=n))
    buckets = split_buckets(n, k, RngStream(data.draw(st.integers(0, 2**32))))
    assert len(buckets) == k
    merged = np.concatenate(buckets)
    assert np.array_equal(np.sort(merged), np.arange(n))
    sizes = [len(b) for b in buckets]
    assert max(sizes) - min(sizes) <= 1
    assert all(np.array_equal(b, np.sort(b)) for b in buckets)


# ---------------------------------------------------------------- round-trip

def test_jsonl_round_trip(tmp_path):
    ds = gen_uniform_sphere(30, 3, RngStream(4))
    path = tmp_path / "ds.jsonl"
    save_jsonl(ds, str(path))
    back = load_jsonl(str(path))
    assert np.array_equal(back.points, ds.points)
    assert np.array_equal(back.labels, ds.labels)
    assert np.array_equal(back.ground_truth, ds.ground_truth)


def test_jsonl_round_trip_without_truth(tmp_path):
    ds = LabeledDataset(np.eye(3), [1, -1, 1])
    path = tmp_path / "nt.jsonl"
    save_jsonl(ds, str(path))
    back = load_jsonl(str(path))
    assert back.ground_truth is None
    assert np.array_equal(back.points, ds.points)


def test_jsonl_header_missing_truth_key(tmp_path):
    path = tmp_path / "h.jsonl"
    path.write_text('{"d": 2, "n": 1}\n{"x": [1.0, 0.0], "y": 1}\n')
    assert load_jsonl(str(path)).ground_truth is None


def test_jsonl_malformed_label(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(
        '{"d": 2, "n": 2, "ground_truth": null}\n'
        '{"x": [1.0, 0.0], "y": 1}\n'
        '{"x": [0.0, 1.0], "y": 0}\n'
    )
    with pytest.raises(MalformedRecordError) as err:
        load_jsonl(str(path))
    assert err.value.line_number == 3


def test_jsonl_truncated_file(tmp_path):
    path = tmp_path / "trunc.jsonl"
    path.write_text('{"d": 2, "n": 5, "ground_truth": null}\n{"x": [1.0, 0.0], "y": 1}\n')
    with pytest.raises(MalformedRecordError):
        load_jsonl(str(path))


def test_jsonl_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    with pytest.raises(MalformedRecordError) as err:
        load_jsonl(str(path))
    assert err.value.line_number == 1


def test_jsonl_bad_dimension(tmp_path):
    path = tmp_path / "dim.jsonl"
    path.write_text('{"d": 3, "n": 1, "ground_truth": null}\n{"x": [1.0, 0.0], "y": 1}\n')
    with pytest.raises(MalformedRecordError):
        load_jsonl(str(path))


def test_export_csv(tmp_path):
    ds = gen_uniform_sphere(5, 2, RngStream(0))
    path = tmp_path / "ds.csv"
    export_csv(ds, str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x1,x2,y"
    assert len(lines) == 6


def test_predict_labels_boundary_convention():
    pts = np.array([[0.0, 1.0], [1.0, 0.0], [-1.0, 0.0]])
    w = np.array([1.0, 0.0])
    assert predict_labels(pts, w).tolist() == [1, 1, -1]
