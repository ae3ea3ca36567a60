import numpy as np
import pytest

from dqm import DatasetError, DegradeSpec, LabeledDataset, MeasureConfig, degrade, measure, select_similar

from synthetic import clustered_classes


def brute_top_cosine(x, anchor, k):
    a = x[anchor]
    scored = []
    for i, row in enumerate(x):
        if i != anchor:
            cos = float(row @ a) / (np.linalg.norm(row) * np.linalg.norm(a))
            scored.append((-cos, i))
    return [anchor] + [i for _, i in sorted(scored)[: k - 1]]


def test_identical_rows_pick_lowest_indices():
    x = np.vstack([np.tile([1.0, 2.0, 3.0], (8, 1)), np.eye(3)])
    ds = LabeledDataset(x, [0] * 8 + [1] * 3)
    for seed in range(5):
        got = select_similar(ds, 0, 4, np.random.default_rng(seed))
        anchor = got[0]
        assert got[1:].tolist() == [i for i in range(8) if i != anchor][:3]


def test_nearest_direction_wins():
    x = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.01], [-1.0, 0.0], [5.0, 5.0]])
    ds = LabeledDataset(np.vstack([x, [[9.0, 9.0], [8.0, 8.0]]]), [0] * 5 + [1, 1])
    # find a seed whose anchor is row 0
    for seed in range(100):
        got = select_similar(ds, 0, 2, np.random.default_rng(seed))
        if got[0] == 0:
            assert got.tolist() == [0, 2]
            break
    else:
        pytest.fail("anchor 0 never drawn")


def test_selection_matches_brute_force():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((20, 6))
    ds = LabeledDataset(np.vstack([rng.standard_normal((5, 6)), x]), [1] * 5 + [0] * 20)
    for seed in range(10):
        got = select_similar(ds, 0, 7, np.random.default_rng(seed))
        local = (got - 5).tolist()
        assert local == brute_top_cosine(x, local[0], 7)


def test_zero_norm_rows_dropped_with_warning():
    x = np.vstack([np.zeros((2, 3)), np.random.default_rng(2).standard_normal((6, 3))])
    ds = LabeledDataset(x, [0] * 4 + [1] * 4)
    with pytest.warns(RuntimeWarning, match="zero-norm"):
        got = select_similar(ds, 0, 2, np.random.default_rng(0))
    assert set(got.tolist()) <= {2, 3}


def test_too_few_rows():
    ds = LabeledDataset(np.random.default_rng(3).standard_normal((6, 2)), [0, 0, 1, 1, 1, 1])
    with pytest.raises(DatasetError, match="need 3"):
        select_similar(ds, 0, 3, np.random.default_rng(0))
    with pytest.raises(DatasetError):
        select_similar(ds, 5, 1, np.random.default_rng(0))


def test_degrade_settings_validated():
    with pytest.raises(ValueError):
        DegradeSpec(0, num_exemplars=0)
    with pytest.raises(ValueError):
        DegradeSpec(0, noise_sigma=-1)


def _three_class(seed=4, per=40, n=5):
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1, 2], per)
    return LabeledDataset(rng.standard_normal((3 * per, n)) + 3 * y[:, None], y)


def test_non_target_rows_untouched():
    ds = _three_class()
    out = degrade(ds, DegradeSpec(1, num_exemplars=3, output_count=25, noise_sigma=0.5, seed=1))
    keep = ds.labels != 1
    np.testing.assert_array_equal(out.data[: keep.sum()], ds.data[keep])
    np.testing.assert_array_equal(out.labels[: keep.sum()], ds.labels[keep])
    assert (out.labels[keep.sum():] == 1).all()
    assert out.m == keep.sum() + 25
    assert out.metadata["degrade"]["target_class"] == 1


def test_degrade_deterministic():
    ds = _three_class()
    spec = DegradeSpec(2, num_exemplars=4, output_count=30, seed=9)
    np.testing.assert_array_equal(degrade(ds, spec).data, degrade(ds, spec).data)
    other = degrade(ds, DegradeSpec(2, num_exemplars=4, output_count=30, seed=10))
    assert not np.array_equal(degrade(ds, spec).data, other.data)


def test_single_exemplar_without_noise_collapses_class():
    ds = _three_class()
    out = degrade(ds, DegradeSpec(0, num_exemplars=1, output_count=50, noise_sigma=0.0, seed=2))
    synth = out.data[out.labels == 0]
    assert (synth == synth[0]).all()
    r = measure(out, MeasureConfig(n_bootstrap=10, seed=1))
    assert r.m_var_i[0] == 0.0
    assert min(r.m_var_i[1:]) > 0


def test_synthesized_rows_come_from_exemplars():
    ds = _three_class()
    spec = DegradeSpec(0, num_exemplars=3, output_count=40, noise_sigma=0.0, seed=5)
    ex = ds.data[select_similar(ds, 0, 3, np.random.default_rng(5))]
    synth = degrade(ds, spec).data[-40:]
    assert all(any((row == e).all() for e in ex) for row in synth)


def test_degraded_class_has_lowest_variability():
    ds = clustered_classes(n=64, c=5, per_class=400, clusters=40, seed=1)
    sigma = 0.1 * float(ds.data.std(axis=0).mean())
    out = degrade(ds, DegradeSpec(3, num_exemplars=10, output_count=400, noise_sigma=sigma, seed=2))
    r = measure(out, MeasureConfig(n_bootstrap=30, seed=3))
    assert int(np.argmin(r.m_var_i)) == 3
