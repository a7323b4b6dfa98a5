import numpy as np
import pytest

from dptensor.datasets import (
    ML100K_SHAPE,
    BiscaleParams,
    SyntheticSpec,
    apply_biscale,
    biscale,
    biscale_matrix,
    gen_synthetic,
    invert_biscale,
    invert_min_max,
    load_ml100k,
    min_max_scale,
    read_ml100k_file,
    write_ml100k_standin,
)
from dptensor.exceptions import ConfigError, DataError
from dptensor.tensor_ops import ObservedTensor


# ---------------------------------------------------------------------------
# synthetic generation


def test_no_missingness_keeps_every_entry():
    spec = SyntheticSpec(dims=(6, 6, 6), missing_ratio=0.0, seed=1)
    data = gen_synthetic(spec)
    assert data.train.n_obs + data.test.n_obs == 6 * 6 * 6


def test_split_is_disjoint_and_sized():
    spec = SyntheticSpec(dims=(10, 10, 10), missing_ratio=0.5, test_fraction=0.2, seed=2)
    data = gen_synthetic(spec)
    n_obs = data.train.n_obs + data.test.n_obs
    assert n_obs == 500
    assert data.test.n_obs == round(0.2 * n_obs)
    lin_train = np.ravel_multi_index(data.train.indices.T, spec.dims)
    lin_test = np.ravel_multi_index(data.test.indices.T, spec.dims)
    assert np.intersect1d(lin_train, lin_test).size == 0


def test_generation_deterministic():
    spec = SyntheticSpec(seed=7)
    d1 = gen_synthetic(spec)
    d2 = gen_synthetic(spec)
    assert np.array_equal(d1.noisy, d2.noisy)
    assert np.array_equal(d1.train.indices, d2.train.indices)
    assert np.array_equal(d1.test.values, d2.test.values)


def test_snr_calibration():
    ratios = []
    for seed in range(10):
        data = gen_synthetic(SyntheticSpec(seed=seed))
        noise = data.noisy - data.truth
        ratios.append((data.truth**2).sum() / (noise**2).sum())
    assert abs(np.mean(ratios) - 1.0) < 0.1


def test_truth_in_unit_interval():
    data = gen_synthetic(SyntheticSpec(seed=3))
    assert data.truth.min() == pytest.approx(0.0)
    assert data.truth.max() == pytest.approx(1.0)


def test_cp_truth_unit_norm_columns():
    # regenerate the factor draw to inspect column norms
    from dptensor.mechanisms import spawn_rngs

    spec = SyntheticSpec(seed=4, backbone="cp")
    truth_rng = spawn_rngs(spec.seed, 4)[0]
    for n in spec.dims:
        f = truth_rng.standard_normal((n, spec.rank))
        f /= np.linalg.norm(f, axis=0, keepdims=True)
        assert np.allclose(np.linalg.norm(f, axis=0), 1.0, atol=1e-12)


def test_tucker_truth_orthonormal_columns():
    from dptensor.mechanisms import spawn_rngs

    spec = SyntheticSpec(seed=5, backbone="tucker")
    truth_rng = spawn_rngs(spec.seed, 4)[0]
    for n in spec.dims:
        q, _ = np.linalg.qr(truth_rng.standard_normal((n, spec.rank)))
        gram = q.T @ q
        assert np.allclose(gram, np.eye(spec.rank), atol=1e-10)


def test_spec_validation():
    with pytest.raises(ConfigError):
        SyntheticSpec(dims=(2, 2, 2), rank=3)
    with pytest.raises(ConfigError):
        SyntheticSpec(snr=0.0)
    with pytest.raises(ConfigError):
        SyntheticSpec(missing_ratio=1.0)
    with pytest.raises(ConfigError):
        SyntheticSpec(backbone="parafac")


def test_missing_ratio_extreme_split_error():
    # 1 observation cannot be split into train and test
    with pytest.raises(ConfigError):
        gen_synthetic(SyntheticSpec(dims=(2, 2, 2), rank=1, missing_ratio=0.9))


# ---------------------------------------------------------------------------
# min-max scaling


def test_min_max_known_values():
    x = np.array([2.0, 4.0, 6.0]).reshape(3, 1, 1)
    scaled, scale = min_max_scale(x)
    assert np.allclose(scaled.ravel(), [0.0, 0.5, 1.0])
    assert scale == (2.0, 6.0)


def test_min_max_already_unit():
    x = np.array([0.0, 1.0]).reshape(2, 1, 1)
    scaled, _ = min_max_scale(x)
    assert np.array_equal(scaled, x)


def test_min_max_roundtrip():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(4, 4, 4)) * 7 + 3
    scaled, scale = min_max_scale(x)
    assert np.allclose(invert_min_max(scaled, scale), x, atol=1e-12)


def test_min_max_constant_errors():
    with pytest.raises(DataError):
        min_max_scale(np.full((2, 2, 2), 5.0))


def test_min_max_observed_subset():
    x = np.zeros((2, 2, 2))
    x[0, 0, 0] = 1.0
    x[1, 1, 1] = 3.0
    idx = np.array([[0, 0, 0], [1, 1, 1]])
    scaled, scale = min_max_scale(x, idx)
    assert scale == (1.0, 3.0)
    assert scaled[0, 0, 0] == 0.0
    assert scaled[1, 1, 1] == 1.0


# ---------------------------------------------------------------------------
# movielens ingestion


def _write(path, lines):
    path.write_text("".join(f"{l}\n" for l in lines))
    return path


def test_read_fixture_triples(tmp_path):
    p = _write(
        tmp_path / "x.base",
        ["1\t5\t3\t100", "2\t1\t4\t86500", "943\t1682\t5\t200000"],
    )
    pairs, ratings, stamps = read_ml100k_file(p)
    assert pairs.tolist() == [[1, 5], [2, 1], [943, 1682]]
    assert ratings.tolist() == [3.0, 4.0, 5.0]
    assert stamps.tolist() == [100, 86500, 200000]


def test_malformed_line_reports_position(tmp_path):
    p = _write(tmp_path / "bad.base", ["1\t2\t3\t4", "1\t2\t3", "1\t2\t3\t4"])
    with pytest.raises(DataError) as err:
        read_ml100k_file(p)
    assert "bad.base:2" in str(err.value)


def test_non_numeric_field_reports_position(tmp_path):
    p = _write(tmp_path / "bad.base", ["1\t2\tfive\t4"])
    with pytest.raises(DataError) as err:
        read_ml100k_file(p)
    assert ":1" in str(err.value)


def test_rating_out_of_range_rejected(tmp_path):
    p = _write(tmp_path / "bad.base", ["1\t2\t6\t4"])
    with pytest.raises(DataError):
        read_ml100k_file(p)


def _mini_corpus(tmp_path):
    _write(
        tmp_path / "ua.base",
        ["1\t1\t5\t0", "1\t2\t3\t86400", "2\t1\t4\t86399", "2\t2\t2\t172800"],
    )
    _write(tmp_path / "ua.test", ["1\t3\t1\t86400"])
    return tmp_path


def test_load_ml100k_day_bins(tmp_path):
    ds = load_ml100k(_mini_corpus(tmp_path), "ua", shape=(5, 5, 3))
    assert ds.train.n_obs == 4
    assert ds.test.n_obs == 1
    # origin is the earliest stamp over base and test
    assert ds.t_origin == 0
    days = dict(zip(map(tuple, ds.train.indices[:, :2]), ds.train.indices[:, 2]))
    assert days[(0, 0)] == 0  # t=0
    assert days[(0, 1)] == 1  # exactly one day later
    assert days[(1, 0)] == 0  # one second before the boundary
    assert ds.test.indices[0, 2] == 1


def test_day_bins_clamped_to_last(tmp_path):
    _write(tmp_path / "ua.base", ["1\t1\t5\t0", "1\t2\t3\t86400000"])
    _write(tmp_path / "ua.test", ["2\t1\t4\t0"])
    ds = load_ml100k(tmp_path, "ua", shape=(5, 5, 3))
    assert ds.train.indices[:, 2].max() == 2  # clamped into the last bin


def test_user_out_of_shape_rejected(tmp_path):
    _write(tmp_path / "ua.base", ["9\t1\t5\t0"])
    _write(tmp_path / "ua.test", ["1\t1\t4\t0"])
    with pytest.raises(DataError):
        load_ml100k(tmp_path, "ua", shape=(5, 5, 3))


def test_missing_file_and_bad_split(tmp_path):
    with pytest.raises(DataError):
        load_ml100k(tmp_path, "ua")
    with pytest.raises(ConfigError):
        load_ml100k(tmp_path, "uc")


def test_default_shape_is_ml100k():
    assert ML100K_SHAPE == (943, 1682, 212)


def test_standin_generator_small(tmp_path):
    root = write_ml100k_standin(
        tmp_path, n_users=6, n_items=40, n_records=150, n_test_per_user=3, n_days=4, seed=0
    )
    ds = load_ml100k(root, "ua", shape=(6, 40, 4))
    assert ds.train.n_obs + ds.test.n_obs == 150
    assert ds.test.n_obs == 6 * 3
    assert set(np.unique(ds.test.indices[:, 0])) == set(range(6))
    # ub is a different holdout of the same records
    ds_b = load_ml100k(root, "ub", shape=(6, 40, 4))
    assert ds_b.test.n_obs == 18
    assert not np.array_equal(
        np.sort(ds.test.indices[:, 1]), np.sort(ds_b.test.indices[:, 1])
    )


def test_standin_generator_validates(tmp_path):
    with pytest.raises(ConfigError):
        write_ml100k_standin(tmp_path, n_users=10, n_items=40, n_records=10)


# ---------------------------------------------------------------------------
# bi-scaling


def test_biscale_dense_standardized_is_fixed_point():
    rng = np.random.default_rng(1)
    n = 12
    x = rng.normal(size=(n, n))
    # exact double standardization by alternating projections
    for _ in range(200):
        x = (x - x.mean(axis=1, keepdims=True)) / x.std(axis=1, keepdims=True)
        x = (x - x.mean(axis=0, keepdims=True)) / x.std(axis=0, keepdims=True)
    rows, cols = np.divmod(np.arange(n * n), n)
    scaled, a, b, s, g = biscale_matrix(rows, cols, x.ravel(), n, n)
    assert np.abs(a).max() < 1e-6
    assert np.abs(b).max() < 1e-6
    assert np.abs(s - 1).max() < 1e-6
    assert np.abs(g - 1).max() < 1e-6
    assert np.allclose(scaled, x.ravel(), atol=1e-5)


def test_biscale_single_observation_row_identity():
    # row 1 and column 2 have a single observation; their parameters stay identity
    rows = np.array([0, 0, 1])
    cols = np.array([0, 1, 2])
    vals = np.array([1.0, 3.0, 7.0])
    scaled, a, b, s, g = biscale_matrix(rows, cols, vals, 2, 3)
    assert a[1] == 0.0 and s[1] == 1.0
    assert b[2] == 0.0 and g[2] == 1.0
    assert scaled[2] == 7.0  # untouched by any fitted parameter


def test_biscale_random_dense_standardizes():
    rng = np.random.default_rng(2)
    n = 10
    x = rng.normal(3.0, 2.5, size=(n, n))
    rows, cols = np.divmod(np.arange(n * n), n)
    scaled, *_ = biscale_matrix(rows, cols, x.ravel(), n, n)
    mat = scaled.reshape(n, n)
    assert np.abs(mat.mean(axis=1)).max() < 1e-3
    assert np.abs(mat.mean(axis=0)).max() < 1e-3
    assert np.abs(mat.var(axis=1) - 1).max() < 1e-2
    assert np.abs(mat.var(axis=0) - 1).max() < 1e-2


def test_biscale_near_constant_row_keeps_identity_scale():
    rows = np.array([0, 0, 1, 1])
    cols = np.array([0, 1, 0, 1])
    vals = np.array([2.0, 2.0, 1.0, 5.0])
    scaled, a, b, s, g = biscale_matrix(rows, cols, vals, 2, 2)
    assert np.isfinite(scaled).all()
    assert (s >= 1e-3).all() and (g >= 1e-3).all()


def test_biscale_cube_roundtrip():
    rng = np.random.default_rng(3)
    n_obs = 400
    idx = np.column_stack(
        [rng.integers(0, 8, n_obs), rng.integers(0, 9, n_obs), rng.integers(0, 3, n_obs)]
    )
    lin = np.ravel_multi_index(idx.T, (8, 9, 3))
    _, keep = np.unique(lin, return_index=True)
    idx = idx[keep]
    vals = rng.normal(2.0, 1.5, size=len(idx))
    train = ObservedTensor((8, 9, 3), idx, vals)
    scaled_train, params = biscale(train)
    assert isinstance(params, BiscaleParams)
    # applying the fitted parameters reproduces the training transform
    reapplied = apply_biscale(train, params)
    assert np.allclose(reapplied.values, scaled_train.values, atol=1e-12)
    # and inverting recovers the original values
    back = invert_biscale(scaled_train.values, train.indices, params)
    assert np.allclose(back, vals, atol=1e-10)


def test_biscale_parameters_shape():
    train = ObservedTensor(
        (4, 5, 2),
        np.array([[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 0]]),
        np.array([1.0, 2.0, 3.0, 4.0]),
    )
    _, params = biscale(train)
    assert params.row_shift.shape == (2, 4)
    assert params.col_shift.shape == (2, 5)
    assert params.row_scale.shape == (2, 4)
    assert params.col_scale.shape == (2, 5)
    # slice 1 has no observations: identity everywhere
    assert np.array_equal(params.row_shift[1], np.zeros(4))
    assert np.array_equal(params.row_scale[1], np.ones(4))
