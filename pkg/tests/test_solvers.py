import math

import numpy as np
import pytest

from dptensor._kernels import cp_epoch, tucker_epoch
from dptensor.exceptions import ConfigError, DivergenceError
from dptensor.solvers import (
    CpModel,
    FitConfig,
    TuckerModel,
    cp_entry_gradients,
    cp_objective,
    fit_cp,
    fit_tucker,
    tucker_entry_gradients,
    tucker_objective,
)
from dptensor.tensor_ops import ObservedTensor, all_indices, superdiagonal


def _random_cp(rng, dims=(3, 4, 5), rank=2):
    return CpModel(*(rng.normal(size=(n, rank)) for n in dims))


def _random_tucker(rng, dims=(3, 4, 5), rank=2):
    a, b, c = (rng.normal(size=(n, rank)) for n in dims)
    return TuckerModel(a, b, c, rng.normal(size=(rank, rank, rank)))


def _full_obs(x):
    return ObservedTensor.from_dense(x, all_indices(x.shape))


# ---------------------------------------------------------------------------
# objectives


def test_cp_objective_perfect_fit():
    rng = np.random.default_rng(0)
    model = _random_cp(rng)
    data = _full_obs(model.reconstruct())
    assert cp_objective(data, model, 0.0) == pytest.approx(0.0, abs=1e-18)


def test_cp_objective_zero_model():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(3, 3, 3))
    data = _full_obs(x)
    zero = CpModel(np.zeros((3, 2)), np.zeros((3, 2)), np.zeros((3, 2)))
    assert cp_objective(data, zero, 0.0) == pytest.approx((x**2).sum())


def test_cp_objective_matches_direct_sum():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(3, 3, 3))
    idx = all_indices(x.shape)[rng.random(27) < 0.6]
    data = ObservedTensor.from_dense(x, idx)
    model = _random_cp(rng, dims=(3, 3, 3), rank=2)
    lam = 0.05
    direct = sum(
        (x[i, j, k] - sum(model.a[i, r] * model.b[j, r] * model.c[k, r] for r in range(2))) ** 2
        for i, j, k in idx
    )
    direct += lam * ((model.a**2).sum() + (model.b**2).sum() + (model.c**2).sum())
    assert cp_objective(data, model, lam) == pytest.approx(direct, rel=1e-12)


def test_tucker_objective_matches_direct_sum():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(3, 3, 3))
    idx = all_indices(x.shape)[rng.random(27) < 0.6]
    data = ObservedTensor.from_dense(x, idx)
    model = _random_tucker(rng, dims=(3, 3, 3), rank=2)
    lam_o, lam_g = 0.05, 0.01
    recon = model.reconstruct()
    direct = sum((x[i, j, k] - recon[i, j, k]) ** 2 for i, j, k in idx)
    direct += lam_o * ((model.a**2).sum() + (model.b**2).sum() + (model.c**2).sum())
    direct += lam_g * (model.core**2).sum()
    assert tucker_objective(data, model, lam_o, lam_g) == pytest.approx(direct, rel=1e-12)


def test_tucker_objective_zero_model():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(2, 2, 2))
    data = _full_obs(x)
    zero = TuckerModel(
        np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2, 2))
    )
    assert tucker_objective(data, zero, 0.0, 0.0) == pytest.approx((x**2).sum())


# ---------------------------------------------------------------------------
# per-entry gradients: hand cases


def test_cp_gradients_zero_residual():
    model = CpModel(np.ones((2, 1)), np.ones((2, 1)), np.ones((2, 1)))
    ga, gb, gc = cp_entry_gradients(1.0, 0, 0, 0, model, 0.0)
    assert np.allclose([ga, gb, gc], 0.0)


def test_cp_gradients_hand_case():
    # all parameters 1, x = 0: residual -1, each gradient 2
    model = CpModel(np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1)))
    ga, gb, gc = cp_entry_gradients(0.0, 0, 0, 0, model, 0.0)
    assert ga[0] == gb[0] == gc[0] == 2.0


def test_tucker_gradients_hand_case():
    model = TuckerModel(np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1, 1)))
    ga, gb, gc, gg = tucker_entry_gradients(0.0, 0, 0, 0, model, 0.0, 0.0)
    assert ga[0] == gb[0] == gc[0] == gg[0, 0, 0] == 2.0


def test_tucker_gradients_zero_residual():
    model = TuckerModel(np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1, 1)))
    ga, gb, gc, gg = tucker_entry_gradients(1.0, 0, 0, 0, model, 0.0, 0.0)
    assert np.allclose([ga[0], gb[0], gc[0], gg[0, 0, 0]], 0.0)


# ---------------------------------------------------------------------------
# per-entry gradients: finite-difference oracle


def _fd(loss, vec, idx, h=1e-6):
    up = vec.copy()
    dn = vec.copy()
    up[idx] += h
    dn[idx] -= h
    return (loss(up) - loss(dn)) / (2 * h)


def _check_close(analytic, numeric, rel=1e-5):
    denom = max(abs(analytic), abs(numeric), 1e-8)
    assert abs(analytic - numeric) / denom < rel


def test_cp_gradients_finite_difference():
    rng = np.random.default_rng(5)
    for _ in range(20):
        model = _random_cp(rng, rank=3)
        i, j, k = rng.integers(0, 3), rng.integers(0, 4), rng.integers(0, 5)
        x = rng.normal()
        lam = rng.uniform(0, 0.1)
        ga, gb, gc = cp_entry_gradients(x, i, j, k, model, lam)

        def loss(ar, br, cr):
            e = x - float(ar @ (br * cr))
            return e * e + lam * float(ar @ ar + br @ br + cr @ cr)

        ar, br, cr = model.a[i].copy(), model.b[j].copy(), model.c[k].copy()
        for r in range(3):
            _check_close(ga[r], _fd(lambda v: loss(v, br, cr), ar, r))
            _check_close(gb[r], _fd(lambda v: loss(ar, v, cr), br, r))
            _check_close(gc[r], _fd(lambda v: loss(ar, br, v), cr, r))


def test_tucker_gradients_finite_difference():
    rng = np.random.default_rng(6)
    for _ in range(20):
        model = _random_tucker(rng, rank=2)
        i, j, k = rng.integers(0, 3), rng.integers(0, 4), rng.integers(0, 5)
        x = rng.normal()
        lam_o = rng.uniform(0, 0.1)
        lam_g = rng.uniform(0, 0.1)
        ga, gb, gc, gg = tucker_entry_gradients(x, i, j, k, model, lam_o, lam_g)

        def loss(ar, br, cr, core):
            e = x - float(np.einsum("pqt,p,q,t->", core, ar, br, cr))
            pen = lam_o * float(ar @ ar + br @ br + cr @ cr)
            return e * e + pen + lam_g * float((core**2).sum())

        ar, br, cr = model.a[i].copy(), model.b[j].copy(), model.c[k].copy()
        core = model.core.copy()
        for r in range(2):
            _check_close(ga[r], _fd(lambda v: loss(v, br, cr, core), ar, r))
            _check_close(gb[r], _fd(lambda v: loss(ar, v, cr, core), br, r))
            _check_close(gc[r], _fd(lambda v: loss(ar, br, v, core), cr, r))
        flat = core.ravel().copy()
        for pos in range(8):
            num = _fd(lambda v: loss(ar, br, cr, v.reshape(2, 2, 2)), flat, pos)
            _check_close(gg.ravel()[pos], num)


# ---------------------------------------------------------------------------
# epoch kernels vs a straight-line python reference


def _reference_cp_epoch(a, b, c, idx, vals, order, lr, reg, clip_c, noise):
    d = a.shape[1]
    for t in range(len(order)):
        e = order[t]
        i, j, k = idx[e]
        xhat = 0.0
        for r in range(d):
            xhat += a[i, r] * b[j, r] * c[k, r]
        res = vals[e] - xhat
        ga = [-2.0 * res * (b[j, r] * c[k, r]) + 2.0 * reg * a[i, r] for r in range(d)]
        gb = [-2.0 * res * (a[i, r] * c[k, r]) + 2.0 * reg * b[j, r] for r in range(d)]
        gc = [-2.0 * res * (a[i, r] * b[j, r]) + 2.0 * reg * c[k, r] for r in range(d)]
        nrm = 0.0
        for r in range(d):
            nrm += gc[r] * gc[r]
        denom = max(1.0, np.sqrt(nrm) / clip_c)
        for r in range(d):
            a[i, r] -= lr * ga[r]
            b[j, r] -= lr * gb[r]
            c[k, r] -= lr * (gc[r] / denom + noise[t, r])


def _reference_tucker_epoch(a, b, c, g, idx, vals, order, lr, reg_f, reg_g, clip_c, noise):
    d = a.shape[1]
    for t in range(len(order)):
        e = order[t]
        i, j, k = idx[e]
        xhat = 0.0
        for p in range(d):
            for q in range(d):
                for s in range(d):
                    xhat += g[p, q, s] * a[i, p] * b[j, q] * c[k, s]
        res = vals[e] - xhat
        ga = np.empty(d)
        gb = np.empty(d)
        gc = np.empty(d)
        gg = np.empty((d, d, d))
        for p in range(d):
            acc = 0.0
            for q in range(d):
                for s in range(d):
                    acc += g[p, q, s] * b[j, q] * c[k, s]
            ga[p] = -2.0 * res * acc + 2.0 * reg_f * a[i, p]
        for q in range(d):
            acc = 0.0
            for p in range(d):
                for s in range(d):
                    acc += g[p, q, s] * a[i, p] * c[k, s]
            gb[q] = -2.0 * res * acc + 2.0 * reg_f * b[j, q]
        for s in range(d):
            acc = 0.0
            for p in range(d):
                for q in range(d):
                    acc += g[p, q, s] * a[i, p] * b[j, q]
            gc[s] = -2.0 * res * acc + 2.0 * reg_f * c[k, s]
        for p in range(d):
            for q in range(d):
                for s in range(d):
                    gg[p, q, s] = -2.0 * res * (a[i, p] * b[j, q] * c[k, s]) + 2.0 * reg_g * g[p, q, s]
        nrm = 0.0
        for r in range(d):
            nrm += gc[r] * gc[r]
        denom = max(1.0, np.sqrt(nrm) / clip_c)
        for r in range(d):
            a[i, r] -= lr * ga[r]
            b[j, r] -= lr * gb[r]
            c[k, r] -= lr * (gc[r] / denom + noise[t, r])
        for p in range(d):
            for q in range(d):
                for s in range(d):
                    g[p, q, s] -= lr * gg[p, q, s]


def _epoch_inputs(rng, dims=(4, 5, 6), rank=2, n_obs=30):
    lin = rng.choice(dims[0] * dims[1] * dims[2], size=n_obs, replace=False)
    idx = np.ascontiguousarray(
        np.column_stack(np.unravel_index(lin, dims)), dtype=np.int64
    )
    vals = rng.normal(size=n_obs)
    order = rng.permutation(n_obs)
    noise = rng.normal(size=(n_obs, rank)) * 0.01
    return idx, vals, order, noise


def test_cp_kernel_matches_reference():
    rng = np.random.default_rng(7)
    idx, vals, order, noise = _epoch_inputs(rng)
    a0, b0, c0 = (rng.uniform(size=(n, 2)) for n in (4, 5, 6))
    for clip in (math.inf, 0.3):
        ka, kb, kc = a0.copy(), b0.copy(), c0.copy()
        ra, rb, rc = a0.copy(), b0.copy(), c0.copy()
        cp_epoch(ka, kb, kc, idx, vals, order, 0.01, 0.02, clip, noise)
        _reference_cp_epoch(ra, rb, rc, idx, vals, order, 0.01, 0.02, clip, noise)
        assert np.array_equal(ka, ra)
        assert np.array_equal(kb, rb)
        assert np.array_equal(kc, rc)


def test_tucker_kernel_matches_reference():
    rng = np.random.default_rng(8)
    idx, vals, order, noise = _epoch_inputs(rng)
    a0, b0, c0 = (rng.uniform(size=(n, 2)) for n in (4, 5, 6))
    g0 = rng.uniform(-0.5, 0.5, size=(2, 2, 2))
    for clip in (math.inf, 0.3):
        ka, kb, kc, kg = a0.copy(), b0.copy(), c0.copy(), g0.copy()
        ra, rb, rc, rg = a0.copy(), b0.copy(), c0.copy(), g0.copy()
        tucker_epoch(ka, kb, kc, kg, idx, vals, order, 0.01, 0.02, 0.005, clip, noise, True)
        _reference_tucker_epoch(ra, rb, rc, rg, idx, vals, order, 0.01, 0.02, 0.005, clip, noise)
        assert np.array_equal(ka, ra)
        assert np.array_equal(kb, rb)
        assert np.array_equal(kc, rc)
        assert np.array_equal(kg, rg)


# ---------------------------------------------------------------------------
# fitting behavior


def _rank1_instance(rng, dims=(6, 6, 6)):
    # nonnegative rank-1 target, fully observed
    u, v, w = (rng.uniform(0.5, 1.5, size=(n, 1)) for n in dims)
    x = CpModel(u, v, w).reconstruct()
    return _full_obs(x)


def test_fit_cp_converges_on_rank1():
    rng = np.random.default_rng(9)
    data = _rank1_instance(rng)
    cfg = FitConfig(rank=1, lr=0.005, epochs=200, seed=0)
    model, objectives = fit_cp(data, cfg)
    assert objectives[-1] < 1e-2 * objectives[0]
    assert model.rank == 1


def test_fit_tucker_converges_on_rank1():
    rng = np.random.default_rng(10)
    data = _rank1_instance(rng)
    cfg = FitConfig(rank=1, lr=0.005, epochs=200, seed=0)
    model, objectives = fit_tucker(data, cfg)
    assert objectives[-1] < 1e-2 * objectives[0]


def test_fit_cp_deterministic():
    rng = np.random.default_rng(11)
    data = _rank1_instance(rng)
    cfg = FitConfig(rank=2, lr=0.005, epochs=5, reg_factors=0.01, seed=123)
    m1, o1 = fit_cp(data, cfg)
    m2, o2 = fit_cp(data, cfg)
    assert np.array_equal(m1.a, m2.a)
    assert np.array_equal(m1.b, m2.b)
    assert np.array_equal(m1.c, m2.c)
    assert np.array_equal(o1, o2)


def test_fit_tucker_deterministic():
    rng = np.random.default_rng(12)
    data = _rank1_instance(rng)
    cfg = FitConfig(rank=2, lr=0.005, epochs=5, reg_factors=0.01, reg_core=0.001, seed=9)
    m1, _ = fit_tucker(data, cfg)
    m2, _ = fit_tucker(data, cfg)
    assert np.array_equal(m1.a, m2.a)
    assert np.array_equal(m1.core, m2.core)


def test_seed_changes_trajectory():
    rng = np.random.default_rng(13)
    data = _rank1_instance(rng)
    m1, _ = fit_cp(data, FitConfig(rank=2, lr=0.005, epochs=3, seed=0))
    m2, _ = fit_cp(data, FitConfig(rank=2, lr=0.005, epochs=3, seed=1))
    assert not np.array_equal(m1.a, m2.a)


def test_objective_mostly_non_increasing():
    rng = np.random.default_rng(14)
    u, v, w = (rng.uniform(0.5, 1.5, size=(6, 2)) for _ in range(3))
    data = _full_obs(CpModel(u, v, w).reconstruct())
    cfg = FitConfig(rank=2, lr=0.005, epochs=100, seed=0)
    _, objectives = fit_cp(data, cfg)
    diffs = np.diff(objectives)
    assert (diffs <= 1e-12).mean() >= 0.95


def test_cp_tucker_single_epoch_equivalence():
    rng = np.random.default_rng(15)
    data = _rank1_instance(rng)
    cfg = FitConfig(rank=3, lr=0.005, epochs=1, reg_factors=0.01, seed=4)
    cp_model, _ = fit_cp(data, cfg)
    tk_model, _ = fit_tucker(
        data, cfg, core_init=superdiagonal(3), freeze_core=True
    )
    assert np.allclose(cp_model.a, tk_model.a, rtol=0, atol=1e-10)
    assert np.allclose(cp_model.b, tk_model.b, rtol=0, atol=1e-10)
    assert np.allclose(cp_model.c, tk_model.c, rtol=0, atol=1e-10)


def test_divergence_error_names_epoch():
    rng = np.random.default_rng(16)
    data = _rank1_instance(rng)
    cfg = FitConfig(rank=2, lr=50.0, epochs=10, seed=0)
    with pytest.raises(DivergenceError) as err:
        fit_cp(data, cfg)
    assert "epoch" in str(err.value)
    assert err.value.epoch >= 1


def test_fit_rejects_empty_observations():
    empty = ObservedTensor((2, 2, 2), np.zeros((0, 3), int), np.zeros(0))
    with pytest.raises(ConfigError):
        fit_cp(empty, FitConfig(rank=1, lr=0.01, epochs=1))


def test_fit_cp_rejects_core_penalty():
    rng = np.random.default_rng(17)
    data = _rank1_instance(rng)
    with pytest.raises(ConfigError):
        fit_cp(data, FitConfig(rank=1, lr=0.01, epochs=1, reg_core=0.1))


def test_fit_config_validation():
    with pytest.raises(ConfigError):
        FitConfig(rank=0, lr=0.01, epochs=1)
    with pytest.raises(ConfigError):
        FitConfig(rank=1, lr=0.0, epochs=1)
    with pytest.raises(ConfigError):
        FitConfig(rank=1, lr=0.01, epochs=0)
    with pytest.raises(ConfigError):
        FitConfig(rank=1, lr=0.01, epochs=1, reg_factors=-0.1)


def test_objectives_trace_matches_objective_function():
    rng = np.random.default_rng(18)
    data = _rank1_instance(rng)
    cfg = FitConfig(rank=2, lr=0.005, epochs=3, reg_factors=0.01, seed=2)
    model, objectives = fit_cp(data, cfg)
    assert len(objectives) == 3
    assert objectives[-1] == pytest.approx(cp_objective(data, model, 0.01), rel=1e-12)


def test_shuffle_disabled_is_sequential():
    rng = np.random.default_rng(19)
    data = _rank1_instance(rng)
    cfg = FitConfig(rank=1, lr=0.005, epochs=2, seed=0, shuffle=False)
    m1, _ = fit_cp(data, cfg)
    m2, _ = fit_cp(data, cfg)
    assert np.array_equal(m1.a, m2.a)
    m3, _ = fit_cp(data, FitConfig(rank=1, lr=0.005, epochs=2, seed=0, shuffle=True))
    assert not np.array_equal(m1.a, m3.a)
