import numpy as np
import pytest

from asx.errors import TrainingError
from asx.geometry import normalize
from asx.learning import (SufficientStats, TrainConfig, encode, objective, surrogate, train,
                          update_bases)
from asx.model import BasisSet
from asx.solver import SolverConfig, reconstruction_errors

SAGITTA_8 = 1 - np.cos(np.pi / 8)


def test_config_validation():
    for kw in [dict(p=1), dict(p=3, epochs=0), dict(p=3, batch_size=0), dict(p=3, radius=0.0),
               dict(p=3, radius=1.5)]:
        with pytest.raises(ValueError):
            TrainConfig(**kw)


def test_update_single_point_exact_fit():
    y = np.array([0.6, 0.8, 0.0])
    stats = SufficientStats.from_codes(y, np.array([1.0, 0.0]))
    basis = BasisSet(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
    new = update_bases(stats, basis)
    np.testing.assert_allclose(new.bases[:, 0], y, atol=1e-15)
    # column 1 has A_jj = 0 and is left alone
    np.testing.assert_array_equal(new.bases[:, 1], basis.bases[:, 1])


def test_update_projects_onto_ball():
    stats = SufficientStats.from_codes(np.array([3.0, 4.0]), np.array([1.0, 0.0]))
    new = update_bases(stats, BasisSet(np.eye(2)))
    np.testing.assert_allclose(new.bases[:, 0], [0.6, 0.8])


def test_update_requires_data():
    with pytest.raises(ValueError):
        update_bases(SufficientStats.zeros(2, 2), BasisSet(np.eye(2)))


def test_surrogate_decreases(rng):
    for _ in range(20):
        d, p, n = 4, 6, 30
        Y = normalize(rng.standard_normal((n, d))).points
        X = normalize(rng.standard_normal((p, d))).points.T
        codes = encode(X, Y)
        stats = SufficientStats.from_codes(Y, codes)
        new = update_bases(stats, BasisSet(X))
        assert surrogate(stats, new.bases) <= surrogate(stats, X) + 1e-12
        assert np.linalg.norm(new.bases, axis=0).max() <= 1 + 1e-12
        const = np.sum(Y * Y)
        assert surrogate(stats, X) + const == pytest.approx(objective(X, Y, codes).sum())


def test_stats_symmetric_psd(rng):
    codes = rng.dirichlet(np.ones(5), 40)
    Y = rng.standard_normal((40, 3))
    stats = SufficientStats.zeros(3, 5).add(Y[:20], codes[:20]).add(Y[20:], codes[20:], 0.5)
    np.testing.assert_allclose(stats.A, stats.A.T, atol=1e-14)
    assert np.linalg.eigvalsh(stats.A).min() >= -1e-10
    assert stats.count == 40


def test_stats_replace_undoes_old_codes(rng):
    Y = rng.standard_normal((6, 3))
    c1 = rng.dirichlet(np.ones(4), 6)
    c2 = rng.dirichlet(np.ones(4), 6)
    s = SufficientStats.zeros(3, 4).replace(Y, np.zeros_like(c1), c1).replace(Y, c1, c2)
    ref = SufficientStats.from_codes(Y, c2)
    np.testing.assert_allclose(s.A, ref.A, atol=1e-14)
    np.testing.assert_allclose(s.B, ref.B, atol=1e-14)
    assert s.count == 6


def test_antipodal_pair():
    Y = np.array([[0.6, 0.8], [-0.6, -0.8]] * 10)
    res = train(normalize(Y), TrainConfig(p=2, epochs=50, seed=0))
    assert res.trace[-1] < 1e-6
    X = res.basis.bases
    cols = sorted(X.T.tolist())
    np.testing.assert_allclose(cols, [[-0.6, -0.8], [0.6, 0.8]], atol=1e-3)


def test_full_batch_monotone(circle_data):
    res = train(circle_data, TrainConfig(p=8, epochs=30, batch_size=200, seed=3))
    assert np.all(np.diff(res.trace) <= 1e-8)


def test_deterministic(circle_data):
    cfg = TrainConfig(p=6, epochs=3, seed=11)
    a, b = train(circle_data, cfg), train(circle_data, cfg)
    assert a.basis.bases.tobytes() == b.basis.bases.tobytes()
    assert a.trace == b.trace


def test_threads_do_not_change_result(circle_data):
    a = train(circle_data, TrainConfig(p=6, epochs=3, seed=11))
    b = train(circle_data, TrainConfig(p=6, epochs=3, seed=11, threads=3))
    assert a.basis.bases.tobytes() == b.basis.bases.tobytes()


def test_forgetting_variant_runs(circle_data):
    res = train(circle_data, TrainConfig(p=8, epochs=5, seed=1, forget=True))
    assert np.linalg.norm(res.basis.bases, axis=0).max() <= 1 + 1e-12
    assert res.trace[-1] < 0.05


def test_early_stop(circle_data):
    res = train(circle_data, TrainConfig(p=8, epochs=200, batch_size=200, seed=3, tol=1e-3))
    assert len(res.trace) < 200


def test_few_points_warns():
    Y = normalize(np.array([[1.0, 0.0], [0.0, 1.0]]))
    with pytest.warns(UserWarning):
        res = train(Y, TrainConfig(p=4, epochs=2))
    assert res.basis.p == 4


def test_solver_failure_is_training_error(circle_data):
    cfg = TrainConfig(p=8, epochs=1, solver=SolverConfig(max_iter=1))
    with pytest.raises(TrainingError) as info:
        train(circle_data, cfg)
    assert info.value.point is not None


def test_circle_run(circle_run, circle_data, circle_model):
    assert np.linalg.norm(circle_run.basis.bases, axis=0).max() <= 1 + 1e-12
    assert len(circle_run.activations) == 200
    err = reconstruction_errors(circle_model, circle_data.points)
    assert err.mean() <= SAGITTA_8
    assert max(s.dim for s in circle_model.simplices) <= 1
