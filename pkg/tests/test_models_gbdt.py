import numpy as np
import pytest

from bnbprice.models import gbdt
from bnbprice.models.registry import model_from_doc, model_to_doc
from bnbprice.serialize import dumps


HAND_X = np.array([[0.0], [0.0], [1.0], [1.0]])
HAND_Y = np.array([0.0, 0.0, 10.0, 10.0])


def hand_params(**kw):
    base = dict(n_estimators=1, learning_rate=1.0, growth="depth_wise",
                max_depth=1, min_samples_leaf=1, alpha=0.0, lam=0.0)
    base.update(kw)
    return gbdt.GbdtParams(**base)


def brute_force_split(rows, X, r, params):
    """Left-to-right rescan of every (feature, midpoint) candidate.

    Accumulates node sums sequentially in sorted order so the arithmetic
    matches the engine's prefix-sum scan bit for bit.
    """
    lam = params.lam
    best = None
    for f in range(X.shape[1]):
        ordered = sorted(rows, key=lambda i: X[i, f])
        n = len(ordered)
        total = 0.0
        for i in ordered:
            total += r[i]
        parent = total * total / (n + lam)
        sl = 0.0
        for pos in range(n - 1):
            sl += r[ordered[pos]]
            nl = pos + 1
            nr = n - nl
            if X[ordered[pos], f] == X[ordered[pos + 1], f]:
                continue
            if nl < params.min_samples_leaf or nr < params.min_samples_leaf:
                continue
            sr = total - sl
            gain = sl * sl / (nl + lam) + sr * sr / (nr + lam) - parent
            thr = (X[ordered[pos], f] + X[ordered[pos + 1], f]) / 2.0
            if best is None or gain > best[2] or (gain == best[2] and (f, thr) < best[:2]):
                best = (f, thr, gain)
    if best is None or not best[2] > params.min_gain:
        return None
    return best


def test_single_round_hand_trace():
    model = gbdt.gbdt_fit(HAND_X, HAND_Y, hand_params())
    assert model.base_score == 5.0
    tree = model.trees[0]
    assert tree.feature[0] == 0
    assert tree.threshold[0] == 0.5
    assert model.feature_gain[0] == 100.0
    leaf_values = sorted(tree.value[tree.feature == -1])
    assert leaf_values == [-5.0, 5.0]
    preds = gbdt.gbdt_predict(model, HAND_X)
    assert np.array_equal(preds, HAND_Y)


def test_hand_trace_with_learning_rate():
    model = gbdt.gbdt_fit(HAND_X, HAND_Y, hand_params(learning_rate=0.1))
    preds = gbdt.gbdt_predict(model, HAND_X)
    assert np.array_equal(preds, np.array([4.5, 4.5, 5.5, 5.5]))


def test_predict_routes_by_hand():
    model = gbdt.gbdt_fit(HAND_X, HAND_Y, hand_params())
    assert gbdt.gbdt_predict(model, np.array([[1.0]]))[0] == 10.0
    # a point exactly on the threshold goes left
    assert gbdt.gbdt_predict(model, np.array([[0.5]]))[0] == 0.0
    assert gbdt.gbdt_predict(model, np.array([[0.4999]]))[0] == 0.0
    assert gbdt.gbdt_predict(model, np.array([[0.5001]]))[0] == 10.0


def test_constant_target_stays_at_base():
    y = np.full(8, 3.25)
    X = np.arange(8, dtype=float)[:, None]
    model = gbdt.gbdt_fit(X, y, hand_params(n_estimators=3))
    preds = gbdt.gbdt_predict(model, X)
    assert np.array_equal(preds, y)
    assert all(int((t.feature >= 0).sum()) == 0 for t in model.trees)


def test_find_best_split_hand_example():
    params = hand_params()
    r = HAND_Y - HAND_Y.mean()
    got = gbdt.find_best_split([0, 1, 2, 3], HAND_X, r, params)
    assert got == (0, 0.5, 100.0)


def test_find_best_split_none_cases():
    params = hand_params()
    r = np.zeros(4)
    assert gbdt.find_best_split([0, 1, 2, 3], HAND_X, r, params) is None
    with pytest.raises(ValueError):
        gbdt.find_best_split([], HAND_X, r, params)
    single = gbdt.find_best_split([2], HAND_X, HAND_Y - 5.0, params)
    assert single is None


def test_tie_prefers_lower_feature_index():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]])
    r = np.array([-5.0, -5.0, 5.0, 5.0])
    f, thr, gain = gbdt.find_best_split([0, 1, 2, 3], X, r, hand_params())
    assert (f, thr, gain) == (0, 0.5, 100.0)


def test_min_samples_leaf_blocks_split():
    params = hand_params(min_samples_leaf=3)
    r = HAND_Y - 5.0
    assert gbdt.find_best_split([0, 1, 2, 3], HAND_X, r, params) is None


def test_large_alpha_zeroes_leaves():
    model = gbdt.gbdt_fit(HAND_X, HAND_Y, hand_params(alpha=1e6))
    preds = gbdt.gbdt_predict(model, HAND_X)
    assert np.array_equal(preds, np.full(4, 5.0))


def test_depth_budget_limits_leaf_count():
    rng = np.random.RandomState(0)
    X = rng.randn(200, 3)
    y = rng.randn(200)
    model = gbdt.gbdt_fit(X, y, hand_params(max_depth=2, min_samples_leaf=1))
    tree = model.trees[0]
    assert int((tree.feature == -1).sum()) <= 4


def test_leaf_budget_limits_leaf_count():
    rng = np.random.RandomState(1)
    X = rng.randn(200, 3)
    y = rng.randn(200)
    params = hand_params(growth="leaf_wise", num_leaves=5, min_samples_leaf=1)
    model = gbdt.gbdt_fit(X, y, params)
    assert int((model.trees[0].feature == -1).sum()) == 5


def test_leaf_wise_matches_depth_wise_budget_bound():
    rng = np.random.RandomState(4)
    for trial in range(5):
        X = rng.randn(150, 4)
        y = np.sin(X[:, 0]) + 0.5 * X[:, 1] + 0.1 * rng.randn(150)
        depth = gbdt.gbdt_fit(X, y, hand_params(max_depth=3, min_samples_leaf=5))
        leaf = gbdt.gbdt_fit(X, y, hand_params(growth="leaf_wise", num_leaves=8,
                                               min_samples_leaf=5))
        mse_depth = float(np.mean((y - gbdt.gbdt_predict(depth, X)) ** 2))
        mse_leaf = float(np.mean((y - gbdt.gbdt_predict(leaf, X)) ** 2))
        assert mse_leaf <= mse_depth + 1e-12


def test_training_mse_history_non_increasing():
    rng = np.random.RandomState(2)
    X = rng.randn(300, 5)
    y = np.sin(X[:, 0]) + 0.5 * X[:, 1] + 0.1 * rng.randn(300)
    for growth in ("depth_wise", "leaf_wise"):
        params = gbdt.GbdtParams(n_estimators=60, learning_rate=0.3,
                                 growth=growth, max_depth=3, num_leaves=8,
                                 min_samples_leaf=5, alpha=0.1, lam=1.0)
        model = gbdt.gbdt_fit(X, y, params)
        history = model.train_mse
        assert len(history) == 60
        for before, after in zip(history, history[1:]):
            assert after <= before * (1.0 + 1e-9) + 1e-12


def test_split_matches_brute_force_oracle():
    rng = np.random.RandomState(7)
    mismatches = 0
    for trial in range(60):
        n = rng.randint(2, 200)
        m = rng.randint(1, 6)
        X = rng.randn(n, m)
        for j in range(m):
            if rng.rand() < 0.5:
                X[:, j] = rng.randint(0, rng.choice([2, 3, 5]), size=n).astype(float)
        r = rng.randn(n)
        if rng.rand() < 0.3:
            r = np.round(r, 3)
        params = gbdt.GbdtParams(
            n_estimators=1, learning_rate=1.0, growth="depth_wise",
            max_depth=1,
            min_samples_leaf=int(rng.choice([1, 2, 5, 20])),
            alpha=0.0,
            lam=float(rng.choice([0.0, 0.5, 1.0, 3.0])),
            min_gain=float(rng.choice([0.0, 0.1])))
        rows = list(range(n))
        got = gbdt.find_best_split(rows, X, r, params)
        want = brute_force_split(rows, X, r, params)
        if got != want:
            mismatches += 1
    assert mismatches == 0


def test_feature_gain_accumulates_and_non_negative():
    rng = np.random.RandomState(3)
    X = rng.randn(120, 4)
    y = X[:, 2] * 3.0 + 0.1 * rng.randn(120)
    model = gbdt.gbdt_fit(X, y, hand_params(n_estimators=5, max_depth=3,
                                            min_samples_leaf=5))
    assert np.all(model.feature_gain >= 0.0)
    assert model.feature_gain[2] == model.feature_gain.max()


def test_param_validation():
    bad = [dict(n_estimators=0), dict(learning_rate=0.0), dict(learning_rate=1.5),
           dict(growth="sideways"), dict(max_depth=0), dict(num_leaves=0),
           dict(min_samples_leaf=0), dict(alpha=-1.0), dict(lam=-0.1),
           dict(min_gain=-1.0)]
    for kw in bad:
        with pytest.raises(ValueError):
            gbdt.GbdtParams(**kw).validate()
    with pytest.raises(ValueError):
        gbdt.gbdt_fit(np.zeros((0, 1)), np.zeros(0), hand_params())
    with pytest.raises(ValueError):
        gbdt.gbdt_fit(np.array([[np.inf]]), np.array([1.0]), hand_params())
    model = gbdt.gbdt_fit(HAND_X, HAND_Y, hand_params())
    with pytest.raises(ValueError):
        gbdt.gbdt_predict(model, np.zeros((2, 3)))


def test_persistence_round_trip_is_byte_identical():
    rng = np.random.RandomState(6)
    X = rng.randn(100, 3)
    y = np.sin(X[:, 0]) + 0.2 * rng.randn(100)
    params = gbdt.GbdtParams(n_estimators=10, learning_rate=0.2, growth="leaf_wise",
                             num_leaves=6, min_samples_leaf=4, alpha=0.2, lam=0.5)
    model = gbdt.gbdt_fit(X, y, params)
    doc = model_to_doc(model)
    clone = model_from_doc(doc)
    assert dumps(model_to_doc(clone)) == dumps(doc)
    assert np.array_equal(gbdt.gbdt_predict(clone, X), gbdt.gbdt_predict(model, X))


def test_fit_twice_same_serialized_bytes():
    rng = np.random.RandomState(8)
    X = rng.randn(80, 2)
    y = rng.randn(80)
    params = hand_params(n_estimators=4, max_depth=3, min_samples_leaf=2)
    a = gbdt.gbdt_fit(X, y, params)
    b = gbdt.gbdt_fit(X, y, params)
    assert dumps(model_to_doc(a)) == dumps(model_to_doc(b))
