"""Classifier cores and the shared fit/predict plumbing."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import replace

import numpy as np
import pytest

from reentrylab.behaviors import ETHER, FuzzConfig, make_benign_user, make_malicious_user, make_vulnerable_service
from reentrylab.chain import ChainState, Transaction, deploy
from reentrylab.detector import (
    FEATURE_NAMES,
    MODEL_KINDS,
    SCALED_KINDS,
    Dataset,
    DegenerateTraining,
    DimensionMismatch,
    FeatureVector,
    ModelSpec,
    Scaler,
    decision_scores,
    extract_features,
    fit,
    predict,
)
from reentrylab.detector.bayes import GaussianNBClassifier
from reentrylab.detector.forest import RandomForestClassifier
from reentrylab.detector.linear import lr_loss_and_grad
from reentrylab.detector.neighbors import KNNClassifier
from reentrylab.detector.svm import LinearSVMClassifier, poly3_kernel
from reentrylab.detector.tree import DecisionTreeClassifier
from reentrylab.monitor import TransactionFeed, WatchList, observe


def _toy_dataset(n: int = 40, seed: int = 0, separation: float = 4.0) -> Dataset:
    """Two well-separated Gaussian blobs over all four features."""
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n):
        label = i % 2
        row = rng.normal(loc=separation * label, size=4)
        samples.append(FeatureVector(f"t{i:03d}", *row, label=label))
    return Dataset(samples=tuple(samples))


# --------------------------------------------------------- feature extraction


def _observe_donation(user_behavior, endowment=10 * ETHER):
    state = ChainState()
    feed = TransactionFeed(state)
    service = deploy(
        state, make_vulnerable_service(ETHER, FuzzConfig()), endowment=endowment
    )
    user = deploy(state, user_behavior)
    result = feed.submit(Transaction(user, service, "donate", 0, 1_000_000))
    return observe(feed, result.receipt.transactionHash, WatchList(c1=service, c2=user))


def test_extract_features_from_a_benign_donation():
    obs = _observe_donation(make_benign_user(FuzzConfig()))
    vector = extract_features(obs)
    assert vector.values() == (21_700.0, -float(ETHER), float(ETHER), 1.5)
    assert vector.label is None
    assert vector.tx_id == obs.tx_id


def test_extract_features_from_a_bounded_drain():
    obs = _observe_donation(make_malicious_user(3, FuzzConfig()))
    vector = extract_features(obs)
    assert vector.bal_diff_c1 == -3.0 * ETHER
    assert vector.bal_diff_c2 == 3.0 * ETHER
    assert vector.avg_stack_depth == 3.5


def test_feature_vector_masking_preserves_order():
    vector = FeatureVector("x", 1.0, 2.0, 3.0, 4.0)
    assert vector.values() == (1.0, 2.0, 3.0, 4.0)
    assert vector.values(("avg_stack_depth", "gas_used")) == (4.0, 1.0)


# ---------------------------------------------------------------- dataset


def test_dataset_validates_mask_and_ids():
    sample = FeatureVector("a", 1.0, 2.0, 3.0, 4.0, label=0)
    with pytest.raises(ValueError):
        Dataset(samples=(sample,), feature_mask=("gas_used", "oops"))
    with pytest.raises(ValueError):
        Dataset(samples=(sample,), feature_mask=())
    duplicate = FeatureVector("a", 5.0, 6.0, 7.0, 8.0, label=1)
    with pytest.raises(ValueError):
        Dataset(samples=(sample, duplicate))


def test_dataset_matrix_follows_mask():
    ds = _toy_dataset(6)
    assert ds.matrix().shape == (6, 4)
    narrowed = ds.with_mask(("bal_diff_c2", "gas_used"))
    assert narrowed.matrix().shape == (6, 2)
    assert narrowed.matrix()[0, 1] == ds.matrix()[0, 0]
    assert len(narrowed.subset([0, 2])) == 2


def test_unlabelled_samples_block_training():
    ds = Dataset(samples=(FeatureVector("a", 1.0, 2.0, 3.0, 4.0),))
    with pytest.raises(ValueError):
        ds.labels()


def test_model_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec(kind="gru")
    with pytest.raises(ValueError):
        ModelSpec(kind="svm", kernel="rbf")
    assert ModelSpec(kind="rf").with_seed(9).seed == 9
    assert MODEL_KINDS == ("rf", "nb", "lr", "knn", "svm")


def test_scaler_passes_constant_features_through():
    X = np.array([[1.0, 5.0], [3.0, 5.0]])
    scaler = Scaler().fit(X)
    out = scaler.transform(X)
    assert out[:, 0].tolist() == [-1.0, 1.0]
    assert out[:, 1].tolist() == [0.0, 0.0]


# ----------------------------------------------------------------- plumbing


def test_training_requires_both_classes():
    rows = tuple(
        FeatureVector(f"s{i}", float(i), 0.0, 0.0, 1.0, label=0) for i in range(12)
    )
    with pytest.raises(DegenerateTraining):
        fit(ModelSpec(kind="nb"), Dataset(samples=rows))


def test_prediction_checks_dimensions(dataset0):
    model = fit(ModelSpec(kind="nb"), dataset0)
    with pytest.raises(DimensionMismatch):
        model.predict([1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        model.decision_score([1.0] * 5)


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_only_distance_and_margin_models_get_a_scaler(kind, dataset0):
    model = fit(ModelSpec(kind=kind), dataset0)
    assert (model.scaler is not None) == (kind in SCALED_KINDS)
    assert model.feature_mask == FEATURE_NAMES


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_fit_is_deterministic_for_every_kind(kind, dataset0):
    first = fit(ModelSpec(kind=kind), dataset0)
    second = fit(ModelSpec(kind=kind), dataset0)
    assert first.dump() == second.dump()
    X = dataset0.matrix()
    assert [first.predict(row) for row in X[::9]] == [
        second.predict(row) for row in X[::9]
    ]


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_dump_is_self_describing_json(kind, dataset0):
    model = fit(ModelSpec(kind=kind), dataset0)
    payload = json.loads(model.dump())
    assert payload["kind"] == kind
    assert payload["feature_mask"] == list(FEATURE_NAMES)
    assert (payload["scaler"] is not None) == (kind in SCALED_KINDS)
    assert payload["core"]["type"]


@pytest.mark.parametrize("kind", sorted(SCALED_KINDS))
def test_standardized_models_ignore_feature_scale(kind):
    # doubling a feature doubles its mean and spread; the scaler cancels
    # the factor exactly, so predictions cannot move
    base = _toy_dataset(36, seed=3, separation=2.5)
    scaled = Dataset(
        samples=tuple(replace(s, gas_used=s.gas_used * 2.0) for s in base.samples)
    )
    model_a = fit(ModelSpec(kind=kind), base)
    model_b = fit(ModelSpec(kind=kind), scaled)
    for sample in base.samples:
        raw = sample.values()
        doubled = (raw[0] * 2.0,) + raw[1:]
        assert model_a.predict(raw) == model_b.predict(doubled)


# -------------------------------------------------------------------- forest


def test_forest_prediction_is_the_modal_tree_vote(dataset0):
    model = fit(ModelSpec(kind="rf", seed=123), dataset0)
    core = model.core
    for row in dataset0.matrix()[::5]:
        votes = Counter(core.tree_votes(row))
        modal = 1 if votes[1] > votes[0] else 0
        assert core.predict_one(row) == modal
        assert model.decision_score(row) == votes[1] / 100


def test_forest_tie_vote_lands_on_benign():
    class _Const:
        def __init__(self, value):
            self.value = value

        def predict_one(self, x):
            return self.value

    forest = RandomForestClassifier(n_trees=2, seed=0)
    forest.trees = [_Const(0), _Const(1)]
    assert forest.predict_one(np.zeros(4)) == 0
    forest.trees = [_Const(1), _Const(1)]
    assert forest.predict_one(np.zeros(4)) == 1


def test_single_tree_forest_equals_a_plain_tree_on_its_bootstrap():
    # with one feature there is no subsampling, so only the bootstrap
    # draw separates the forest member from a hand-grown tree
    rng = np.random.default_rng(3)
    X = rng.normal(size=(40, 1))
    y = (X[:, 0] > 0).astype(np.int64)
    forest = RandomForestClassifier(n_trees=1, seed=9).fit(X, y)
    idx = forest.bootstrap_indices(0, 40)
    plain = DecisionTreeClassifier().fit(X[idx], y[idx])
    grid = np.linspace(-3.0, 3.0, 101).reshape(-1, 1)
    assert [forest.predict_one(row) for row in grid] == [
        plain.predict_one(row) for row in grid
    ]


def test_forest_bootstraps_differ_by_seed_and_tree():
    a = RandomForestClassifier(seed=0)
    assert a.bootstrap_indices(0, 50) == a.bootstrap_indices(0, 50)
    assert a.bootstrap_indices(0, 50) != a.bootstrap_indices(1, 50)
    assert a.bootstrap_indices(0, 50) != RandomForestClassifier(seed=1).bootstrap_indices(0, 50)


def test_forest_separates_easy_blobs():
    ds = _toy_dataset(30, seed=1)
    model = fit(ModelSpec(kind="rf"), ds)
    hits = sum(model.predict(s.values()) == s.label for s in ds.samples)
    assert hits == 30


# --------------------------------------------------------------- naive bayes


def test_nb_recovers_class_statistics():
    X = np.array([[0.0, 10.0], [2.0, 12.0], [10.0, -4.0], [14.0, -8.0]])
    y = np.array([0, 0, 1, 1])
    core = GaussianNBClassifier().fit(X, y)
    assert np.allclose(core.means_[0], [1.0, 11.0])
    assert np.allclose(core.means_[1], [12.0, -6.0])
    assert core.priors_.tolist() == [0.5, 0.5]


def test_nb_posteriors_normalize_and_drive_prediction(dataset0):
    model = fit(ModelSpec(kind="nb"), dataset0)
    core = model.core
    for row in dataset0.matrix():
        posterior = core.posterior(row)
        assert abs(float(posterior.sum()) - 1.0) <= 1e-12
        assert (posterior >= 0).all()
        assert core.predict_one(row) == (1 if posterior[1] > 0.5 else 0)
        assert model.decision_score(row) == float(posterior[1])


def test_nb_prior_reflects_class_imbalance():
    X = np.vstack([np.zeros((9, 2)), np.ones((3, 2))])
    X += np.arange(12).reshape(-1, 1) * 0.01  # break zero variance
    y = np.array([0] * 9 + [1] * 3)
    core = GaussianNBClassifier().fit(X, y)
    assert np.allclose(core.priors_, [0.75, 0.25])


# ------------------------------------------------------- logistic regression


def test_lr_gradient_matches_central_differences():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 4))
    y = rng.integers(0, 2, size=30).astype(np.float64)
    eps = 1e-6
    for _ in range(10):
        w = rng.normal(size=4)
        b = float(rng.normal())
        _, grad_w, grad_b = lr_loss_and_grad(w, b, X, y)
        for j in range(4):
            shift = np.zeros(4)
            shift[j] = eps
            plus = lr_loss_and_grad(w + shift, b, X, y)[0]
            minus = lr_loss_and_grad(w - shift, b, X, y)[0]
            numeric = (plus - minus) / (2 * eps)
            assert abs(numeric - grad_w[j]) <= 1e-4 * max(1.0, abs(numeric))
        numeric_b = (
            lr_loss_and_grad(w, b + eps, X, y)[0]
            - lr_loss_and_grad(w, b - eps, X, y)[0]
        ) / (2 * eps)
        assert abs(numeric_b - grad_b) <= 1e-4 * max(1.0, abs(numeric_b))


def test_lr_training_loss_never_increases(dataset0):
    model = fit(ModelSpec(kind="lr"), dataset0)
    history = model.core.loss_history
    assert len(history) >= 2
    assert all(later <= earlier + 1e-12 for earlier, later in zip(history, history[1:]))


def test_lr_scores_are_probabilities(dataset0):
    model = fit(ModelSpec(kind="lr"), dataset0)
    for row in dataset0.matrix()[::6]:
        score = decision_scores(model, row)
        assert 0.0 < score < 1.0
        assert predict(model, row) == (1 if score > 0.5 else 0)


def test_lr_separates_easy_blobs():
    ds = _toy_dataset(30, seed=2)
    model = fit(ModelSpec(kind="lr"), ds)
    assert all(model.predict(s.values()) == s.label for s in ds.samples)


# ----------------------------------------------------------------------- knn


def test_knn_agrees_with_bruteforce_on_random_data():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(60, 3))
    y = rng.integers(0, 2, size=60).astype(np.int64)
    core = KNNClassifier(n_neighbors=5).fit(X, y)
    for query in rng.normal(size=(40, 3)):
        d2 = ((X - query) ** 2).sum(axis=1)
        order = sorted(range(60), key=lambda j: (d2[j], j))[:5]
        expected = 1 if sum(int(y[j]) for j in order) * 2 > 5 else 0
        assert core.predict_one(query) == expected


def test_one_neighbor_memorizes_training_points():
    ds = _toy_dataset(20, seed=8)
    model = fit(ModelSpec(kind="knn", n_neighbors=1), ds)
    assert all(model.predict(s.values()) == s.label for s in ds.samples)


def test_knn_distance_ties_resolve_to_the_earlier_sample():
    core = KNNClassifier(n_neighbors=1).fit(
        np.array([[0.0], [2.0]]), np.array([0, 1])
    )
    assert core.predict_one(np.array([1.0])) == 0


def test_knn_decision_is_the_neighbor_vote_share():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(20, 2))
    y = rng.integers(0, 2, size=20).astype(np.int64)
    core = KNNClassifier(n_neighbors=5).fit(X, y)
    for query in rng.normal(size=(10, 2)):
        share = core.decision_one(query)
        assert share in {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}
        assert core.predict_one(query) == (1 if share > 0.5 else 0)


# ----------------------------------------------------------------------- svm


def test_linear_svm_separates_wide_margin_data():
    rng = np.random.default_rng(4)
    X = np.vstack([rng.normal(-3.0, 0.5, size=(25, 2)), rng.normal(3.0, 0.5, size=(25, 2))])
    y = np.array([0] * 25 + [1] * 25)
    core = LinearSVMClassifier(seed=0).fit(X, y)
    assert [core.predict_one(row) for row in X] == y.tolist()


def test_svm_margin_sign_matches_prediction(dataset0):
    model = fit(ModelSpec(kind="svm"), dataset0)
    for row in dataset0.matrix()[::7]:
        margin = model.decision_score(row)
        assert (margin > 0) == (model.predict(row) == 1)


def test_poly3_kernel_value():
    value = poly3_kernel(np.array([[1.0, 0.0]]), np.array([[1.0, 1.0]]))
    assert value.shape == (1, 1)
    assert value[0, 0] == 8.0  # (1 + <u, v>)^3 with <u, v> = 1


def test_poly3_svm_learns_a_nonlinear_boundary():
    # a ring: linear margins cannot express it, a cubic kernel can
    rng = np.random.default_rng(6)
    angles = rng.uniform(0, 2 * np.pi, size=60)
    radii = np.where(np.arange(60) % 2 == 0, 0.5, 2.5)
    X = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    y = (np.arange(60) % 2).astype(np.int64)  # 1 = outer ring
    spec = ModelSpec(kind="svm", kernel="poly3")
    samples = tuple(
        FeatureVector(f"r{i}", X[i, 0], X[i, 1], 0.0, 0.0, label=int(y[i]))
        for i in range(60)
    )
    ds = Dataset(samples=samples, feature_mask=("gas_used", "bal_diff_c1"))
    model = fit(spec, ds)
    hits = sum(model.predict((X[i, 0], X[i, 1])) == y[i] for i in range(60))
    assert hits >= 54
