from __future__ import annotations

import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from botsim.detect import (
    GraphDataset, LogReg, Propagation, RGCNLite, TrainConfig, evaluate, perturb_edges, perturbation_sweep,
    llm_text_eval, rgcn_lite_train, run_seeds, standardize, train_logreg,
)
from botsim.detect.data import TUNED
from botsim.detect.metrics import summarize
from botsim.detect.models import flatten, gradient_check, unflatten
from botsim.errors import ConfigError, TrainingError, ValidationError
from botsim.synth import structure_only_graph
from conftest import EVAL_USERS, ConstantBackend, OracleBackend, labelled_env


def random_graph(rng: np.random.Generator, n: int = 5, d: int = 3, m: int = 9) -> tuple[np.ndarray, np.ndarray]:
    X = rng.normal(size=(n, d))
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    rel = rng.integers(0, 3, m)
    return X, np.stack([src, dst, rel, np.ones(m, dtype=np.int64)], axis=1)


# standardize / metrics -----------------------------------------------------------

def test_standardize_examples():
    X = np.array([[0.0, 5.0], [2.0, 5.0], [10.0, 7.0]])
    Z = standardize(X, np.array([0, 1]))
    np.testing.assert_allclose(Z[:2, 0], [-1.0, 1.0])
    np.testing.assert_array_equal(Z[:2, 1], [0.0, 0.0])
    # already-standardized training columns stay put on a second pass
    np.testing.assert_allclose(standardize(Z, np.array([0, 1]))[:2], Z[:2])
    with pytest.raises(ValueError):
        standardize(X, np.array([], dtype=int))


def test_evaluate_examples():
    r = evaluate([0, 1, 0, 1], [0, 1, 0, 1])
    assert (r.accuracy, r.f1) == (1.0, 1.0)
    r = evaluate([0, 0, 1], [0, 0, 0])
    assert r.accuracy == pytest.approx(2 / 3) and r.f1 == 0.0 and r.precision == 0.0 and r.recall == 0.0
    r = evaluate([1, 0], [1, 1])
    assert (r.accuracy, r.precision, r.recall) == (0.5, 0.5, 1.0)
    assert r.f1 == pytest.approx(2 / 3)


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
def test_metrics_in_unit_interval(pairs):
    yt, yp = zip(*pairs)
    r = evaluate(yt, yp)
    for v in (r.accuracy, r.f1, r.precision, r.recall):
        assert 0.0 <= v <= 1.0


def test_summarize_mean_and_population_std():
    reps = [evaluate([1, 0], [1, 0]), evaluate([1, 0], [0, 0])]
    s = summarize(reps, [0, 1])
    assert s.accuracy == 0.75 and s.accuracy_std == pytest.approx(0.25)
    assert s.f1 == 0.5 and s.f1_std == pytest.approx(0.5)
    assert [r["seed"] for r in s.per_seed] == [0, 1]


# configuration -----------------------------------------------------------------------

def test_train_config_defaults_and_validation():
    cfg = TrainConfig()
    assert (cfg.learning_rate, cfg.hidden, cfg.layers, cfg.dropout, cfg.epochs, cfg.weight_decay, cfg.seeds) == (
        1e-4, 128, 2, 0.3, 100, 1e-2, (0, 1, 2, 3, 4))
    with pytest.raises(ConfigError):
        TrainConfig(dropout=1.0)
    with pytest.raises(ConfigError):
        TrainConfig(epochs=-1)
    assert TrainConfig.tuned("rgcn").hidden == TUNED["rgcn"]["hidden"]
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg


def test_graph_dataset_validation():
    with pytest.raises(ValidationError):
        GraphDataset(np.zeros((3, 2)), [0, 1], np.zeros((0, 4)), {})
    with pytest.raises(ValidationError):
        GraphDataset(np.zeros((3, 2)), [0, 1, 0], [[0, 5, 0, 1]], {})
    with pytest.raises(ValidationError):
        GraphDataset(np.zeros((3, 2)), [0, 1, 0], [[0, 1, 7, 1]], {})


# gradients ---------------------------------------------------------------------------

@pytest.mark.parametrize("instance", range(10))
def test_logreg_gradient_matches_finite_differences(instance):
    rng = np.random.default_rng(100 + instance)
    X = rng.normal(size=(12, 4))
    y = rng.integers(0, 2, 12).astype(float)
    model = LogReg(4, seed=instance)
    model.params["w"] = rng.normal(size=4)
    model.params["b"] = rng.normal(size=1)
    theta = flatten(model.params)
    _, g = model.loss_and_grad(model.params, X, y)
    loss = lambda t: model.loss_and_grad(unflatten(t, model.params), X, y)[0]  # noqa: E731
    assert gradient_check(loss, flatten(g), theta) < 1e-4


@pytest.mark.parametrize("instance", range(10))
def test_rgcn_gradient_matches_finite_differences(instance):
    rng = np.random.default_rng(200 + instance)
    X, edges = random_graph(rng)
    y = rng.integers(0, 2, 5)
    idx = np.array([0, 1, 2, 3])
    model = RGCNLite(3, hidden=4, layers=2, seed=instance)
    for k in model.params:
        model.params[k] = rng.normal(size=model.params[k].shape)
    prop = Propagation.from_edges(5, edges)
    drop = [(rng.random((5, 3)) < 0.7) / 0.7, (rng.random((5, 4)) < 0.7) / 0.7]
    theta = flatten(model.params)
    _, g = model.loss_and_grad(model.params, X, prop, y, idx, drop)
    loss = lambda t: model.loss_and_grad(unflatten(t, model.params), X, prop, y, idx, drop)[0]  # noqa: E731
    assert gradient_check(loss, flatten(g), theta) < 1e-4


def test_gradient_check_detects_wrong_gradient():
    f = lambda t: float((t ** 2).sum())  # noqa: E731
    theta = np.array([1.0, -2.0])
    assert gradient_check(f, 2 * theta, theta) < 1e-8
    assert gradient_check(f, theta, theta) > 0.1


# rgcn structure --------------------------------------------------------------------------

def test_identity_probe_single_node():
    model = RGCNLite(3, hidden=3, layers=1, seed=0)
    model.params["W_self0"] = np.eye(3)
    x = np.array([[0.5, -1.0, 2.0]])
    out = model.layer(model.params, x, Propagation.from_edges(1, np.zeros((0, 4))), 0, relu=False)
    np.testing.assert_array_equal(out, x)


def test_messages_flow_src_to_dst_only():
    model = RGCNLite(2, hidden=4, layers=1, seed=1)
    prop = Propagation.from_edges(2, np.array([[0, 1, 0, 1]]))  # A -> B
    X = np.array([[1.0, 2.0], [3.0, -1.0]])
    base = model.layer(model.params, X, prop, 0, relu=False)
    bumpA = model.layer(model.params, X + [[1.0, 0.0], [0.0, 0.0]], prop, 0, relu=False)
    bumpB = model.layer(model.params, X + [[0.0, 0.0], [1.0, 0.0]], prop, 0, relu=False)
    assert not np.allclose(bumpA[1], base[1])  # B sees A
    np.testing.assert_array_equal(bumpB[0], base[0])  # A does not see B


def test_zero_edges_reduce_to_self_path():
    rng = np.random.default_rng(3)
    X, _ = random_graph(rng)
    model = RGCNLite(3, hidden=4, layers=2, seed=0)
    logits, _ = model.forward(model.params, X, Propagation.from_edges(5, np.zeros((0, 4))))
    H = X
    for l in range(2):
        H = np.maximum(H @ model.params[f"W_self{l}"] + model.params[f"b{l}"], 0)
    np.testing.assert_allclose(logits, H @ model.params["W_out"] + model.params["b_out"], rtol=0, atol=1e-12)


def test_mean_aggregation_and_duplicate_edges():
    prop = Propagation.from_edges(3, np.array([[0, 2, 1, 5], [1, 2, 1, 1], [0, 2, 1, 1]]))
    H = np.array([[2.0], [4.0], [100.0]])
    np.testing.assert_allclose(prop.aggregate(1, H), [[0.0], [0.0], [3.0]])
    assert prop.has_in[1].tolist() == [0.0, 0.0, 1.0]
    assert not prop.aggregate(0, H).any()


# training -------------------------------------------------------------------------------

def separable(n: int = 60, seed: int = 0) -> GraphDataset:
    rng = np.random.default_rng(seed)
    y = (np.arange(n) % 2).astype(np.int64)
    X = rng.normal(size=(n, 2)) * 0.3 + np.where(y[:, None] == 1, 2.0, -2.0)
    return GraphDataset.from_arrays(X, y, np.zeros((0, 4)), split_seed=seed)


def test_logreg_separable_perfect():
    _, rep = train_logreg(separable(), TrainConfig.tuned("logreg"), 0)
    assert rep.accuracy == 1.0


def test_logreg_zero_epochs_symmetric_init_is_majority_rate():
    # every logit ties at zero and ties go to the (majority) human class
    rng = np.random.default_rng(5)
    y = (rng.random(90) < 0.3).astype(np.int64)
    ds = GraphDataset.from_arrays(rng.normal(size=(90, 3)), y, np.zeros((0, 4)), split_seed=0)
    _, rep = train_logreg(ds, TrainConfig(epochs=0, init_scale=0.0), 0)
    test_y = ds.y[ds.masks["test"]]
    assert test_y.mean() < 0.5
    assert abs(rep.accuracy - (1 - test_y.mean())) <= 1 / len(test_y) + 1e-12


def test_rgcn_learns_structure_only_graph():
    g = structure_only_graph(seed=0)
    ds = GraphDataset.from_arrays(g["X"], g["y"], g["edges"], split_seed=0)
    _, rep = rgcn_lite_train(ds, TrainConfig.tuned("rgcn"), 0)
    assert rep.accuracy > 0.8


@pytest.mark.parametrize("trainer", ["logreg", "rgcn"])
def test_loss_non_increasing_at_small_lr(trainer):
    g = structure_only_graph(n=60, seed=2)
    ds = GraphDataset.from_arrays(g["X"], g["y"], g["edges"], split_seed=0)
    cfg = TrainConfig(learning_rate=1e-5, epochs=40, hidden=8, dropout=0.0, weight_decay=1e-2)
    hist: list[float] = []
    fn = train_logreg if trainer == "logreg" else rgcn_lite_train
    fn(ds, cfg, 0, history=hist)
    assert len(hist) == 40
    assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))


def test_training_is_bit_reproducible_with_dropout():
    g = structure_only_graph(n=80, seed=1)
    ds = GraphDataset.from_arrays(g["X"], g["y"], g["edges"], split_seed=0)
    cfg = TrainConfig.tuned("rgcn", epochs=20, dropout=0.3)
    m1, r1 = rgcn_lite_train(ds, cfg, 3)
    m2, r2 = rgcn_lite_train(ds, cfg, 3)
    assert r1 == r2
    assert all(np.array_equal(m1.params[k], m2.params[k]) for k in m1.params)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_raises_training_error():
    ds = separable()
    ds.X[0, 0] = 1e300
    with pytest.raises(TrainingError, match="epoch"):
        train_logreg(ds, TrainConfig(learning_rate=1e300, epochs=5, dropout=0.0), 0)


# perturbation -------------------------------------------------------------------------------

def edge_list(m: int = 100) -> np.ndarray:
    rng = np.random.default_rng(0)
    return np.stack([rng.integers(0, 50, m), rng.integers(50, 100, m), rng.integers(0, 3, m),
                     rng.integers(1, 5, m)], axis=1)


def reversed_rows(before: np.ndarray, after: np.ndarray) -> set[int]:
    return {i for i in range(len(before)) if not np.array_equal(before[i], after[i])}


def test_perturb_examples():
    e = edge_list()
    assert np.array_equal(perturb_edges(e, 0.0, 1), e)
    full = perturb_edges(e, 1.0, 1)
    np.testing.assert_array_equal(full[:, [1, 0, 2, 3]], e)
    half = perturb_edges(e, 0.5, 7)
    flipped = reversed_rows(e, half)
    assert len(flipped) == 50
    assert flipped == reversed_rows(e, perturb_edges(e, 0.5, 7))
    with pytest.raises(ValueError):
        perturb_edges(e, 1.5, 0)


@given(st.floats(0, 1), st.integers(0, 2**31), st.integers(0, 60))
def test_perturb_preserves_multisets(p, seed, m):
    e = edge_list(m) if m else np.zeros((0, 4), dtype=np.int64)
    out = perturb_edges(e, p, seed)
    assert len(out) == len(e)
    assert Counter(map(tuple, out[:, 2:])) == Counter(map(tuple, e[:, 2:]))
    assert len(reversed_rows(e, out)) == int(round(p * len(e)))


def test_sweep_single_cell_equals_direct_run(tmp_path):
    g = structure_only_graph(n=80, seed=0)
    ds = GraphDataset.from_arrays(g["X"], g["y"], g["edges"], split_seed=0)
    cfg = TrainConfig.tuned("rgcn", epochs=30, seeds=(0,))
    res = perturbation_sweep(ds, [0.0], cfg)
    _, direct = rgcn_lite_train(ds, cfg, 0)
    assert res.rows == [{"p": 0.0, "seed": 0, "accuracy": direct.accuracy, "f1": direct.f1}]
    res.write(tmp_path)
    assert (tmp_path / "sweep.csv").read_text().splitlines()[0] == "p,seed,accuracy,f1"
    summary = json.loads((tmp_path / "sweep_summary.json").read_text())
    assert summary["0.0"]["accuracy_mean"] == direct.accuracy


def test_sweep_grid_rows():
    g = structure_only_graph(n=40, seed=0)
    ds = GraphDataset.from_arrays(g["X"], g["y"], g["edges"], split_seed=0)
    cfg = TrainConfig.tuned("logreg", epochs=5)
    res = perturbation_sweep(ds, [0, 0.5, 1.0], cfg, model="logreg")
    assert len(res.csv_text().splitlines()) == 16
    with pytest.raises(ValueError):
        perturbation_sweep(ds, [], cfg)


def test_run_seeds_reports_per_seed():
    rep = run_seeds(separable(), TrainConfig.tuned("logreg", seeds=(0, 1, 2)), "logreg")
    assert [r["seed"] for r in rep.per_seed] == [0, 1, 2]
    assert rep.accuracy_std >= 0


# text-only evaluation -----------------------------------------------------------------


def test_oracle_backend_scores_perfectly():
    env = labelled_env()
    res = llm_text_eval(OracleBackend(env), env, EVAL_USERS, shots=2, seed=0)
    assert res.report.accuracy == 1.0 and res.report.f1 == 1.0 and not res.abstained


def test_constant_backend_on_balanced_set():
    env = labelled_env()
    res = llm_text_eval(ConstantBackend("Human."), env, EVAL_USERS, shots=0, seed=0)
    assert res.report.accuracy == 0.5 and res.report.f1 == 0.0


def test_five_shot_prompt_has_three_human_two_bot_exemplars():
    env = labelled_env()
    res = llm_text_eval(OracleBackend(env), env, EVAL_USERS, shots=5, seed=3)
    prompt = res.prompts[EVAL_USERS[0]]
    assert prompt.count("[Example ") == 5
    assert prompt.count("Label: human") == 3 and prompt.count("Label: bot") == 2
    # exemplars never come from the evaluation users
    assert all(f"{env.accounts[u].screen_name} writes" not in prompt.split("[Account]")[0] for u in EVAL_USERS)
    zero = llm_text_eval(OracleBackend(env), env, EVAL_USERS, shots=0, seed=3).prompts[EVAL_USERS[0]]
    assert "[Example " not in zero


def test_abstention_after_reask_counts_as_wrong():
    env = labelled_env()
    backend = ConstantBackend("I cannot tell")
    res = llm_text_eval(backend, env, EVAL_USERS, shots=2, seed=0)
    assert backend.calls == 2 * len(EVAL_USERS)
    assert res.report.accuracy == 0.0 and sorted(res.abstained) == sorted(EVAL_USERS)
    assert all(v is None for v in res.predictions.values())


def test_text_eval_errors():
    env = labelled_env(2)
    with pytest.raises(ValueError):
        llm_text_eval(ConstantBackend("bot"), env, ["h00000"], shots=3, seed=0)
    with pytest.raises(ValueError):
        llm_text_eval(ConstantBackend("bot"), env, ["h00000", "h00001", "b00000"], shots=5, seed=0)
