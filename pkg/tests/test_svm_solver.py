import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import nnls_dual
from svmqke import (
    Concept,
    ConvergenceError,
    DomainError,
    FeatureConfig,
    GroupParams,
    NoisePolicy,
    SvmModel,
    build_kernel_matrix,
    decision_value,
    generate_dataset,
    kkt_residual,
    predict,
    slacks_from_alphas,
    solve_dual,
    train,
    transform_bias,
)
from svmqke.concepts import LabeledSample, split
from svmqke.feature_kernel import kernel_block
from svmqke.svm_solver import decision_values, dual_objective, kernel_rows, predict_many, primal_loss, sign


def test_toy_single_point():
    sol = solve_dual(np.array([[1.0]]), [1], 0.5)
    assert sol.alphas[0] == pytest.approx(1 / 3, abs=1e-6)
    assert sol.residual <= 1e-8


def test_toy_two_points():
    sol = solve_dual(np.ones((2, 2)), [1, -1], 0.5)
    assert np.allclose(sol.alphas, [0.5, 0.5], atol=1e-6)


def test_kkt_residual_examples():
    K = np.array([[1.0]])
    assert kkt_residual([0.0], K, [1], 0.5) == 1.0
    assert kkt_residual([2 / 3], K, [1], 0.5) > 0
    with pytest.raises(DomainError):
        kkt_residual([-0.1], K, [1], 0.5)


def test_slacks_examples():
    assert slacks_from_alphas([1 / 3], 0.5) == pytest.approx([2 / 3])
    assert np.all(slacks_from_alphas(np.zeros(4), 0.5) == 0)


def _instance(seed, m=40, p=1019, g=2, k=5, s=100, shots=None):
    params = GroupParams(p, g)
    cfg = FeatureConfig(k, params)
    samples = generate_dataset(Concept(s, params), m, np.random.default_rng(seed))
    xs, ys = split(samples)
    K = transform_bias(build_kernel_matrix(xs.tolist(), cfg, NoisePolicy(shots, seed)))
    return samples, cfg, K, ys


@pytest.mark.parametrize("seed", range(5))
def test_matches_nnls_oracle(seed):
    _, _, K, ys = _instance(seed)
    sol = solve_dual(K, ys, 0.5)
    ref = nnls_dual(K.entries, ys, 0.5)
    assert sol.residual <= 1e-8
    assert np.allclose(sol.alphas, ref, atol=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_unique_optimum_certificate(seed):
    _, _, K, ys = _instance(seed)
    a = solve_dual(K, ys, 0.5).alphas
    best = dual_objective(a, K, ys, 0.5)
    for i in range(a.size):
        for d in (1e-3, -1e-3):
            b = a.copy()
            b[i] += d
            if b[i] < 0:
                continue
            assert dual_objective(b, K, ys, 0.5) < best


@given(st.integers(0, 10**6), st.sampled_from([None, 100, 10**4]))
@settings(max_examples=15, deadline=None)
def test_warm_start_uniqueness(seed, shots):
    _, _, K, ys = _instance(seed % 1000, m=25, shots=shots)
    a = solve_dual(K, ys, 0.5).alphas
    start = np.random.default_rng(seed).uniform(0, 3, size=ys.size)
    b = solve_dual(K, ys, 0.5, alpha0=start).alphas
    assert np.max(np.abs(a - b)) <= 1e-6


def test_objective_monotone():
    _, _, K, ys = _instance(3, m=60, shots=200)
    sol = solve_dual(K, ys, 0.5, trace=True)
    obj = np.array(sol.objectives)
    assert np.all(np.diff(obj) >= -1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_duality_consistency(seed):
    _, _, K, ys = _instance(seed)
    a = solve_dual(K, ys, 0.5).alphas
    dual = dual_objective(a, K, ys, 0.5)
    primal = primal_loss(a, K, ys, 0.5)
    assert primal == pytest.approx(dual, rel=1e-6)


def test_primal_feasibility_on_training_points():
    samples, cfg, _, ys = _instance(4)
    model = train(samples, cfg, NoisePolicy.exact())
    h = decision_values([s.x for s in samples], model)
    xi = slacks_from_alphas(model.alphas, model.lam)
    assert np.all(1 - ys * h <= xi + 1e-6)


def test_convergence_error():
    _, _, K, ys = _instance(0)
    with pytest.raises(ConvergenceError) as err:
        solve_dual(K, ys, 0.5, max_sweeps=2)
    assert err.value.sweeps == 2 and err.value.residual > 1e-8


def test_solver_rejections():
    with pytest.raises(DomainError):
        solve_dual(np.ones((1, 1)), [1], 0.0)
    with pytest.raises(DomainError):
        solve_dual(np.ones((2, 2)), [1], 0.5)
    raw = build_kernel_matrix([5, 2], FeatureConfig(2, GroupParams(23, 5)), NoisePolicy.exact())
    with pytest.raises(DomainError):
        solve_dual(raw, [1, -1], 0.5)


def test_indefinite_noisy_gram_is_fine():
    K = np.array([[1.0, 1.4], [1.4, 1.0]])  # indefinite, Q + I/lam still positive definite
    sol = solve_dual(K, [1, 1], 0.5)
    assert sol.residual <= 1e-8


def test_decision_value_examples():
    params = GroupParams(23, 5)
    cfg = FeatureConfig(2, params)
    model = train([LabeledSample(5, 1)], cfg, NoisePolicy.exact())
    assert decision_value(5, model) == pytest.approx(1 / 3, abs=1e-8)
    assert predict(5, model) == 1
    zero = SvmModel(np.zeros(1), 0.5, [5], [1], cfg, NoisePolicy.exact())
    assert all(decision_value(x, zero) == 0 for x in range(1, 23))
    assert all(predict(x, zero) == 1 for x in range(1, 23))
    assert sign(0.0) == 1 and sign(-1e-300) == -1


def test_single_sample_degenerate_prediction():
    params = GroupParams(23, 5)
    model = train([LabeledSample(7, -1)], FeatureConfig(2, params), NoisePolicy.exact())
    assert set(predict_many(range(1, 23), model).tolist()) == {-1}


def test_label_flip_flips_predictions():
    samples, cfg, _, _ = _instance(6)
    model = train(samples, cfg, NoisePolicy.exact())
    flipped = train([LabeledSample(s.x, -s.y) for s in samples], cfg, NoisePolicy.exact())
    xs = list(range(1, 1019))
    h, hf = decision_values(xs, model), decision_values(xs, flipped)
    assert np.allclose(h, -hf, atol=1e-9)
    nz = np.abs(h) > 1e-9
    assert np.array_equal(predict_many(xs, model)[nz], -predict_many(xs, flipped)[nz])


def test_prediction_path_equivalence():
    samples, cfg, _, _ = _instance(2)
    model = train(samples, cfg, NoisePolicy.exact())
    xs = list(range(1, 1019, 7))
    rows = (kernel_block(xs, model.train_x, cfg) + 1) / 2
    assert np.allclose(kernel_rows(xs, model), rows)
    assert np.array_equal(predict_many(xs, model, batch=13), sign(rows @ (model.alphas * model.train_y)))


def test_model_round_trip(tmp_path):
    samples, cfg, _, _ = _instance(1, shots=1000)
    model = train(samples, cfg, NoisePolicy(1000, 1))
    model.save(tmp_path / "m.json")
    back = SvmModel.load(tmp_path / "m.json")
    assert np.array_equal(back.alphas, model.alphas) and back.config == cfg and back.policy == model.policy
    xs = list(range(1, 1019, 11))
    assert np.array_equal(decision_values(xs, back), decision_values(xs, model))


def test_noisy_prediction_is_pure():
    samples, cfg, _, _ = _instance(1, shots=1000)
    model = train(samples, cfg, NoisePolicy(1000, 1))
    assert np.array_equal(kernel_rows([77], model)[0], kernel_rows([3, 77, 900], model)[1])
    assert decision_value(77, model) == pytest.approx(decision_values([3, 77, 900], model)[1], abs=1e-14)
