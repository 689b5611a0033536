import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from oracles import power_table, set_label
from svmqke import Concept, DomainError, GroupParams, exact_accuracy, generate_dataset, generate_sample, label
from svmqke.concepts import labels, read_dataset, sampled_accuracy, split, write_dataset


def test_label_examples(p23):
    c = Concept(1, p23)
    assert label(5, c) == 1
    assert label(18, c) == -1
    for s in range(22):
        assert label(pow(5, s, 23), Concept(s, p23)) == 1


@pytest.mark.parametrize("p,g", [(23, 5), (251, 6), (1019, 2)])
def test_labels_match_set_oracle(p, g):
    params = GroupParams(p, g)
    for s in (0, 1, (p - 1) // 2, p - 2):
        c = Concept(s, params)
        xs = list(range(1, p))
        assert labels(xs, c).tolist() == [set_label(x, s, p, g) for x in xs]


@pytest.mark.parametrize("p,g", [(23, 5), (251, 6)])
def test_class_balance_exhaustive(p, g):
    params = GroupParams(p, g)
    xs = list(range(1, p))
    for s in range(p - 1):
        assert int(labels(xs, Concept(s, params)).sum()) == 0


def test_exhaustive_exponent_sweep_p23(p23):
    c = Concept(1, p23)
    ys = [label(pow(5, e, 23), c) for e in range(22)]
    assert ys.count(1) == 11


@pytest.mark.parametrize("p,g", [(23, 5), (251, 6)])
def test_shift_covariance(p, g):
    params = GroupParams(p, g)
    base = Concept(1, params)
    for s in range(p - 1):
        shift = pow(g, (s - 1) % (p - 1), p)
        c = Concept(s, params)
        assert all(label(x * shift % p, c) == label(x, base) for x in range(1, p))


def test_generate_sample_consistent_and_deterministic(p23):
    c = Concept(4, p23)
    a = [generate_sample(c, np.random.default_rng(9)) for _ in range(3)]
    rng1, rng2 = np.random.default_rng(11), np.random.default_rng(11)
    seq1 = [generate_sample(c, rng1) for _ in range(50)]
    seq2 = [generate_sample(c, rng2) for _ in range(50)]
    assert seq1 == seq2
    assert a[0] == a[1] == a[2]
    assert all(s.y == label(s.x, c) for s in seq1)


def test_generate_sample_uniform_chi_square(p23):
    c = Concept(0, p23)
    rng = np.random.default_rng(2024)
    counts = np.zeros(23, dtype=int)
    for s in generate_dataset(c, 22000, rng):
        counts[s.x] += 1
    assert counts[0] == 0
    assert chisquare(counts[1:]).pvalue > 1e-3


def test_generate_dataset_examples(p23):
    c = Concept(1, p23)
    d = generate_dataset(c, 3, np.random.default_rng(0))
    assert len(d) == 3 and all(s.y == label(s.x, c) for s in d)
    big = generate_dataset(c, 1000, np.random.default_rng(1))
    frac = np.mean([s.y == 1 for s in big])
    assert 0.45 <= frac <= 0.55
    assert generate_dataset(c, 1000, np.random.default_rng(1)) == big
    with pytest.raises(DomainError):
        generate_dataset(c, 0, np.random.default_rng(0))


def test_generate_dataset_large_group():
    params = GroupParams(18446744073709551557, 2)
    c = Concept(params.order // 3, params)
    d = generate_dataset(c, 5, np.random.default_rng(0))
    assert all(1 <= s.x < params.p and s.y in (-1, 1) for s in d)


def test_exact_accuracy_examples(p23):
    c = Concept(7, p23)
    assert exact_accuracy(lambda x: label(x, c), c) == 1.0
    assert exact_accuracy(lambda x: 1, c) == 0.5
    assert exact_accuracy(lambda x: -label(x, c), c) == 0.0
    assert exact_accuracy(lambda xs: labels(xs, c), c, batch=5) == 1.0


def test_sampled_accuracy(p23):
    c = Concept(3, p23)
    assert sampled_accuracy(lambda x: label(x, c), c, 100, seed=1) == 1.0


def test_dataset_round_trip(tmp_path, p23):
    c = Concept(2, p23)
    d = generate_dataset(c, 25, np.random.default_rng(5))
    path = tmp_path / "d.jsonl"
    write_dataset(path, d, p23, 5, s="2")
    back, params, header = read_dataset(path)
    assert back == d and params == p23 and header["seed"] == 5 and header["s"] == "2"
    xs, ys = split(d)
    assert xs.tolist() == [s.x for s in d] and ys.tolist() == [s.y for s in d]


@given(st.integers(0, 249), st.integers(0, 249))
def test_label_of_exponent_matches_definition(s, e):
    params = GroupParams(251, 6)
    c = Concept(s, params)
    assert label(power_table(251, 6)[e], c) == (1 if (e - s) % 250 < 125 else -1)
