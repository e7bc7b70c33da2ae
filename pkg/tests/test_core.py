import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from onerelu.core import (
    DimensionError,
    Params,
    Sample,
    augment_intercept,
    build_dataset,
    from_arrays,
    read_csv,
    relu_objective,
    write_csv,
)


def test_build_dataset_sorts_positive_labels():
    d = build_dataset([Sample((1.0,), 2.0), Sample((2.0,), -1.0), Sample((0.0,), 1.0)])
    assert list(d.pos_idx) == [2, 0]
    assert list(d.neg_idx) == [1]
    assert d.m == 2 and d.n == 3 and d.p == 1


def test_all_nonpositive_labels():
    d = build_dataset([Sample((1.0,), 0.0), Sample((2.0,), -3.0)])
    assert list(d.pos_idx) == []
    assert list(d.neg_idx) == [0, 1]


def test_tied_labels_keep_input_order():
    d = from_arrays([[1.0], [2.0], [3.0]], [1.0, 0.5, 1.0])
    assert list(d.pos_idx) == [1, 0, 2]


def test_zero_label_is_negative():
    d = from_arrays([[1.0]], [0.0])
    assert d.m == 0 and list(d.neg_idx) == [0]


@pytest.mark.parametrize(
    "X, y",
    [
        ([[1.0], [math.nan]], [1.0, 2.0]),
        ([[1.0]], [math.inf]),
    ],
)
def test_non_finite_rejected(X, y):
    with pytest.raises(ValueError):
        from_arrays(X, y)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        build_dataset([Sample((1.0,), 1.0), Sample((1.0, 2.0), 1.0)])
    d = from_arrays([[1.0, 2.0]], [1.0])
    with pytest.raises(DimensionError):
        relu_objective(d, Params.zeros(3))


def test_empty_dataset_rejected():
    with pytest.raises(ValueError):
        build_dataset([])


def test_dataset_is_read_only():
    d = from_arrays([[1.0]], [1.0])
    with pytest.raises(ValueError):
        d.X[0, 0] = 5.0
    with pytest.raises(ValueError):
        Params.zeros(2).beta[0] = 1.0


def test_augment_intercept():
    d = from_arrays([[2.0, 3.0]], [1.0])
    a = augment_intercept(d)
    assert a.X.tolist() == [[2.0, 3.0, 1.0]]
    assert a.p == 3 and list(a.y) == [1.0]
    twice = augment_intercept(a)
    assert twice.X.tolist() == [[2.0, 3.0, 1.0, 1.0]]


@pytest.mark.parametrize(
    "X, y, beta, beta0, expected",
    [
        ([[1.0]], [1.0], [1.0], 0.0, 0.0),
        ([[1.0]], [-1.0], [0.0], 0.0, 1.0),
        ([[1.0], [-1.0]], [2.0, 1.0], [0.0], 1.0, 1.0),
    ],
)
def test_relu_objective_examples(X, y, beta, beta0, expected):
    assert relu_objective(from_arrays(X, y), Params(beta, beta0)) == expected


@given(
    st.integers(1, 8),
    st.integers(1, 3),
    st.integers(0, 2**32 - 1),
)
def test_objective_properties(n, p, seed):
    rng = np.random.default_rng(seed)
    X, y = rng.normal(size=(n, p)), rng.normal(size=n)
    theta = Params(rng.normal(size=p), float(rng.normal()))
    d = from_arrays(X, y)
    v = relu_objective(d, theta)
    assert v >= 0
    perm = rng.permutation(n)
    assert relu_objective(from_arrays(X[perm], y[perm]), theta) == pytest.approx(v, rel=1e-12, abs=1e-14)
    folded = Params(np.append(theta.beta, theta.beta0), 0.0)
    assert relu_objective(augment_intercept(d), folded) == pytest.approx(v, rel=1e-12, abs=1e-14)


def test_params_vector_roundtrip():
    t = Params([1.0, -2.0], 3.0)
    assert Params.from_vector(t.as_vector()) == t
    assert t.to_dict() == {"beta": [1.0, -2.0], "beta0": 3.0}


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    d = from_arrays(rng.normal(size=(5, 2)), rng.normal(size=5))
    path = tmp_path / "d.csv"
    write_csv(d, path)
    raw = path.read_bytes()
    assert raw.startswith(b"x0,x1,y\n") and b"\r" not in raw
    back = read_csv(path)
    assert np.array_equal(back.X, d.X) and np.array_equal(back.y, d.y)
    buf = io.StringIO()
    write_csv(d, buf)
    assert buf.getvalue().encode() == raw


@pytest.mark.parametrize(
    "text",
    [
        "x0,y\n1.0,nan\n",
        "x0,y\ninf,1.0\n",
        "a,b\n1,2\n",
        "x0,y\n1.0\n",
        "",
    ],
)
def test_csv_rejects_bad_input(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ValueError):
        read_csv(path)
