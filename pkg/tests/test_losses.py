import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from balmix.data import one_hot_matrix
from balmix.errors import NumericError, ParameterError
from balmix.losses import LossSpec, cb_loss, cb_weights, ce_soft, focal

from gradcheck import numeric_grad, rel_error


def random_case(rng, b=8, k=5, scale=2.0):
    logits = scale * rng.standard_normal((b, k))
    labels = one_hot_matrix(rng.integers(0, k, b), k)
    return logits, labels


def soft_labels(rng, b, k):
    lam = rng.random(b)[:, None]
    return lam * one_hot_matrix(rng.integers(0, k, b), k) + (1 - lam) * one_hot_matrix(rng.integers(0, k, b), k)


def test_uniform_logits_give_log_k():
    assert ce_soft(np.zeros((3, 4)), one_hot_matrix([0, 1, 3], 4)).loss == pytest.approx(math.log(4), abs=1e-12)


def test_ce_is_linear_in_the_target(rng):
    for _ in range(200):
        logits, yi = random_case(rng)
        yc = one_hot_matrix(rng.integers(0, 5, 8), 5)
        lam = rng.random()
        mixed = ce_soft(logits, lam * yi + (1 - lam) * yc).loss
        assert abs(mixed - (lam * ce_soft(logits, yi).loss + (1 - lam) * ce_soft(logits, yc).loss)) < 1e-12


def test_ce_gradient_rows_sum_to_zero(rng):
    logits = rng.standard_normal((8, 5))
    g = ce_soft(logits, soft_labels(rng, 8, 5)).grad
    np.testing.assert_allclose(g.sum(axis=1), 0.0, atol=1e-15)


def test_focal_reduces_to_ce(rng):
    for _ in range(100):
        logits, y = random_case(rng)
        a, b = focal(logits, y, 0.0), ce_soft(logits, y)
        assert abs(a.loss - b.loss) < 1e-12
        np.testing.assert_allclose(a.grad, b.grad, rtol=0, atol=1e-12)


def test_focal_half_probability():
    # p_t = 0.5 for two equal logits; (1 - 0.5)**2 * ln 2
    assert focal(np.zeros((1, 2)), [[1.0, 0.0]], 2.0).loss == pytest.approx(0.1732867951, abs=1e-9)


def test_focal_vanishes_for_confident_predictions():
    losses = [focal(np.array([[z, 0.0, 0.0]]), [[1.0, 0, 0]], 2.0).loss for z in (2.0, 5.0, 10.0, 20.0)]
    assert all(x > 0 for x in losses[:-1])
    assert all(a > b for a, b in zip(losses, losses[1:]))
    assert losses[-1] < 1e-20


def test_focal_rejects_soft_labels_and_negative_gamma(rng):
    logits = rng.standard_normal((2, 3))
    with pytest.raises(ParameterError):
        focal(logits, [[0.5, 0.5, 0], [1, 0, 0]], 2.0)
    with pytest.raises(ParameterError):
        focal(logits, [[1, 0, 0], [1, 0, 0]], -1.0)


def test_cb_raw_weight():
    # (1 - 0.99) / (1 - 0.99**10), evaluated with mpmath
    assert cb_weights([10], 0.99, normalize=False)[0] == pytest.approx(0.1045829012, abs=1e-9)


def test_cb_weights_properties():
    np.testing.assert_allclose(cb_weights([100, 10, 1], 0.0), 1.0)
    np.testing.assert_allclose(cb_weights([7, 7, 7, 7], 0.999), 1.0)
    w = cb_weights([2000, 632, 200, 63, 20], 0.999)
    assert w.sum() == pytest.approx(5.0)
    assert np.all(np.diff(w) > 0)
    with pytest.raises(ParameterError):
        cb_weights([0, 3], 0.9)


def test_cb_uniform_equals_ce(rng):
    for _ in range(100):
        logits, y = random_case(rng)
        a, b = cb_loss(logits, y, np.ones(5)), ce_soft(logits, y)
        assert abs(a.loss - b.loss) < 1e-12
        np.testing.assert_allclose(a.grad, b.grad, rtol=0, atol=1e-15)


def test_cb_weight_scales_its_class(rng):
    logits = rng.standard_normal((6, 3))
    y = one_hot_matrix([0, 1, 2, 0, 1, 2], 3)
    w = np.ones(3)
    base = cb_loss(logits, y, w).loss
    w[1] = 2.0
    contribution = ce_soft(logits[[1, 4]], y[[1, 4]]).loss * 2 / 6
    assert cb_loss(logits, y, w).loss == pytest.approx(base + contribution, abs=1e-12)
    with pytest.raises(ParameterError):
        cb_loss(logits, y, np.ones(4))


def losses_under_test(rng, k):
    counts = rng.integers(1, 500, k)
    return [
        ("ce", lambda z, y: ce_soft(z, y), False),
        ("focal", lambda z, y: focal(z, y, 2.0), True),
        ("focal-0.5", lambda z, y: focal(z, y, 0.5), True),
        ("cb", lambda z, y: cb_loss(z, y, cb_weights(counts, 0.99)), True),
    ]


def test_gradients_match_finite_differences(rng):
    for _ in range(100):
        b, k = rng.integers(1, 9), rng.integers(2, 7)
        logits = 2.0 * rng.standard_normal((b, k))
        hard = one_hot_matrix(rng.integers(0, k, b), k)
        soft = soft_labels(rng, b, k)
        for name, fn, needs_hard in losses_under_test(rng, k):
            y = hard if needs_hard else soft
            fd = numeric_grad(lambda z: fn(z, y).loss, logits)
            assert rel_error(fn(logits, y).grad, fd) < 1e-6, name


@given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4), st.integers(0, 2))
def test_losses_stay_finite_for_large_logits(a, b, t):
    logits = np.array([[a, b, -a]])
    y = one_hot_matrix([t], 3)
    for value in (ce_soft(logits, y), focal(logits, y, 2.0), cb_loss(logits, y, np.ones(3))):
        assert math.isfinite(value.loss) and value.loss >= 0
        assert np.all(np.isfinite(value.grad))


def test_non_finite_logits_rejected():
    with pytest.raises(NumericError):
        ce_soft([[np.nan, 0.0]], [[1.0, 0.0]])


def test_loss_spec_dispatch(rng):
    logits, y = random_case(rng)
    assert LossSpec("ce")(logits, y).loss == ce_soft(logits, y).loss
    assert LossSpec("focal", gamma=1.0)(logits, y).loss == focal(logits, y, 1.0).loss
    counts = (5, 4, 3, 2, 1)
    assert LossSpec("cb", cb_beta=0.9, class_counts=counts)(logits, y).loss == \
        cb_loss(logits, y, cb_weights(counts, 0.9)).loss
    with pytest.raises(ParameterError):
        LossSpec("cb")(logits, y)
    with pytest.raises(ParameterError):
        LossSpec("hinge")
    with pytest.raises(ParameterError):
        LossSpec("cb", cb_beta=1.0)
