import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epiforecast.metrics import (
    HorizonPredictions,
    LengthMismatch,
    NonPositiveValue,
    ZeroActual,
    k_period_metric,
    kmape,
    kmdsa,
    mape,
    mdsa,
)

positive_floats = st.floats(1e-3, 1e6, allow_nan=False, allow_infinity=False)


def paired_vectors(min_size=1, max_size=20):
    return st.integers(min_size, max_size).flatmap(
        lambda n: st.tuples(
            st.lists(positive_floats, min_size=n, max_size=n),
            st.lists(positive_floats, min_size=n, max_size=n),
        )
    )


class TestMape:
    def test_hand_value(self):
        assert mape([100, 200], [110, 180]) == pytest.approx(10.0, abs=1e-12)

    def test_perfect_forecast(self):
        assert mape([3.0, 7.0, 11.0], [3.0, 7.0, 11.0]) == 0.0

    def test_single_term(self):
        assert mape([100], [150]) == pytest.approx(50.0, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            mape([1, 2], [1])

    def test_zero_actual(self):
        with pytest.raises(ZeroActual):
            mape([0.0, 1.0], [1.0, 1.0])

    @given(paired_vectors())
    def test_zero_iff_equal(self, pair):
        a, p = pair
        value = mape(a, p)
        assert value >= 0.0
        if a == p:
            assert value == 0.0
        if value == 0.0:
            assert np.allclose(a, p)


class TestMdsa:
    def test_hand_value(self):
        assert mdsa([100], [110]) == pytest.approx(10.0, abs=1e-9)

    def test_perfect_forecast(self):
        assert mdsa([4.0, 9.0], [4.0, 9.0]) == 0.0

    def test_median_of_three(self):
        value = mdsa([100, 100, 100], [110, 100 / 1.1, 100])
        assert value == pytest.approx(10.0, abs=1e-9)

    def test_even_count_median_is_central_mean(self):
        # ratios e^0.2 and e^0.4: median of |log| pairs is 0.3
        value = mdsa([1.0, 1.0], [math.exp(0.2), math.exp(0.4)])
        assert value == pytest.approx(100.0 * (math.exp(0.3) - 1.0), rel=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(NonPositiveValue):
            mdsa([1.0, -1.0], [1.0, 1.0])
        with pytest.raises(NonPositiveValue):
            mdsa([1.0, 1.0], [0.0, 1.0])

    @given(paired_vectors())
    def test_symmetry(self, pair):
        a, p = pair
        assert mdsa(a, p) == pytest.approx(mdsa(p, a), rel=1e-9)

    @given(paired_vectors(), st.floats(1e-3, 1e3))
    def test_scale_invariance_both_metrics(self, pair, c):
        a, p = map(np.array, pair)
        assert mape(c * a, c * p) == pytest.approx(mape(a, p), rel=1e-9)
        assert mdsa(c * a, c * p) == pytest.approx(mdsa(a, p), rel=1e-9)


def horizon_fixture(rng, n_seq, horizon):
    actuals = rng.uniform(10.0, 1e5, (n_seq, horizon))
    predictions = actuals * rng.uniform(0.8, 1.25, (n_seq, horizon))
    return HorizonPredictions(actuals=actuals, predictions=predictions)


class TestHorizonPredictions:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            HorizonPredictions(np.ones((2, 3)), np.ones((3, 2)))

    def test_nonpositive_actuals(self):
        with pytest.raises(NonPositiveValue):
            HorizonPredictions(np.zeros((1, 1)), np.ones((1, 1)))

    def test_properties(self):
        data = HorizonPredictions(np.ones((4, 2)), np.ones((4, 2)))
        assert data.n_sequences == 4
        assert data.horizon == 2


class TestKPeriodMetric:
    def test_k1_is_bit_identical_to_base(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            data = horizon_fixture(rng, int(rng.integers(1, 20)), 1)
            assert kmape(data) == mape(data.actuals[:, 0], data.predictions[:, 0])
            assert kmdsa(data) == mdsa(data.actuals[:, 0], data.predictions[:, 0])

    def test_hand_value_single_sequence(self):
        data = HorizonPredictions(np.array([[100.0, 100.0]]), np.array([[110.0, 120.0]]))
        assert k_period_metric(data, mape) == pytest.approx(15.0, abs=1e-12)

    def test_matches_per_column_brute_force(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            data = horizon_fixture(rng, 5, 4)
            brute = 0.0
            for i in range(4):
                brute += mape(data.actuals[:, i], data.predictions[:, i])
            assert k_period_metric(data, mape) == brute / 4

    def test_kmape_hand_fixture(self):
        data = HorizonPredictions(
            np.array([[100.0, 200.0], [100.0, 200.0]]),
            np.array([[110.0, 220.0], [90.0, 180.0]]),
        )
        assert kmape(data) == pytest.approx(10.0, abs=1e-12)

    def test_kmdsa_median_fixture(self):
        data = HorizonPredictions(
            np.array([[100.0], [100.0], [100.0]]),
            np.array([[110.0], [100.0 / 1.1], [100.0]]),
        )
        assert kmdsa(data) == pytest.approx(10.0, abs=1e-9)

    def test_perfect_predictions_are_zero(self):
        actuals = np.full((3, 5), 123.0)
        data = HorizonPredictions(actuals, actuals.copy())
        assert kmape(data) == 0.0
        assert kmdsa(data) == 0.0

    def test_median_is_more_robust_than_mean(self):
        # corrupting one of P sequences moves kMAPE much more than kMdSA
        actuals = np.full((5, 2), 100.0)
        clean = np.full((5, 2), 101.0)
        corrupted = clean.copy()
        corrupted[0, :] = 1000.0
        base = HorizonPredictions(actuals, clean)
        broken = HorizonPredictions(actuals, corrupted)
        kmape_shift = kmape(broken) - kmape(base)
        kmdsa_shift = kmdsa(broken) - kmdsa(base)
        assert kmdsa_shift < kmape_shift
