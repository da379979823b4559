import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from perronbounds import VerificationFailure, verify_counterexample
from perronbounds.counterexample import (
    _inverse_square_tail,
    product_density_numeric,
    product_row_sum_exact,
    row_sum_exact,
    row_sum_numeric,
)


class TestExactRowSums:
    def test_interior_point(self):
        assert row_sum_exact(0.5) == 1.0

    def test_zero_edge(self):
        assert row_sum_exact(0.0) == 1.0

    def test_right_endpoint(self):
        assert row_sum_exact(1.0) == 1.0

    def test_outside_domain(self):
        with pytest.raises(ValueError):
            row_sum_exact(1.5)
        with pytest.raises(ValueError):
            row_sum_exact(-0.1)

    @given(st.floats(min_value=1e-3, max_value=1.0))
    def test_cancellation_stays_tight(self, y):
        assert abs(row_sum_exact(y) - 1.0) <= 1e-12


class TestExactProductRowSums:
    def test_interior_point(self):
        assert product_row_sum_exact(0.3) == -1.0

    def test_boundaries(self):
        assert product_row_sum_exact(0.0) == -1.0
        assert product_row_sum_exact(1.0) == -1.0

    def test_outside_domain(self):
        with pytest.raises(ValueError):
            product_row_sum_exact(2.0)

    @given(st.floats(min_value=1e-3, max_value=1.0))
    def test_cancellation_stays_tight(self, x):
        assert abs(product_row_sum_exact(x) + 1.0) <= 1e-12


class TestGradedQuadrature:
    def test_tail_integral_accuracy(self):
        pts = np.array([0.001, 0.01, 0.1, 0.5, 1.0])
        got = _inverse_square_tail(pts, cells=2000)
        expected = 1.0 / pts - 1.0
        assert np.allclose(got, expected, rtol=1e-5)

    def test_tail_rejects_bad_endpoints(self):
        with pytest.raises(ValueError):
            _inverse_square_tail(np.array([0.0]), cells=16)

    def test_numeric_row_sums_approach_one(self):
        nodes = (np.arange(200) + 0.5) / 200
        vals = row_sum_numeric(nodes, cells=1024)
        assert np.abs(vals[nodes >= 0.05] - 1.0).max() <= 1e-3

    def test_numeric_product_density_approaches_minus_one(self):
        nodes = (np.arange(200) + 0.5) / 200
        vals = product_density_numeric(nodes, cells=1024)
        assert np.abs(vals[nodes >= 0.05] + 1.0).max() <= 1e-3

    def test_errors_shrink_with_refinement(self):
        worst = []
        for n in (100, 10000):
            nodes = (np.arange(n) + 0.5) / n
            keep = nodes >= 10.0 / n
            vals = row_sum_numeric(nodes, cells=max(n, 256))
            worst.append(np.abs(vals[keep] - 1.0).max())
        assert worst[1] < worst[0]

    def test_product_errors_shrink_with_refinement(self):
        totals = []
        for n in (100, 10000):
            nodes = (np.arange(n) + 0.5) / n
            vals = product_density_numeric(nodes, cells=max(n, 256))
            totals.append(abs(np.add.reduce(vals / n) + 1.0))
        assert totals[1] < totals[0]


class TestVerifyCounterexample:
    def test_small_run(self):
        report = verify_counterexample((50, 150))
        assert report.grid_size == 150
        assert report.row_sum_exact == 1.0
        assert report.product_row_sum_exact == -1.0
        assert report.lower == pytest.approx(-1.0, abs=5e-2)
        assert report.upper == pytest.approx(-1.0, abs=5e-2)
        assert report.rho_base == pytest.approx(1.0, abs=1e-10)
        assert report.exempted_nodes > 0
        sizes = [s for s, _ in report.abs_mass_trend]
        values = [v for _, v in report.abs_mass_trend]
        assert sizes == [50, 150]
        assert values[0] < values[1]

    def test_order_of_integration_disagreement(self):
        report = verify_counterexample((100,))
        # composition-order lands at -1, row-sum-first order at +1
        assert report.product_row_sum_numeric[0] == pytest.approx(-1.0, abs=5e-2)
        assert report.rowsum_first_value == pytest.approx(1.0, abs=5e-2)

    def test_finite_truncation_still_brackets_the_radius(self):
        report = verify_counterexample((80,))
        assert report.matrix_bounds_lower <= 1.0 <= report.matrix_bounds_upper

    def test_row_sums_constant_across_rows(self):
        report = verify_counterexample((64,))
        vals = report.product_row_sum_numeric.values
        assert np.all(vals == vals[0])

    def test_coarse_grid_keeps_qualitative_story(self):
        report = verify_counterexample((10,))
        assert report.exempted_nodes == 10
        assert any("skipped" in note for note in report.notes)
        assert report.lower == pytest.approx(-1.0, abs=5e-2)

    def test_sizes_must_increase(self):
        with pytest.raises(ValueError):
            verify_counterexample((100, 100))

    def test_sizes_must_be_at_least_ten(self):
        with pytest.raises(ValueError):
            verify_counterexample((5, 50))

    def test_empty_sizes(self):
        with pytest.raises(ValueError):
            verify_counterexample(())

    def test_impossible_tolerance_fails_loudly(self):
        with pytest.raises(VerificationFailure):
            verify_counterexample((50,), tolerance=1e-9)

    def test_report_serialises(self):
        obj = verify_counterexample((32, 64)).to_dict()
        assert obj["grid_size"] == 64
        assert len(obj["row_sum_numeric"]) == 64
        assert obj["abs_mass_trend"][0][0] == 32
