import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import CIRCLE_TRACE, TORUS_LAPLACIAN_TRACE
from semifinite.errors import PreconditionError
from semifinite.limiting import (
    LimitProcessConfig,
    bilinear_vanishing_check,
    dixmier_trace,
    log_cesaro,
    log_grid,
    omega_limit,
    signed_dixmier_trace,
    truncated_trace_formulas,
)
from semifinite.models import circle_dirac, synthetic_spectrum

GRID = log_grid(1e8)


def test_log_cesaro_halves_log_t():
    x = np.log(GRID)
    np.testing.assert_allclose(log_cesaro(GRID, x), x / 2, atol=1e-12)


def test_log_cesaro_of_reciprocal_log_has_the_log_log_closed_form():
    x = np.log(GRID)
    out = log_cesaro(GRID, 1 / (1 + x))
    expected = np.log1p(x[1:]) / x[1:]
    np.testing.assert_allclose(out[1:], expected, rtol=5e-4)


def test_log_cesaro_prefix_conventions():
    t = log_grid(1e6, 10.0)
    np.testing.assert_allclose(log_cesaro(t, np.full_like(t, 7.0), prefix="hold"), 7.0)
    dropped = log_cesaro(t, np.full_like(t, 7.0), prefix="drop")
    np.testing.assert_allclose(dropped, 7.0 * (np.log(t) - math.log(10)) / np.log(t))


def test_grid_validation():
    with pytest.raises(PreconditionError):
        log_cesaro([1.0, 10.0], [1.0, 1.0])
    with pytest.raises(PreconditionError):
        omega_limit(GRID, np.full_like(GRID, np.inf))
    with pytest.raises(PreconditionError):
        LimitProcessConfig(cesaro_iterations=0)


def test_constant_is_recovered_exactly():
    est = omega_limit(GRID, np.full_like(GRID, 3.0))
    assert est.value == 3.0 and est.converged


def test_inverse_log_drift_is_extrapolated():
    est = omega_limit(GRID, 2 + 1 / np.log1p(GRID))
    assert est.converged
    assert abs(est.value - 2) <= max(est.error_band, 1e-12)


@pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
def test_dilation_invariance(lam):
    base = omega_limit(GRID, 2 + 1 / np.log1p(GRID))
    dilated = omega_limit(GRID, 2 + 1 / np.log1p(lam * GRID))
    assert abs(dilated.value - base.value) <= dilated.error_band + base.error_band


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.3, 1.0), lam=st.floats(0.5, 5.0))
def test_power_scaling_bound(alpha, lam):
    def f(t):
        return 2 + 1 / np.log1p(t) + np.sin(np.log(t)) / np.log(np.e + t)

    base = omega_limit(GRID, f(GRID))
    rescaled = omega_limit(GRID, f(lam * GRID ** alpha))
    sup = 3.0
    gap = abs(base.value - alpha * rescaled.value)
    assert gap <= (1 - alpha) * sup + base.error_band + alpha * rescaled.error_band + 1e-9


def test_oscillation_is_not_fabricated():
    est = omega_limit(GRID, np.sin(np.log(GRID)))
    assert not est.converged
    lo, hi = est.interval
    assert -1 <= lo and hi <= 1


def test_diagnostics_table_has_cesaro_columns():
    est = omega_limit(GRID, 1 + 1 / np.log1p(GRID))
    assert list(est.table) == ["t", "f", "M1f", "M2f", "M3f"]
    assert set(est.diagnostics["candidates"]) == {
        "cesaro window mean",
        "raw window mean",
        "extrapolated in 1/log(1+t)",
    }


def test_harmonic_profile():
    start = time.perf_counter()
    est = dixmier_trace(synthetic_spectrum(1.0))
    assert time.perf_counter() - start < 1.0
    assert abs(est.value - 1.0) <= 1e-3


def test_trace_class_has_zero_dixmier_trace():
    est = dixmier_trace(synthetic_spectrum(2.0))
    assert abs(est.value) <= max(est.error_band, 1e-3)


def test_finite_rank_has_zero_dixmier_trace():
    from semifinite.spectral_core import WeightedSpectrum

    est = dixmier_trace(WeightedSpectrum([5.0, 1.0], [2.0, 3.0]))
    assert abs(est.value) <= 1e-6


def test_short_enumeration_is_refused():
    with pytest.raises(PreconditionError):
        dixmier_trace(circle_dirac(100).resolvent_spectrum())


def test_circle_truncated_formulas(circle_large):
    A = circle_large.resolvent_spectrum()
    by_mu, by_threshold = truncated_trace_formulas(1.0, A)
    for est in (by_mu, by_threshold):
        assert est.converged
        assert est.value == pytest.approx(CIRCLE_TRACE, rel=1e-3)


def test_linear_in_a_scalar_multiplier(circle_large):
    A = circle_large.resolvent_spectrum()
    one = signed_dixmier_trace(1.0, A)
    three = signed_dixmier_trace(3.0, A)
    assert three.value == pytest.approx(3 * one.value, rel=1e-10)


def test_checkerboard_multiplier_on_the_torus(torus_laplacian):
    A = torus_laplacian.resolvent_spectrum()
    shells = np.rint(1 / A.values - 1)
    T = (-1.0) ** shells  # (-1)^(k1+k2) equals (-1)^|k|^2
    for est in (*truncated_trace_formulas(T, A), signed_dixmier_trace(T, A)):
        assert abs(est.value) <= est.error_band + 1e-6
    pos = truncated_trace_formulas(1.0, A)[0]
    assert pos.value == pytest.approx(TORUS_LAPLACIAN_TRACE, rel=1e-3)


def test_product_of_two_dixmier_operators_has_zero_trace():
    A = circle_dirac(10**5).resolvent_spectrum()
    est = bilinear_vanishing_check(A, A)
    assert abs(est.value) <= est.error_band
    assert est.error_band < 1e-2
