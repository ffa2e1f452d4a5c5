import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wellcollider.analysis import (
    AnalysisError,
    TransportWindow,
    count_zero_crossings,
    delta_untrapped,
    dipole_metrics,
    find_peaks,
    fit_cosine,
    staircase_step_widths,
    transport_window,
)

RNG = np.random.default_rng(43)


def test_transport_window_interpolates_crossings():
    times = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    energy2 = np.array([-1.0, -0.5, 0.5, 0.5, -0.5])
    barrier = np.zeros(5)
    window = transport_window(times, energy2, barrier)
    assert window.t_start == pytest.approx(1.5)
    assert window.t_end == pytest.approx(3.5)


def test_transport_window_none_when_never_above():
    times = np.linspace(0, 5, 20)
    assert transport_window(times, np.full(20, -1.0), np.zeros(20)) is None


def test_zero_crossings_of_sine():
    times = np.linspace(0.1, 3 * np.pi - 0.1, 5000)
    window = TransportWindow(t_start=0.1, t_end=3 * np.pi - 0.1)
    assert count_zero_crossings(times, np.sin(times), window) == 2


def test_zero_crossings_constant_signal():
    times = np.linspace(0, 10, 100)
    window = TransportWindow(t_start=0.0, t_end=10.0)
    assert count_zero_crossings(times, np.ones(100), window) == 0


def test_zero_crossings_empty_window():
    times = np.linspace(0, 10, 100)
    window = TransportWindow(t_start=20.0, t_end=30.0)
    assert count_zero_crossings(times, np.sin(times), window) == 0
    assert count_zero_crossings(times, np.sin(times), None) == 0


def test_grazing_zero_not_double_counted():
    times = np.linspace(0, 4, 9)
    values = np.array([1.0, 0.5, 1e-12, 0.5, 1.0, 0.2, -1e-12, -0.5, -1.0])
    window = TransportWindow(t_start=-1.0, t_end=5.0)
    assert count_zero_crossings(times, values, window) == 1


@given(
    st.floats(min_value=0.1, max_value=10.0),
    st.sampled_from([1.0, -1.0]),
)
@settings(max_examples=30, deadline=None)
def test_zero_crossings_scaling_invariance(scale, sign):
    times = np.linspace(0.05, 3 * np.pi - 0.05, 700)
    window = TransportWindow(t_start=float(times[0]), t_end=float(times[-1]))
    base = count_zero_crossings(times, np.sin(times), window)
    assert count_zero_crossings(times, sign * scale * np.sin(times), window) == base


def test_staircase_widths():
    v = np.linspace(0.0, 1.0, 21)
    counts = np.floor(v / 0.25)
    widths = staircase_step_widths(v, counts)
    assert widths == pytest.approx(np.full(3, 0.25), abs=0.05 / 2)


def test_cosine_fit_recovers_synthetic_signal():
    v = np.linspace(0.5, 2.5, 50)
    signal = 3.42 * np.cos(2 * np.pi * v / 0.47) + RNG.normal(0, 0.05, v.size)
    fit = fit_cosine(v, signal)
    assert not fit.degenerate
    assert abs(fit.period - 0.47) / 0.47 < 0.01
    assert abs(fit.amplitude - 3.42) / 3.42 < 0.02


def test_cosine_fit_constant_data_is_degenerate():
    v = np.linspace(0.0, 2.0, 30)
    fit = fit_cosine(v, np.full(30, 1.3))
    assert fit.degenerate


def test_cosine_fit_requires_enough_points():
    with pytest.raises(AnalysisError, match="at least 8"):
        fit_cosine(np.linspace(0, 1, 5), np.zeros(5))


def test_cosine_fit_invariances():
    v = np.linspace(0.5, 2.5, 40)
    signal = 1.7 * np.cos(2 * np.pi * v / 0.6 + 0.3) + 0.2
    base = fit_cosine(v, signal)
    shifted = fit_cosine(v + 5.0, signal)
    assert shifted.rms_residual == pytest.approx(base.rms_residual, abs=1e-8)
    offset = fit_cosine(v, signal + 10.0)
    assert offset.period == pytest.approx(base.period, rel=1e-6)
    assert offset.offset == pytest.approx(base.offset + 10.0, abs=1e-6)


def test_dipole_metrics_quarter_period_offset():
    times = np.linspace(10.0, 14.0, 400)
    period = 0.58
    s_pos = np.sin(2 * np.pi * times / period)
    s_neg = np.cos(2 * np.pi * times / period)
    metrics = dipole_metrics(times, s_pos, s_neg, (10.0, 14.0))
    assert metrics is not None
    assert metrics.period == pytest.approx(0.58, rel=1e-3)
    assert metrics.phase_difference == pytest.approx(np.pi / 2, abs=0.01)


def test_dipole_metrics_antisymmetric_under_swap():
    times = np.linspace(0.0, 4.0, 400)
    period = 0.58
    s_pos = np.sin(2 * np.pi * times / period)
    s_neg = np.cos(2 * np.pi * times / period)
    forward = dipole_metrics(times, s_pos, s_neg, (0.0, 4.0))
    backward = dipole_metrics(times, s_neg, s_pos, (0.0, 4.0))
    assert forward.phase_difference == pytest.approx(-backward.phase_difference, abs=1e-6)


def test_dipole_metrics_flat_signal():
    times = np.linspace(0.0, 4.0, 200)
    assert dipole_metrics(times, np.ones(200), np.zeros(200), (0.0, 4.0)) is None


def test_delta_untrapped_identical_twins():
    v = np.linspace(0.1, 0.9, 11)
    mu = RNG.random(11)
    assert np.max(np.abs(delta_untrapped(v, mu, mu))) == 0.0


def test_delta_untrapped_missing_twin_lists_points():
    v = np.array([0.1, 0.2, 0.3])
    two = np.array([0.5, 0.6, 0.7])
    single = np.array([0.1, np.nan, 0.2])
    with pytest.raises(AnalysisError, match="0.2"):
        delta_untrapped(v, two, single)


def test_find_peaks_triangle():
    x = np.linspace(0.0, 4.0, 41)
    y = np.maximum(0.0, 1.0 - np.abs(x - 2.0))
    peaks = find_peaks(x, y, min_prominence=0.1)
    assert len(peaks) == 1
    assert peaks[0].location == pytest.approx(2.0, abs=1e-9)
    assert peaks[0].height == pytest.approx(1.0, abs=1e-12)


def test_find_peaks_prominence_filter():
    x = np.linspace(0.0, 10.0, 201)
    y = np.exp(-((x - 3.0) ** 2)) + 0.02 * np.exp(-((x - 7.0) ** 2) / 0.1)
    peaks = find_peaks(x, y, min_prominence=0.05)
    assert len(peaks) == 1
    assert abs(peaks[0].location - 3.0) < 0.02


def test_find_peaks_refined_location_interior():
    x = np.linspace(0.0, 1.0, 51)
    y = np.cos(2 * np.pi * (x - 0.513))  # true peak between samples
    peaks = find_peaks(x, y, min_prominence=0.5)
    assert len(peaks) == 1
    assert abs(peaks[0].location - 0.513) < 1e-3
    assert x[0] < peaks[0].location < x[-1]
