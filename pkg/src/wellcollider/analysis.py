"""Post-processing: transport window, zero crossings, fits, peaks.

These routines operate on exported time series and sweep summaries only;
they never touch wavefunctions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize as sopt
import scipy.signal as ssig


class AnalysisError(ValueError):
    """Raised for inputs that cannot be analyzed as requested."""


@dataclass(frozen=True)
class TransportWindow:
    """Interval during which the second excited level lies above the barrier.

    This is the onset criterion for the collective over-barrier transport;
    outside the window the wells are effectively separated.
    """

    t_start: float
    t_end: float


def _interp_root(t0: float, t1: float, y0: float, y1: float) -> float:
    return t0 + (t1 - t0) * (-y0) / (y1 - y0)


def transport_window(times, energy2, barrier) -> TransportWindow | None:
    """First/last time the third-lowest level exceeds the central barrier.

    Crossings are located by linear interpolation between samples.  Returns
    None when the level never rises above the barrier.
    """
    times = np.asarray(times, dtype=float)
    diff = np.asarray(energy2, dtype=float) - np.asarray(barrier, dtype=float)
    above = diff > 0.0
    if not np.any(above):
        return None
    first = int(np.argmax(above))
    last = int(len(above) - 1 - np.argmax(above[::-1]))
    if first == 0:
        t_start = float(times[0])
    else:
        t_start = _interp_root(times[first - 1], times[first], diff[first - 1], diff[first])
    if last == len(above) - 1:
        t_end = float(times[-1])
    else:
        t_end = _interp_root(times[last], times[last + 1], diff[last], diff[last + 1])
    return TransportWindow(t_start=t_start, t_end=t_end)


def count_zero_crossings(times, values, window: TransportWindow | None, eps: float = 1e-9) -> int:
    """Sign changes of the signal strictly inside the window.

    Samples with magnitude below eps are merged with their neighbors so a
    grazing zero is not double counted.
    """
    if window is None:
        return 0
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    inside = (times > window.t_start) & (times < window.t_end)
    y = values[inside]
    if y.size == 0:
        return 0
    signs = np.sign(np.where(np.abs(y) < eps, 0.0, y))
    signs = signs[signs != 0.0]
    if signs.size < 2:
        return 0
    return int(np.sum(signs[1:] != signs[:-1]))


def staircase_step_widths(v, counts) -> np.ndarray:
    """Widths of the plateaus of an integer-valued staircase.

    Plateau boundaries are placed midway between adjacent samples whose
    value differs; widths are distances between consecutive boundaries.
    """
    v = np.asarray(v, dtype=float)
    counts = np.asarray(counts)
    order = np.argsort(v)
    v = v[order]
    counts = counts[order]
    change = np.flatnonzero(counts[1:] != counts[:-1])
    boundaries = 0.5 * (v[change] + v[change + 1])
    if boundaries.size < 2:
        return np.empty(0)
    return np.diff(boundaries)


@dataclass(frozen=True)
class CosineFit:
    period: float
    amplitude: float
    phase: float
    offset: float
    rms_residual: float
    degenerate: bool


def _cosine_rss(v: np.ndarray, x: np.ndarray, period: float) -> tuple[float, np.ndarray]:
    theta = 2.0 * np.pi * v / period
    design = np.column_stack([np.cos(theta), np.sin(theta), np.ones_like(v)])
    coeff, _, _, _ = np.linalg.lstsq(design, x, rcond=None)
    rss = float(np.sum((x - design @ coeff) ** 2))
    return rss, coeff


def fit_cosine(v, x, n_candidates: int = 600) -> CosineFit:
    """Least-squares fit of x(v) = A cos(2 pi v / period + phase) + offset.

    A coarse scan over candidate periods with a linear solve for
    (A cos phase, A sin phase, offset) per candidate is followed by a
    bounded scalar refinement around the best candidate.  Requires at
    least 8 points; the data should span well over one period.
    """
    v = np.asarray(v, dtype=float)
    x = np.asarray(x, dtype=float)
    if v.size < 8:
        raise AnalysisError(f"cosine fit needs at least 8 points, got {v.size}")
    span = float(np.max(v) - np.min(v))
    if span <= 0.0:
        raise AnalysisError("cosine fit needs a nonzero abscissa span")
    spacing = float(np.median(np.diff(np.sort(v))))
    lo = max(2.05 * spacing, span / 400.0)
    hi = span
    candidates = np.linspace(lo, hi, n_candidates)
    rss = np.array([_cosine_rss(v, x, p)[0] for p in candidates])
    best = int(np.argmin(rss))
    step = candidates[1] - candidates[0]
    low = max(lo, candidates[best] - step)
    high = min(hi, candidates[best] + step)
    result = sopt.minimize_scalar(
        lambda p: _cosine_rss(v, x, p)[0], bounds=(low, high), method="bounded",
        options={"xatol": 1e-10},
    )
    period = float(result.x)
    best_rss, coeff = _cosine_rss(v, x, period)
    a, b, c = coeff
    amplitude = float(math.hypot(a, b))
    phase = float(math.atan2(-b, a))
    const_rss = float(np.sum((x - np.mean(x)) ** 2))
    degenerate = best_rss > 0.95 * const_rss
    return CosineFit(
        period=period,
        amplitude=amplitude,
        phase=phase,
        offset=float(c),
        rms_residual=math.sqrt(best_rss / v.size),
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class DipoleMetrics:
    period: float
    phase_difference: float
    n_extrema_pos: int
    n_extrema_neg: int
    amplitude_pos: float
    amplitude_neg: float


def _refined_extrema(times: np.ndarray, y: np.ndarray):
    """(time, kind, value) for interior extrema; parabolic sub-sample refinement."""
    out = []
    for i in range(1, len(y) - 1):
        if (y[i] > y[i - 1] and y[i] >= y[i + 1]) or (y[i] < y[i - 1] and y[i] <= y[i + 1]):
            kind = 1 if y[i] > y[i - 1] else -1
            denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
            if denom != 0.0:
                shift = 0.5 * (y[i - 1] - y[i + 1]) / denom
                shift = float(np.clip(shift, -0.5, 0.5))
            else:
                shift = 0.0
            dt_local = 0.5 * (times[i + 1] - times[i - 1])
            out.append((float(times[i] + shift * dt_local), kind, float(y[i])))
    return out


def dipole_metrics(times, s_pos, s_neg, window: tuple[float, float]) -> DipoleMetrics | None:
    """Oscillation period and phase offset of the two one-sided signals.

    The period is twice the mean spacing of successive extrema; the phase
    difference comes from the circular mean offset between the maxima
    sequences, reported in (-pi, pi].  Returns None when either signal has
    fewer than three extrema in the window.
    """
    times = np.asarray(times, dtype=float)
    t0, t1 = window
    mask = (times >= t0) & (times <= t1)
    t = times[mask]
    if t.size < 5:
        return None
    ext_pos = _refined_extrema(t, np.asarray(s_pos, dtype=float)[mask])
    ext_neg = _refined_extrema(t, np.asarray(s_neg, dtype=float)[mask])
    if len(ext_pos) < 3 or len(ext_neg) < 3:
        return None

    def mean_spacing(ext):
        ts = np.array([e[0] for e in ext])
        return float(np.mean(np.diff(ts)))

    period = mean_spacing(ext_pos) + mean_spacing(ext_neg)  # = 2 * mean half-period

    maxima_pos = np.array([e[0] for e in ext_pos if e[1] > 0])
    maxima_neg = np.array([e[0] for e in ext_neg if e[1] > 0])
    if maxima_pos.size < 2 or maxima_neg.size < 2:
        return None
    angles = []
    for tp in maxima_pos:
        nearest = maxima_neg[np.argmin(np.abs(maxima_neg - tp))]
        delta = tp - nearest
        angles.append(2.0 * np.pi * delta / period)
    angles = np.asarray(angles)
    phase = float(math.atan2(np.mean(np.sin(angles)), np.mean(np.cos(angles))))
    if phase <= -np.pi:
        phase += 2.0 * np.pi

    def amplitude(ext):
        highs = [e[2] for e in ext if e[1] > 0]
        lows = [e[2] for e in ext if e[1] < 0]
        if not highs or not lows:
            return 0.0
        return 0.5 * (float(np.mean(highs)) - float(np.mean(lows)))

    return DipoleMetrics(
        period=period,
        phase_difference=phase,
        n_extrema_pos=len(ext_pos),
        n_extrema_neg=len(ext_neg),
        amplitude_pos=amplitude(ext_pos),
        amplitude_neg=amplitude(ext_neg),
    )


def delta_untrapped(v, untrapped_two_well, untrapped_single_well) -> np.ndarray:
    """Difference of final untrapped fractions between twin simulations."""
    v = np.asarray(v, dtype=float)
    two = np.asarray(untrapped_two_well, dtype=float)
    single = np.asarray(untrapped_single_well, dtype=float)
    if two.shape != single.shape or two.shape != v.shape:
        raise AnalysisError("twin series must share the sweep grid")
    missing = ~np.isfinite(single)
    if np.any(missing):
        absent = ", ".join(f"{val:.6g}" for val in v[missing])
        raise AnalysisError(f"missing single-well twin at v_f_inverse = {absent}")
    return two - single


@dataclass(frozen=True)
class Peak:
    location: float
    height: float
    prominence: float


def find_peaks(x, y, min_prominence: float = 0.05) -> list[Peak]:
    """Local maxima with at least the requested prominence.

    Peak locations are refined by a parabola through the peak triple;
    heights are the raw series values at the unrefined index.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    idx, props = ssig.find_peaks(y, prominence=min_prominence)
    peaks = []
    for i, prom in zip(idx, props["prominences"]):
        coeffs = np.polyfit(x[i - 1 : i + 2], y[i - 1 : i + 2], 2)
        if coeffs[0] < 0.0:
            loc = float(-coeffs[1] / (2.0 * coeffs[0]))
        else:
            loc = float(x[i])
        peaks.append(Peak(location=loc, height=float(y[i]), prominence=float(prom)))
    return peaks
