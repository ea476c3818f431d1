"""Summary statistics and robust smoothing."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import EmptyInput

MAD_SCALE = 1.4826


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    variance: float
    std: float
    median: float
    mode: float
    min: float
    max: float
    q1: float
    q3: float
    iqr: float
    kurtosis: float
    cv: float

    def as_dict(self):
        return asdict(self)


def rank_quantile(sorted_values: np.ndarray, q: float) -> float:
    """Quantile at 1-based rank ``q * (n + 1)``, linearly interpolated and clamped."""
    n = sorted_values.size
    pos = min(max(q * (n + 1), 1.0), float(n))
    lo = int(np.floor(pos))
    frac = pos - lo
    if frac == 0 or lo >= n:
        return float(sorted_values[lo - 1])
    return float(sorted_values[lo - 1] + frac * (sorted_values[lo] - sorted_values[lo - 1]))


def mode_of(values: np.ndarray) -> float:
    """Most frequent value; ties go to the smallest."""
    uniq, counts = np.unique(values, return_counts=True)
    return float(uniq[np.argmax(counts)])


def summary_stats(values) -> SummaryStats:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInput("summary statistics of an empty sequence")
    s = np.sort(v)
    mean = float(v.mean())
    centered = v - mean
    var = float(np.mean(centered**2))
    std = float(np.sqrt(var))
    q1 = rank_quantile(s, 0.25)
    q3 = rank_quantile(s, 0.75)
    kurt = float(np.mean(centered**4) / var**2) if var > 0 else 0.0
    return SummaryStats(
        mean=mean,
        variance=var,
        std=std,
        median=float(np.median(s)),
        mode=mode_of(v),
        min=float(s[0]),
        max=float(s[-1]),
        q1=q1,
        q3=q3,
        iqr=q3 - q1,
        kurtosis=kurt,
        cv=std / mean if mean != 0 else 0.0,
    )


def hampel_filter(series, window: int = 5, k: float = 3.0) -> np.ndarray:
    """Replace outliers by the median of their (edge-truncated) centred window.

    A point is an outlier when it deviates from the window median by more than
    ``k * 1.4826 * MAD``.  With a zero MAD any point unequal to the median is
    replaced.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    x = np.asarray(series, dtype=float)
    out = x.copy()
    n = x.size
    if n < window:
        return out
    half = window // 2
    med = np.empty(n)
    mad = np.empty(n)
    if n > 2 * half:
        win = np.lib.stride_tricks.sliding_window_view(x, window)
        m = np.median(win, axis=1)
        med[half : n - half] = m
        mad[half : n - half] = np.median(np.abs(win - m[:, None]), axis=1)
    for i in list(range(min(half, n))) + list(range(max(n - half, half), n)):
        w = x[max(0, i - half) : i + half + 1]
        med[i] = np.median(w)
        mad[i] = np.median(np.abs(w - med[i]))
    replace = np.abs(x - med) > k * MAD_SCALE * mad
    out[replace] = med[replace]
    return out
