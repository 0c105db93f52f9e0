"""Harmonic regressors and periodogram-based frequency selection.

The regression uses cosine/sine pairs at user-chosen frequencies; the
periodogram over Fourier frequencies k/T supports choosing them.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["HarmonicDesign", "periodogram", "select_top_frequencies"]


@dataclass(frozen=True)
class HarmonicDesign:
    """Cosine/sine design rows at fixed frequencies.

    ``frequencies`` are cycles per step in (0, 0.5]; the design row at
    absolute time t is (cos 2*pi*w1*t, sin 2*pi*w1*t, ..., sin 2*pi*wK*t),
    a vector of length 2K. K = 0 is allowed (intercept-only models).
    """

    frequencies: tuple

    def __post_init__(self):
        freqs = tuple(float(f) for f in self.frequencies)
        if any(not (0.0 < f <= 0.5) for f in freqs):
            raise ValueError(f"frequencies must lie in (0, 0.5], got {freqs}")
        if len(set(freqs)) != len(freqs):
            raise ValueError("frequencies must be distinct")
        object.__setattr__(self, "frequencies", freqs)

    @property
    def n_frequencies(self):
        return len(self.frequencies)

    @property
    def n_coefficients(self):
        return 2 * len(self.frequencies)

    def check_train_length(self, t_length):
        if self.n_frequencies > t_length / 2:
            raise ValueError(
                f"{self.n_frequencies} frequencies exceed T/2 = "
                f"{t_length / 2} for a window of {t_length} steps")

    def row(self, t):
        """Design row at absolute time index t."""
        return self.matrix(t, 1)[0]

    def matrix(self, t0, length):
        """Design rows for absolute times t0, ..., t0 + length - 1."""
        t = np.arange(t0, t0 + length, dtype=np.float64)[:, None]
        if not self.frequencies:
            return np.zeros((length, 0))
        angles = 2.0 * np.pi * np.asarray(self.frequencies)[None, :] * t
        out = np.empty((length, self.n_coefficients))
        out[:, 0::2] = np.cos(angles)
        out[:, 1::2] = np.sin(angles)
        return out


def periodogram(series):
    """Spectral estimates at the Fourier frequencies k/T, k = 1..floor(T/2).

    Returns ``(frequencies, power)`` with ``power[k-1] = |DFT_k|^2 / T``.
    A constant series yields (numerically) zero power everywhere.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1:
        raise ValueError("periodogram expects a single time series")
    t_length = len(series)
    if t_length < 4:
        raise ValueError(f"series too short for a periodogram: {t_length} < 4")
    coeffs = np.fft.rfft(series - series.mean())
    k = np.arange(1, t_length // 2 + 1)
    power = np.abs(coeffs[k]) ** 2 / t_length
    return k / t_length, power


def select_top_frequencies(values, n_frequencies):
    """Pick the n strongest Fourier frequencies of a (multi-)series.

    ``values`` is (T,) or (I, T); periodograms of multiple locations are
    averaged before ranking. Ties are broken toward lower frequencies and
    the result is sorted ascending.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if n_frequencies < 1:
        raise ValueError("n_frequencies must be >= 1")
    freqs, total = periodogram(values[0])
    for row in values[1:]:
        total = total + periodogram(row)[1]
    if n_frequencies > len(freqs):
        raise ValueError(f"requested {n_frequencies} frequencies but only "
                         f"{len(freqs)} Fourier frequencies exist")
    order = np.lexsort((freqs, -total))
    chosen = np.sort(freqs[order[:n_frequencies]])
    return tuple(float(f) for f in chosen)
