"""Spectral estimation and phase-noise metrics.

The single-sideband phase noise L(f) is read off a rectangular-window
periodogram: both sidebands around the carrier are averaged and each
sideband value is the median of the 3 bins nearest the requested
offset, which tames single-bin estimator variance.  No taper is needed
because the experiments keep the carrier bin-exact (the time window is
an integer number of carrier periods).

A demodulation-based estimator of the phase PSD is provided as an
independent cross-check of the sideband estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CarrierNotFoundError
from .model import SampledSignal

__all__ = [
    "PhaseNoiseSpectrum",
    "JitterResult",
    "periodogram",
    "phase_noise_spectrum",
    "jitter",
    "classical_penalty",
    "demod_phase_psd",
    "write_spectrum_csv",
    "write_jitter_csv",
]

#: Minimum carrier-to-total power ratio for peak detection.
CARRIER_THRESHOLD = 1e-6


@dataclass(frozen=True, eq=False)
class PhaseNoiseSpectrum:
    """Single-sideband phase noise L(f) at selected carrier offsets."""

    carrier_freq: float
    carrier_power: float
    offsets: np.ndarray
    l_dbc: np.ndarray
    df: float

    def __post_init__(self):
        off = np.asarray(self.offsets, dtype=np.float64)
        l = np.asarray(self.l_dbc, dtype=np.float64)
        if off.shape != l.shape:
            raise ValueError("offsets and l_dbc must have the same shape")
        if len(off) and (np.any(off <= 0) or np.any(np.diff(off) <= 0)):
            raise ValueError("offsets must be positive and strictly ascending")
        order = np.argsort(off)
        off, l = off[order], l[order]
        off.flags.writeable = False
        l.flags.writeable = False
        object.__setattr__(self, "offsets", off)
        object.__setattr__(self, "l_dbc", l)

    def __len__(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class JitterResult:
    """Band-integrated linear-scale phase noise and its RMS-time reading."""

    integrated_l: float
    band: tuple[float, float]
    rms_time_jitter: float


def _periodogram(samples: np.ndarray, sample_rate: float) -> tuple[np.ndarray, np.ndarray]:
    data = np.asarray(samples, dtype=np.float64)
    n = len(data)
    if n < 2:
        raise ValueError("periodogram needs at least 2 samples")
    spec = np.fft.rfft(data)
    psd = (spec.real**2 + spec.imag**2) * (2.0 / (sample_rate * n))
    psd[0] *= 0.5
    if n % 2 == 0:
        psd[-1] *= 0.5
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    return freqs, psd


def periodogram(y: SampledSignal) -> tuple[np.ndarray, np.ndarray]:
    """One-sided power spectral density (per Hz) of ``y``.

    Rectangular window; Parseval-consistent: sum(psd)*df equals the
    mean square of the samples.
    """
    return _periodogram(y.samples, y.sample_rate)


def _find_carrier(freqs: np.ndarray, psd: np.ndarray, f_r: float) -> int:
    """Index of the carrier peak, searched within +-2 bins of f_r."""
    df = freqs[1] - freqs[0]
    center = int(round(f_r / df))
    lo = max(center - 2, 0)
    hi = min(center + 3, len(psd))
    if lo >= hi:
        raise CarrierNotFoundError(f"carrier frequency {f_r} Hz is outside the spectrum")
    peak = lo + int(np.argmax(psd[lo:hi]))
    total = float(np.sum(psd)) * df
    if total <= 0 or psd[peak] * df < CARRIER_THRESHOLD * total:
        raise CarrierNotFoundError(
            f"no dominant carrier within 2 bins of {f_r} Hz "
            f"(peak holds {psd[peak] * df / total if total else 0:.2e} of total power)"
        )
    return peak


def _sideband_value(psd: np.ndarray, df: float, target: float, carrier_bin: int) -> float:
    """Median of the 3 valid bins nearest ``target``, excluding the carrier."""
    center = int(round(target / df))
    candidates = [j for j in range(center - 2, center + 3) if 0 <= j < len(psd) and j != carrier_bin]
    candidates.sort(key=lambda j: (abs(j * df - target), j))
    picked = sorted(candidates[:3])
    return float(np.median(psd[picked]))


def phase_noise_spectrum(y: SampledSignal, f_r: float, offsets) -> PhaseNoiseSpectrum:
    """Measure L(f) of ``y`` at the given carrier offsets (Hz).

    L is the double-sideband average of the per-Hz density at
    carrier +- offset, relative to the carrier power, in dBc/Hz.
    """
    freqs, psd = periodogram(y)
    df = freqs[1] - freqs[0]
    carrier_bin = _find_carrier(freqs, psd, f_r)
    carrier_freq = freqs[carrier_bin]
    carrier_power = psd[carrier_bin] * df
    nyquist = y.sample_rate / 2.0
    offsets = np.sort(np.asarray(offsets, dtype=np.float64))
    l_dbc = np.empty_like(offsets)
    for i, off in enumerate(offsets):
        if off < df * (1.0 - 1e-9) or off > nyquist - carrier_freq:
            raise ValueError(
                f"offset {off} Hz outside the measurable range [{df}, {nyquist - carrier_freq}] Hz"
            )
        upper = _sideband_value(psd, df, carrier_freq + off, carrier_bin)
        lower = _sideband_value(psd, df, abs(carrier_freq - off), carrier_bin)
        ratio = (upper + lower) / (2.0 * carrier_power)
        l_dbc[i] = 10.0 * math.log10(ratio) if ratio > 0 else -math.inf
    return PhaseNoiseSpectrum(
        carrier_freq=carrier_freq,
        carrier_power=carrier_power,
        offsets=offsets,
        l_dbc=l_dbc,
        df=df,
    )


def jitter(spectrum: PhaseNoiseSpectrum, f_min: float, f_max: float) -> JitterResult:
    """Integrate linear-scale L over [f_min, f_max] (trapezoid rule).

    The companion RMS time jitter assumes L = S_phi/2 (small-angle
    modulation): sqrt(2 * integral) / (2*pi*carrier).
    """
    if len(spectrum) < 2:
        raise ValueError("jitter integration needs at least 2 spectrum points")
    lo, hi = spectrum.offsets[0], spectrum.offsets[-1]
    if not (lo <= f_min < f_max <= hi):
        raise ValueError(
            f"band [{f_min}, {f_max}] must satisfy {lo} <= f_min < f_max <= {hi}"
        )
    linear = 10.0 ** (spectrum.l_dbc / 10.0)
    inside = (spectrum.offsets > f_min) & (spectrum.offsets < f_max)
    f_grid = np.concatenate(([f_min], spectrum.offsets[inside], [f_max]))
    l_grid = np.concatenate(
        (
            [np.interp(f_min, spectrum.offsets, linear)],
            linear[inside],
            [np.interp(f_max, spectrum.offsets, linear)],
        )
    )
    integrated = float(np.trapezoid(l_grid, f_grid))
    rms = float(math.sqrt(2.0 * max(integrated, 0.0)) / (2.0 * math.pi * spectrum.carrier_freq))
    return JitterResult(integrated_l=integrated, band=(f_min, f_max), rms_time_jitter=rms)


def classical_penalty(l0_dbc: float, m: int) -> float:
    """Phase noise of a classically upconverted signal: L0 + 20*log10(m)."""
    if m < 1:
        raise ValueError("upconversion factor must be >= 1")
    return l0_dbc + 20.0 * math.log10(m)


def demod_phase_psd(y: SampledSignal, f_r: float) -> tuple[np.ndarray, np.ndarray]:
    """Phase PSD via demodulation: an independent check of L = S_phi/2.

    Builds the analytic signal, shifts the carrier to DC, unwraps the
    instantaneous phase, removes a linear trend, and returns the
    periodogram of the residual phase track.
    """
    freqs, psd = periodogram(y)
    carrier_bin = _find_carrier(freqs, psd, f_r)
    data = np.asarray(y.samples, dtype=np.float64)
    n = len(data)
    spec = np.fft.fft(data)
    # Analytic signal: keep DC and Nyquist, double strictly positive bins.
    weight = np.zeros(n)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[n // 2] = 1.0
        weight[1 : n // 2] = 2.0
    else:
        weight[1 : (n + 1) // 2] = 2.0
    analytic = np.fft.ifft(spec * weight)
    t = np.arange(n)
    analytic = analytic * np.exp(-2j * np.pi * freqs[carrier_bin] / y.sample_rate * t)
    phase = np.unwrap(np.angle(analytic))
    trend = np.polynomial.polynomial.polyfit(t, phase, 1)
    phase = phase - np.polynomial.polynomial.polyval(t, trend)
    return _periodogram(phase, y.sample_rate)


def write_spectrum_csv(spectrum: PhaseNoiseSpectrum, path: str | Path) -> None:
    """Write ``offset_hz,L_dbc_hz`` rows for every measured offset."""
    lines = ["offset_hz,L_dbc_hz"]
    for off, l in zip(spectrum.offsets, spectrum.l_dbc):
        lines.append(f"{off:.10g},{l:.10g}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_jitter_csv(result: JitterResult, path: str | Path) -> None:
    """Write the single-row band-integration summary."""
    lines = [
        "f_min_hz,f_max_hz,integrated_L,rms_jitter_s",
        f"{result.band[0]:.10g},{result.band[1]:.10g},"
        f"{result.integrated_l:.10g},{result.rms_time_jitter:.10g}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")
