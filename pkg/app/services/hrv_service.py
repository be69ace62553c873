"""
HRV Service - picos R, séries RR/EDR e o vetor de 9 features
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import signal
from scipy.integrate import trapezoid

from app.core.exceptions import (
    DegenerateSeries,
    EmptySeries,
    NonFiniteFeature,
    OsaKitError,
    TooFewPeaks,
    TooShort,
    ZeroTotalPower,
)
from app.models.features import (
    FEATURE_NAMES,
    BandPowers,
    EdrSeries,
    FeatureVector,
    RPeakSeries,
    RrSeries,
)
from app.models.windows import EventWindow

logger = logging.getLogger(__name__)

# grade fixa em mHz inteiros: 0,003 a 0,4 Hz, passo 0,001 Hz
GRID_MILLIHZ = np.arange(3, 401)
SPECTRAL_GRID = GRID_MILLIHZ / 1000.0
VLF_BAND = (3, 40)
LF_BAND = (40, 150)
HF_BAND = (150, 400)

# derivada de 5 pontos centrada (Pan-Tompkins)
_DERIVATIVE = np.array([2.0, 1.0, 0.0, -1.0, -2.0]) / 8.0
SEARCHBACK_FACTOR = 1.66


def _integrate(x: np.ndarray, fs: float, integration_ms: float) -> np.ndarray:
    derivative = np.convolve(x, _DERIVATIVE, mode="same") * fs
    width = max(1, int(round(integration_ms / 1000.0 * fs)))
    return np.convolve(derivative ** 2, np.ones(width) / width, mode="same")


def _adaptive_threshold(integrated: np.ndarray, candidates: np.ndarray, fs: float, refractory: int) -> List[int]:
    learning = integrated[: int(2 * fs)] if len(integrated) > 2 * fs else integrated
    spki = float(np.max(learning)) / 3.0
    npki = float(np.mean(learning)) / 2.0

    accepted: List[int] = []
    rejected: List[Tuple[int, float]] = []
    for c in candidates:
        value = float(integrated[c])
        threshold = npki + 0.25 * (spki - npki)
        if value > threshold and (not accepted or c - accepted[-1] > refractory):
            accepted.append(int(c))
            spki = 0.125 * value + 0.875 * spki
        else:
            rejected.append((int(c), value))
            npki = 0.125 * value + 0.875 * npki

    # searchback: lacunas longas recebem o maior candidato acima de metade do limiar
    threshold = npki + 0.25 * (spki - npki)
    if len(accepted) >= 3:
        rr = np.diff(accepted)
        limit = SEARCHBACK_FACTOR * float(np.median(rr))
        extra = []
        for left, right in zip(accepted[:-1], accepted[1:]):
            if right - left <= limit:
                continue
            inside = [
                (value, c) for c, value in rejected
                if left + refractory < c < right - refractory and value > 0.5 * threshold
            ]
            if inside:
                extra.append(max(inside)[1])
        accepted = sorted(accepted + extra)
    return accepted


def _refine(x: np.ndarray, index: int, reach: int) -> Tuple[float, float]:
    lo = max(0, index - reach)
    hi = min(len(x), index + reach + 1)
    peak = lo + int(np.argmax(x[lo:hi]))
    if 0 < peak < len(x) - 1:
        left, mid, right = x[peak - 1], x[peak], x[peak + 1]
        denom = left - 2 * mid + right
        if denom < 0:
            shift = 0.5 * (left - right) / denom
            return peak + shift, mid - 0.25 * (left - right) * shift
    return float(peak), float(x[peak])


def detect_r_peaks(
    window: EventWindow,
    integration_ms: float = 150.0,
    refractory_ms: float = 200.0,
    refine_ms: float = 50.0,
    min_peaks: int = 5,
) -> RPeakSeries:
    """
    Pan-Tompkins: derivada -> quadrado -> integração móvel de 150 ms -> limiar adaptativo
    com refratário de 200 ms; cada pico é refinado ao máximo local do sinal (±50 ms).
    """
    x = np.asarray(window.samples, dtype=np.float64)
    fs = window.sampling_rate
    if x.size == 0 or not np.any(x):
        raise TooFewPeaks(f"Janela {window.window_id} sem atividade")

    integrated = _integrate(x, fs, integration_ms)
    refractory = int(round(refractory_ms / 1000.0 * fs))
    # borda com zero para que picos nas extremidades virem candidatos
    padded = np.pad(integrated, 1)
    candidates, _ = signal.find_peaks(padded, distance=max(1, refractory))
    candidates = candidates - 1
    if len(candidates) == 0:
        raise TooFewPeaks(f"Janela {window.window_id} sem candidatos a QRS")

    accepted = _adaptive_threshold(integrated, candidates, fs, refractory)
    reach = int(round(refine_ms / 1000.0 * fs))
    refined = [_refine(x, c, reach) for c in accepted]

    positions: List[float] = []
    amplitudes: List[float] = []
    for position, amplitude in refined:
        if positions and position - positions[-1] < refractory:
            if amplitude > amplitudes[-1]:
                positions[-1], amplitudes[-1] = position, amplitude
            continue
        positions.append(position)
        amplitudes.append(amplitude)

    if len(positions) < min_peaks:
        raise TooFewPeaks(f"Janela {window.window_id}: {len(positions)} picos (< {min_peaks})")
    return RPeakSeries(times=np.array(positions) / fs, amplitudes=np.array(amplitudes))


def compute_rr(peaks: RPeakSeries) -> RrSeries:
    """Intervalos RR em ms e seus pontos médios em s"""
    times = np.asarray(peaks.times, dtype=np.float64)
    if len(times) < 2:
        raise TooFewPeaks("RR exige pelo menos 2 picos")
    return RrSeries(
        intervals=np.diff(times) * 1000.0,
        interval_midpoint_times=(times[:-1] + times[1:]) / 2.0,
    )


def compute_edr(peaks: RPeakSeries) -> EdrSeries:
    """EDR pela amplitude do R: amplitudes menos a média, nos instantes dos picos"""
    amplitudes = np.asarray(peaks.amplitudes, dtype=np.float64)
    if len(amplitudes) < 2:
        raise TooFewPeaks("EDR exige pelo menos 2 picos")
    return EdrSeries(values=amplitudes - amplitudes.mean(), times=np.asarray(peaks.times, dtype=np.float64))


def _values(rr) -> np.ndarray:
    if isinstance(rr, RrSeries):
        return np.asarray(rr.intervals, dtype=np.float64)
    return np.asarray(rr, dtype=np.float64)


def mean_rr(rr) -> float:
    x = _values(rr)
    if x.size == 0:
        raise EmptySeries("Série RR vazia")
    return float(np.mean(x))


def serial_correlation(rr, lag: int) -> float:
    """r_k = Σ (x_i - x̄)(x_{i+k} - x̄) / Σ (x_i - x̄)²"""
    x = _values(rr)
    if lag < 1 or x.size < lag + 2:
        raise TooShort(f"Correlação serial de lag {lag} exige {lag + 2} intervalos")
    centered = x - x.mean()
    denominator = float(np.dot(centered, centered))
    if denominator == 0.0:
        raise DegenerateSeries("Série RR sem variância")
    return float(np.dot(centered[:-lag], centered[lag:]) / denominator)


def pnn50(rr, absolute: bool = False) -> int:
    """Número de pares em que o segundo intervalo excede o primeiro em mais de 50 ms"""
    x = _values(rr)
    if x.size < 2:
        raise TooShort("pNN50 exige pelo menos 2 intervalos")
    diffs = np.diff(x)
    if absolute:
        diffs = np.abs(diffs)
    return int(np.count_nonzero(diffs > 50.0))


def sdsd(rr) -> float:
    """Desvio padrão amostral (n-1) das diferenças sucessivas"""
    x = _values(rr)
    if x.size < 3:
        raise TooShort("SDSD exige pelo menos 3 intervalos")
    return float(np.std(np.diff(x), ddof=1))


def lomb_scargle_power(times, values, freqs) -> np.ndarray:
    """Periodograma de Lomb-Scargle normalizado (série centrada na média)"""
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    f = np.asarray(freqs, dtype=np.float64)
    if t.size < 4 or t.size != y.size:
        raise DegenerateSeries("Lomb-Scargle exige pelo menos 4 pontos")
    if np.any(f <= 0):
        raise DegenerateSeries("Frequências devem ser positivas")
    centered = y - y.mean()
    if not np.any(np.abs(centered) > 1e-12 * max(1.0, float(np.abs(y).max()))):
        raise DegenerateSeries("Série sem variância")
    return signal.lombscargle(t, centered, 2.0 * np.pi * f, normalize=True)


def integrate_band(power: np.ndarray, lo_millihz: int, hi_millihz: int) -> float:
    """Trapézio do periodograma (na grade fixa) entre dois pontos da grade"""
    lo = lo_millihz - GRID_MILLIHZ[0]
    hi = hi_millihz - GRID_MILLIHZ[0]
    return float(trapezoid(power[lo:hi + 1], SPECTRAL_GRID[lo:hi + 1]))


def band_powers(times, values) -> BandPowers:
    """VLF (0,003-0,04), LF (0,04-0,15), HF (0,15-0,4) e frações sobre a soma das três"""
    power = lomb_scargle_power(times, values, SPECTRAL_GRID)
    vlf = integrate_band(power, *VLF_BAND)
    lf = integrate_band(power, *LF_BAND)
    hf = integrate_band(power, *HF_BAND)
    total = vlf + lf + hf
    if total <= 0.0:
        raise ZeroTotalPower("Potência total nula")
    return BandPowers(
        vlf=vlf,
        lf=lf,
        hf=hf,
        norm_vlf=vlf / total,
        norm_lf=lf / total,
        norm_hf=hf / total,
        lf_hf_ratio=lf / hf if hf > 0.0 else float("inf"),
    )


def extract_feature_vector(
    window: EventWindow,
    pnn50_absolute: bool = False,
    **detector_kwargs,
) -> FeatureVector:
    """Monta os 9 escalares de uma janela (RR: 6, EDR: 3)"""
    peaks = detect_r_peaks(window, **detector_kwargs)
    rr = compute_rr(peaks)
    edr = compute_edr(peaks)
    rr_bands = band_powers(rr.interval_midpoint_times, rr.intervals)
    edr_bands = band_powers(edr.times, edr.values)
    return FeatureVector(
        mean_rr=mean_rr(rr),
        r2=serial_correlation(rr, 2),
        r3=serial_correlation(rr, 3),
        pnn50=float(pnn50(rr, absolute=pnn50_absolute)),
        sdsd=sdsd(rr),
        norm_vlf_rr=rr_bands.norm_vlf,
        norm_vlf_edr=edr_bands.norm_vlf,
        norm_lf_edr=edr_bands.norm_lf,
        lf_hf_ratio_edr=edr_bands.lf_hf_ratio,
    )


def extract_features(
    windows: Sequence[EventWindow],
    pnn50_absolute: bool = False,
    **detector_kwargs,
) -> Tuple[List[Tuple[EventWindow, FeatureVector]], List[Tuple[str, str]]]:
    """Features de várias janelas; janelas rejeitadas voltam com o motivo"""
    rows = []
    rejected = []
    for window in windows:
        try:
            vector = extract_feature_vector(window, pnn50_absolute, **detector_kwargs)
            if not np.all(np.isfinite(vector.to_array())):
                raise NonFiniteFeature("feature não finita (HF da EDR nulo)")
            rows.append((window, vector))
        except OsaKitError as e:
            logger.warning(f"Janela {window.window_id} excluída: {type(e).__name__}: {e}")
            rejected.append((window.window_id, type(e).__name__))
    return rows, rejected


def feature_table(rows: Sequence[Tuple[EventWindow, FeatureVector]]) -> pd.DataFrame:
    """Tabela (subject_id, window_id, label, 9 features), uma linha por janela"""
    records = []
    for window, vector in rows:
        record = {"subject_id": window.subject_id, "window_id": window.window_id, "label": window.label.value}
        record.update({name: getattr(vector, name) for name in FEATURE_NAMES})
        records.append(record)
    return pd.DataFrame(records, columns=["subject_id", "window_id", "label"] + FEATURE_NAMES)


def write_feature_table(path: str, rows: Sequence[Tuple[EventWindow, FeatureVector]]):
    feature_table(rows).to_csv(path, index=False, float_format="%.10g")


def read_feature_table(path: str) -> pd.DataFrame:
    return pd.read_csv(path, dtype={"subject_id": str, "window_id": str, "label": str})
