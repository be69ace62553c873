"""
Filter Service - notch 60 Hz, passa-banda Butterworth 5-35 Hz, z-score e janelas de evento
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import signal

from app.core.exceptions import DegenerateWindow, EmptyInput, InvalidFrequency
from app.models.signals import SubjectRecord
from app.models.windows import EventWindow, ExtractionReport, SkippedEvent

logger = logging.getLogger(__name__)

# motivos de descarte de eventos
DURATION_OUT_OF_RANGE = "DurationOutOfRange"
INSUFFICIENT_SIGNAL = "InsufficientSignal"
DEGENERATE_WINDOW = "DegenerateWindow"


class IirFilter(BaseModel):
    """Seções de segunda ordem (b0, b1, b2, 1, a1, a2) no formato sos do scipy"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    sos: np.ndarray
    sampling_rate: float
    description: str

    @property
    def sections(self) -> List[Tuple[float, float, float, float, float]]:
        return [(s[0], s[1], s[2], s[4], s[5]) for s in self.sos]

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots([1.0, s[4], s[5]]) for s in self.sos])

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def response(self, freqs) -> np.ndarray:
        """H(e^{jw}) nas frequências dadas (Hz)"""
        _, h = signal.sosfreqz(self.sos, worN=np.atleast_1d(np.asarray(freqs, dtype=float)), fs=self.sampling_rate)
        return h

    def gain_db(self, freqs) -> np.ndarray:
        magnitude = np.abs(self.response(freqs))
        return 20.0 * np.log10(np.maximum(magnitude, 1e-300))


def _check_frequency(freq: float, sampling_rate: float):
    if sampling_rate <= 0 or not 0.0 < freq < sampling_rate / 2.0:
        raise InvalidFrequency(f"Frequência {freq} Hz fora de (0, {sampling_rate / 2.0}) Hz")


def design_notch(f0: float, sampling_rate: float, q: float = 30.0) -> IirFilter:
    """Notch de segunda ordem: zeros em ±2π·f0/fs no círculo unitário, banda f0/q"""
    _check_frequency(f0, sampling_rate)
    if q <= 0:
        raise InvalidFrequency(f"Fator de qualidade inválido: {q}")
    b, a = signal.iirnotch(f0, q, fs=sampling_rate)
    return IirFilter(
        sos=signal.tf2sos(b, a),
        sampling_rate=sampling_rate,
        description=f"notch {f0:g} Hz, Q={q:g}",
    )


def design_butter_bandpass(f_low: float, f_high: float, sampling_rate: float, order: int = 2) -> IirFilter:
    """Butterworth passa-banda (protótipo analógico + bilinear com pré-distorção)"""
    _check_frequency(f_low, sampling_rate)
    _check_frequency(f_high, sampling_rate)
    if f_low >= f_high:
        raise InvalidFrequency(f"f_low ({f_low}) deve ser menor que f_high ({f_high})")
    sos = signal.butter(order, [f_low, f_high], btype="bandpass", fs=sampling_rate, output="sos")
    return IirFilter(
        sos=sos,
        sampling_rate=sampling_rate,
        description=f"butterworth bandpass {f_low:g}-{f_high:g} Hz, ordem {order}",
    )


def apply_filter(filt: IirFilter, x: np.ndarray, zero_phase: bool = True) -> np.ndarray:
    """Aplica todas as seções; ida-e-volta (fase zero) por padrão"""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise EmptyInput("Sinal vazio")
    if not zero_phase:
        return signal.sosfilt(filt.sos, x)
    default_pad = 3 * (2 * len(filt.sos) + 1 - min((filt.sos[:, 2] == 0).sum(), (filt.sos[:, 5] == 0).sum()))
    return signal.sosfiltfilt(filt.sos, x, padlen=min(default_pad, x.size - 1))


def preprocess_ecg(
    x: np.ndarray,
    sampling_rate: float,
    notch_frequency: float = 60.0,
    notch_q: float = 30.0,
    bandpass_low: float = 5.0,
    bandpass_high: float = 35.0,
    bandpass_order: int = 2,
    zero_phase: bool = True,
) -> np.ndarray:
    """Notch seguido do passa-banda"""
    notch = design_notch(notch_frequency, sampling_rate, notch_q)
    bandpass = design_butter_bandpass(bandpass_low, bandpass_high, sampling_rate, bandpass_order)
    return apply_filter(bandpass, apply_filter(notch, x, zero_phase), zero_phase)


def zscore(x: np.ndarray) -> np.ndarray:
    """(x - média) / desvio padrão populacional"""
    x = np.asarray(x, dtype=np.float64)
    if x.size < 2:
        raise DegenerateWindow("z-score exige pelo menos 2 amostras")
    sd = float(np.std(x))
    if sd == 0.0 or not np.isfinite(sd):
        raise DegenerateWindow("Janela com desvio padrão nulo")
    return (x - np.mean(x)) / sd


def extract_event_windows_report(
    record: SubjectRecord,
    min_duration: float = 28.0,
    max_duration: float = 32.0,
    segment_seconds: float = 30.0,
    window_seconds: float = 15.0,
) -> ExtractionReport:
    """
    Para cada evento de 28-32 s com 30 s de sinal após o início: z-score do trecho de
    30 s alinhado ao início e mantém os primeiros 15 s. O ECG já deve estar filtrado.
    """
    fs = record.ecg.sampling_rate
    samples = record.ecg.samples
    segment_len = int(round(segment_seconds * fs))
    window_len = int(round(window_seconds * fs))
    report = ExtractionReport()

    for index, event in enumerate(record.events):
        reason: Optional[str] = None
        if not min_duration <= event.duration <= max_duration:
            reason = DURATION_OUT_OF_RANGE
        start = int(round(event.start * fs))
        if reason is None and start + segment_len > len(samples):
            reason = INSUFFICIENT_SIGNAL

        if reason is None:
            try:
                segment = zscore(samples[start:start + segment_len])
            except DegenerateWindow:
                reason = DEGENERATE_WINDOW

        if reason is not None:
            report.skipped.append(SkippedEvent(subject_id=record.subject_id, event=event, reason=reason))
            logger.info(f"Evento {record.subject_id}@{event.start:.1f}s descartado: {reason}")
            continue

        report.windows.append(EventWindow(
            window_id=f"{record.subject_id}-{index:04d}",
            subject_id=record.subject_id,
            label=record.label,
            samples=segment[:window_len].copy(),
            sampling_rate=fs,
            source_event=event,
        ))

    return report


def extract_event_windows(record: SubjectRecord, **kwargs) -> List[EventWindow]:
    """Só as janelas; os descartes ficam no log (ver extract_event_windows_report)"""
    return extract_event_windows_report(record, **kwargs).windows
