"""
Synthetic ECG Service - coortes sintéticas no lugar dos dados restritos
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel

from app.core.exceptions import InvalidConfig
from app.core.utils import spawn_seeds
from app.models.signals import (
    EventAnnotation,
    SeverityLabel,
    SignalTrace,
    SubjectRecord,
    SynthConfig,
)
from app.services.cohort_service import label_subject

logger = logging.getLogger(__name__)

# (deslocamento relativo ao R em s, amplitude em mV, largura em s)
PQRST_WAVES = [
    (-0.20, 0.12, 0.025),  # P
    (-0.03, -0.12, 0.008),  # Q
    (0.00, 1.00, 0.010),  # R
    (0.03, -0.22, 0.008),  # S
    (0.28, 0.28, 0.040),  # T
]
R_RESPIRATORY_DEPTH = 0.15
LF_FREQUENCY = 0.1
MIN_BEAT_GAP = 0.3
EVENT_DURATION_RANGE = (28.0, 32.0)
EVENT_NAME = "Obstructive apnea"


class CohortProfile(BaseModel):
    """Faixas (uniformes) dos parâmetros de uma classe; as faixas das classes são disjuntas"""
    heart_rate: Tuple[float, float]
    hrv_lf_amplitude: Tuple[float, float]
    hrv_hf_amplitude: Tuple[float, float]
    resp_rate: Tuple[float, float]
    ahi: Tuple[float, float]
    mains_amplitude: Tuple[float, float] = (0.02, 0.10)
    noise_sd: Tuple[float, float] = (0.01, 0.04)


DEFAULT_PROFILES: Dict[SeverityLabel, CohortProfile] = {
    SeverityLabel.NORMAL: CohortProfile(
        heart_rate=(56.0, 68.0),
        hrv_lf_amplitude=(0.01, 0.03),
        hrv_hf_amplitude=(0.04, 0.07),
        resp_rate=(0.24, 0.32),
        ahi=(2.0, 5.0),
    ),
    SeverityLabel.SEVERE: CohortProfile(
        heart_rate=(78.0, 92.0),
        hrv_lf_amplitude=(0.08, 0.12),
        hrv_hf_amplitude=(0.0, 0.015),
        resp_rate=(0.15, 0.20),
        ahi=(36.0, 60.0),
    ),
}


def _validate(cfg: SynthConfig):
    if not 30.0 <= cfg.heart_rate <= 200.0:
        raise InvalidConfig(f"heart_rate {cfg.heart_rate} fora de [30, 200]")
    if cfg.duration <= 0 or cfg.sampling_rate <= 0:
        raise InvalidConfig("duration e sampling_rate devem ser positivos")
    if cfg.hrv_lf_amplitude < 0 or cfg.hrv_hf_amplitude < 0:
        raise InvalidConfig("Profundidades de modulação devem ser não negativas")
    if cfg.hrv_lf_amplitude + cfg.hrv_hf_amplitude >= 0.9:
        raise InvalidConfig("Modulação total do RR deve ser < 0.9")
    if cfg.resp_rate <= 0 or cfg.noise_sd < 0 or cfg.mains_amplitude < 0 or cfg.ahi < 0:
        raise InvalidConfig("resp_rate > 0; noise_sd, mains_amplitude e ahi >= 0")
    for start, duration in cfg.event_plan:
        if start < 0 or duration <= 0 or start >= cfg.duration:
            raise InvalidConfig(f"Evento inválido no plano: ({start}, {duration})")


def beat_times(cfg: SynthConfig) -> np.ndarray:
    """Instantes dos batimentos pela recorrência com modulação LF (0,1 Hz) e HF (respiração)"""
    base = 60.0 / cfg.heart_rate
    t = 0.5 * base
    times = []
    while t < cfg.duration:
        times.append(t)
        rr = base * (
            1.0
            + cfg.hrv_lf_amplitude * math.sin(2 * math.pi * LF_FREQUENCY * t)
            + cfg.hrv_hf_amplitude * math.sin(2 * math.pi * cfg.resp_rate * t)
        )
        t += max(rr, MIN_BEAT_GAP)
    return np.array(times)


def generate_synthetic_ecg(cfg: SynthConfig) -> SubjectRecord:
    """
    ECG sintético: trem de PQRST (5 gaussianas por batimento), amplitude do R modulada
    pela respiração, interferência de rede e ruído branco. Função pura de cfg (seed incluída).
    """
    _validate(cfg)
    rng = np.random.default_rng(cfg.seed)
    fs = cfg.sampling_rate
    n = int(round(cfg.duration * fs))
    t = np.arange(n) / fs
    ecg = np.zeros(n)

    peaks = beat_times(cfg)
    r_amplitudes = 1.0 + R_RESPIRATORY_DEPTH * np.sin(2 * np.pi * cfg.resp_rate * peaks)
    reach = 0.5
    for peak, r_amp in zip(peaks, r_amplitudes):
        lo = max(0, int((peak - reach) * fs))
        hi = min(n, int((peak + reach) * fs) + 1)
        local = t[lo:hi] - peak
        for offset, amplitude, width in PQRST_WAVES:
            if offset == 0.0:
                amplitude = amplitude * r_amp
            ecg[lo:hi] += amplitude * np.exp(-((local - offset) ** 2) / (2 * width ** 2))

    if cfg.mains_amplitude:
        ecg += cfg.mains_amplitude * np.sin(2 * np.pi * cfg.mains_frequency * t)
    if cfg.noise_sd:
        ecg += rng.normal(0.0, cfg.noise_sd, size=n)

    events = [
        EventAnnotation(name=EVENT_NAME, start=float(start), duration=float(duration))
        for start, duration in sorted(cfg.event_plan)
    ]
    return SubjectRecord(
        subject_id=cfg.subject_id,
        ecg=SignalTrace(samples=ecg, sampling_rate=fs, label="ECG"),
        events=events,
        ahi=cfg.ahi,
        label=label_subject(cfg.ahi),
        r_peak_times=peaks,
        r_peak_amplitudes=r_amplitudes,
        seed=cfg.seed,
    )


def plan_events(rng: np.random.Generator, duration: float, ahi: float) -> List[Tuple[float, float]]:
    """
    Pelo menos um evento de 28-32 s a cada 5 minutos (mais, se o AHI pedir),
    um por fatia, sem sobreposição e com 30 s de sinal após o início.
    """
    count = max(math.ceil(duration / 300.0), int(round(ahi * duration / 3600.0)))
    count = min(count, int(duration // 40.0))
    if count < 1:
        raise InvalidConfig(f"Duração {duration} s curta demais para eventos")
    slot = duration / count
    plan = []
    for i in range(count):
        event_duration = float(rng.uniform(*EVENT_DURATION_RANGE))
        start = i * slot + float(rng.uniform(0.0, slot - EVENT_DURATION_RANGE[1] - 1.0))
        plan.append((round(start, 3), round(event_duration, 3)))
    return plan


def _draw(rng: np.random.Generator, bounds: Tuple[float, float]) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def subject_config(
    label: SeverityLabel,
    seed: int,
    subject_id: str,
    duration: float = 1200.0,
    sampling_rate: float = 512.0,
    profiles: Dict[SeverityLabel, CohortProfile] = DEFAULT_PROFILES,
) -> SynthConfig:
    """Sorteia o SynthConfig de um sujeito a partir do perfil da classe"""
    profile = profiles[label]
    rng = np.random.default_rng(seed)
    ahi = _draw(rng, profile.ahi)
    return SynthConfig(
        seed=seed,
        subject_id=subject_id,
        duration=duration,
        sampling_rate=sampling_rate,
        heart_rate=_draw(rng, profile.heart_rate),
        hrv_lf_amplitude=_draw(rng, profile.hrv_lf_amplitude),
        hrv_hf_amplitude=_draw(rng, profile.hrv_hf_amplitude),
        resp_rate=_draw(rng, profile.resp_rate),
        mains_amplitude=_draw(rng, profile.mains_amplitude),
        noise_sd=_draw(rng, profile.noise_sd),
        ahi=round(ahi, 2),
        event_plan=plan_events(rng, duration, ahi),
    )


def cohort_configs(
    n_normal: int,
    n_severe: int,
    seed: int,
    duration: float = 1200.0,
    sampling_rate: float = 512.0,
) -> List[SynthConfig]:
    """Configurações de todos os sujeitos; cada um recebe a sua sub-semente"""
    if n_normal <= 0 or n_severe <= 0:
        raise InvalidConfig("Contagens de sujeitos devem ser positivas")
    seeds = spawn_seeds(seed, n_normal + n_severe)
    labels = [SeverityLabel.NORMAL] * n_normal + [SeverityLabel.SEVERE] * n_severe
    configs = []
    for i, (label, sub_seed) in enumerate(zip(labels, seeds)):
        prefix = "N" if label is SeverityLabel.NORMAL else "S"
        configs.append(subject_config(label, sub_seed, f"{prefix}{i:04d}", duration, sampling_rate))
    return configs


def generate_synthetic_cohort(
    n_normal: int,
    n_severe: int,
    seed: int,
    duration: float = 1200.0,
    sampling_rate: float = 512.0,
    workers: int = 1,
) -> List[SubjectRecord]:
    """Coorte sintética determinística: n_normal + n_severe sujeitos"""
    configs = cohort_configs(n_normal, n_severe, seed, duration, sampling_rate)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(generate_synthetic_ecg, configs))
    else:
        records = [generate_synthetic_ecg(cfg) for cfg in configs]
    logger.info(f"Coorte sintética: {n_normal} normais, {n_severe} severos (seed={seed})")
    return records
