"""
HRV / EDR Feature Models
"""
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict

FEATURE_NAMES: List[str] = [
    "mean_rr",
    "r2",
    "r3",
    "pnn50",
    "sdsd",
    "norm_vlf_rr",
    "norm_vlf_edr",
    "norm_lf_edr",
    "lf_hf_ratio_edr",
]


class RPeakSeries(BaseModel):
    """Instantes (s, relativos ao início da janela) e amplitudes dos picos R"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    times: np.ndarray
    amplitudes: np.ndarray


class RrSeries(BaseModel):
    """Intervalos RR em ms e o instante médio de cada intervalo"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    intervals: np.ndarray
    interval_midpoint_times: np.ndarray


class EdrSeries(BaseModel):
    """Respiração derivada do ECG (amplitude R sem a média)"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    values: np.ndarray
    times: np.ndarray


class BandPowers(BaseModel):
    """Potências VLF/LF/HF, frações normalizadas e razão LF/HF"""
    vlf: float
    lf: float
    hf: float
    norm_vlf: float
    norm_lf: float
    norm_hf: float
    lf_hf_ratio: float


class FeatureVector(BaseModel):
    """Os 9 escalares usados pelo SVM"""
    mean_rr: float
    r2: float
    r3: float
    pnn50: float
    sdsd: float
    norm_vlf_rr: float
    norm_vlf_edr: float
    norm_lf_edr: float
    lf_hf_ratio_edr: float

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=np.float64)
