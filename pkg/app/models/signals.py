"""
Signal Models: EDF header, traces, annotations, subjects
"""
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class SeverityLabel(str, Enum):
    """Rótulo do sujeito pelo AHI"""
    NORMAL = "Normal"
    SEVERE = "Severe"
    EXCLUDED = "Excluded"

    @property
    def target(self) -> int:
        """Normal = -1, Severe = +1 (classe positiva)"""
        if self is SeverityLabel.EXCLUDED:
            raise ValueError("Sujeito excluído não tem classe")
        return 1 if self is SeverityLabel.SEVERE else -1


class SignalSpec(BaseModel):
    """Cabeçalho de um canal EDF (256 bytes)"""
    label: str
    transducer: str = ""
    physical_dimension: str = "mV"
    physical_min: float
    physical_max: float
    digital_min: int = -32768
    digital_max: int = 32767
    prefiltering: str = ""
    samples_per_record: int
    reserved: str = ""
    # texto original dos campos numéricos (reescrito igual se o valor não mudou)
    raw_fields: Dict[str, str] = Field(default_factory=dict, repr=False)

    @property
    def gain(self) -> float:
        return (self.physical_max - self.physical_min) / (self.digital_max - self.digital_min)


class EdfHeader(BaseModel):
    """Cabeçalho principal EDF"""
    version: str = "0"
    patient_id: str = ""
    recording_id: str = ""
    start_date: str = "01.01.00"
    start_time: str = "00.00.00"
    header_bytes: int = 256
    reserved: str = ""
    num_records: int = 0
    record_duration: float = 1.0
    signals: List[SignalSpec] = Field(default_factory=list)
    raw_fields: Dict[str, str] = Field(default_factory=dict, repr=False)
    # bytes após o último registro completo
    trailing: bytes = Field(default=b"", repr=False)


class SignalTrace(BaseModel):
    """Um canal decodificado em unidades físicas"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    samples: np.ndarray
    sampling_rate: float
    label: str = "ECG"

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sampling_rate


class EventAnnotation(BaseModel):
    """Evento anotado (apneia/hipopneia)"""
    name: str
    start: float
    duration: float


class SubjectRecord(BaseModel):
    """ECG de um sujeito + eventos + AHI"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    subject_id: str
    ecg: SignalTrace
    events: List[EventAnnotation] = Field(default_factory=list)
    ahi: float
    label: SeverityLabel
    r_peak_times: Optional[np.ndarray] = None
    r_peak_amplitudes: Optional[np.ndarray] = None
    # semente do próprio sujeito (registros sintéticos)
    seed: Optional[int] = None


class SynthConfig(BaseModel):
    """Parâmetros do gerador sintético de ECG"""
    seed: int = 0
    subject_id: str = "synth-0000"
    duration: float = 300.0
    sampling_rate: float = 512.0
    heart_rate: float = 60.0
    hrv_lf_amplitude: float = 0.0
    hrv_hf_amplitude: float = 0.0
    resp_rate: float = 0.25
    mains_amplitude: float = 0.0
    mains_frequency: float = 60.0
    noise_sd: float = 0.0
    ahi: float = 3.0
    event_plan: List[Tuple[float, float]] = Field(default_factory=list)
