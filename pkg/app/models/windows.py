"""
Event Window Models
"""
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.models.signals import EventAnnotation, SeverityLabel


class EventWindow(BaseModel):
    """Trecho de 15 s, normalizado por z-score, de um evento de apneia/hipopneia"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    window_id: str
    subject_id: str
    label: SeverityLabel
    samples: np.ndarray
    sampling_rate: float
    source_event: EventAnnotation


class SkippedEvent(BaseModel):
    """Evento descartado na extração e o motivo"""
    subject_id: str
    event: EventAnnotation
    reason: str


class ExtractionReport(BaseModel):
    """Janelas extraídas de um sujeito + eventos descartados"""
    windows: List[EventWindow] = Field(default_factory=list)
    skipped: List[SkippedEvent] = Field(default_factory=list)
