"""
Fixtures compartilhadas dos testes
"""
import numpy as np
import pytest

from app.models.classifiers import ModelConfig
from app.models.signals import EventAnnotation, SeverityLabel, SynthConfig
from app.models.windows import EventWindow
from app.services.synth_service import generate_synthetic_ecg


def make_window(
    heart_rate: float = 60.0,
    noise_sd: float = 0.0,
    seed: int = 0,
    duration: float = 15.0,
    label: SeverityLabel = SeverityLabel.NORMAL,
    **overrides,
):
    """Janela de ECG sintético + instantes verdadeiros dos picos R"""
    cfg = SynthConfig(
        seed=seed, subject_id=f"T{seed:04d}", duration=duration,
        heart_rate=heart_rate, noise_sd=noise_sd, **overrides,
    )
    record = generate_synthetic_ecg(cfg)
    window = EventWindow(
        window_id=f"T{seed:04d}-0000",
        subject_id=record.subject_id,
        label=label,
        samples=record.ecg.samples,
        sampling_rate=record.ecg.sampling_rate,
        source_event=EventAnnotation(name="Obstructive apnea", start=0.0, duration=duration),
    )
    return window, record.r_peak_times


@pytest.fixture
def window_factory():
    return make_window


@pytest.fixture
def tiny_config():
    """Rede pequena (conv 4/3/2, LSTM 3/3/2, dense 4/2) para entradas de 64 amostras"""
    return ModelConfig(
        conv_units=[4, 3, 2],
        conv_kernel=3,
        conv_stride=1,
        pool=2,
        lstm_units=[3, 3, 2],
        recurrent_dropout=0.0,
        inter_lstm_dropout=0.0,
        dense_units=[4, 2],
        batch_size=4,
        max_epochs=5,
        patience=3,
        seed=0,
        bn_momentum=0.9,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
