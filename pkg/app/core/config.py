"""
Core configuration and environment variables
"""
import os
from typing import Any, Dict, List, Optional, Union

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.core.exceptions import InvalidConfig, UnknownConfigKey

load_dotenv()

# Environment Variables
OSA_LOG_LEVEL = os.getenv("OSA_LOG_LEVEL", "INFO")
OSA_RUNS_DIR = os.getenv("OSA_RUNS_DIR", "runs")
OSA_CONFIG = os.getenv("OSA_CONFIG")


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class Settings(BaseModel):
    """Todos os parâmetros do pipeline; cada chave pode vir do arquivo key=value"""

    model_config = ConfigDict(extra="forbid")

    # signal_io
    ecg_channel: str = "ECG"
    event_patterns: List[str] = Field(default_factory=lambda: ["apnea", "hypopnea"])
    ahi_normal_low: float = 2.0
    ahi_normal_high: float = 5.0
    ahi_severe_above: float = 35.0

    # dsp
    notch_frequency: float = 60.0
    notch_q: float = 30.0
    bandpass_low: float = 5.0
    bandpass_high: float = 35.0
    bandpass_order: int = 2
    zero_phase: bool = True
    event_min_duration: float = 28.0
    event_max_duration: float = 32.0
    segment_seconds: float = 30.0
    window_seconds: float = 15.0

    # hrv
    integration_ms: float = 150.0
    refractory_ms: float = 200.0
    refine_ms: float = 50.0
    min_peaks: int = 5
    pnn50_absolute: bool = False

    # svm
    svm_kernel: str = "rbf"
    svm_c: float = 1.0
    svm_gamma: Union[float, str] = "auto"
    svm_tol: float = 1e-3

    # harness
    samples_per_class: int = 1000
    folds: int = 10
    val_fraction: float = 0.1
    fold_workers: int = 1
    seed: int = 0

    # nn
    conv_units: List[int] = Field(default_factory=lambda: [256, 128, 64])
    conv_kernel: int = 16
    conv_stride: int = 2
    pool: int = 2
    lstm_units: List[int] = Field(default_factory=lambda: [128, 128, 64])
    recurrent_dropout: float = 0.4
    inter_lstm_dropout: float = 0.4
    dense_units: List[int] = Field(default_factory=lambda: [128, 64, 32, 16, 8, 4])
    output_classes: int = 2
    learning_rate: float = 0.001
    rmsprop_rho: float = 0.9
    rmsprop_epsilon: float = 1e-7
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 10
    dtype: str = "float64"

    @field_validator("event_patterns", "conv_units", "lstm_units", "dense_units", mode="before")
    @classmethod
    def _parse_list(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("svm_gamma", mode="before")
    @classmethod
    def _parse_gamma(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() != "auto":
            return float(value)
        return value

    @field_validator("svm_kernel")
    @classmethod
    def _check_kernel(cls, value: str) -> str:
        if value not in ("rbf", "linear"):
            raise ValueError("svm_kernel deve ser rbf ou linear")
        return value

    @field_validator("dtype")
    @classmethod
    def _check_dtype(cls, value: str) -> str:
        if value not in ("float64", "float32"):
            raise ValueError("dtype deve ser float64 ou float32")
        return value

    @field_validator("recurrent_dropout", "inter_lstm_dropout")
    @classmethod
    def _check_rate(cls, value: float) -> float:
        if not 0.0 <= value < 1.0:
            raise ValueError("dropout deve estar em [0, 1)")
        return value

    def detector_settings(self) -> Dict[str, Any]:
        """Parâmetros do detector de picos R"""
        keys = ("integration_ms", "refractory_ms", "refine_ms", "min_peaks")
        return {key: getattr(self, key) for key in keys}

    def model_settings(self) -> Dict[str, Any]:
        """Subconjunto que alimenta ModelConfig"""
        keys = (
            "conv_units", "conv_kernel", "conv_stride", "pool", "lstm_units",
            "recurrent_dropout", "inter_lstm_dropout", "dense_units", "output_classes",
            "learning_rate", "rmsprop_rho", "rmsprop_epsilon", "batch_size",
            "max_epochs", "patience", "seed", "dtype",
        )
        return {key: getattr(self, key) for key in keys}


def load_settings(path: Optional[str] = None, **overrides: Any) -> Settings:
    """
    Carrega Settings a partir de um arquivo key=value (dotenv).
    Chaves desconhecidas são erro; overrides (ex.: --seed da CLI) vencem o arquivo.
    """
    path = path or OSA_CONFIG
    values: Dict[str, Any] = {}
    if path:
        if not os.path.exists(path):
            raise InvalidConfig(f"Arquivo de configuração não encontrado: {path}")
        values = {key: value for key, value in dotenv_values(path).items() if value is not None}

    unknown = sorted(set(values) - set(Settings.model_fields))
    if unknown:
        raise UnknownConfigKey(f"Chaves desconhecidas na configuração: {', '.join(unknown)}")

    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return Settings(**values)
    except ValidationError as e:
        raise InvalidConfig(f"Configuração inválida: {e}") from e
