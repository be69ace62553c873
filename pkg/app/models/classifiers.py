"""
Classifier Models: SVM baseline and CNN-LSTM-DNN configuration
"""
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

SVM_FORMAT_VERSION = 1


class Standardizer(BaseModel):
    """Média/desvio por feature do treino; features de variância nula são descartadas"""
    feature_names: List[str]
    keep: List[bool]
    mean: List[float]
    scale: List[float]


class SvmModel(BaseModel):
    """Modelo SVM serializável (JSON versionado)"""
    format_version: int = SVM_FORMAT_VERSION
    kernel: str
    C: float
    gamma: Optional[float] = None
    tol: float = 1e-3
    support_vectors: List[List[float]]
    dual_coef: List[float]  # alpha_i * y_i
    bias: float
    standardizer: Optional[Standardizer] = None


class ModelConfig(BaseModel):
    """Hiperparâmetros da rede CNN -> LSTM -> DNN -> softmax"""
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
    seed: int = 0
    dtype: str = "float64"
    bn_momentum: float = 0.99
    bn_epsilon: float = 1e-3

    @field_validator("conv_units", "lstm_units", "dense_units")
    @classmethod
    def _positive_units(cls, value: List[int]) -> List[int]:
        if not value or any(unit <= 0 for unit in value):
            raise ValueError("número de unidades deve ser positivo")
        return value

    @field_validator("recurrent_dropout", "inter_lstm_dropout")
    @classmethod
    def _rate(cls, value: float) -> float:
        if not 0.0 <= value < 1.0:
            raise ValueError("dropout deve estar em [0, 1)")
        return value
