"""
Evaluation Models: folds, confusion matrices, metrics, report table
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class FoldPlan(BaseModel):
    """Partição treino/validação/teste de um fold"""
    fold_index: int
    test_ids: List[str]
    val_ids: List[str]
    train_ids: List[str]


class ConfusionMatrix(BaseModel):
    """Matriz de confusão, Severe = classe positiva"""
    tp: int = 0
    fn: int = 0
    tn: int = 0
    fp: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.tn + self.fp


class MetricsRow(BaseModel):
    """Métricas de um fold, em %"""
    accuracy: float
    sensitivity: float
    specificity: float
    f_score: float
    f_score_defined: bool = True


class Aggregate(BaseModel):
    """Média e desvio padrão amostral por métrica"""
    mean: Dict[str, float]
    sd: Dict[str, float]


class TTestResult(BaseModel):
    """Teste t pareado"""
    t: float
    df: int
    p_two_tailed: float


class FiveNumberSummary(BaseModel):
    """Resumo para boxplot"""
    min: float
    q1: float
    median: float
    q3: float
    max: float


class ReportTable(BaseModel):
    """Tabela por fold de cada classificador + agregados + teste t"""
    classifiers: List[str]
    folds: Dict[str, List[MetricsRow]] = Field(default_factory=dict)
    aggregates: Dict[str, Aggregate] = Field(default_factory=dict)
    t_test: Optional[TTestResult] = None
