"""
Metrics Service - matriz de confusão, métricas por fold, agregados, teste t pareado e relatório
"""
import io
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy import stats

from app.core.exceptions import DegenerateVariance, EmptyClass, IncompleteTable, LengthMismatch, TooFewRows
from app.core.published_results import PUBLISHED_FOLDS, PUBLISHED_NEGATIVES
from app.models.evaluation import (
    Aggregate,
    ConfusionMatrix,
    FiveNumberSummary,
    MetricsRow,
    ReportTable,
    TTestResult,
)
from app.models.signals import SeverityLabel

logger = logging.getLogger(__name__)

METRICS = ["accuracy", "sensitivity", "specificity", "f_score"]
METRIC_TITLES = {"accuracy": "Acc.", "sensitivity": "Sensitivity", "specificity": "Specificity", "f_score": "F-score"}


def confusion_from_predictions(truth: Sequence[SeverityLabel], predicted: Sequence[SeverityLabel]) -> ConfusionMatrix:
    """Severe = classe positiva"""
    if len(truth) != len(predicted):
        raise LengthMismatch(f"{len(truth)} rótulos e {len(predicted)} predições")
    cm = ConfusionMatrix()
    for t, p in zip(truth, predicted):
        if t == SeverityLabel.SEVERE:
            if p == SeverityLabel.SEVERE:
                cm.tp += 1
            else:
                cm.fn += 1
        elif p == SeverityLabel.SEVERE:
            cm.fp += 1
        else:
            cm.tn += 1
    return cm


def confusion_from_rates(sensitivity: float, specificity: float, n_pos: int, n_neg: int) -> ConfusionMatrix:
    """Reconstrói a matriz a partir de sensibilidade/especificidade (%) e tamanhos das classes"""
    tp = int(round(sensitivity * n_pos / 100.0))
    tn = int(round(specificity * n_neg / 100.0))
    return ConfusionMatrix(tp=tp, fn=n_pos - tp, tn=tn, fp=n_neg - tn)


def metrics_from_confusion(cm: ConfusionMatrix) -> MetricsRow:
    """
    acc = (tp+tn)/total; sens = tp/(tp+fn); spec = tn/(tn+fp);
    F = média harmônica de precisão e sensibilidade. Tudo em %.
    Sem predições positivas (tp+fp = 0) o F é reportado como 0 e marcado como indefinido.
    """
    if cm.tp + cm.fn == 0 or cm.tn + cm.fp == 0:
        raise EmptyClass(f"Classe vazia na matriz de confusão: {cm.model_dump()}")
    sensitivity = cm.tp / (cm.tp + cm.fn)
    specificity = cm.tn / (cm.tn + cm.fp)
    accuracy = (cm.tp + cm.tn) / cm.total

    f_defined = cm.tp + cm.fp > 0
    f_score = 0.0
    if f_defined:
        precision = cm.tp / (cm.tp + cm.fp)
        if precision + sensitivity > 0:
            f_score = 2.0 * precision * sensitivity / (precision + sensitivity)
    else:
        logger.warning("F-score indefinido (nenhuma predição positiva), reportado como 0")

    return MetricsRow(
        accuracy=100.0 * accuracy,
        sensitivity=100.0 * sensitivity,
        specificity=100.0 * specificity,
        f_score=100.0 * f_score,
        f_score_defined=f_defined,
    )


def aggregate(rows: Sequence[MetricsRow]) -> Aggregate:
    """Média aritmética e desvio padrão amostral (n-1) de cada métrica"""
    if len(rows) < 2:
        raise TooFewRows(f"Agregação exige pelo menos 2 linhas, recebidas {len(rows)}")
    frame = pd.DataFrame([row.model_dump(include=set(METRICS)) for row in rows], columns=METRICS)
    return Aggregate(
        mean={key: float(value) for key, value in frame.mean().items()},
        sd={key: float(value) for key, value in frame.std(ddof=1).items()},
    )


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """t = média(d) / (sd(d)/√n), df = n-1, p bicaudal pela distribuição t"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"Amostras com tamanhos {a.size} e {b.size}")
    if a.size < 2:
        raise TooFewRows("Teste t pareado exige pelo menos 2 pares")
    d = a - b
    # diferenças constantes com ruído de arredondamento também contam
    if np.std(d) <= 1e-12 * max(1.0, float(np.abs(d).max())):
        raise DegenerateVariance("Diferenças pareadas com variância nula")
    result = stats.ttest_rel(a, b)
    return TTestResult(t=float(result.statistic), df=int(a.size - 1), p_two_tailed=float(result.pvalue))


def five_number_summary(values: Sequence[float]) -> FiveNumberSummary:
    """min, Q1, mediana, Q3, max (quartis por interpolação linear)"""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise TooFewRows("Resumo de cinco números de uma lista vazia")
    q1, median, q3 = np.percentile(values, [25, 50, 75], method="linear")
    return FiveNumberSummary(
        min=float(values.min()), q1=float(q1), median=float(median), q3=float(q3), max=float(values.max())
    )


def build_report(folds: Dict[str, List[MetricsRow]], compare: Tuple[str, str] = ("DL", "SVM")) -> ReportTable:
    """Monta a tabela: linhas por fold, média/SD (com 2+ folds) e teste t das acurácias"""
    table = ReportTable(classifiers=list(folds), folds={name: list(rows) for name, rows in folds.items()})
    for name, rows in folds.items():
        if len(rows) >= 2:
            table.aggregates[name] = aggregate(rows)

    first, second = compare
    if first in folds and second in folds and len(folds[first]) == len(folds[second]) >= 2:
        try:
            table.t_test = paired_t_test(
                [row.accuracy for row in folds[first]], [row.accuracy for row in folds[second]]
            )
        except DegenerateVariance:
            logger.warning("Teste t não calculado: diferenças de acurácia constantes")
    return table


class RenderedReport(BaseModel):
    """Saídas de render_report"""
    text: str
    csv: str
    boxplot: Dict[str, FiveNumberSummary]


def _check_complete(table: ReportTable):
    if not table.classifiers:
        raise IncompleteTable("Relatório sem classificadores")
    sizes = set()
    for name in table.classifiers:
        rows = table.folds.get(name)
        if not rows:
            raise IncompleteTable(f"Sem linhas por fold para {name}")
        sizes.add(len(rows))
    if len(sizes) != 1:
        raise IncompleteTable(f"Número de folds diferente entre classificadores: {sorted(sizes)}")


def _text_table(table: ReportTable) -> str:
    names = table.classifiers
    cell = 8
    header_top = "K".rjust(4) + "".join(f" | {METRIC_TITLES[m]:^{cell * len(names) + len(names) - 1}}" for m in METRICS)
    header_sub = " " * 4 + "".join(" | " + " ".join(f"{n:>{cell}}" for n in names) for _ in METRICS)
    lines = [header_top, header_sub, "-" * len(header_sub)]

    def row_line(label: str, values: Dict[str, Dict[str, float]]) -> str:
        return label.rjust(4) + "".join(
            " | " + " ".join(f"{values[n][m]:>{cell}.2f}" for n in names) for m in METRICS
        )

    for i in range(len(table.folds[names[0]])):
        lines.append(row_line(str(i + 1), {n: table.folds[n][i].model_dump() for n in names}))
    if all(n in table.aggregates for n in names):
        lines.append("-" * len(header_sub))
        lines.append(row_line("Mean", {n: table.aggregates[n].mean for n in names}))
        lines.append(row_line("SD", {n: table.aggregates[n].sd for n in names}))
    if table.t_test is not None:
        t = table.t_test
        lines.append("")
        lines.append(f"Paired t-test (accuracy): t({t.df}) = {t.t:.4f}, p = {t.p_two_tailed:.3e}")
    return "\n".join(lines) + "\n"


def _csv_table(table: ReportTable) -> str:
    records = []
    for name in table.classifiers:
        for i, row in enumerate(table.folds[name]):
            records.append({"classifier": name, "fold": str(i + 1), **row.model_dump(include=set(METRICS))})
        if name in table.aggregates:
            records.append({"classifier": name, "fold": "mean", **table.aggregates[name].mean})
            records.append({"classifier": name, "fold": "sd", **table.aggregates[name].sd})
    buffer = io.StringIO()
    pd.DataFrame(records, columns=["classifier", "fold"] + METRICS).to_csv(
        buffer, index=False, float_format="%.4f", lineterminator="\n"
    )
    return buffer.getvalue()


def render_report(table: ReportTable) -> RenderedReport:
    """Tabela em texto no layout por fold, CSV e resumos de boxplot das acurácias"""
    _check_complete(table)
    return RenderedReport(
        text=_text_table(table),
        csv=_csv_table(table),
        boxplot={name: five_number_summary([row.accuracy for row in table.folds[name]]) for name in table.classifiers},
    )


# --- TABELA PUBLICADA ---
class PublishedRowCheck(BaseModel):
    """Linha publicada vs. recomposição a partir da matriz de confusão"""
    classifier: str
    fold: int
    published: MetricsRow
    recomputed: MetricsRow
    confusion: ConfusionMatrix
    consistent: bool
    implied_sensitivity: Optional[float] = None


def published_rows() -> Dict[str, List[MetricsRow]]:
    """Linhas por fold exatamente como impressas"""
    return {
        name: [MetricsRow(accuracy=a, sensitivity=s, specificity=p, f_score=f) for a, s, p, f, _ in rows]
        for name, rows in PUBLISHED_FOLDS.items()
    }


def check_published_rows(tolerance: float = 0.01) -> List[PublishedRowCheck]:
    """
    Para cada linha publicada, reconstrói a matriz de (sens, spec, n_pos, n_neg) e recalcula
    acc e F. Linhas inconsistentes recebem a sensibilidade implicada pela acurácia e especificidade.
    """
    checks = []
    for name, rows in PUBLISHED_FOLDS.items():
        for fold, (acc, sens, spec, f_score, n_pos) in enumerate(rows, start=1):
            cm = confusion_from_rates(sens, spec, n_pos, PUBLISHED_NEGATIVES)
            recomputed = metrics_from_confusion(cm)
            consistent = (
                abs(round(recomputed.accuracy, 2) - acc) <= tolerance
                and abs(round(recomputed.f_score, 2) - f_score) <= tolerance
            )
            implied = None
            if not consistent:
                tn = int(round(spec * PUBLISHED_NEGATIVES / 100.0))
                tp = int(round(acc * (n_pos + PUBLISHED_NEGATIVES) / 100.0)) - tn
                candidate = metrics_from_confusion(
                    ConfusionMatrix(tp=tp, fn=n_pos - tp, tn=tn, fp=PUBLISHED_NEGATIVES - tn)
                )
                # só vale se a sensibilidade implicada também recompõe o F publicado
                if abs(round(candidate.f_score, 2) - f_score) <= tolerance:
                    implied = 100.0 * tp / n_pos
                logger.warning(f"{name} fold {fold}: linha publicada inconsistente (sensibilidade implicada {implied})")
            checks.append(PublishedRowCheck(
                classifier=name,
                fold=fold,
                published=MetricsRow(accuracy=acc, sensitivity=sens, specificity=spec, f_score=f_score),
                recomputed=recomputed,
                confusion=cm,
                consistent=consistent,
                implied_sensitivity=implied,
            ))
    return checks
