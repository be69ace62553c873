"""
Testes da tabela publicada: agregados, teste t e recomposição das linhas
"""
import pytest

from app.core.published_results import PUBLISHED_ACCURACY_SD, PUBLISHED_MEANS, PUBLISHED_T_STATISTIC
from app.services.metrics_service import (
    METRICS,
    aggregate,
    check_published_rows,
    five_number_summary,
    paired_t_test,
    published_rows,
)
from app.use_cases.reproduce_published import ReproducePublishedUseCase


def test_published_means_and_sd():
    rows = published_rows()
    svm, dl = aggregate(rows["SVM"]), aggregate(rows["DL"])
    assert svm.mean["accuracy"] == pytest.approx(55.935, abs=1e-3)
    assert svm.sd["accuracy"] == pytest.approx(2.6284, abs=1e-3)
    assert dl.mean["accuracy"] == pytest.approx(79.45, abs=1e-3)
    assert dl.sd["accuracy"] == pytest.approx(3.2952, abs=1e-3)
    for name, result in (("SVM", svm), ("DL", dl)):
        assert result.sd["accuracy"] == pytest.approx(PUBLISHED_ACCURACY_SD[name], abs=0.01)
        for metric in METRICS:
            assert result.mean[metric] == pytest.approx(PUBLISHED_MEANS[name][metric], abs=0.01)


def test_paired_t_on_published_accuracies():
    rows = published_rows()
    result = paired_t_test([r.accuracy for r in rows["DL"]], [r.accuracy for r in rows["SVM"]])
    assert result.t == pytest.approx(31.4518, abs=1e-3)
    assert result.df == 9
    # o valor impresso é o crítico (df=10, p=0,05), não a estatística
    assert result.t > PUBLISHED_T_STATISTIC


def test_published_rows_recompose_from_class_sizes():
    checks = check_published_rows()
    assert len(checks) == 20
    inconsistent = {(c.classifier, c.fold): c for c in checks if not c.consistent}
    assert set(inconsistent) == {("DL", 4), ("DL", 5)}

    # fold 4: acurácia impressa 82,00, matriz dá 81,00 (o F confere)
    fold4 = inconsistent[("DL", 4)]
    assert fold4.recomputed.accuracy == pytest.approx(81.0)
    assert fold4.recomputed.f_score == pytest.approx(80.21, abs=0.01)
    assert fold4.implied_sensitivity is None

    # fold 5: sensibilidade impressa 75,00; acurácia e F implicam 85,00
    fold5 = inconsistent[("DL", 5)]
    assert fold5.implied_sensitivity == pytest.approx(85.0)

    svm3 = next(c for c in checks if c.classifier == "SVM" and c.fold == 3)
    assert (svm3.confusion.tp, svm3.confusion.fn, svm3.confusion.tn, svm3.confusion.fp) == (48, 51, 69, 31)


def test_reproduce_published_use_case():
    result = ReproducePublishedUseCase().execute()
    assert result["status"] == "ok"
    text = result["text"]
    assert text.count("MISMATCH") == 2
    assert "sensitivity implied by acc and F: 85.00" in text
    assert "t(9) = 31.4518" in text
    assert set(result["boxplot"]) == {"SVM", "DL"}
    assert result["boxplot"]["DL"].max == 82.5


def test_published_boxplot_extremes():
    rows = published_rows()
    dl = five_number_summary([r.accuracy for r in rows["DL"]])
    svm = five_number_summary([r.accuracy for r in rows["SVM"]])
    assert (dl.min, dl.max) == (73.5, 82.5)
    assert (svm.min, svm.max) == (49.5, 59.0)
    result = paired_t_test([r.accuracy for r in rows["DL"]], [r.accuracy for r in rows["SVM"]])
    assert 30.0 <= result.t <= 33.0 and result.p_two_tailed < 1e-6
