"""
Testes da API de leitura das execuções
"""
import os

import pytest
from fastapi.testclient import TestClient

from app.core.exceptions import RunNotFound
from app.main import app
from app.models.evaluation import MetricsRow
from app.services import run_store
from app.services.metrics_service import build_report, render_report

client = TestClient(app)


@pytest.fixture
def runs_dir(tmp_path, monkeypatch):
    rows = lambda accs: [MetricsRow(accuracy=a, sensitivity=a, specificity=a, f_score=a) for a in accs]  # noqa: E731
    table = build_report({"SVM": rows([55.0, 58.0, 54.0]), "DL": rows([80.0, 79.0, 83.0])})
    rendered = render_report(table)
    run_store.save_report(str(tmp_path / "done"), table, rendered.text, rendered.csv, rendered.boxplot)
    run_store.mark_failed(str(tmp_path / "broken"), RuntimeError("boom"), [1])
    (tmp_path / "empty").mkdir()
    monkeypatch.setattr(run_store, "OSA_RUNS_DIR", str(tmp_path))
    return tmp_path


def test_health_and_root():
    assert client.get("/api/health").json()["status"] == "ok"
    assert client.get("/").json()["endpoints"]["published"] == "/api/published"


def test_list_runs(runs_dir):
    runs = client.get("/api/runs").json()["runs"]
    assert runs == [
        {"run_id": "broken", "status": "failed"},
        {"run_id": "done", "status": "complete"},
        {"run_id": "empty", "status": "incomplete"},
    ]


def test_report_and_boxplot(runs_dir):
    response = client.get("/api/runs/done/report")
    assert response.status_code == 200
    body = response.json()
    assert body["report"]["classifiers"] == ["SVM", "DL"]
    assert body["report"]["aggregates"]["DL"]["mean"]["accuracy"] == pytest.approx(80.6667, abs=1e-3)
    assert "Paired t-test" in body["text"]

    boxplot = client.get("/api/runs/done/boxplot").json()["boxplot"]
    assert boxplot["SVM"]["median"] == 55.0


def test_missing_run_is_404(runs_dir):
    assert client.get("/api/runs/nope/report").status_code == 404
    assert client.get("/api/runs/empty/report").status_code == 404
    assert client.get("/api/runs/broken/boxplot").status_code == 404


def test_published():
    body = client.get("/api/published").json()
    assert len(body["checks"]) == 20
    assert body["report"]["t_test"]["df"] == 9
    assert set(body["boxplot"]) == {"SVM", "DL"}


def test_runs_outside_the_runs_dir_are_not_served(runs_dir, tmp_path_factory, monkeypatch):
    outside = tmp_path_factory.mktemp("outside")
    rows = [MetricsRow(accuracy=a, sensitivity=a, specificity=a, f_score=a) for a in (60.0, 62.0)]
    table = build_report({"SVM": rows})
    rendered = render_report(table)
    run_store.save_report(str(outside / "elsewhere"), table, rendered.text, rendered.csv, rendered.boxplot)
    monkeypatch.chdir(outside)
    (runs_dir / "link").symlink_to(outside / "elsewhere")

    assert client.get("/api/runs/elsewhere/report").status_code == 404
    assert client.get("/api/runs/link/report").status_code == 404
    assert client.get("/api/runs/%2E%2E/boxplot").status_code == 404
    for run_id in ("..", ".", "done/../..", ""):
        with pytest.raises(RunNotFound):
            run_store.resolve_run_id(run_id)
    assert run_store.resolve_run_id("done") == os.path.realpath(str(runs_dir / "done"))
