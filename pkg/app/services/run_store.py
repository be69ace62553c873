"""
Run Store - diretórios de execução: planos de fold, artefatos, relatório e marcador de falha
"""
import json
import logging
import os
from typing import Any, Dict, List, Optional

from app.core.config import OSA_RUNS_DIR
from app.core.exceptions import RunNotFound
from app.models.evaluation import FiveNumberSummary, ReportTable

logger = logging.getLogger(__name__)

REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"
REPORT_CSV = "report.csv"
BOXPLOT_JSON = "boxplot.json"
FAILED_MARKER = "FAILED.json"


def write_json(path: str, data: Any):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=1, sort_keys=True)
        f.write("\n")


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def fold_dir(run_dir: str, fold_index: int) -> str:
    path = os.path.join(run_dir, "folds", f"fold_{fold_index:02d}")
    os.makedirs(path, exist_ok=True)
    return path


def resolve_run(run: str, runs_dir: Optional[str] = None) -> str:
    """Aceita um caminho ou o nome de uma execução dentro de OSA_RUNS_DIR"""
    candidates = [run, os.path.join(runs_dir or OSA_RUNS_DIR, run)]
    for path in candidates:
        if os.path.isdir(path):
            return path
    raise RunNotFound(f"Execução não encontrada: {run}")


def resolve_run_id(run_id: str, runs_dir: Optional[str] = None) -> str:
    """Só nomes simples, sempre dentro de OSA_RUNS_DIR (entrada vinda da API)"""
    if not run_id or run_id in (".", "..") or "/" in run_id or "\\" in run_id or os.sep in run_id:
        raise RunNotFound(f"Identificador de execução inválido: {run_id!r}")
    base = os.path.realpath(runs_dir or OSA_RUNS_DIR)
    path = os.path.realpath(os.path.join(base, run_id))
    if os.path.dirname(path) != base or not os.path.isdir(path):
        raise RunNotFound(f"Execução não encontrada: {run_id}")
    return path


def run_status(run_dir: str) -> str:
    if os.path.exists(os.path.join(run_dir, FAILED_MARKER)):
        return "failed"
    if os.path.exists(os.path.join(run_dir, REPORT_JSON)):
        return "complete"
    return "incomplete"


def list_runs(runs_dir: Optional[str] = None) -> List[Dict[str, str]]:
    """Execuções (subdiretórios) com o seu estado, em ordem alfabética"""
    base = runs_dir or OSA_RUNS_DIR
    if not os.path.isdir(base):
        return []
    runs = []
    for name in sorted(os.listdir(base)):
        path = os.path.join(base, name)
        if os.path.isdir(path):
            runs.append({"run_id": name, "status": run_status(path)})
    return runs


def save_report(run_dir: str, table: ReportTable, text: str, csv: str, boxplot: Dict[str, FiveNumberSummary]):
    write_json(os.path.join(run_dir, REPORT_JSON), table.model_dump())
    with open(os.path.join(run_dir, REPORT_TEXT), "w", encoding="utf-8") as f:
        f.write(text)
    with open(os.path.join(run_dir, REPORT_CSV), "w", encoding="utf-8") as f:
        f.write(csv)
    write_json(os.path.join(run_dir, BOXPLOT_JSON), {name: s.model_dump() for name, s in boxplot.items()})
    logger.info(f"Relatório gravado em {run_dir}")


def load_report(run_dir: str) -> ReportTable:
    path = os.path.join(run_dir, REPORT_JSON)
    if not os.path.exists(path):
        raise RunNotFound(f"Execução sem relatório: {run_dir}")
    return ReportTable(**read_json(path))


def load_boxplot(run_dir: str) -> Dict[str, FiveNumberSummary]:
    path = os.path.join(run_dir, BOXPLOT_JSON)
    if not os.path.exists(path):
        raise RunNotFound(f"Execução sem dados de boxplot: {run_dir}")
    return {name: FiveNumberSummary(**data) for name, data in read_json(path).items()}


def mark_failed(run_dir: str, error: Exception, completed_folds: List[int]):
    """Grava FAILED.json; os artefatos dos folds concluídos permanecem"""
    write_json(os.path.join(run_dir, FAILED_MARKER), {
        "error": type(error).__name__,
        "message": str(error),
        "exit_code": getattr(error, "exit_code", None),
        "completed_folds": sorted(completed_folds),
    })
