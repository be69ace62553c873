"""
Runs Router - leitura dos diretórios de execução
"""
import logging

from fastapi import APIRouter, HTTPException

from app.core.exceptions import RunNotFound
from app.services import run_store
from app.use_cases.render_report import RenderReportUseCase
from app.use_cases.reproduce_published import ReproducePublishedUseCase

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api", tags=["runs"])

render_report_uc = RenderReportUseCase()
reproduce_published_uc = ReproducePublishedUseCase()


@router.get("/health")
def health():
    """Health check endpoint"""
    return {"status": "ok", "service": "osakit"}


@router.get("/runs")
def list_runs():
    """Execuções em OSA_RUNS_DIR com o seu estado"""
    return {"runs": run_store.list_runs()}


@router.get("/runs/{run_id}/report")
def get_report(run_id: str):
    """Tabela por fold, agregados e teste t de uma execução concluída"""
    try:
        run_dir = run_store.resolve_run_id(run_id)
        table = run_store.load_report(run_dir)
    except RunNotFound as e:
        raise HTTPException(status_code=404, detail=str(e))
    return {"run_id": run_id, "report": table.model_dump(), "text": render_report_uc.execute(run_dir)["text"]}


@router.get("/runs/{run_id}/boxplot")
def get_boxplot(run_id: str):
    """Resumos de cinco números das acurácias por classificador"""
    try:
        summaries = run_store.load_boxplot(run_store.resolve_run_id(run_id))
    except RunNotFound as e:
        raise HTTPException(status_code=404, detail=str(e))
    return {"run_id": run_id, "boxplot": {name: s.model_dump() for name, s in summaries.items()}}


@router.get("/published")
def get_published():
    """Tabela publicada recomposta"""
    result = reproduce_published_uc.execute()
    return {
        "report": result["report"].model_dump(),
        "boxplot": {name: s.model_dump() for name, s in result["boxplot"].items()},
        "checks": [check.model_dump() for check in result["checks"]],
    }
