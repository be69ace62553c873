"""
Main FastAPI Application
"""
import logging
from fastapi import FastAPI
from app.core.utils import configure_logging
from app.routers import runs

configure_logging()
logger = logging.getLogger(__name__)

app = FastAPI(
    title="osakit",
    version="1.0.0",
    description="Leitura das execuções de validação cruzada (SVM vs CNN-LSTM) de severidade de apneia"
)

app.include_router(runs.router)


@app.get("/")
def root():
    return {
        "status": "online",
        "version": "1.0.0",
        "endpoints": {
            "health": "/api/health",
            "runs": "/api/runs",
            "report": "/api/runs/{run_id}/report",
            "boxplot": "/api/runs/{run_id}/boxplot",
            "published": "/api/published"
        }
    }
