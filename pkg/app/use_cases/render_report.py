"""
Render Report Use Case
"""
from typing import Optional

from app.services import run_store
from app.services.metrics_service import render_report


class RenderReportUseCase:
    """Use case para reler o relatório de uma execução concluída"""

    def execute(self, run: str, runs_dir: Optional[str] = None) -> dict:
        """
        Returns:
            dict: {"status": "ok", "run_dir": str, "text": str, "csv": str, "boxplot": dict}
        """
        run_dir = run_store.resolve_run(run, runs_dir)
        rendered = render_report(run_store.load_report(run_dir))
        return {
            "status": "ok",
            "run_dir": run_dir,
            "text": rendered.text,
            "csv": rendered.csv,
            "boxplot": {name: s.model_dump() for name, s in rendered.boxplot.items()},
        }
