"""
Extract Features Use Case
"""
import logging
import os

from app.core.config import Settings
from app.core.utils import write_jsonl
from app.services.hrv_service import extract_features, write_feature_table
from app.services.window_store import read_window_store

logger = logging.getLogger(__name__)


class ExtractFeaturesUseCase:
    """Use case para calcular o vetor de 9 features HRV/EDR de cada janela"""

    def __init__(self, settings: Settings):
        self.settings = settings

    def execute(self, windows_path: str, out_path: str) -> dict:
        """
        Returns:
            dict: {"status": "ok", "rows": int, "rejected": int, "table": str}
        """
        windows = read_window_store(windows_path)
        rows, rejected = extract_features(
            windows, self.settings.pnn50_absolute, **self.settings.detector_settings()
        )
        os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
        write_feature_table(out_path, rows)
        rejected_path = os.path.splitext(out_path)[0] + ".rejected.jsonl"
        write_jsonl(rejected_path, [{"window_id": wid, "reason": reason} for wid, reason in rejected])
        logger.info(f"Features: {len(rows)} janelas, {len(rejected)} rejeitadas")
        return {"status": "ok", "rows": len(rows), "rejected": len(rejected), "table": out_path}
