"""
Synthesize Cohort Use Case
"""
import logging

from app.services.cohort_service import save_record, write_manifest
from app.services.synth_service import generate_synthetic_cohort

logger = logging.getLogger(__name__)


class SynthesizeCohortUseCase:
    """Use case para gerar uma coorte sintética (EDF + XML + manifesto)"""

    def execute(
        self,
        out_dir: str,
        n_normal: int,
        n_severe: int,
        seed: int = 0,
        duration: float = 1200.0,
        sampling_rate: float = 512.0,
        workers: int = 1,
    ) -> dict:
        """
        Returns:
            dict: {"status": "ok", "subjects": int, "manifest": str}
        """
        records = generate_synthetic_cohort(n_normal, n_severe, seed, duration, sampling_rate, workers)
        rows = [save_record(record, out_dir, seed) for record in records]
        manifest = write_manifest(out_dir, rows)
        events = sum(len(record.events) for record in records)
        logger.info(f"{len(records)} sujeitos e {events} eventos gravados em {out_dir}")
        return {"status": "ok", "subjects": len(records), "events": events, "manifest": manifest}
