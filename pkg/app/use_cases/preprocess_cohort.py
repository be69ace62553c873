"""
Preprocess Cohort Use Case
"""
import logging
import os

from app.core.config import Settings
from app.core.utils import write_jsonl
from app.models.signals import SeverityLabel, SignalTrace
from app.services.cohort_service import load_record, read_manifest
from app.services.filter_service import extract_event_windows_report, preprocess_ecg
from app.services.window_store import write_window_store

logger = logging.getLogger(__name__)

WINDOWS_FILE = "windows.bin"
SKIPPED_FILE = "skipped.jsonl"


class PreprocessCohortUseCase:
    """Use case para filtrar o ECG de cada sujeito e extrair as janelas de evento"""

    def __init__(self, settings: Settings):
        self.settings = settings

    def execute(self, cohort_path: str, out_dir: str) -> dict:
        """
        Lê o manifesto da coorte, ignora sujeitos Excluded, aplica notch + passa-banda
        e grava as janelas de 15 s num único arquivo binário.

        Returns:
            dict: {"status": "ok", "windows": int, "skipped": int, "store": str, "by_label": dict}
        """
        s = self.settings
        thresholds = {
            "normal_low": s.ahi_normal_low,
            "normal_high": s.ahi_normal_high,
            "severe_above": s.ahi_severe_above,
        }
        windows = []
        skipped = []
        excluded = 0

        for row in read_manifest(cohort_path):
            record = load_record(row, s.ecg_channel, s.event_patterns, thresholds)
            if record.label is SeverityLabel.EXCLUDED:
                excluded += 1
                logger.info(f"Sujeito {record.subject_id} excluído (AHI={record.ahi})")
                continue

            filtered = preprocess_ecg(
                record.ecg.samples,
                record.ecg.sampling_rate,
                notch_frequency=s.notch_frequency,
                notch_q=s.notch_q,
                bandpass_low=s.bandpass_low,
                bandpass_high=s.bandpass_high,
                bandpass_order=s.bandpass_order,
                zero_phase=s.zero_phase,
            )
            record = record.model_copy(update={
                "ecg": SignalTrace(samples=filtered, sampling_rate=record.ecg.sampling_rate, label=record.ecg.label)
            })
            report = extract_event_windows_report(
                record,
                min_duration=s.event_min_duration,
                max_duration=s.event_max_duration,
                segment_seconds=s.segment_seconds,
                window_seconds=s.window_seconds,
            )
            windows.extend(report.windows)
            skipped.extend(report.skipped)

        store = os.path.join(out_dir, WINDOWS_FILE)
        write_window_store(store, windows)
        write_jsonl(os.path.join(out_dir, SKIPPED_FILE), [
            {"subject_id": item.subject_id, "start": item.event.start, "duration": item.event.duration, "reason": item.reason}
            for item in skipped
        ])

        by_label = {label.value: sum(1 for w in windows if w.label is label)
                    for label in (SeverityLabel.NORMAL, SeverityLabel.SEVERE)}
        logger.info(f"Janelas: {by_label}, eventos descartados: {len(skipped)}, sujeitos excluídos: {excluded}")
        return {
            "status": "ok",
            "windows": len(windows),
            "skipped": len(skipped),
            "excluded_subjects": excluded,
            "by_label": by_label,
            "store": store,
        }
