"""
Cohort Service - rotulagem por AHI e manifesto da coorte (EDF + XML por sujeito)
"""
import logging
import os
from typing import Dict, List, Optional, Sequence

from app.core.exceptions import DataError, NegativeAhi
from app.core.utils import read_jsonl, write_jsonl
from app.models.signals import SeverityLabel, SubjectRecord
from app.services.annotation_service import read_annotations_file, write_annotations
from app.services.edf_service import (
    header_for_traces,
    read_edf_file,
    select_channel,
    write_edf_file,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"


def label_subject(
    ahi: float,
    normal_low: float = 2.0,
    normal_high: float = 5.0,
    severe_above: float = 35.0,
) -> SeverityLabel:
    """Normal se 2 <= AHI <= 5 (inclusivo); Severe se AHI > 35; senão Excluded"""
    if ahi < 0:
        raise NegativeAhi(f"AHI negativo: {ahi}")
    if normal_low <= ahi <= normal_high:
        return SeverityLabel.NORMAL
    if ahi > severe_above:
        return SeverityLabel.SEVERE
    return SeverityLabel.EXCLUDED


def save_record(record: SubjectRecord, out_dir: str, cohort_seed: Optional[int] = None) -> Dict:
    """
    Grava EDF + XML do sujeito e devolve a linha do manifesto. `seed` é a semente do
    sujeito (subject_config(label, seed, subject_id, ...) o regenera); `cohort_seed` a da coorte.
    """
    os.makedirs(out_dir, exist_ok=True)
    edf_path = os.path.join(out_dir, f"{record.subject_id}.edf")
    xml_path = os.path.join(out_dir, f"{record.subject_id}.xml")

    header = header_for_traces(
        [record.ecg], patient_id=record.subject_id, recording_id="synthetic"
    )
    write_edf_file(edf_path, header, [record.ecg])
    with open(xml_path, "w", encoding="utf-8") as f:
        f.write(write_annotations(record.events))

    return {
        "subject_id": record.subject_id,
        "label": record.label.value,
        "ahi": record.ahi,
        "edf_path": os.path.basename(edf_path),
        "xml_path": os.path.basename(xml_path),
        "seed": record.seed,
        "cohort_seed": cohort_seed,
        "duration": len(record.ecg.samples) / record.ecg.sampling_rate,
        "sampling_rate": record.ecg.sampling_rate,
    }


def write_manifest(out_dir: str, rows: Sequence[Dict]) -> str:
    path = os.path.join(out_dir, MANIFEST_NAME)
    write_jsonl(path, rows)
    logger.info(f"Manifesto gravado: {path} ({len(rows)} sujeitos)")
    return path


def read_manifest(path: str) -> List[Dict]:
    """Lê o manifesto; caminhos relativos passam a ser relativos ao diretório do manifesto"""
    if os.path.isdir(path):
        path = os.path.join(path, MANIFEST_NAME)
    if not os.path.exists(path):
        raise DataError(f"Manifesto da coorte não encontrado: {path}")
    base = os.path.dirname(os.path.abspath(path))
    rows = read_jsonl(path)
    for row in rows:
        for key in ("edf_path", "xml_path"):
            if not os.path.isabs(row[key]):
                row[key] = os.path.join(base, row[key])
    return rows


def load_record(
    row: Dict,
    channel: str = "ECG",
    name_patterns: Sequence[str] = ("apnea", "hypopnea"),
    thresholds: Optional[Dict[str, float]] = None,
) -> SubjectRecord:
    """Monta o SubjectRecord de uma linha do manifesto (canal ECG configurável)"""
    _, traces = read_edf_file(row["edf_path"])
    ecg = select_channel(traces, channel)
    events = read_annotations_file(row["xml_path"], name_patterns)
    ahi = float(row["ahi"])
    return SubjectRecord(
        subject_id=str(row["subject_id"]),
        ecg=ecg,
        events=events,
        ahi=ahi,
        label=label_subject(ahi, **(thresholds or {})),
    )
