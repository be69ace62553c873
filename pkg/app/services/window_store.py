"""
Window Store - um binário por coorte com as janelas (float32) + índice JSON

Layout (little-endian), versão 1:
  cabeçalho: b"OSAWIN" | u16 versão | u32 n_janelas | u32 amostras por janela | f64 fs
  por janela: u16 len + subject_id | u16 len + window_id | u8 rótulo (0 Normal, 1 Severe)
              | f64 início | f64 duração | amostras float32
"""
import json
import logging
import os
import struct
from typing import Dict, List, Sequence, Tuple

import numpy as np

from app.core.exceptions import DataError, MalformedHeader, TruncatedData
from app.models.signals import EventAnnotation, SeverityLabel
from app.models.windows import EventWindow

logger = logging.getLogger(__name__)

MAGIC = b"OSAWIN"
STORE_VERSION = 1
_HEAD = struct.Struct("<6sHIId")
_EVENT = struct.Struct("<Bdd")
_LABEL_CODES = {SeverityLabel.NORMAL: 0, SeverityLabel.SEVERE: 1}
_CODE_LABELS = {code: label for label, code in _LABEL_CODES.items()}


def _pack_text(text: str) -> bytes:
    raw = text.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def _unpack_text(buf: bytes, offset: int) -> Tuple[str, int]:
    (size,) = struct.unpack_from("<H", buf, offset)
    offset += 2
    return buf[offset:offset + size].decode("utf-8"), offset + size


def index_path(path: str) -> str:
    return os.path.splitext(path)[0] + ".json"


def write_window_store(path: str, windows: Sequence[EventWindow], source_event_name: str = "") -> Dict:
    """Grava o binário e o índice JSON; retorna o índice"""
    if not windows:
        raise DataError("Nenhuma janela para gravar")
    window_len = len(windows[0].samples)
    fs = windows[0].sampling_rate
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)

    entries = []
    with open(path, "wb") as f:
        f.write(_HEAD.pack(MAGIC, STORE_VERSION, len(windows), window_len, fs))
        for window in windows:
            if len(window.samples) != window_len or window.sampling_rate != fs:
                raise DataError(f"Janela {window.window_id} com formato diferente das demais")
            offset = f.tell()
            f.write(_pack_text(window.subject_id))
            f.write(_pack_text(window.window_id))
            f.write(_EVENT.pack(
                _LABEL_CODES[window.label], window.source_event.start, window.source_event.duration
            ))
            f.write(np.asarray(window.samples, dtype="<f4").tobytes())
            entries.append({
                "window_id": window.window_id,
                "subject_id": window.subject_id,
                "label": window.label.value,
                "start": window.source_event.start,
                "duration": window.source_event.duration,
                "event_name": window.source_event.name,
                "offset": offset,
            })

    index = {
        "format": "osa-window-store",
        "version": STORE_VERSION,
        "sampling_rate": fs,
        "window_length": window_len,
        "count": len(windows),
        "windows": entries,
    }
    with open(index_path(path), "w", encoding="utf-8") as f:
        json.dump(index, f, indent=1)
    logger.info(f"Janelas gravadas: {path} ({len(windows)})")
    return index


def read_window_store(path: str) -> List[EventWindow]:
    """Lê todas as janelas (amostras voltam como float64)"""
    if not os.path.exists(path):
        raise DataError(f"Arquivo de janelas não encontrado: {path}")
    with open(path, "rb") as f:
        buf = f.read()
    if len(buf) < _HEAD.size:
        raise TruncatedData(f"Arquivo de janelas truncado: {path}")
    magic, version, count, window_len, fs = _HEAD.unpack_from(buf, 0)
    if magic != MAGIC:
        raise MalformedHeader(f"{path} não é um arquivo de janelas")
    if version != STORE_VERSION:
        raise MalformedHeader(f"Versão {version} do arquivo de janelas não suportada")

    names = {}
    idx = index_path(path)
    if os.path.exists(idx):
        with open(idx, "r", encoding="utf-8") as f:
            names = {entry["window_id"]: entry.get("event_name", "") for entry in json.load(f)["windows"]}

    offset = _HEAD.size
    windows = []
    for _ in range(count):
        subject_id, offset = _unpack_text(buf, offset)
        window_id, offset = _unpack_text(buf, offset)
        code, start, duration = _EVENT.unpack_from(buf, offset)
        offset += _EVENT.size
        end = offset + 4 * window_len
        if end > len(buf):
            raise TruncatedData(f"Janela {window_id} truncada em {path}")
        samples = np.frombuffer(buf[offset:end], dtype="<f4").astype(np.float64)
        offset = end
        windows.append(EventWindow(
            window_id=window_id,
            subject_id=subject_id,
            label=_CODE_LABELS[code],
            samples=samples,
            sampling_rate=fs,
            source_event=EventAnnotation(name=names.get(window_id, ""), start=start, duration=duration),
        ))
    return windows
