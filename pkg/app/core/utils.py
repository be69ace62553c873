"""
Core utilities: number parsing, fixed-width ASCII fields, seeds, JSON lines
"""
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from app.core.config import OSA_LOG_LEVEL


def configure_logging(level: Optional[str] = None):
    """Configura o logging raiz uma única vez (CLI e API)"""
    logging.basicConfig(
        level=getattr(logging, (level or OSA_LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def to_float(value: Any) -> Optional[float]:
    """
    Converte texto decimal de anotações/cabeçalhos em float.
    Exemplos:
    "120" -> 120.0
    " 30.5 " -> 30.5
    "30,5" -> 30.5
    "" -> None
    """
    if value is None:
        return None

    if isinstance(value, (float, int)):
        return float(value)

    text = str(value).strip().replace(",", ".")
    if not text:
        return None

    try:
        return float(text)
    except ValueError:
        return None


def format_number(value: float, width: int) -> str:
    """
    Representação mais curta de um número que cabe em `width` caracteres
    (campos numéricos do cabeçalho EDF).
    """
    if float(value).is_integer():
        text = str(int(value))
        if len(text) <= width:
            return text
    for digits in range(width, 0, -1):
        text = f"{value:.{digits}g}"
        if len(text) <= width:
            return text
    raise ValueError(f"Valor {value} não cabe em {width} caracteres")


def pad_ascii(value: str, width: int) -> bytes:
    """Campo ASCII de largura fixa, completado com espaços à direita"""
    raw = value.encode("ascii")
    if len(raw) > width:
        raise ValueError(f"Campo '{value}' excede {width} caracteres")
    return raw.ljust(width, b" ")


def spawn_seeds(seed: int, count: int) -> List[int]:
    """Sub-sementes independentes e determinísticas (uma por sujeito/fold)"""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def write_jsonl(path: str, rows: Iterable[Dict[str, Any]]):
    """Grava uma linha JSON por registro"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, sort_keys=True) + "\n")


def read_jsonl(path: str) -> List[Dict[str, Any]]:
    """Lê um arquivo JSON-lines ignorando linhas vazias"""
    with open(path, "r", encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]
