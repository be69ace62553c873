"""
Annotation Service - XML de eventos pontuados (layout NSRR/Compumedics)
"""
import logging
import xml.etree.ElementTree as ET
from typing import List, Optional, Sequence

from app.core.exceptions import MalformedXml, MissingField
from app.core.utils import to_float
from app.models.signals import EventAnnotation

logger = logging.getLogger(__name__)

DEFAULT_PATTERNS = ["apnea", "hypopnea"]


def _child_text(element: ET.Element, *names: str) -> Optional[str]:
    for name in names:
        child = element.find(name)
        if child is not None and child.text is not None and child.text.strip():
            return child.text.strip()
    return None


def parse_annotations(xml_text: str, name_patterns: Sequence[str] = DEFAULT_PATTERNS) -> List[EventAnnotation]:
    """
    Extrai os ScoredEvent cujo nome (Name ou EventConcept) contém algum dos padrões
    (case-insensitive). Retorna ordenado por início.
    """
    if not xml_text or not xml_text.strip():
        return []

    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as e:
        raise MalformedXml(f"XML de anotações inválido: {e}") from e

    patterns = [p.lower() for p in name_patterns]
    events = []
    for element in root.iter("ScoredEvent"):
        name = _child_text(element, "Name", "EventConcept") or ""
        # EventConcept do NSRR vem como "Obstructive apnea|Obstructive Apnea"
        display = name.split("|")[0].strip()
        if not any(p in name.lower() for p in patterns):
            continue

        start = to_float(_child_text(element, "Start"))
        duration = to_float(_child_text(element, "Duration"))
        if start is None:
            raise MissingField(f"Evento '{display}' sem Start")
        if duration is None:
            raise MissingField(f"Evento '{display}' sem Duration")
        if start < 0 or duration <= 0:
            logger.warning(f"Evento '{display}' ignorado: start={start}, duration={duration}")
            continue

        events.append(EventAnnotation(name=display, start=start, duration=duration))

    events.sort(key=lambda e: (e.start, e.duration))
    logger.info(f"{len(events)} eventos selecionados pelos padrões {list(name_patterns)}")
    return events


def write_annotations(events: Sequence[EventAnnotation], event_type: str = "Respiratory|Respiratory") -> str:
    """Gera XML no mesmo layout lido por parse_annotations"""
    root = ET.Element("PSGAnnotation")
    ET.SubElement(root, "SoftwareVersion").text = "Compumedics"
    ET.SubElement(root, "EpochLength").text = "30"
    scored = ET.SubElement(root, "ScoredEvents")
    for event in events:
        node = ET.SubElement(scored, "ScoredEvent")
        ET.SubElement(node, "EventType").text = event_type
        ET.SubElement(node, "EventConcept").text = f"{event.name}|{event.name.title()}"
        ET.SubElement(node, "Start").text = repr(float(event.start))
        ET.SubElement(node, "Duration").text = repr(float(event.duration))
    return ET.tostring(root, encoding="unicode")


def read_annotations_file(path: str, name_patterns: Sequence[str] = DEFAULT_PATTERNS) -> List[EventAnnotation]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_annotations(f.read(), name_patterns)
