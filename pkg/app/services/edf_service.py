"""
EDF Service - leitura/escrita bit-exata de arquivos EDF clássicos
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import (
    DegenerateCalibration,
    MalformedHeader,
    RangeOverflow,
    ShapeMismatch,
    TruncatedData,
)
from app.core.utils import format_number, pad_ascii, to_float
from app.models.signals import EdfHeader, SignalSpec, SignalTrace

logger = logging.getLogger(__name__)

MAIN_HEADER_BYTES = 256
SIGNAL_HEADER_BYTES = 256

# (campo, largura) do cabeçalho principal
MAIN_FIELDS = [
    ("version", 8),
    ("patient_id", 80),
    ("recording_id", 80),
    ("start_date", 8),
    ("start_time", 8),
    ("header_bytes", 8),
    ("reserved", 44),
    ("num_records", 8),
    ("record_duration", 8),
    ("num_signals", 4),
]

# (campo, largura) de cada canal; gravados campo a campo para todos os canais
SIGNAL_FIELDS = [
    ("label", 16),
    ("transducer", 80),
    ("physical_dimension", 8),
    ("physical_min", 8),
    ("physical_max", 8),
    ("digital_min", 8),
    ("digital_max", 8),
    ("prefiltering", 80),
    ("samples_per_record", 8),
    ("reserved", 32),
]

MAIN_NUMERIC_FIELDS = ("header_bytes", "num_records", "record_duration", "num_signals")
SIGNAL_NUMERIC_FIELDS = ("physical_min", "physical_max", "digital_min", "digital_max", "samples_per_record")


def _decode_ascii(raw: bytes, what: str) -> str:
    try:
        return raw.decode("ascii")
    except UnicodeDecodeError as e:
        raise MalformedHeader(f"Campo '{what}' não é ASCII") from e


def _parse_int(text: str, what: str) -> int:
    value = to_float(text)
    if value is None or not float(value).is_integer():
        raise MalformedHeader(f"Campo '{what}' não é inteiro: '{text.strip()}'")
    return int(value)


def _parse_float(text: str, what: str) -> float:
    value = to_float(text)
    if value is None:
        raise MalformedHeader(f"Campo '{what}' não é numérico: '{text.strip()}'")
    return value


def read_edf(data: bytes) -> Tuple[EdfHeader, List[SignalTrace]]:
    """
    Decodifica um EDF: cabeçalho ASCII de 256 + 256·ns bytes seguido de registros de
    inteiros de 16 bits little-endian. Retorna o cabeçalho e um SignalTrace por canal
    em unidades físicas.
    """
    if len(data) < MAIN_HEADER_BYTES:
        raise MalformedHeader(f"Arquivo com {len(data)} bytes, menor que o cabeçalho")

    main = {}
    offset = 0
    for name, width in MAIN_FIELDS:
        main[name] = _decode_ascii(data[offset:offset + width], name)
        offset += width

    num_signals = _parse_int(main["num_signals"], "num_signals")
    header_bytes = _parse_int(main["header_bytes"], "header_bytes")
    if num_signals < 0 or header_bytes != MAIN_HEADER_BYTES + SIGNAL_HEADER_BYTES * num_signals:
        raise MalformedHeader(
            f"header_bytes={header_bytes} incompatível com {num_signals} canais"
        )
    if len(data) < header_bytes:
        raise TruncatedData(f"Cabeçalho promete {header_bytes} bytes, arquivo tem {len(data)}")

    fields = {}
    for name, width in SIGNAL_FIELDS:
        values = []
        for _ in range(num_signals):
            values.append(_decode_ascii(data[offset:offset + width], name))
            offset += width
        fields[name] = values

    specs = []
    for i in range(num_signals):
        spec = SignalSpec(
            label=fields["label"][i].rstrip(),
            transducer=fields["transducer"][i].rstrip(),
            physical_dimension=fields["physical_dimension"][i].rstrip(),
            physical_min=_parse_float(fields["physical_min"][i], "physical_min"),
            physical_max=_parse_float(fields["physical_max"][i], "physical_max"),
            digital_min=_parse_int(fields["digital_min"][i], "digital_min"),
            digital_max=_parse_int(fields["digital_max"][i], "digital_max"),
            prefiltering=fields["prefiltering"][i].rstrip(),
            samples_per_record=_parse_int(fields["samples_per_record"][i], "samples_per_record"),
            reserved=fields["reserved"][i].rstrip(),
            raw_fields={name: fields[name][i] for name in SIGNAL_NUMERIC_FIELDS},
        )
        if spec.digital_min == spec.digital_max or spec.physical_min == spec.physical_max:
            raise DegenerateCalibration(f"Calibração degenerada no canal '{spec.label}'")
        if spec.digital_min > spec.digital_max or spec.samples_per_record <= 0:
            raise MalformedHeader(f"Canal '{spec.label}' com faixa digital ou amostras inválidas")
        specs.append(spec)

    samples_per_record = sum(spec.samples_per_record for spec in specs)
    num_records = _parse_int(main["num_records"], "num_records")
    payload = len(data) - header_bytes
    if num_records < 0:
        # -1 = gravação não finalizada; deduz pelo tamanho
        num_records = payload // (2 * samples_per_record) if samples_per_record else 0
        logger.warning(f"num_records=-1 no cabeçalho, deduzido {num_records}")

    expected = num_records * samples_per_record * 2
    if payload < expected:
        raise TruncatedData(f"Dados com {payload} bytes, esperado {expected}")
    if payload > expected:
        logger.warning(f"{payload - expected} bytes após o último registro completo")

    header = EdfHeader(
        version=main["version"].rstrip(),
        patient_id=main["patient_id"].rstrip(),
        recording_id=main["recording_id"].rstrip(),
        start_date=main["start_date"].rstrip(),
        start_time=main["start_time"].rstrip(),
        header_bytes=header_bytes,
        reserved=main["reserved"].rstrip(),
        num_records=num_records,
        record_duration=_parse_float(main["record_duration"], "record_duration"),
        signals=specs,
        raw_fields={name: main[name] for name in MAIN_NUMERIC_FIELDS},
        trailing=data[header_bytes + expected:],
    )

    traces: List[SignalTrace] = []
    if num_signals == 0:
        return header, traces

    digital = np.frombuffer(
        data, dtype="<i2", count=num_records * samples_per_record, offset=header_bytes
    ).reshape(num_records, samples_per_record)

    column = 0
    for spec in specs:
        block = digital[:, column:column + spec.samples_per_record].astype(np.float64).ravel()
        column += spec.samples_per_record
        physical = spec.physical_min + (block - spec.digital_min) * spec.gain
        rate = spec.samples_per_record / header.record_duration if header.record_duration > 0 else float(spec.samples_per_record)
        traces.append(SignalTrace(samples=physical, sampling_rate=rate, label=spec.label))

    logger.info(f"EDF lido: {num_signals} canais, {num_records} registros")
    return header, traces


def to_digital(spec: SignalSpec, samples: np.ndarray) -> np.ndarray:
    """Mapa físico -> digital (inverso da calibração), com checagem de faixa"""
    samples = np.asarray(samples, dtype=np.float64)
    if not np.all(np.isfinite(samples)):
        raise RangeOverflow(f"Canal '{spec.label}' contém valores não finitos")
    digital = np.round((samples - spec.physical_min) / spec.gain + spec.digital_min)
    if digital.size and (digital.min() < spec.digital_min or digital.max() > spec.digital_max):
        raise RangeOverflow(
            f"Canal '{spec.label}' fora da faixa física [{spec.physical_min}, {spec.physical_max}]"
        )
    return digital.astype(np.int64)


def _numeric_text(raw_fields: Dict[str, str], name: str, value, width: int) -> str:
    """Texto original do campo se ainda representa o valor; senão a forma mais curta"""
    raw = raw_fields.get(name)
    if raw is not None and len(raw) == width:
        parsed = to_float(raw)
        if parsed is not None and (parsed == value or (name == "num_records" and parsed == -1)):
            return raw
    if isinstance(value, float):
        return format_number(value, width)
    return str(value)


def write_edf(header: EdfHeader, traces: Sequence[SignalTrace]) -> bytes:
    """
    Codifica cabeçalho + canais; read_edf(write_edf(h, t)) reproduz h e as amostras digitais.
    Campos numéricos lidos de outro arquivo voltam com o texto original, e bytes após o
    último registro são preservados, então write_edf(*read_edf(data)) == data.
    """
    if len(traces) != len(header.signals):
        raise ShapeMismatch(f"{len(traces)} canais para {len(header.signals)} especificações")

    num_signals = len(header.signals)
    out = bytearray()
    main_values = {
        "version": header.version,
        "patient_id": header.patient_id,
        "recording_id": header.recording_id,
        "start_date": header.start_date,
        "start_time": header.start_time,
        "header_bytes": MAIN_HEADER_BYTES + SIGNAL_HEADER_BYTES * num_signals,
        "reserved": header.reserved,
        "num_records": header.num_records,
        "record_duration": float(header.record_duration),
        "num_signals": num_signals,
    }
    for name, width in MAIN_FIELDS:
        value = main_values[name]
        text = _numeric_text(header.raw_fields, name, value, width) if name in MAIN_NUMERIC_FIELDS else value
        out += pad_ascii(text, width)

    for name, width in SIGNAL_FIELDS:
        for spec in header.signals:
            value = getattr(spec, name)
            text = _numeric_text(spec.raw_fields, name, value, width) if name in SIGNAL_NUMERIC_FIELDS else value
            out += pad_ascii(text, width)

    if num_signals == 0:
        return bytes(out + header.trailing)

    blocks = []
    for spec, trace in zip(header.signals, traces):
        expected = header.num_records * spec.samples_per_record
        if len(trace.samples) != expected:
            raise ShapeMismatch(
                f"Canal '{spec.label}' com {len(trace.samples)} amostras, esperado {expected}"
            )
        digital = to_digital(spec, trace.samples)
        blocks.append(digital.reshape(header.num_records, spec.samples_per_record))

    records = np.concatenate(blocks, axis=1).astype("<i2")
    out += records.tobytes()
    out += header.trailing
    return bytes(out)


def header_for_traces(
    traces: Sequence[SignalTrace],
    record_duration: float = 1.0,
    patient_id: str = "",
    recording_id: str = "",
    margin: float = 0.05,
    transducer: str = "",
    prefiltering: str = "",
) -> EdfHeader:
    """Monta um cabeçalho que comporta os canais dados (faixa física com margem)"""
    specs = []
    num_records: Optional[int] = None
    for trace in traces:
        spr = trace.sampling_rate * record_duration
        if not float(spr).is_integer():
            raise ShapeMismatch(f"Taxa {trace.sampling_rate} Hz incompatível com registros de {record_duration} s")
        spr = int(spr)
        if len(trace.samples) % spr:
            raise ShapeMismatch(f"Canal '{trace.label}' não ocupa registros inteiros")
        records = len(trace.samples) // spr
        if num_records is not None and records != num_records:
            raise ShapeMismatch("Canais com durações diferentes")
        num_records = records

        low = float(np.min(trace.samples)) if len(trace.samples) else -1.0
        high = float(np.max(trace.samples)) if len(trace.samples) else 1.0
        span = max(high - low, 1e-3)
        low = float(format_number(low - margin * span, 8))
        high = float(format_number(high + margin * span, 8))
        specs.append(SignalSpec(
            label=trace.label,
            transducer=transducer,
            physical_dimension="mV",
            physical_min=low,
            physical_max=high,
            samples_per_record=spr,
            prefiltering=prefiltering,
        ))

    return EdfHeader(
        patient_id=patient_id,
        recording_id=recording_id,
        header_bytes=MAIN_HEADER_BYTES + SIGNAL_HEADER_BYTES * len(specs),
        num_records=num_records or 0,
        record_duration=record_duration,
        signals=specs,
    )


def select_channel(traces: Sequence[SignalTrace], label: str) -> SignalTrace:
    """Canal ECG pela etiqueta (exata, depois case-insensitive contains)"""
    for trace in traces:
        if trace.label == label:
            return trace
    wanted = label.lower().strip()
    for trace in traces:
        if wanted in trace.label.lower():
            return trace
    raise MalformedHeader(f"Canal '{label}' não encontrado em {[t.label for t in traces]}")


def read_edf_file(path: str) -> Tuple[EdfHeader, List[SignalTrace]]:
    with open(path, "rb") as f:
        return read_edf(f.read())


def write_edf_file(path: str, header: EdfHeader, traces: Sequence[SignalTrace]):
    with open(path, "wb") as f:
        f.write(write_edf(header, traces))
