"""
Testes de EDF, anotações, rótulos e gerador sintético
"""
import numpy as np
import pytest

from app.core.exceptions import (
    DegenerateCalibration,
    MalformedHeader,
    MalformedXml,
    MissingField,
    NegativeAhi,
    RangeOverflow,
    TruncatedData,
)
from app.models.signals import EdfHeader, EventAnnotation, SeverityLabel, SignalSpec, SignalTrace, SynthConfig
from app.services.annotation_service import parse_annotations, write_annotations
from app.services.cohort_service import label_subject, load_record, read_manifest, save_record, write_manifest
from app.services.edf_service import header_for_traces, read_edf, write_edf
from app.services.hrv_service import SPECTRAL_GRID, lomb_scargle_power
from app.services.synth_service import generate_synthetic_cohort, generate_synthetic_ecg, subject_config
from app.services.window_store import read_window_store, write_window_store


def _calibrated_header(samples_per_record=1, num_records=1, **spec_fields):
    spec = SignalSpec(
        label="ECG", physical_min=-5.0, physical_max=5.0,
        samples_per_record=samples_per_record, **spec_fields,
    )
    return EdfHeader(num_records=num_records, signals=[spec], header_bytes=512)


# --- EDF ---
def test_digital_zero_maps_to_calibration_midpoint():
    header = _calibrated_header()
    physical = -5.0 + 32768 * header.signals[0].gain
    data = write_edf(header, [SignalTrace(samples=np.array([physical]), sampling_rate=1.0)])
    assert data[-2:] == b"\x00\x00"
    _, traces = read_edf(data)
    assert traces[0].samples[0] == pytest.approx(0.0000763, abs=1e-7)


def test_two_records_yield_1024_samples():
    header = _calibrated_header(samples_per_record=512, num_records=2)
    samples = np.sin(np.linspace(0, 20, 1024))
    _, traces = read_edf(write_edf(header, [SignalTrace(samples=samples, sampling_rate=512.0)]))
    assert len(traces[0].samples) == 1024
    assert traces[0].sampling_rate == 512.0


def test_rewrite_is_byte_identical(rng):
    traces = [
        SignalTrace(samples=rng.normal(0, 1, 256 * 4), sampling_rate=256.0, label="ECG"),
        SignalTrace(samples=rng.normal(0, 3, 32 * 4), sampling_rate=32.0, label="SaO2"),
    ]
    data = write_edf(header_for_traces(traces, patient_id="P1", recording_id="R1"), traces)
    header, decoded = read_edf(data)
    assert write_edf(header, decoded) == data
    assert [t.label for t in decoded] == ["ECG", "SaO2"]


def test_round_trip_keeps_digital_samples(rng):
    trace = SignalTrace(samples=rng.normal(0, 0.5, 512 * 3), sampling_rate=512.0)
    header = header_for_traces([trace])
    _, decoded = read_edf(write_edf(header, [trace]))
    assert np.max(np.abs(decoded[0].samples - trace.samples)) <= header.signals[0].gain / 2 + 1e-12


def test_empty_signal_list_is_header_only():
    assert len(write_edf(EdfHeader(), [])) == 256


def test_value_above_physical_max_overflows():
    with pytest.raises(RangeOverflow):
        write_edf(_calibrated_header(), [SignalTrace(samples=np.array([5.5]), sampling_rate=1.0)])


def test_truncated_and_malformed_files():
    header = _calibrated_header(samples_per_record=4)
    data = write_edf(header, [SignalTrace(samples=np.zeros(4), sampling_rate=4.0)])
    with pytest.raises(TruncatedData):
        read_edf(data[:-3])
    with pytest.raises(MalformedHeader):
        read_edf(b"not an edf" * 10)
    with pytest.raises(MalformedHeader):
        read_edf(b"\xff" * 600)


def test_degenerate_calibration():
    header = _calibrated_header(samples_per_record=4)
    data = bytearray(write_edf(header, [SignalTrace(samples=np.zeros(4), sampling_rate=4.0)]))
    # digital_max do único canal
    offset = 256 + 16 + 80 + 8 + 8 + 8 + 8
    data[offset:offset + 8] = b"-32768  "
    with pytest.raises(DegenerateCalibration):
        read_edf(bytes(data))


# --- ANOTAÇÕES ---
NSRR_DOC = """
<PSGAnnotation><ScoredEvents>
  <ScoredEvent><EventConcept>Arousal|Arousal ()</EventConcept><Start>200</Start><Duration>10</Duration></ScoredEvent>
  <ScoredEvent><EventConcept>Obstructive apnea|Obstructive Apnea</EventConcept><Start>120</Start><Duration>30</Duration></ScoredEvent>
</ScoredEvents></PSGAnnotation>"""


def test_parse_annotations_filters_by_pattern():
    events = parse_annotations(NSRR_DOC, ["apnea", "hypopnea"])
    assert events == [EventAnnotation(name="Obstructive apnea", start=120.0, duration=30.0)]


def test_parse_annotations_edge_cases():
    assert parse_annotations("   ") == []
    missing = "<PSGAnnotation><ScoredEvents><ScoredEvent><Name>Hypopnea</Name><Start>5</Start></ScoredEvent></ScoredEvents></PSGAnnotation>"
    with pytest.raises(MissingField):
        parse_annotations(missing)
    with pytest.raises(MalformedXml):
        parse_annotations("<PSGAnnotation><ScoredEvents>")


def test_written_annotations_parse_back():
    events = [EventAnnotation(name="Obstructive apnea", start=12.5, duration=29.75),
              EventAnnotation(name="Hypopnea", start=100.0, duration=31.0)]
    assert parse_annotations(write_annotations(events)) == events


# --- RÓTULOS ---
@pytest.mark.parametrize("ahi, expected", [
    (3.5, SeverityLabel.NORMAL),
    (2.0, SeverityLabel.NORMAL),
    (5.0, SeverityLabel.NORMAL),
    (40.0, SeverityLabel.SEVERE),
    (35.0, SeverityLabel.EXCLUDED),
    (20.0, SeverityLabel.EXCLUDED),
    (1.0, SeverityLabel.EXCLUDED),
])
def test_label_subject(ahi, expected):
    assert label_subject(ahi) == expected


def test_negative_ahi():
    with pytest.raises(NegativeAhi):
        label_subject(-1.0)


# --- GERADOR SINTÉTICO ---
def test_clean_60_bpm_has_one_peak_per_second():
    record = generate_synthetic_ecg(SynthConfig(heart_rate=60.0, duration=15.0))
    assert abs(len(record.r_peak_times) - 15) <= 1
    assert np.allclose(np.diff(record.r_peak_times), 1.0)
    assert len(record.ecg.samples) == 15 * 512


def test_generator_is_deterministic():
    cfg = SynthConfig(seed=11, duration=30.0, noise_sd=0.05, mains_amplitude=0.1, hrv_hf_amplitude=0.05)
    assert np.array_equal(generate_synthetic_ecg(cfg).ecg.samples, generate_synthetic_ecg(cfg).ecg.samples)


def test_respiratory_modulation_dominates_rr_spectrum():
    record = generate_synthetic_ecg(SynthConfig(duration=300.0, hrv_hf_amplitude=0.05, resp_rate=0.3))
    times = record.r_peak_times
    power = lomb_scargle_power((times[:-1] + times[1:]) / 2, np.diff(times), SPECTRAL_GRID)
    assert abs(SPECTRAL_GRID[np.argmax(power)] - 0.3) <= 0.02


def test_cohort_counts_and_determinism():
    first = generate_synthetic_cohort(5, 5, seed=7, duration=120.0)
    second = generate_synthetic_cohort(5, 5, seed=7, duration=120.0)
    assert len(first) == 10
    assert sum(r.label is SeverityLabel.NORMAL for r in first) == 5
    assert sum(r.label is SeverityLabel.SEVERE for r in first) == 5
    for a, b in zip(first, second):
        assert a.subject_id == b.subject_id
        assert np.array_equal(a.ecg.samples, b.ecg.samples)
        assert a.events == b.events


def test_saved_cohort_loads_back(tmp_path):
    records = generate_synthetic_cohort(1, 1, seed=3, duration=120.0)
    write_manifest(str(tmp_path), [save_record(r, str(tmp_path), 3) for r in records])
    rows = read_manifest(str(tmp_path))
    assert [row["subject_id"] for row in rows] == [r.subject_id for r in records]
    for row, original in zip(rows, records):
        loaded = load_record(row)
        assert loaded.label == original.label
        assert len(loaded.events) == len(original.events)
        assert np.max(np.abs(loaded.ecg.samples - original.ecg.samples)) < 1e-3


def test_manifest_row_regenerates_its_subject(tmp_path):
    records = generate_synthetic_cohort(2, 2, seed=11, duration=60.0)
    rows = [save_record(r, str(tmp_path), 11) for r in records]
    assert len({row["seed"] for row in rows}) == 4
    assert all(row["cohort_seed"] == 11 for row in rows)

    row = rows[3]
    cfg = subject_config(SeverityLabel(row["label"]), row["seed"], row["subject_id"], row["duration"], row["sampling_rate"])
    again = generate_synthetic_ecg(cfg)
    assert np.array_equal(again.ecg.samples, records[3].ecg.samples)
    assert again.events == records[3].events


# --- ARMAZÉM DE JANELAS ---
def test_window_store_keeps_ids_labels_and_samples(tmp_path, window_factory):
    normal, _ = window_factory(seed=1)
    severe, _ = window_factory(seed=2, label=SeverityLabel.SEVERE)
    path = str(tmp_path / "windows.bin")
    index = write_window_store(path, [normal, severe])
    assert index["count"] == 2

    loaded = read_window_store(path)
    assert [w.window_id for w in loaded] == [normal.window_id, severe.window_id]
    assert [w.label for w in loaded] == [SeverityLabel.NORMAL, SeverityLabel.SEVERE]
    assert loaded[0].source_event.name == "Obstructive apnea"
    assert np.allclose(loaded[1].samples, severe.samples.astype(np.float32))


def test_window_store_rejects_foreign_file(tmp_path):
    path = tmp_path / "other.bin"
    path.write_bytes(b"NOTWIN" + b"\x00" * 30)
    with pytest.raises(MalformedHeader):
        read_window_store(str(path))


def _field(text, width):
    return text.ljust(width).encode("ascii")


def _foreign_edf(rng):
    """EDF montado à mão, com o texto numérico no estilo de outros gravadores"""
    ns = int(rng.integers(1, 4))
    declared = int(rng.integers(0, 4))
    records = declared
    if rng.random() < 0.2:
        declared = -1
    duration = str(rng.choice(["1", "1.0", "0.5", "2.000", "30"]))

    specs = []
    for _ in range(ns):
        low = -float(rng.uniform(1.0, 400.0))
        high = float(rng.uniform(1.0, 400.0))
        style = str(rng.choice(["{:.1f}", "{:.3f}", "{:g}"]))
        dmin, dmax = [(-32768, 32767), (-2048, 2047), (0, 4095)][int(rng.integers(0, 3))]
        dmax_text = f"{dmax}.0" if rng.random() < 0.3 else str(dmax)
        spr = int(rng.integers(1, 20))
        spr_text = f"  {spr}" if rng.random() < 0.3 else str(spr)
        specs.append((style.format(low)[:8], style.format(high)[:8], str(dmin), dmax_text, spr_text, dmin, dmax, spr))

    out = bytearray()
    out += _field("0", 8) + _field(f"P{int(rng.integers(0, 999))} X 01-JAN-2001", 80) + _field("Startdate X", 80)
    out += _field("02.03.04", 8) + _field("22.10.05", 8) + _field(str(256 * (ns + 1)), 8) + _field("", 44)
    out += _field(str(declared), 8) + _field(duration, 8) + _field(str(ns), 4)
    columns = [
        [_field(f"EEG C{i}", 16) for i in range(ns)],
        [_field("AgAgCl electrode", 80)] * ns,
        [_field("uV", 8)] * ns,
        [_field(s[0], 8) for s in specs],
        [_field(s[1], 8) for s in specs],
        [_field(s[2], 8) for s in specs],
        [_field(s[3], 8) for s in specs],
        [_field("HP:0.1Hz LP:75Hz", 80)] * ns,
        [_field(s[4], 8) for s in specs],
        [_field("", 32)] * ns,
    ]
    for column in columns:
        for value in column:
            out += value

    total = sum(s[7] for s in specs)
    for _ in range(records):
        for s in specs:
            out += rng.integers(s[5], s[6] + 1, size=s[7]).astype("<i2").tobytes()
    out += bytes(rng.integers(0, 256, size=int(rng.integers(0, 2 * total))).astype(np.uint8))
    return bytes(out)


def test_foreign_file_rewrites_byte_identical():
    data = (
        _field("0", 8) + _field("", 80) + _field("", 80) + _field("01.01.00", 8) + _field("00.00.00", 8)
        + _field("512", 8) + _field("", 44) + _field("1", 8) + _field("1.0", 8) + _field("1", 4)
        + _field("ECG", 16) + _field("", 80) + _field("mV", 8) + _field("-5.0", 8) + _field("5.0", 8)
        + _field("-32768", 8) + _field("32767", 8) + _field("", 80) + _field("4", 8) + _field("", 32)
        + np.array([-32768, -1, 0, 32767], dtype="<i2").tobytes()
    )
    assert len(data) == 520
    header, traces = read_edf(data)
    assert header.record_duration == 1.0
    assert write_edf(header, traces) == data


def test_randomized_foreign_files_round_trip():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        data = _foreign_edf(rng)
        header, traces = read_edf(data)
        rewritten = write_edf(header, traces)
        assert rewritten == data

        again, decoded = read_edf(rewritten)
        assert again.num_records == header.num_records
        for a, b in zip(traces, decoded):
            assert np.array_equal(a.samples, b.samples)


def test_unknown_record_count_is_kept():
    header = _calibrated_header(samples_per_record=2, num_records=3)
    data = bytearray(write_edf(header, [SignalTrace(samples=np.linspace(-4, 4, 6), sampling_rate=2.0)]))
    data[236:244] = b"-1      "
    data += b"\x01"
    header, traces = read_edf(bytes(data))
    assert header.num_records == 3
    assert header.trailing == b"\x01"
    assert write_edf(header, traces) == bytes(data)


def test_changed_values_are_reformatted():
    header, traces = read_edf(write_edf(_calibrated_header(samples_per_record=2), [
        SignalTrace(samples=np.zeros(2), sampling_rate=2.0),
    ]))
    header.signals[0].physical_max = 6.5
    header.record_duration = 2.0
    data = write_edf(header, traces)
    assert data[244:252] == b"2       "
    assert read_edf(data)[0].signals[0].physical_max == 6.5
