"""
Testes dos filtros (notch, Butterworth), z-score e recorte das janelas
"""
import numpy as np
import pytest

from app.core.exceptions import DegenerateWindow, EmptyInput, InvalidFrequency
from app.models.signals import SynthConfig
from app.services.filter_service import (
    DURATION_OUT_OF_RANGE,
    INSUFFICIENT_SIGNAL,
    apply_filter,
    design_butter_bandpass,
    design_notch,
    extract_event_windows,
    extract_event_windows_report,
    preprocess_ecg,
    zscore,
)
from app.services.synth_service import generate_synthetic_ecg

FS = 512.0


def test_notch_kills_mains_and_keeps_qrs_band():
    notch = design_notch(60.0, FS)
    assert notch.is_stable()
    assert notch.gain_db(60.0)[0] <= -40.0
    assert abs(notch.gain_db(15.0)[0]) < 0.1


def test_bandpass_response():
    bandpass = design_butter_bandpass(5.0, 35.0, FS)
    assert bandpass.is_stable()
    assert len(bandpass.sections) == 2
    assert np.all(bandpass.gain_db([10.0, 15.0, 30.0]) > -3.0)
    assert bandpass.gain_db(1.0)[0] < -20.0
    assert bandpass.gain_db(100.0)[0] < -15.0


def test_preprocess_removes_mains_interference():
    t = np.arange(int(10 * FS)) / FS
    clean = np.sin(2 * np.pi * 15.0 * t)
    filtered = preprocess_ecg(clean + 0.5 * np.sin(2 * np.pi * 60.0 * t), FS)
    middle = slice(int(2 * FS), int(8 * FS))
    assert np.max(np.abs(filtered[middle] - clean[middle])) < 0.05


def test_zero_phase_keeps_timing():
    t = np.arange(int(10 * FS)) / FS
    x = np.sin(2 * np.pi * 25.0 * t)
    bandpass = design_butter_bandpass(5.0, 35.0, FS)
    h = bandpass.response(25.0)[0]
    assert abs(np.angle(h)) > 0.3

    # ida e volta: ganho |H|² e nenhuma defasagem
    symmetric = apply_filter(bandpass, x)
    middle = slice(int(2 * FS), int(8 * FS))
    assert np.max(np.abs(symmetric[middle] - abs(h) ** 2 * x[middle])) < 0.01


@pytest.mark.parametrize("f0", [0.0, 256.0, 300.0])
def test_notch_frequency_must_be_below_nyquist(f0):
    with pytest.raises(InvalidFrequency):
        design_notch(f0, FS)


def test_bandpass_edges_must_be_ordered():
    with pytest.raises(InvalidFrequency):
        design_butter_bandpass(35.0, 5.0, FS)


def test_empty_signal():
    with pytest.raises(EmptyInput):
        apply_filter(design_notch(60.0, FS), np.array([]))


def test_zscore():
    x = np.random.default_rng(0).normal(3.0, 2.0, 1000)
    z = zscore(x)
    assert abs(z.mean()) < 1e-12
    assert z.std() == pytest.approx(1.0)
    with pytest.raises(DegenerateWindow):
        zscore(np.full(100, 4.2))


def test_event_windows_are_onset_aligned_and_filtered_by_duration():
    record = generate_synthetic_ecg(SynthConfig(
        duration=100.0, noise_sd=0.02, event_plan=[(10.0, 30.0), (40.0, 25.0), (80.0, 30.0)],
    ))
    report = extract_event_windows_report(record)

    assert len(report.windows) == 1
    window = report.windows[0]
    assert len(window.samples) == 7680
    assert window.source_event.start == 10.0
    segment = zscore(record.ecg.samples[int(10 * FS):int(40 * FS)])
    assert np.allclose(window.samples, segment[:7680])

    reasons = {s.event.start: s.reason for s in report.skipped}
    assert reasons == {40.0: DURATION_OUT_OF_RANGE, 80.0: INSUFFICIENT_SIGNAL}
    assert [w.window_id for w in extract_event_windows(record)] == [window.window_id]


def test_notch_edges():
    notch = design_notch(60.0, FS, 30.0)
    assert notch.gain_db(10.0)[0] >= -0.5
    assert abs(notch.response(0.0)[0]) == pytest.approx(1.0)


def test_bandpass_corners_are_minus_3_db():
    bandpass = design_butter_bandpass(5.0, 35.0, FS)
    assert np.allclose(bandpass.gain_db([5.0, 35.0]), -3.0103, atol=0.2)
    assert abs(bandpass.gain_db(np.sqrt(5.0 * 35.0))[0]) <= 0.5
    assert abs(bandpass.response(0.0)[0]) < 1e-9
    assert bandpass.gain_db(60.0)[0] <= -12.0


def _rms(x):
    return float(np.sqrt(np.mean(x ** 2)))


@pytest.mark.parametrize("freq, keep", [(60.0, False), (20.0, True)])
def test_sinusoid_attenuation(freq, keep):
    t = np.arange(int(10 * FS)) / FS
    x = np.sin(2 * np.pi * freq * t)
    filt = design_butter_bandpass(5.0, 35.0, FS) if keep else design_notch(60.0, FS)
    edges = slice(int(FS), -int(FS))
    ratio = _rms(apply_filter(filt, x)[edges]) / _rms(x[edges])
    if keep:
        assert ratio == pytest.approx(1.0, abs=0.05)
    else:
        assert ratio <= 0.01


def test_filter_is_linear_and_symmetric():
    bandpass = design_butter_bandpass(5.0, 35.0, FS)
    assert np.array_equal(apply_filter(bandpass, np.zeros(1024)), np.zeros(1024))

    rng = np.random.default_rng(2)
    x, y = rng.normal(size=2048), rng.normal(size=2048)
    combined = apply_filter(bandpass, 2.0 * x - 3.0 * y)
    assert np.allclose(combined, 2.0 * apply_filter(bandpass, x) - 3.0 * apply_filter(bandpass, y), atol=1e-9)

    pulse = np.exp(-0.5 * ((np.arange(2049) - 1024) / 6.0) ** 2)
    out = apply_filter(bandpass, pulse)
    assert np.allclose(out, out[::-1], atol=1e-6)


def test_zscore_examples():
    assert np.allclose(zscore(np.array([1.0, 2.0, 3.0])), [-1.224745, 0.0, 1.224745], atol=1e-6)
    x = np.random.default_rng(1).normal(size=50)
    assert np.allclose(zscore(zscore(x)), zscore(x), atol=1e-9)
