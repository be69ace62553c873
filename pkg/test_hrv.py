"""
Testes do detector de picos R e das features RR/EDR
"""
import numpy as np
import pytest

from app.core.exceptions import DegenerateSeries, EmptySeries, TooFewPeaks, TooShort
from app.models.features import FEATURE_NAMES, RPeakSeries
from app.services.filter_service import preprocess_ecg
from app.services.hrv_service import (
    SPECTRAL_GRID,
    band_powers,
    compute_edr,
    compute_rr,
    detect_r_peaks,
    extract_feature_vector,
    extract_features,
    integrate_band,
    lomb_scargle_power,
    mean_rr,
    pnn50,
    read_feature_table,
    sdsd,
    serial_correlation,
    write_feature_table,
)


def _matched(detected, truth, tolerance):
    return sum(np.min(np.abs(detected - t)) <= tolerance for t in truth)


def test_clean_60_bpm_peaks_and_features(window_factory):
    window, truth = window_factory(hrv_lf_amplitude=0.001)
    peaks = detect_r_peaks(window)
    assert len(peaks.times) == len(truth) == 15
    assert np.max(np.abs(peaks.times - truth)) <= 0.005

    vector = extract_feature_vector(window)
    assert vector.mean_rr == pytest.approx(1000.0, abs=2.0)
    assert vector.pnn50 == 0
    assert vector.sdsd < 5.0
    assert np.all(np.isfinite(vector.to_array()))


def test_noisy_peaks_after_filtering(window_factory):
    window, truth = window_factory(heart_rate=75.0, noise_sd=0.1, seed=3, mains_amplitude=0.1)
    filtered = window.model_copy(update={"samples": preprocess_ecg(window.samples, window.sampling_rate)})
    peaks = detect_r_peaks(filtered)
    assert _matched(peaks.times, truth, 0.015) >= 0.95 * len(truth)
    assert len(peaks.times) <= len(truth) + 1


def test_flat_window_has_no_peaks(window_factory):
    window, _ = window_factory()
    with pytest.raises(TooFewPeaks):
        detect_r_peaks(window.model_copy(update={"samples": np.zeros_like(window.samples)}))


def test_rr_and_edr_series():
    peaks = RPeakSeries(times=np.array([0.5, 1.5, 2.3]), amplitudes=np.array([1.0, 1.2, 0.8]))
    rr = compute_rr(peaks)
    assert np.allclose(rr.intervals, [1000.0, 800.0])
    assert np.allclose(rr.interval_midpoint_times, [1.0, 1.9])
    edr = compute_edr(peaks)
    assert np.allclose(edr.values, [0.0, 0.2, -0.2])
    assert np.array_equal(edr.times, peaks.times)


def test_serial_correlation():
    x = [1.0, 2.0, 3.0, 4.0, 5.0]
    assert serial_correlation(x, 1) == pytest.approx(0.4)
    assert serial_correlation(x, 2) == pytest.approx(-0.1)
    with pytest.raises(TooShort):
        serial_correlation(x[:4], 3)
    with pytest.raises(DegenerateSeries):
        serial_correlation([900.0] * 6, 2)


def test_pnn50_counts_increases_unless_absolute():
    rr = [800.0, 860.0, 790.0, 920.0]
    assert pnn50(rr) == 2
    assert pnn50(rr, absolute=True) == 3
    with pytest.raises(TooShort):
        pnn50([800.0])


def test_sdsd_and_mean():
    assert sdsd([800.0, 810.0, 830.0, 860.0]) == pytest.approx(10.0)
    assert mean_rr([800.0, 900.0]) == 850.0
    with pytest.raises(EmptySeries):
        mean_rr([])
    with pytest.raises(TooShort):
        sdsd([800.0, 810.0])


def test_band_powers_of_respiratory_sine():
    times = np.sort(np.random.default_rng(5).uniform(0.0, 60.0, 80))
    bands = band_powers(times, np.sin(2 * np.pi * 0.25 * times))
    assert bands.norm_vlf + bands.norm_lf + bands.norm_hf == pytest.approx(1.0)
    assert bands.norm_hf > 0.9
    assert bands.lf_hf_ratio == pytest.approx(bands.lf / bands.hf)


def test_band_powers_need_variance():
    with pytest.raises(DegenerateSeries):
        band_powers(np.arange(10.0), np.full(10, 3.0))


def test_extract_features_reports_rejections(tmp_path, window_factory):
    good, _ = window_factory(hrv_lf_amplitude=0.01, seed=4)
    flat = good.model_copy(update={"window_id": "flat", "samples": np.zeros_like(good.samples)})
    rows, rejected = extract_features([good, flat])
    assert [w.window_id for w, _ in rows] == [good.window_id]
    assert rejected == [("flat", "TooFewPeaks")]

    path = str(tmp_path / "features.csv")
    write_feature_table(path, rows)
    table = read_feature_table(path)
    assert list(table.columns) == ["subject_id", "window_id", "label"] + FEATURE_NAMES
    assert table.loc[0, "mean_rr"] == pytest.approx(rows[0][1].mean_rr)


def test_rr_examples():
    rr = compute_rr(RPeakSeries(times=np.array([1.0, 2.0, 3.1]), amplitudes=np.ones(3)))
    assert np.allclose(rr.intervals, [1000.0, 1100.0])
    assert mean_rr(rr) == pytest.approx(1050.0)
    with pytest.raises(TooFewPeaks):
        compute_rr(RPeakSeries(times=np.array([1.0]), amplitudes=np.ones(1)))


def test_alternating_series_examples():
    x = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0]
    assert serial_correlation(x, 2) == pytest.approx(0.666667, abs=1e-6)
    assert serial_correlation(x, 3) == pytest.approx(-0.5)
    assert pnn50([800.0, 860.0, 900.0, 910.0]) == 1
    assert pnn50([900.0, 840.0, 900.0]) == 1
    assert sdsd([800.0, 850.0, 800.0]) == pytest.approx(70.7107, abs=1e-4)
    assert sdsd([800.0, 810.0, 820.0]) == 0.0


def test_statistics_match_brute_force():
    x = np.random.default_rng(8).normal(900.0, 60.0, 40)
    mean = x.mean()
    denominator = sum((v - mean) ** 2 for v in x)
    for lag in (2, 3):
        numerator = sum((x[i] - mean) * (x[i + lag] - mean) for i in range(len(x) - lag))
        assert serial_correlation(x, lag) == pytest.approx(numerator / denominator, abs=1e-12)
    assert pnn50(x) == sum(1 for a, b in zip(x[:-1], x[1:]) if b - a > 50.0)
    assert sdsd(x) == pytest.approx(np.std([b - a for a, b in zip(x[:-1], x[1:])], ddof=1))


def test_lomb_scargle_finds_the_modulation():
    rng = np.random.default_rng(6)
    times = np.arange(120) * 1.0 + rng.uniform(-0.2, 0.2, 120)
    values = np.sin(2 * np.pi * 0.1 * times)
    power = lomb_scargle_power(times, values, SPECTRAL_GRID)
    assert abs(SPECTRAL_GRID[np.argmax(power)] - 0.1) <= 0.001
    assert np.allclose(lomb_scargle_power(times, values + 5.0, SPECTRAL_GRID), power)

    lf = band_powers(times, values)
    assert lf.norm_lf >= 0.9
    hf = band_powers(times, np.sin(2 * np.pi * 0.3 * times))
    assert hf.lf_hf_ratio <= 0.2


def test_edr_follows_respiration(window_factory):
    window, _ = window_factory(duration=60.0, resp_rate=0.3)
    edr = compute_edr(detect_r_peaks(window))
    assert abs(edr.values.mean()) < 1e-9
    power = lomb_scargle_power(edr.times, edr.values, SPECTRAL_GRID)
    assert abs(SPECTRAL_GRID[np.argmax(power)] - 0.3) <= 0.03


def test_features_are_deterministic_and_scale_free(window_factory):
    window, _ = window_factory(hrv_lf_amplitude=0.02, hrv_hf_amplitude=0.03, seed=9)
    vector = extract_feature_vector(window)
    assert len(vector.to_array()) == 9
    assert np.array_equal(extract_feature_vector(window).to_array(), vector.to_array())

    scaled = extract_feature_vector(window.model_copy(update={"samples": 3.0 * window.samples}))
    for name in ("mean_rr", "r2", "r3", "pnn50", "sdsd", "norm_vlf_rr", "norm_vlf_edr", "norm_lf_edr"):
        assert getattr(scaled, name) == pytest.approx(getattr(vector, name), rel=1e-6, abs=1e-9)


def test_clean_unmodulated_60_bpm(window_factory):
    window, truth = window_factory()
    peaks = detect_r_peaks(window)
    assert _matched(peaks.times, truth, 0.010) >= 0.99 * len(truth)
    rr = compute_rr(peaks)
    assert mean_rr(rr) == pytest.approx(1000.0, abs=2.0)
    assert pnn50(rr) == 0
    assert sdsd(rr) <= 5.0


def test_peak_recovery_over_100_windows(window_factory):
    rng = np.random.default_rng(77)
    clean_hits = noisy_hits = total = 0
    for seed in range(100):
        params = {
            "heart_rate": float(rng.uniform(55.0, 90.0)),
            "hrv_lf_amplitude": float(rng.uniform(0.0, 0.03)),
            "hrv_hf_amplitude": float(rng.uniform(0.0, 0.03)),
            "seed": seed,
        }
        clean, truth = window_factory(**params)
        noisy, _ = window_factory(noise_sd=0.1, **params)
        filtered = noisy.model_copy(update={"samples": preprocess_ecg(noisy.samples, noisy.sampling_rate)})

        # batimentos cortados pela borda da janela não contam
        inner = truth[(truth >= 0.1) & (truth <= 15.0 - 0.1)]
        total += len(inner)
        clean_hits += _matched(detect_r_peaks(clean).times, inner, 0.010)
        noisy_hits += _matched(detect_r_peaks(filtered).times, inner, 0.015)

    assert clean_hits >= 0.99 * total
    assert noisy_hits >= 0.95 * total


def test_feature_oracles_on_1000_random_series():
    rng = np.random.default_rng(31)
    for _ in range(1000):
        n = int(rng.integers(6, 51))
        x = rng.normal(900.0, float(rng.uniform(10.0, 120.0)), n)
        mean = x.mean()
        denominator = np.sum((x - mean) ** 2)
        for lag in (2, 3):
            numerator = sum((x[i] - mean) * (x[i + lag] - mean) for i in range(n - lag))
            assert serial_correlation(x, lag) == pytest.approx(numerator / denominator, abs=1e-9)
        diffs = [x[i + 1] - x[i] for i in range(n - 1)]
        assert pnn50(x) == sum(1 for d in diffs if d > 50.0)
        assert pnn50(x, absolute=True) == sum(1 for d in diffs if abs(d) > 50.0)
        brute_sd = (sum((d - sum(diffs) / len(diffs)) ** 2 for d in diffs) / (len(diffs) - 1)) ** 0.5
        assert sdsd(x) == pytest.approx(brute_sd, abs=1e-9)

        times = np.cumsum(x) / 1000.0
        power = lomb_scargle_power(times, x, SPECTRAL_GRID)
        bands = band_powers(times, x)
        whole = integrate_band(power, 3, 400)
        assert bands.vlf + bands.lf + bands.hf == pytest.approx(whole, rel=1e-9, abs=1e-12)
        split = integrate_band(power, 40, 90) + integrate_band(power, 90, 150)
        assert split == pytest.approx(bands.lf, rel=1e-9, abs=1e-12)
        assert bands.norm_vlf + bands.norm_lf + bands.norm_hf == pytest.approx(1.0, abs=1e-9)
