import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pzx.errors import (
    DuplicateFrequency,
    EmptyDataset,
    InvalidRange,
    MalformedHeader,
    NonNumericField,
    NonPositiveAmplitude,
    PoleOnAxis,
    SaturatedSweep,
)
from pzx.filterzoo import Family, FilterSpec, make_filter
from pzx.measure import (
    MeasurementConfig,
    SweepDataset,
    normalize_gain,
    parse_csv,
    plan_sweep,
    simulate_sweep,
    to_csv,
)
from pzx.tfcore import RationalTF, eval_tf

HP1 = make_filter(FilterSpec("hp1", w0=1e4))


class TestPlanSweep:
    def test_log_three_points(self):
        assert np.allclose(plan_sweep(10, 1000, 3, "log"), [10, 100, 1000], rtol=1e-15)

    def test_linear(self):
        assert list(plan_sweep(1, 5, 5, "linear")) == [1, 2, 3, 4, 5]

    @pytest.mark.parametrize("args", [(0, 10, 5), (10, 10, 5), (-1, 10, 5), (1, 10, 1)])
    def test_invalid(self, args):
        with pytest.raises(InvalidRange):
            plan_sweep(*args)

    def test_ratio(self):
        w = plan_sweep(10, 1e6, 200)
        assert w.size == 200 and w[0] == 10 and w[-1] == 1e6
        assert np.allclose(w[1:] / w[:-1], 1e5 ** (1 / 199), rtol=1e-12)
        assert 1e5 ** (1 / 199) == pytest.approx(1.0595, abs=1e-4)


class TestSimulate:
    def test_corner_magnitude(self):
        ds = simulate_sweep(HP1, [1e3, 1e4, 1e5], MeasurementConfig(adc_bits=24))
        lsb = 1.0 / (2**24 - 1)
        assert abs(ds.magnitude[1] - 1 / math.sqrt(2)) <= lsb

    def test_unit_calibration_keeps_frequency(self):
        plan = plan_sweep(3.3, 7.7e5, 37)
        ds = simulate_sweep(HP1, plan, MeasurementConfig())
        assert np.array_equal(ds.omega, plan)

    def test_calibration_scales_frequency(self):
        plan = plan_sweep(10, 1e5, 5)
        ds = simulate_sweep(HP1, plan, MeasurementConfig(f2v_calibration=2.0))
        assert np.array_equal(ds.omega, plan * 2.0)

    def test_full_scale_code(self):
        ds = simulate_sweep(RationalTF.from_coeffs([1], [1]), [1, 2, 3], MeasurementConfig(adc_bits=10))
        assert np.all(ds.magnitude == 1.0)

    def test_phase_recorded(self):
        ds = simulate_sweep(HP1, [1e4, 2e4], MeasurementConfig(record_phase=True))
        assert ds.phase[0] == pytest.approx(math.pi / 4, rel=1e-14)
        assert simulate_sweep(HP1, [1e4, 2e4]).phase is None

    def test_deterministic(self):
        cfg = MeasurementConfig(noise_sigma=0.05, seed=11, record_phase=True)
        plan = plan_sweep(10, 1e6, 100)
        a, b = simulate_sweep(HP1, plan, cfg), simulate_sweep(HP1, plan, cfg)
        assert a.same_data(b)
        c = simulate_sweep(HP1, plan, MeasurementConfig(noise_sigma=0.05, seed=12))
        assert not np.array_equal(a.magnitude, c.magnitude)

    def test_pole_on_axis(self):
        osc = RationalTF.from_coeffs([1], [1e8, 0, 1])  # poles at +-j1e4
        with pytest.raises(PoleOnAxis):
            simulate_sweep(osc, [1e3, 1e4, 1e5])

    def test_saturation(self):
        big = RationalTF.from_coeffs([3], [1])
        with pytest.raises(SaturatedSweep):
            simulate_sweep(big, [1, 2, 3])

    def test_allpass_not_saturated_without_noise(self):
        ap = make_filter(FilterSpec("ap2", w0=1e4))
        ds = simulate_sweep(ap, plan_sweep(1e2, 1e6, 200), MeasurementConfig(adc_bits=10))
        assert np.all(ds.magnitude == 1.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 24), st.floats(1.0, 10.0), st.floats(1.0, 10.0), st.integers(0, 2**31))
    def test_quantization_bound(self, bits, vref, fs, seed):
        cfg = MeasurementConfig(adc_bits=bits, v_ref=vref, full_scale_gain=fs)
        lp = make_filter(FilterSpec("lp1", w0=float(np.random.default_rng(seed).uniform(10, 1e5))))
        plan = plan_sweep(1, 1e6, 60)
        true = np.abs(eval_tf(lp, 1j * plan))
        if np.any(true * fs > vref):
            return
        ds = simulate_sweep(lp, plan, cfg)
        assert np.all(np.abs(ds.magnitude - true) <= cfg.lsb_gain * (1 + 1e-12))

    @pytest.mark.parametrize("fam", [f for f in Family if f is not Family.Custom])
    def test_high_resolution_limit(self, fam):
        tf = make_filter(FilterSpec(fam, w0=1e4))
        plan = plan_sweep(1e2, 1e6, 200)
        ds = simulate_sweep(tf, plan, MeasurementConfig(adc_bits=24))
        true = np.abs(eval_tf(tf, 1j * plan))
        # error measured against the sweep's peak gain (full-scale relative)
        assert np.max(np.abs(ds.magnitude - true)) / true.max() < 1e-6


class TestCSV:
    def test_basic(self):
        ds = parse_csv("omega_rad_s,magnitude\n100,0.5\n200,0.6")
        assert len(ds) == 2 and ds.meta == "ingested" and ds.input_amplitude == 1.0

    def test_sorted(self):
        ds = parse_csv("omega_rad_s,magnitude\n200,0.6\n100,0.5\n")
        assert list(ds.omega) == [100, 200] and list(ds.magnitude) == [0.5, 0.6]

    def test_non_numeric(self):
        with pytest.raises(NonNumericField) as ei:
            parse_csv("omega_rad_s,magnitude\nabc,0.5\n300,1")
        assert ei.value.line == 2

    def test_crlf_comments_and_amplitude(self):
        text = "# bench run\r\n# input_amplitude=2.5\r\nomega_rad_s,magnitude,phase_rad\r\n1,2,0.1\r\n2,3,0.2\r\n"
        ds = parse_csv(io.StringIO(text))
        assert ds.input_amplitude == 2.5 and list(ds.phase) == [0.1, 0.2]

    def test_hz(self):
        ds = parse_csv("omega_rad_s,magnitude\n1,0.5\n2,0.6", hz=True)
        assert ds.omega[0] == pytest.approx(2 * math.pi)

    @pytest.mark.parametrize(
        "text, exc",
        [
            ("freq,mag\n1,2\n2,3", MalformedHeader),
            ("", MalformedHeader),
            ("omega_rad_s,magnitude\n", EmptyDataset),
            ("omega_rad_s,magnitude\n1,2\n1,3", DuplicateFrequency),
            ("omega_rad_s,magnitude\n1,2,3\n2,3", NonNumericField),
            ("omega_rad_s,magnitude\n1,nan\n2,3", NonNumericField),
        ],
    )
    def test_errors(self, text, exc):
        with pytest.raises(exc):
            parse_csv(text)

    def test_round_trip_simulated(self):
        cfg = MeasurementConfig(noise_sigma=0.01, seed=5, record_phase=True, adc_bits=12)
        ds = simulate_sweep(make_filter(FilterSpec("bp", w0=1e4, q=3)), plan_sweep(10, 1e6, 150), cfg)
        text = to_csv(ds)
        back = parse_csv(text)
        assert back.same_data(ds) and back.meta == cfg
        assert to_csv(back) == text
        assert "\r" not in text

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(1e-3, 1e9), min_size=2, max_size=30, unique=True),
        st.floats(0.01, 100),
        st.booleans(),
        st.integers(0, 2**31),
    )
    def test_round_trip_property(self, omegas, amp, with_phase, seed):
        rng = np.random.default_rng(seed)
        w = np.sort(np.array(omegas))
        if np.any(np.diff(w) <= 0):
            return
        mag = rng.uniform(0, 10, w.size)
        ph = rng.uniform(-3.14, 3.14, w.size) if with_phase else None
        ds = SweepDataset(w, mag, ph, "ingested", amp)
        assert parse_csv(to_csv(ds)).same_data(ds)


class TestNormalize:
    def test_divide(self):
        ds = SweepDataset([1, 2], [5.0, 2.5])
        assert list(normalize_gain(ds, 5).magnitude) == [1.0, 0.5]

    def test_identity(self):
        ds = SweepDataset([1, 2], [5.0, 2.5])
        assert normalize_gain(ds, 1).same_data(ds)

    def test_amplitude_reset(self):
        ds = SweepDataset([1, 2], [5.0, 2.5], input_amplitude=5.0)
        out = normalize_gain(ds, ds.input_amplitude)
        assert out.input_amplitude == 1.0 and list(out.magnitude) == [1.0, 0.5]

    @pytest.mark.parametrize("amp", [0, -1, float("nan")])
    def test_non_positive(self, amp):
        with pytest.raises(NonPositiveAmplitude):
            normalize_gain(SweepDataset([1, 2], [1, 1]), amp)
