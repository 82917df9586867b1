import numpy as np
import pytest

from elasticity_lab import SurrogateCalibration, WindSpec, acf, fit_ar, load_wind, surrogate_wind, synthetic_ar1_wind
from elasticity_lab.errors import NonStationaryError, ParseError, SeriesTooShortError
from elasticity_lab.wind import DEFAULT_START, clipped_fraction, generate_wind


def test_surrogate_moments_and_range():
    w = surrogate_wind(length=9432, seed=0)
    assert len(w) == 9432
    assert w.mean() == pytest.approx(7.6, abs=0.3)
    assert w.values.std(ddof=1) == pytest.approx(2.4, abs=0.4)
    assert w.values.min() >= 2.2 and w.values.max() <= 18.3
    assert w.start == DEFAULT_START


def test_surrogate_ar_recovery_before_clipping():
    raw = surrogate_wind(length=9432, seed=0, clip=False)
    assert np.allclose(fit_ar(raw, 2).coefficients, (1.84, -0.85), atol=0.05)


def test_surrogate_deterministic():
    assert np.array_equal(surrogate_wind(seed=5).values, surrogate_wind(seed=5).values)


def test_clipping_is_rare():
    assert clipped_fraction(SurrogateCalibration(), 9432, seed=0) < 0.05


def test_calibration_validation():
    with pytest.raises(NonStationaryError):
        SurrogateCalibration(ar_coefficients=(1.0, 0.1))
    with pytest.raises(ValueError):
        SurrogateCalibration(clip_low=8.0)


def test_ar1_white_when_alpha_zero():
    w = synthetic_ar1_wind(0.0, length=8760, seed=1)
    assert abs(acf(w, 1)[0]) < 0.05


def test_ar1_coefficient_recovery():
    w = synthetic_ar1_wind(0.95, length=8760, seed=2)
    assert fit_ar(w, 1).coefficients[0] == pytest.approx(0.95, abs=0.02)


def test_ar1_moments():
    w = synthetic_ar1_wind(0.5, mean=7.6, std=2.4, length=50_000, seed=3)
    assert w.mean() == pytest.approx(7.6, rel=0.02)
    assert w.values.std() == pytest.approx(2.4, rel=0.02)


def test_ar1_rejects_unit_root():
    with pytest.raises(NonStationaryError):
        synthetic_ar1_wind(1.0)


def test_load_wind(tmp_path):
    f = tmp_path / "wind.csv"
    rows = [f"2019-01-01T{h:02d}:00,{5 + h / 10}" for h in range(24)]
    f.write_text("timestamp,value\n" + "\n".join(rows) + "\n")
    w = load_wind(f)
    assert len(w) == 24 and w.values[1] == pytest.approx(5.1)


def test_load_wind_rejects_negative(tmp_path):
    f = tmp_path / "wind.csv"
    f.write_text("value\n1.0\n-2.0\n")
    with pytest.raises(ParseError) as err:
        load_wind(f)
    assert err.value.row == 3


def test_load_wind_empty_value(tmp_path):
    f = tmp_path / "wind.csv"
    f.write_text("timestamp,value\n2019-01-01T00:00,1\n2019-01-01T01:00,\n")
    with pytest.raises(ParseError, match="row 3"):
        load_wind(f)


class TestWindSpec:
    def test_parse_round_trip(self):
        for text in ("surrogate", "ar1:0.9", "shuffled:surrogate", "shuffled:ar1:0.5"):
            assert WindSpec.parse(text).describe() == text

    def test_parse_errors(self):
        for text in ("bogus", "empirical:", "shuffled:"):
            with pytest.raises(ValueError):
                WindSpec.parse(text)

    def test_shuffled_length_and_moments(self):
        spec = WindSpec.parse("shuffled:surrogate", length=2000, seed=4)
        w = generate_wind(spec)
        base = generate_wind(spec.base.with_run(2000, 4))
        assert len(w) == 2000
        assert abs(acf(w, 1)[0]) < 0.1
        assert w.mean() == pytest.approx(base.mean(), abs=0.5)

    def test_empirical_length(self, tmp_path):
        f = tmp_path / "w.csv"
        f.write_text("value\n" + "\n".join(str(3 + i % 5) for i in range(100)) + "\n")
        assert len(generate_wind(WindSpec("empirical", 60, path=str(f)))) == 60
        with pytest.raises(SeriesTooShortError):
            generate_wind(WindSpec("empirical", 200, path=str(f)))

    def test_known_coefficients(self):
        assert WindSpec("synthetic_ar1", alpha=0.7).autoregressive_coefficients() == (0.7,)
        assert WindSpec().autoregressive_coefficients() == (1.84, -0.85)
