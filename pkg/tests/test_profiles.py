import random

import pytest

from vampire.errors import DegenerateFit, MissingKey, ProfileError
from vampire.profiles import (
    DEFAULT_TIMINGS,
    IDD_KEYS,
    TimingParams,
    builtin_profile,
    builtin_profile_names,
    extrapolate_idd,
    guardband_report,
    lint_profile,
    load_profile_text,
    resolve_profile,
    save_profile,
)


def simple_line_fit(points):
    """Closed-form simple linear regression oracle (means and covariances)."""
    n = len(points)
    mx = sum(f for f, _ in points) / n
    my = sum(c for _, c in points) / n
    sxx = sum((f - mx) ** 2 for f, _ in points)
    sxy = sum((f - mx) * (c - my) for f, c in points)
    slope = sxy / sxx
    return my - slope * mx, slope


class TestExtrapolateIdd:
    def test_exact_line(self):
        points = [(1066, 100.0), (1333, 120.0), (1600, 140.0)]
        intercept, slope = simple_line_fit(points)
        value, r2 = extrapolate_idd(points, 800)
        assert value == pytest.approx(intercept + slope * 800, abs=1e-9)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_single_repeated_frequency(self):
        with pytest.raises(DegenerateFit):
            extrapolate_idd([(1600, 100.0), (1600, 101.0)], 800)
        with pytest.raises(DegenerateFit):
            extrapolate_idd([(1600, 100.0)], 800)

    def test_noisy_fit_quality(self):
        # Six datasheet-style points with 1 mA gaussian noise: the fit must
        # stay at least as good as the worst published fit quality (0.9783).
        rng = random.Random(97)
        freqs = [1066, 1333, 1600, 1866, 2133, 2400]
        points = [(f, 30.0 + 0.08 * f + rng.gauss(0.0, 1.0)) for f in freqs]
        value, r2 = extrapolate_idd(points, 800)
        intercept, slope = simple_line_fit(points)
        assert value == pytest.approx(intercept + slope * 800, rel=1e-9)
        assert r2 >= 0.97

    def test_matches_oracle_on_random_points(self):
        rng = random.Random(5)
        for _ in range(5):
            points = [
                (f, rng.uniform(50, 300)) for f in (800, 1066, 1333, 1600, 1866)
            ]
            value, _ = extrapolate_idd(points, 800)
            intercept, slope = simple_line_fit(points)
            assert value == pytest.approx(intercept + slope * 800, rel=1e-9)


class TestGuardband:
    def test_vendor_a_idle_ratio(self, vendor_a):
        (row,) = guardband_report(vendor_a, ["idd2n"])
        assert row.ratio == pytest.approx(0.383, abs=1e-12)

    def test_vendor_c_read_exceeds_datasheet(self, vendor_c):
        (row,) = guardband_report(vendor_c, ["idd4r"])
        assert row.measured_ma == 343.5
        assert row.ratio == pytest.approx(1.114, abs=1e-12)

    def test_equal_values_give_unity(self, vendor_a):
        from dataclasses import replace

        profile = replace(
            vendor_a, idd_datasheet_ma=dict(vendor_a.idd_measured_ma))
        assert all(r.ratio == 1.0 for r in guardband_report(profile))

    def test_missing_key(self, vendor_a):
        with pytest.raises(MissingKey):
            guardband_report(vendor_a, ["idd6"])

    def test_full_report_covers_all_keys(self, vendor_a):
        assert [r.key for r in guardband_report(vendor_a)] == list(IDD_KEYS)


class TestShippedProfiles:
    def test_names(self):
        assert builtin_profile_names() == ["vendor_a", "vendor_b", "vendor_c"]

    def test_lint_clean(self, all_vendors):
        for profile in all_vendors:
            assert lint_profile(profile) == []

    def test_roundtrip(self, all_vendors):
        for profile in all_vendors:
            assert load_profile_text(save_profile(profile)) == profile

    def test_idle_ordering(self, all_vendors):
        for profile in all_vendors:
            assert profile.idd("idd3n") >= profile.idd("idd2n")
            assert (profile.idd("idd3n", datasheet=True)
                    >= profile.idd("idd2n", datasheet=True))

    def test_published_measured_means_are_not_synthetic(
        self, vendor_a, vendor_b, vendor_c
    ):
        for profile in (vendor_a, vendor_b, vendor_c):
            assert "idd_measured_ma.idd0" not in profile.synthetic
            assert "idd_measured_ma.idd1" not in profile.synthetic
        assert "idd_measured_ma.idd4r" not in vendor_c.synthetic
        assert vendor_a.idd("idd0") == 72.2
        assert vendor_b.idd("idd0") == 70.4
        assert vendor_c.idd("idd0") == 58.1
        assert (vendor_a.idd("idd1"), vendor_b.idd("idd1"),
                vendor_c.idd("idd1")) == (107.4, 114.9, 87.9)

    def test_placeholders_are_flagged(self, vendor_a):
        assert "idd_measured_ma.idd2n" in vendor_a.synthetic
        assert "idd_datasheet_ma.idd0" in vendor_a.synthetic
        assert "variation.bank_read_factor" in vendor_a.synthetic

    def test_guardband_keys_stay_inside_datasheet(self, all_vendors):
        # These operations touch the cell array, where worst-case process
        # variation forces large datasheet margins.
        for profile in all_vendors:
            for key in ("idd0", "idd2n", "idd3n", "idd4w", "idd5b"):
                assert profile.idd(key) < profile.idd(key, datasheet=True)

    def test_unknown_builtin(self):
        with pytest.raises(ProfileError):
            builtin_profile("vendor_z")


class TestTimingParams:
    def test_cycles_rounds_up(self):
        t = DEFAULT_TIMINGS
        assert t.cycles(13.75) == 6
        assert t.cycles(35.0) == 14
        assert t.cycles(48.75) == 20
        assert t.cycles(160.0) == 64

    def test_check(self):
        bad = TimingParams(13.75, 13.75, 35.0, 40.0, 160.0, 2.5)
        assert bad.check() == ["trc_ns must be >= tras_ns + trp_ns"]
        assert DEFAULT_TIMINGS.check() == []


class TestProfileIO:
    def test_lint_flags_inverted_idle_currents(self, vendor_a):
        from dataclasses import replace

        measured = dict(vendor_a.idd_measured_ma)
        measured["idd3n"] = measured["idd2n"] - 1.0
        broken = replace(vendor_a, idd_measured_ma=measured)
        assert any("idd3n must be >= idd2n" in p for p in lint_profile(broken))

    def test_malformed_yaml(self):
        with pytest.raises(ProfileError):
            load_profile_text("not: [valid")
        with pytest.raises(ProfileError):
            load_profile_text("just a string")
        with pytest.raises(ProfileError):
            load_profile_text("name: x\nvdd_v: 1.35\n")  # missing sections

    def test_resolve_profile(self, tmp_path, monkeypatch, vendor_a):
        path = tmp_path / "custom.yaml"
        path.write_text(save_profile(vendor_a))
        assert resolve_profile(str(path)) == vendor_a
        monkeypatch.setenv("VAMPIRE_PROFILE_DIR", str(tmp_path))
        assert resolve_profile("custom") == vendor_a
        assert resolve_profile("vendor_b").name == "vendor_b"
        with pytest.raises(ProfileError, match="cannot resolve"):
            resolve_profile("nonexistent")
