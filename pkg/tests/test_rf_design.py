import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rissim import rf_design as rf
from rissim.errors import DomainError

C = 299_792_458.0
TABLE_MM = [1.21, 2.42, 3.64, 4.85, 6.08, 7.28, 8.49]


def scalar_patch(f, er, h):
    """Spreadsheet-style evaluation of the three transmission-line formulas."""
    lam = C / f
    w = lam / (2 * math.sqrt(0.5 * (er + 1)))
    ee = (er + 1) / 2 + (er - 1) / 2 * (1 / math.sqrt(1 + 12 * h / w))
    leff = C / (2 * f * math.sqrt(ee))
    dl = 0.412 * h * ((ee + 0.3) / (ee - 0.258)) * ((h / w + 0.264) / (h / w + 0.8))
    return w, leff - 2 * dl


class TestPatch:
    def test_paper_preset_within_three_percent(self):
        p = rf.PRESETS["paper"]
        d = rf.patch_dimensions(p.frequency_hz, p.substrate)
        assert d.width_m == pytest.approx(16.9e-3, rel=0.03)
        assert d.length_m == pytest.approx(13.15e-3, rel=0.03)

    def test_air_gives_half_wavelength_width(self):
        d = rf.patch_dimensions(5.3e9, rf.SubstrateSpec(1.0, 0.5e-3))
        assert d.width_m == pytest.approx(C / 5.3e9 / 2)

    def test_corrected_preset_matches_scalar_oracle(self):
        d = rf.patch_dimensions(5.3e9, rf.FR4_CORRECTED)
        # frozen from scalar_patch(5.3e9, 4.66, 0.53e-3)
        assert d.width_m == pytest.approx(16.812086657549816e-3, rel=1e-12)
        assert d.length_m == pytest.approx(13.324137888760568e-3, rel=1e-12)
        w, length = scalar_patch(5.3e9, 4.66, 0.53e-3)
        assert (d.width_m, d.length_m) == pytest.approx((w, length), rel=1e-12)

    def test_intermediates_are_consistent(self):
        d = rf.patch_dimensions(5.5e9, rf.FR4_NOMINAL)
        assert d.length_m == pytest.approx(d.l_eff_m - 2 * d.delta_l_m)
        assert 1 < d.eps_eff < 4.3
        assert d.length_m < d.width_m
        assert d.notch_depth_m > 0

    @given(st.floats(1.5, 10), st.floats(1.5, 10))
    def test_width_decreases_with_permittivity(self, a, b):
        if abs(a - b) < 1e-6:
            return
        lo, hi = sorted((a, b))
        w_lo = rf.patch_dimensions(5.3e9, rf.SubstrateSpec(lo)).width_m
        w_hi = rf.patch_dimensions(5.3e9, rf.SubstrateSpec(hi)).width_m
        assert w_hi < w_lo

    def test_substrate_validation(self):
        with pytest.raises(DomainError):
            rf.SubstrateSpec(0.5)
        with pytest.raises(DomainError):
            rf.SubstrateSpec(4.3, 0.0)


class TestNotch:
    def test_published_depth(self):
        assert rf.notch_depth(13.15e-3, 341, 50) == pytest.approx(4.9e-3, abs=0.05e-3)

    def test_matched_edge_has_no_notch(self):
        assert rf.notch_depth(13.15e-3, 341, 341) == 0.0

    def test_hundred_ohm(self):
        assert rf.notch_depth(13.15e-3, 341, 100) == pytest.approx(4.179663354278317e-3, rel=1e-12)

    def test_target_above_edge_is_rejected(self):
        with pytest.raises(DomainError):
            rf.notch_depth(13.15e-3, 341, 400)


class TestDelayLines:
    def test_table_values(self):
        rows = rf.delay_line_table(5.3e9, 0.3)
        assert [r.port for r in rows] == [7, 6, 5, 1, 3, 2, 4]
        for row, mm in zip(rows, TABLE_MM):
            assert row.length_m * 1e3 == pytest.approx(mm, abs=0.02)

    def test_single_points(self):
        assert rf.delay_line_length(51.42, 5.3e9, 0.3) * 1e3 == pytest.approx(1.21, abs=0.01)
        assert rf.delay_line_length(360, 5.3e9, 0.3) * 1e3 == pytest.approx(8.49, abs=0.01)
        assert rf.delay_line_length(0, 5.3e9, 0.3) == 0.0

    def test_full_turn_in_vacuum_is_half_wavelength(self):
        f = C / 0.72
        assert rf.delay_line_length(360, f, 1.0) == pytest.approx(0.36)

    def test_unrounded_velocity_factor(self):
        rows = rf.delay_line_table(5.3e9, 0.298)
        for k, row in enumerate(rows, start=1):
            assert row.length_m == pytest.approx(k * 360 / 7 * C * 0.298 / (720 * 5.3e9))
        assert rows[-1].length_m * 1e3 == pytest.approx(8.428, abs=1e-3)

    def test_monotone(self):
        lengths = [r.length_m for r in rf.delay_line_table()]
        assert all(b > a for a, b in zip(lengths, lengths[1:]))

    @given(st.floats(0, 359.9), st.floats(1e9, 3e10), st.floats(0.1, 1.0))
    def test_inverse(self, phase, f, vf):
        assert rf.phase_of_length(rf.delay_line_length(phase, f, vf), f, vf) == pytest.approx(phase, abs=1e-6)

    def test_inverse_wraps(self):
        l360 = rf.delay_line_length(400, 5.3e9)
        assert rf.phase_of_length(l360, 5.3e9) == pytest.approx(40)

    def test_bad_velocity_factor(self):
        with pytest.raises(DomainError):
            rf.delay_line_length(10, 5.3e9, 1.5)


class TestMisc:
    def test_velocity_factor(self):
        assert rf.velocity_factor(0.135, 1.51e-9) == pytest.approx(0.298, abs=5e-4)
        assert rf.velocity_factor(C * 1e-9, 1e-9) == pytest.approx(1.0)
        assert rf.velocity_factor(0.1, 1e-9) == pytest.approx(0.33356409519815206)

    def test_max_spacing(self):
        lam = 56.56e-3
        assert rf.max_spacing(math.pi / 2, lam) == pytest.approx(lam / 2)
        assert rf.max_spacing(0.0, lam) == pytest.approx(lam)
        assert rf.max_spacing(math.radians(30), lam) * 1e3 == pytest.approx(37.71, abs=0.005)
        with pytest.raises(DomainError):
            rf.max_spacing(2.0, lam)

    def test_field_regions(self):
        far, near = rf.field_regions(0.43, 56.56e-3)
        assert far == pytest.approx(6.5, abs=0.05)
        assert near == pytest.approx(0.73, abs=0.05)
        assert far > near
        lam = 0.05
        assert rf.field_regions(lam, lam) == pytest.approx((2 * lam, 0.62 * lam))
        assert rf.field_regions(0.2, 56.56e-3) == pytest.approx((1.4144271570014146, 0.23317499847782647))

    def test_wavelength_at_5_3_ghz(self):
        assert rf.wavelength(5.3e9) * 1e3 == pytest.approx(56.56, abs=0.01)

    def test_report_lists_units(self):
        rows = rf.design_report(rf.PRESETS["paper-corrected"])
        names = {r["quantity"] for r in rows}
        assert {"patch_width", "patch_length", "notch_depth", "far_field_distance"} <= names
        assert sum(r["quantity"].startswith("delay_line") for r in rows) == 7
        notch = next(r for r in rows if r["quantity"] == "notch_depth_published_length")
        assert notch["value"] == pytest.approx(4.9, abs=0.05)
