import random
from dataclasses import replace

import pytest

from tracegen import act, end, line, pre, random_legal_trace, wr
from vampire.baselines import (
    IDD_LOOP_KINDS,
    ModelKind,
    compute_baseline,
    drampower_lite_profile,
    generate_idd_loop,
    mape,
    relative_error_pct,
)
from vampire.energy import EngineOptions, compute_energy
from vampire.errors import LengthMismatch, NonPositiveActual
from vampire.trace import CommandKind, parse_trace, serialize_trace, validate_timing


class TestMape:
    def test_ten_percent(self):
        assert mape([110.0], [100.0]) == pytest.approx(10.0)

    def test_perfect_prediction(self):
        assert mape([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_two_sided_errors_average(self):
        assert mape([150.0, 50.0], [100.0, 100.0]) == pytest.approx(50.0)

    def test_scale_invariance(self):
        p = [120.0, 80.0, 95.0]
        a = [100.0, 100.0, 100.0]
        scaled = mape([3 * x for x in p], [3 * x for x in a])
        assert scaled == pytest.approx(mape(p, a), rel=1e-12)

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            mape([1.0], [1.0, 2.0])
        with pytest.raises(LengthMismatch):
            mape([], [])
        with pytest.raises(NonPositiveActual):
            mape([1.0], [0.0])

    def test_agrees_with_brute_force(self):
        rng = random.Random(1234)
        for _ in range(200):
            n = rng.randrange(1, 40)
            predicted = [rng.uniform(0.0, 500.0) for _ in range(n)]
            actual = [rng.uniform(1e-3, 500.0) for _ in range(n)]
            brute = sum(
                abs(p - a) / a for p, a in zip(predicted, actual)
            ) / n * 100.0
            assert mape(predicted, actual) == pytest.approx(brute, rel=1e-12)


def test_relative_error():
    assert relative_error_pct(130.0, 100.0) == pytest.approx(30.0)
    assert relative_error_pct(70.0, 100.0) == pytest.approx(-30.0)
    with pytest.raises(NonPositiveActual):
        relative_error_pct(1.0, 0.0)


class TestIddLoops:
    @pytest.mark.parametrize("kind", IDD_LOOP_KINDS)
    def test_loops_are_timing_clean(self, kind, vendor_a):
        trace = generate_idd_loop(kind, vendor_a.timings, iterations=6)
        assert validate_timing(trace, vendor_a.timings) == []

    @pytest.mark.parametrize("kind", IDD_LOOP_KINDS)
    def test_loops_replay_and_roundtrip(self, kind, vendor_a):
        trace = generate_idd_loop(kind, vendor_a.timings, iterations=4)
        assert parse_trace(serialize_trace(trace)) == trace
        breakdown = compute_energy(trace, vendor_a)
        assert breakdown.total_nj > 0

    def test_idle_loop_has_no_accesses(self, vendor_a):
        trace = generate_idd_loop("idd2n", vendor_a.timings, iterations=8)
        kinds = {c.kind for c in trace}
        assert kinds == {CommandKind.END}

    def test_act_pre_loop_spacing(self, vendor_a):
        trace = generate_idd_loop("idd0", vendor_a.timings, iterations=5)
        acts = [c.cycle for c in trace if c.kind is CommandKind.ACT]
        pres = [c.cycle for c in trace if c.kind is CommandKind.PRE]
        rc = vendor_a.timings.cycles(vendor_a.timings.trc_ns)
        ras = vendor_a.timings.cycles(vendor_a.timings.tras_ns)
        assert acts == [i * rc for i in range(5)]
        assert pres == [i * rc + ras for i in range(5)]

    def test_read_loop_saturates_the_bus(self, vendor_a):
        trace = generate_idd_loop("idd4r", vendor_a.timings, iterations=3)
        reads = [c for c in trace if c.kind is CommandKind.RD]
        assert len(reads) == 24
        gaps = {b.cycle - a.cycle for a, b in zip(reads, reads[1:])}
        assert gaps == {4}
        assert {c.bank for c in reads} == set(range(8))
        assert all(c.payload == line(0x33) for c in reads)

    def test_data_byte_override(self, vendor_a):
        trace = generate_idd_loop("idd4w", vendor_a.timings, iterations=1,
                                  data_byte=0x00)
        writes = [c for c in trace if c.kind is CommandKind.WR]
        assert all(c.payload == bytes(64) for c in writes)

    def test_power_down_loop(self, vendor_a):
        trace = generate_idd_loop("idd2p1", vendor_a.timings, iterations=4)
        assert [c.kind for c in trace] == [
            CommandKind.PDE, CommandKind.PDX, CommandKind.END]

    def test_rejects_unknown_kind(self, vendor_a):
        with pytest.raises(ValueError):
            generate_idd_loop("idd9", vendor_a.timings)


class TestDramPowerLite:
    def test_idle_ratio_equals_guardband(self, vendor_a):
        # On an all-precharged trace the lite model burns datasheet idd2n and
        # the full model measured idd2n, so their ratio is the guardband.
        trace = [end(4000)]
        lite = compute_baseline(trace, vendor_a, ModelKind.DRAMPOWER_LITE)
        full = compute_baseline(trace, vendor_a, ModelKind.VAMPIRE)
        assert full.total_nj / lite.total_nj == pytest.approx(0.383, rel=1e-12)

    def test_engine_equivalence_configuration(self, vendor_a):
        # measured == datasheet, flat transfer tables, variation off: the two
        # engines must agree bit for bit.
        flat = drampower_lite_profile(vendor_a)
        equal = replace(
            flat,
            idd_measured_ma=dict(vendor_a.idd_datasheet_ma),
            idd_datasheet_ma=dict(vendor_a.idd_datasheet_ma),
        )
        trace = [act(0, row=0), wr(6, column=0, payload=line()), end(40)]
        lite = compute_baseline(trace, equal, ModelKind.DRAMPOWER_LITE)
        full = compute_baseline(trace, equal, ModelKind.VAMPIRE)
        assert lite.categories() == full.categories()

    def test_lite_ignores_data_and_variation(self, vendor_c):
        zeros = [act(0, row=0), wr(6, column=0, payload=line(0x00)), end(40)]
        ones = [act(0, row=0xFFFF), wr(6, column=0, payload=line(0xFF)), end(40)]
        b0 = compute_baseline(zeros, vendor_c, ModelKind.DRAMPOWER_LITE)
        b1 = compute_baseline(ones, vendor_c, ModelKind.DRAMPOWER_LITE)
        assert b0.categories() == b1.categories()

    def test_lite_accepts_payload_free_traces(self, vendor_a):
        trace = parse_trace("0,ACT,0,0\n6,WR,0,0\n40,END", mode="distribution")
        b = compute_baseline(trace, vendor_a, ModelKind.DRAMPOWER_LITE)
        assert b.write_nj > 0


class TestMicronStyle:
    def test_gaps_are_charged_at_active_standby(self, vendor_a):
        short = [act(0, row=0), pre(14), end(20)]
        gap = [act(0, row=0), pre(14), end(2020)]  # 2000 idle cycles
        m_short = compute_baseline(short, vendor_a, ModelKind.MICRON_STYLE)
        m_gap = compute_baseline(gap, vendor_a, ModelKind.MICRON_STYLE)
        idd3n_ds = vendor_a.idd("idd3n", datasheet=True)
        assert (m_gap.total_nj - m_short.total_nj == pytest.approx(
            idd3n_ds * 1.35 * 2000 * 2.5 * 1e-3, rel=1e-9))

    def test_micron_dominates_lite_on_random_traces(self, vendor_a):
        rng = random.Random(77)
        for _ in range(20):
            trace = random_legal_trace(rng, vendor_a.timings)
            micron = compute_baseline(trace, vendor_a, ModelKind.MICRON_STYLE)
            lite = compute_baseline(trace, vendor_a, ModelKind.DRAMPOWER_LITE)
            assert micron.total_nj >= lite.total_nj

    def test_per_command_energies_use_datasheet_values(self, vendor_a):
        trace = [act(0, row=0), wr(6, column=0, payload=line()), pre(20),
                 end(26)]
        b = compute_baseline(trace, vendor_a, ModelKind.MICRON_STYLE)
        idd = lambda k: vendor_a.idd(k, datasheet=True)
        mix = (idd("idd3n") * 35.0 + idd("idd2n") * 13.75) / 48.75
        assert b.act_pre_nj == pytest.approx(
            (idd("idd0") - mix) * 1.35 * 48.75 * 1e-3, rel=1e-12)
        assert b.write_nj == pytest.approx(
            (idd("idd4w") - idd("idd3n")) * 1.35 * 10.0 * 1e-3, rel=1e-12)


def test_shipped_profiles_keep_lite_above_vampire(all_vendors):
    # Criterion-9 shaped check at unit-test scale: ACT/PRE/WR/REF plus idle,
    # all-zero payloads, variation off.
    rng = random.Random(2024)
    for profile in all_vendors:
        for _ in range(5):
            trace = random_legal_trace(rng, profile.timings)
            opts = EngineOptions(no_variation=True)
            vamp = compute_energy(trace, profile, opts)
            lite = compute_baseline(trace, profile,
                                    ModelKind.DRAMPOWER_LITE, opts)
            assert lite.total_nj >= vamp.total_nj
