import pytest

from tracegen import line
from vampire.cli import main
from vampire.profiles import builtin_profile, save_profile
from vampire.trace import parse_trace


@pytest.fixture()
def clean_trace(tmp_path):
    path = tmp_path / "clean.trc"
    payload = line(0x33).hex()
    path.write_text(
        "# open a row, read twice, close\n"
        "0,ACT,0,5\n"
        f"6,RD,0,0,{payload}\n"
        f"10,RD,0,1,{payload}\n"
        "24,PRE,0\n"
        "40,END\n"
    )
    return str(path)


@pytest.fixture()
def dirty_trace(tmp_path):
    path = tmp_path / "dirty.trc"
    path.write_text("0,ACT,0,5\n4,RD,0,0," + line().hex() + "\n10,END\n")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestValidateTrace:
    def test_clean_exits_zero(self, capsys, clean_trace):
        code, out, _ = run(capsys, "validate-trace", "--trace", clean_trace,
                           "--profile", "vendor_a")
        assert code == 0
        assert out.splitlines()[0] == (
            "index,cycle,bank,rule,required_ns,actual_ns")
        assert len(out.splitlines()) == 1

    def test_violations_exit_two(self, capsys, dirty_trace):
        code, out, _ = run(capsys, "validate-trace", "--trace", dirty_trace,
                           "--profile", "vendor_a")
        assert code == 2
        assert "tRCD" in out

    def test_parse_error_exits_one(self, capsys, tmp_path):
        bad = tmp_path / "bad.trc"
        bad.write_text("0,WAT\n")
        code, _, err = run(capsys, "validate-trace", "--trace", str(bad),
                           "--profile", "vendor_a")
        assert code == 1
        assert "unknown command kind" in err


class TestAnalyze:
    def test_breakdown_csv(self, capsys, clean_trace):
        code, out, _ = run(capsys, "analyze", "--trace", clean_trace,
                           "--profile", "vendor_a")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "category,energy_nj"
        categories = [l.split(",")[0] for l in lines[1:]]
        assert categories == [
            "act_pre", "read", "write", "refresh", "background_active",
            "background_precharged", "power_down", "total"]

    def test_missing_trace_exits_one_and_names_path(self, capsys):
        code, _, err = run(capsys, "analyze", "--trace", "missing.trc",
                           "--profile", "vendor_a")
        assert code == 1
        assert "missing.trc" in err

    def test_timing_violation_exits_two(self, capsys, dirty_trace):
        code, _, err = run(capsys, "analyze", "--trace", dirty_trace,
                           "--profile", "vendor_a")
        assert code == 2
        assert "timing violation" in err
        code, _, _ = run(capsys, "analyze", "--trace", dirty_trace,
                         "--profile", "vendor_a", "--force")
        assert code == 0

    def test_deterministic_output(self, capsys, clean_trace):
        _, first, _ = run(capsys, "analyze", "--trace", clean_trace,
                          "--profile", "vendor_a")
        _, second, _ = run(capsys, "analyze", "--trace", clean_trace,
                           "--profile", "vendor_a")
        assert first == second

    def test_multi_trace_rows_follow_input_order(self, capsys, clean_trace,
                                                 tmp_path):
        other = tmp_path / "idle.trc"
        other.write_text("400,END\n")
        code, out, _ = run(capsys, "analyze", "--trace", clean_trace,
                           "--trace", str(other), "--profile", "vendor_a")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "trace,category,energy_nj"
        traces = [l.split(",")[0] for l in lines[1:]]
        assert traces == [clean_trace] * 8 + [str(other)] * 8

    def test_out_ledger_and_plot(self, capsys, clean_trace, tmp_path):
        out_csv = tmp_path / "breakdown.csv"
        ledger = tmp_path / "ledger.csv"
        png = tmp_path / "breakdown.png"
        code, stdout, _ = run(
            capsys, "analyze", "--trace", clean_trace, "--profile", "vendor_a",
            "--out", str(out_csv), "--ledger", str(ledger), "--plot", str(png))
        assert code == 0
        assert stdout == ""
        assert out_csv.read_text().startswith("category,energy_nj")
        ledger_lines = ledger.read_text().splitlines()
        assert ledger_lines[0] == "cycle,kind,energy_nj"
        assert len(ledger_lines) == 6  # five commands + header
        assert png.stat().st_size > 1000

    def test_gnuplot_format(self, capsys, clean_trace):
        code, out, _ = run(capsys, "analyze", "--trace", clean_trace,
                           "--profile", "vendor_a", "--gnuplot")
        assert code == 0
        assert out.splitlines()[0] == "# category energy_nj"
        assert "," not in out

    def test_distribution_mode(self, capsys, tmp_path):
        trace = tmp_path / "dist.trc"
        trace.write_text("0,ACT,0,0\n6,RD,0,0\n10,RD,0,1\n20,END\n")
        code, out, _ = run(
            capsys, "analyze", "--trace", str(trace), "--profile", "vendor_a",
            "--mode", "distribution", "--ones-fraction", "0.5",
            "--toggle-fraction", "0.25")
        assert code == 0
        read_row = [l for l in out.splitlines() if l.startswith("read,")][0]
        assert float(read_row.split(",")[1]) > 0


class TestCompare:
    def test_rows_per_model(self, capsys, clean_trace):
        code, out, _ = run(capsys, "compare", "--trace", clean_trace,
                           "--profile", "vendor_a",
                           "--models", "vampire,micron")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == (
            "trace,model,energy_nj,avg_power_mw,relative_error_pct")
        rows = [l.split(",") for l in lines[1:]]
        assert [r[1] for r in rows] == ["vampire", "micron"]
        assert float(rows[0][4]) == 0.0          # vampire vs itself
        assert float(rows[1][4]) > 0.0           # micron overestimates

    def test_unknown_model_is_a_domain_error(self, capsys, clean_trace):
        code, _, err = run(capsys, "compare", "--trace", clean_trace,
                           "--profile", "vendor_a", "--models", "cacti")
        assert code == 2
        assert "unknown model" in err


class TestFitAndExtrapolate:
    def test_fit(self, capsys, tmp_path):
        samples = tmp_path / "samples.csv"
        rows = ["n_ones,n_toggles,current_ma"]
        for o in range(0, 513, 64):
            for t in (0, 128, 256):
                rows.append(f"{o},{t},{246.44 + 0.433 * o + 0.0515 * t}")
        samples.write_text("\n".join(rows) + "\n")
        code, out, _ = run(capsys, "fit", "--samples", str(samples))
        assert code == 0
        header, values = out.splitlines()
        assert header.startswith("i_zero_ma,d_one_ma,d_toggle_ma,r_squared")
        i_zero, d_one, d_toggle, r2 = map(float, values.split(",")[:4])
        assert (i_zero, d_one, d_toggle) == pytest.approx(
            (246.44, 0.433, 0.0515), abs=1e-9)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_fit_rank_deficient_exits_two(self, capsys, tmp_path):
        samples = tmp_path / "flat.csv"
        samples.write_text(
            "n_ones,n_toggles,current_ma\n0,0,10\n0,0,11\n0,0,12\n")
        code, _, err = run(capsys, "fit", "--samples", str(samples))
        assert code == 2
        assert "rank deficient" in err

    def test_extrapolate(self, capsys, tmp_path):
        points = tmp_path / "points.csv"
        points.write_text(
            "freq_mts,current_ma\n1066,100\n1333,120\n1600,140\n")
        code, out, _ = run(capsys, "extrapolate-idd", "--points", str(points),
                           "--target", "800")
        assert code == 0
        target, value, r2 = out.splitlines()[1].split(",")
        assert float(value) == pytest.approx(100 - 5320 / 267, abs=1e-6)
        assert float(r2) == pytest.approx(1.0, abs=1e-9)

    def test_extrapolate_degenerate_exits_two(self, capsys, tmp_path):
        points = tmp_path / "points.csv"
        points.write_text("freq_mts,current_ma\n1600,100\n1600,101\n")
        code, _, _ = run(capsys, "extrapolate-idd", "--points", str(points))
        assert code == 2


class TestEncode:
    def test_study_csv(self, capsys, clean_trace):
        code, out, _ = run(capsys, "encode", "--trace", clean_trace,
                           "--profile", "vendor_a")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "scheme,energy_nj,ratio_to_baseline"
        schemes = [l.split(",")[0] for l in lines[1:]]
        assert schemes == ["baseline", "bdi", "optimized", "owi"]
        assert float(lines[1].split(",")[2]) == 1.0

    def test_rewrite_emits_a_parseable_trace(self, capsys, clean_trace,
                                             tmp_path):
        out_path = tmp_path / "rewritten.trc"
        code, _, _ = run(capsys, "encode", "--trace", clean_trace,
                         "--profile", "vendor_a", "--scheme", "owi",
                         "--rewrite", str(out_path))
        assert code == 0
        rewritten = parse_trace(out_path.read_text())
        assert rewritten[-1].cycle == 42  # two lookups stretch END by 2

    def test_rewrite_requires_scheme(self, capsys, clean_trace, tmp_path):
        code, _, err = run(capsys, "encode", "--trace", clean_trace,
                           "--profile", "vendor_a", "--rewrite",
                           str(tmp_path / "x.trc"))
        assert code == 2
        assert "--scheme" in err


class TestLoopAndLint:
    def test_gen_idd_loop_roundtrips(self, capsys, tmp_path):
        out_path = tmp_path / "loop.trc"
        code, _, _ = run(capsys, "gen-idd-loop", "--kind", "idd0",
                         "--profile", "vendor_a", "--iterations", "3",
                         "--out", str(out_path))
        assert code == 0
        trace = parse_trace(out_path.read_text())
        assert len(trace) == 7  # 3 x (ACT, PRE) + END
        code, out, _ = run(capsys, "validate-trace", "--trace", str(out_path),
                           "--profile", "vendor_a")
        assert code == 0

    def test_profile_lint_builtin_is_clean(self, capsys):
        code, out, _ = run(capsys, "profile-lint", "--profile", "vendor_a")
        assert code == 0
        assert out == ""

    def test_profile_lint_flags_problems(self, capsys, tmp_path):
        profile = builtin_profile("vendor_a")
        text = save_profile(profile).replace("trcd_ns: 13.75",
                                             "trcd_ns: -1.0")
        path = tmp_path / "broken.yaml"
        path.write_text(text)
        code, out, _ = run(capsys, "profile-lint", "--profile", str(path))
        assert code == 2
        assert "trcd_ns" in out


class TestUsage:
    def test_no_verb_exits_one(self, capsys):
        assert run(capsys, )[0] == 1

    def test_unknown_flag_exits_one(self, capsys):
        assert run(capsys, "analyze", "--nope")[0] == 1

    @pytest.mark.parametrize("verb", [
        "validate-trace", "analyze", "compare", "fit", "extrapolate-idd",
        "encode", "gen-idd-loop", "profile-lint"])
    def test_every_verb_has_help(self, verb, capsys):
        code, out, _ = run(capsys, verb, "--help")
        assert code == 0
        assert verb in out
        assert "--help" in out

    def test_profile_dir_env(self, capsys, tmp_path, monkeypatch, clean_trace):
        custom = tmp_path / "mine.yaml"
        custom.write_text(save_profile(builtin_profile("vendor_b")))
        monkeypatch.setenv("VAMPIRE_PROFILE_DIR", str(tmp_path))
        code, out, _ = run(capsys, "analyze", "--trace", clean_trace,
                           "--profile", "mine")
        assert code == 0
