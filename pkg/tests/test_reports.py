from fractions import Fraction

from core.reports import Check, Report, banner, format_value


def test_check_line_format():
    check = Check("A'[2]", True, Fraction(1, 16), Fraction(1, 16))
    assert check.line() == "CHECK A'[2] PASS value=1/16 threshold=1/16"
    failed = Check("residual(0,0)", False, 2.5e-9, 1e-10)
    assert failed.line() == "CHECK residual(0,0) FAIL value=2.500e-09 threshold=1.000e-10"


def test_format_value():
    assert format_value(0.0) == "0"
    assert format_value(Fraction(0)) == "0"
    assert format_value(3) == "3"
    assert format_value(True) == "true"


def test_report_sections_and_summary(tmp_path):
    report = Report("qmoments verify", "0.1", stamp=False)
    report.add_section("Run", ["model: quartic"])
    report.extend([Check("a", True, 0.0, 1e-10), Check("b", False, 1.0, 0.0)])
    path = tmp_path / "report.txt"
    text = report.generate_report(path)

    assert not report.passed
    assert [c.name for c in report.failures] == ["b"]
    assert text.startswith(banner())
    assert "QMOMENTS VERIFY  |  v0.1" in text
    assert "CHECK a PASS value=0 threshold=1.000e-10" in text.splitlines()
    assert "Checks: 2  Passed: 1  Failed: 1" in text
    assert "Generated:" not in text
    assert path.read_text(encoding="utf-8") == text + "\n"


def test_report_without_checks_passes():
    report = Report("qmoments coefficients", stamp=False)
    report.add_section("Coefficient table n=2", ["C[1,2]=-1/8"])
    assert report.passed
    assert "CHECKS" not in report.generate_report()
