from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction
from pathlib import Path

from core.errors import ConfigError

LOGO_PATH = Path(__file__).resolve().parent.parent / "assets" / "app_logo.txt"
WIDTH = 80


def banner() -> str:
    try:
        return LOGO_PATH.read_text(encoding="utf-8")
    except OSError:
        return "QMOMENTS"


def format_value(value) -> str:
    """Exact rationals as p/q, floats in short scientific notation."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "0" if value == 0.0 else f"{value:.3e}"
    return str(value)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: object
    threshold: object

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return (f"CHECK {self.name} {self.status} value={format_value(self.value)} "
                f"threshold={format_value(self.threshold)}")


class Report:
    """Plain-text report: banner, titled sections, then CHECK lines and a summary"""

    def __init__(self, title: str, version: str = "", stamp: bool = True):
        self.title = title
        self.version = version
        self.stamp = stamp
        self.sections: list[tuple[str, list[str]]] = []
        self.checks: list[Check] = []

    def add_section(self, heading: str, lines: list[str]):
        self.sections.append((heading, list(lines)))

    def add_check(self, check: Check):
        self.checks.append(check)

    def extend(self, checks):
        self.checks.extend(checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def generate_report(self, output_file=None) -> str:
        """Build the text report and optionally save it"""
        report = self._build_report()
        if output_file:
            self.save(report, output_file)
        return report

    def save(self, report: str, output_file):
        try:
            with open(output_file, "w", encoding="utf-8") as f:
                f.write(report + "\n")
        except OSError as exc:
            raise ConfigError(f"cannot write report {output_file}: {exc}") from exc

    def _build_report(self) -> str:
        lines = []

        # Header
        lines.append(banner())
        lines.append("=" * WIDTH)
        header = self.title.upper()
        if self.version:
            header += f"  |  v{self.version}"
        lines.append(header)
        lines.append("=" * WIDTH)
        if self.stamp:
            lines.append(f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")

        for heading, body in self.sections:
            lines.append("")
            lines.append(heading.upper())
            lines.append("-" * WIDTH)
            lines.extend(body)

        if self.checks:
            lines.append("")
            lines.append("CHECKS")
            lines.append("-" * WIDTH)
            lines.extend(c.line() for c in self.checks)
            lines.extend(self._format_summary())

        lines.append("=" * WIDTH)
        return "\n".join(lines)

    def _format_summary(self) -> list[str]:
        failed = len(self.failures)
        lines = ["", "=" * WIDTH, "SUMMARY", "=" * WIDTH]
        lines.append(f"Checks: {len(self.checks)}  Passed: {len(self.checks) - failed}  "
                     f"Failed: {failed}")
        for check in self.failures:
            lines.append(f"  failed: {check.name}")
        return lines
