#!/usr/bin/env python3
import argparse
import logging
import math
import sys
from pathlib import Path

from core.adiabatic import ExpansionOrder, evaluated_index, moment
from core.coefficients import coeff_table, format_table
from core.effective import compare, integrate_effective
from core.errors import ConfigError, IntegrationFailure, ParseError, QMomentsError
from core.hierarchy import Trajectory, init_state, integrate
from core.logs import Logs, setup_logging
from core.model import Jet
from core.reports import Check, Report
from core.run_config import MODES, VERIFY_SUITES, RunSpec, load_config, parse_config
from core.sweep import fit_slope, hbar_sweep
from core.trajectory_io import read_csv, write_csv
from core.verify import verify_all

APP_VERSION = "0.1"

EXIT_OK = 0
EXIT_INTEGRATION = 1
EXIT_VERIFY = 2
EXIT_CONFIG = 3

log = logging.getLogger("qmoments.cli")


class QMomentsApp:
    """Dispatches one run of the selected mode and renders its report."""

    def __init__(self, spec: RunSpec, logs: Logs | None = None, n: int = 2, a: int = 0,
                 order: str = "0,0", at: str | None = None):
        self.spec = spec
        self.logs = logs or Logs()
        self.n = n
        self.a = a
        self.order = order
        self.at = at
        self.report = Report(f"qmoments {spec.mode}", APP_VERSION)
        self.summary_line: str | None = None

    def run(self) -> int:
        action = getattr(self, f"action_{self.spec.mode}")
        try:
            code = action()
        except IntegrationFailure as exc:
            self._failure_section(exc)
            code = EXIT_INTEGRATION
        self._emit()
        return code

    # Modes
    def action_hierarchy(self) -> int:
        spec = self.spec
        self._run_section()
        state0 = init_state(spec.model, spec.q0, spec.p0, spec.moments, spec.truncation,
                            spec.adiabatic_order, spec.hbar_order)
        trajectory = integrate(spec.model, state0, spec.t_end, spec.controls())
        self._trajectory_section(trajectory)
        return EXIT_OK

    def action_effective(self) -> int:
        spec = self.spec
        self._run_section()
        trajectory = integrate_effective(spec.model, spec.q0, spec.p0, spec.t_end,
                                         spec.controls(), form=spec.form,
                                         adiabatic_order=spec.adiabatic_order,
                                         iterate=spec.iterate)
        self._trajectory_section(trajectory)
        return EXIT_OK

    def action_coefficients(self) -> int:
        self.report.add_section(f"Coefficient table n={self.n}", format_table(coeff_table(self.n)))
        return EXIT_OK

    def action_moments(self) -> int:
        if self.at is None:
            raise ConfigError("moments mode needs --at q,qdot,...")
        try:
            jet = Jet.from_sequence([float(v) for v in self.at.split(",")])
        except ValueError as exc:
            raise ConfigError(f"--at must be comma-separated numbers: {exc}") from exc
        expansion = ExpansionOrder.parse(self.order)
        value = moment(self.spec.model, expansion, self.n, self.a, jet)
        a, n = evaluated_index(expansion, self.n, self.a)
        self.report.add_section("Moment", [
            f"order={expansion} n={self.n} a={self.a} jet={','.join(map(repr, jet.values()))}",
            f"G[{a},{n}]={value!r}",
        ])
        return EXIT_OK

    def action_verify(self) -> int:
        spec = self.spec
        self.report.extend(verify_all(seed=spec.seed, samples=spec.samples, which=spec.suite))
        return EXIT_OK if self.report.passed else EXIT_VERIFY

    def action_compare(self) -> int:
        spec = self.spec
        if len(spec.inputs) == 2:
            first, second = (read_csv(path) for path in spec.inputs)
            gap = compare(first, second, spec.metric)
            self.report.add_section("Comparison", [f"inputs: {spec.inputs[0]} {spec.inputs[1]}"])
            self._summary(gap, math.nan)
            return EXIT_OK

        self._run_section()
        points = hbar_sweep(spec.model, spec.sweep_hbar, spec.q0, spec.p0, spec.t_end,
                            spec.controls(), spec.workers, metric=spec.metric)
        lines = [f"hbar={p.hbar!r} gap={p.gap!r} violations={p.violations}"
                 + ("" if p.ok else f" failed: {p.failure}") for p in points]
        self.report.add_section("Hbar sweep", lines)
        good = [p for p in points if p.ok]
        slope = math.nan
        if len(good) >= 2:
            slope = fit_slope([p.hbar for p in good], [p.gap for p in good])
        gap = min(good, key=lambda p: p.hbar).gap if good else math.nan
        self._summary(gap, slope)
        if len(good) < len(points):
            return EXIT_INTEGRATION
        return EXIT_OK

    # Report pieces
    def _run_section(self):
        spec, model = self.spec, self.spec.model
        self.report.add_section("Run", [
            f"model: m={model.m!r} omega={model.omega!r} hbar={model.hbar!r} "
            f"u_coeffs={list(model.u_coeffs)}",
            f"initial: q0={spec.q0!r} p0={spec.p0!r} moments={spec.moments}",
            f"truncation N={spec.truncation} hbar_order={spec.hbar_order} "
            f"closure={spec.closure} adiabatic_order={spec.adiabatic_order}",
            f"time: t_end={spec.t_end!r} rel_tol={spec.rel_tol!r} abs_tol={spec.abs_tol!r}",
        ])

    def _trajectory_section(self, trajectory: Trajectory):
        final = trajectory.final
        lines = [
            f"samples={len(trajectory.samples)} events={len(trajectory.events)}",
            f"final: t={final.state.t!r} q={final.state.q!r} p={final.state.p!r}",
            f"final: HQ={final.hq!r} uncertainty={final.uncertainty!r} X={final.x!r}",
        ]
        lines += [f"event {e.kind} t={e.t!r} value={e.value!r}" for e in trajectory.events]
        if self.spec.output:
            rows = write_csv(trajectory, self.spec.output, self.spec.every)
            lines.append(f"csv: {self.spec.output} ({rows} rows)")
        self.report.add_section("Trajectory", lines)

    def _failure_section(self, exc: IntegrationFailure):
        lines = [f"reason={exc.reason} time={exc.time!r}", str(exc)]
        if exc.trajectory is not None and exc.trajectory.samples and self.spec.output:
            rows = write_csv(exc.trajectory, self.spec.output, self.spec.every)
            lines.append(f"partial csv: {self.spec.output} ({rows} rows)")
        self.report.add_section("Integration failure", lines)
        self.report.add_check(Check("integration", False, exc.time, self.spec.t_end))

    def _summary(self, value: float, slope: float):
        """The compare line metric,value,slope_fit; printed alone in place of the report."""
        self.summary_line = f"{self.spec.metric},{value!r},{slope!r}"
        self.report.add_section("Summary", [self.summary_line])

    def _emit(self):
        text = self.report.generate_report()
        if self.summary_line is None:
            self.logs.stream(text.splitlines())
        else:
            self.logs.write(self.summary_line)
        if self.spec.report:
            self.report.save(text, self.spec.report)


def run(spec: RunSpec, logs: Logs | None = None, **options) -> int:
    """Run one mode; returns the process exit code."""
    try:
        return QMomentsApp(spec, logs, **options).run()
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except QMomentsError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_INTEGRATION


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="qmoments",
                             description="Moment hierarchy and effective dynamics for anharmonic oscillators")
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("suite", nargs="?", choices=VERIFY_SUITES,
                        help="verification suite (verify mode)")
    parser.add_argument("--config", help="YAML run specification")
    parser.add_argument("--out", help="trajectory CSV path")
    parser.add_argument("--report", help="report file path")
    parser.add_argument("--seed", type=int, help="seed for sampled jets")
    parser.add_argument("--n", type=int, default=2, help="moment order (coefficients, moments)")
    parser.add_argument("--a", type=int, default=0, help="momentum index (moments)")
    parser.add_argument("--order", default="0,0", help="expansion order e,i (moments)")
    parser.add_argument("--at", help="jet q,qdot,... (moments)")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--quiet", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ParseError as exc:
        setup_logging(logging.WARNING)
        log.error("%s", exc)
        return EXIT_CONFIG

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    setup_logging(level)

    try:
        if args.config:
            spec = load_config(Path(args.config), mode=args.mode)
        else:
            spec = parse_config("", mode=args.mode)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    spec = spec.with_overrides(output=args.out, report=args.report, seed=args.seed,
                               suite=args.suite)

    return run(spec, n=args.n, a=args.a, order=args.order, at=args.at)


if __name__ == "__main__":
    sys.exit(main())
