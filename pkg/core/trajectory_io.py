"""CSV trajectories: t, q, p, the moment columns G_a_n, then HQ, uncertainty and X."""

from __future__ import annotations

import csv
import logging
import re
from pathlib import Path

from core.errors import ConfigError, ParseError
from core.hierarchy import MomentState, Sample, Trajectory

log = logging.getLogger("qmoments.trajectory_io")

LEADING = ("t", "q", "p")
TRAILING = ("HQ", "uncertainty", "X")
MOMENT_COLUMN = re.compile(r"^G_(\d+)_(\d+)$")


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def header(moment_keys) -> list[str]:
    return [*LEADING, *(f"G_{a}_{n}" for a, n in moment_keys), *TRAILING]


def write_csv(trajectory: Trajectory, path: str | Path, every: int = 1) -> int:
    """Write every `every`-th sample (the last one always); returns rows written."""
    if every < 1:
        raise ValueError(f"every must be at least 1, got {every}")
    keys = trajectory.moment_keys
    samples = trajectory.samples
    rows = 0
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header(keys))
            for i, sample in enumerate(samples):
                if i % every and i != len(samples) - 1:
                    continue
                s = sample.state
                writer.writerow([_fmt(s.t), _fmt(s.q), _fmt(s.p),
                                 *(_fmt(s.get(a, n)) for a, n in keys),
                                 _fmt(sample.hq), _fmt(sample.uncertainty), _fmt(sample.x)])
                rows += 1
    except OSError as exc:
        raise ConfigError(f"cannot write trajectory {path}: {exc}") from exc
    log.info("wrote %d rows to %s", rows, path)
    return rows


def read_csv(path: str | Path) -> Trajectory:
    """Read a trajectory written by write_csv."""
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            columns = next(reader, None)
            if columns is None:
                raise ParseError(f"{path}: empty trajectory file")
            keys = _moment_keys(path, columns)
            trajectory = Trajectory(moment_keys=keys)
            for line_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(columns):
                    raise ParseError(f"{path}:{line_no}: expected {len(columns)} fields, "
                                     f"got {len(row)}")
                try:
                    values = [float(v) for v in row]
                except ValueError as exc:
                    raise ParseError(f"{path}:{line_no}: {exc}") from exc
                t, q, p = values[:3]
                g = dict(zip(keys, values[3:3 + len(keys)]))
                hq, uncertainty, x = values[3 + len(keys):]
                trajectory.samples.append(Sample(MomentState(t, q, p, g), hq, uncertainty, x))
    except OSError as exc:
        raise ParseError(f"cannot read trajectory {path}: {exc}") from exc
    return trajectory


def _moment_keys(path, columns: list[str]) -> tuple[tuple[int, int], ...]:
    if tuple(columns[:3]) != LEADING or tuple(columns[-3:]) != TRAILING:
        raise ParseError(f"{path}: not a trajectory file (header {','.join(columns)})")
    keys = []
    for name in columns[3:-3]:
        match = MOMENT_COLUMN.match(name)
        if match is None:
            raise ParseError(f"{path}: unexpected column {name!r}")
        keys.append((int(match.group(1)), int(match.group(2))))
    return tuple(keys)
