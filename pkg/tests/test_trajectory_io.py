import pytest
from numpy.testing import assert_allclose

from core.errors import ParseError
from core.hierarchy import MomentState, Sample, Trajectory
from core.trajectory_io import header, read_csv, write_csv

KEYS = ((0, 2), (1, 2), (2, 2))


def trajectory(count=5):
    samples = [Sample(MomentState(0.1 * i, 1.0 / 3.0 + i, -0.5 * i,
                                  {(0, 2): 0.5, (1, 2): 0.01 * i, (2, 2): 0.5}),
                      1.0 + 1e-12 * i, 0.25, 1.5)
               for i in range(count)]
    return Trajectory(samples=samples, moment_keys=KEYS)


def test_header_layout():
    assert header(KEYS) == ["t", "q", "p", "G_0_2", "G_1_2", "G_2_2", "HQ", "uncertainty", "X"]
    assert header(((0, 2),)) == ["t", "q", "p", "G_0_2", "HQ", "uncertainty", "X"]


def test_values_survive_full_precision(tmp_path):
    path = tmp_path / "run.csv"
    original = trajectory()
    assert write_csv(original, path) == 5
    loaded = read_csv(path)
    assert loaded.moment_keys == KEYS
    assert [s.state.q for s in loaded.samples] == [s.state.q for s in original.samples]
    assert [s.hq for s in loaded.samples] == [s.hq for s in original.samples]
    assert_allclose(loaded.samples[3].state.get(1, 2), 0.03)


def test_output_is_deterministic(tmp_path):
    write_csv(trajectory(), tmp_path / "a.csv")
    write_csv(trajectory(), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_every_keeps_the_last_sample(tmp_path):
    path = tmp_path / "thin.csv"
    assert write_csv(trajectory(6), path, every=4) == 3
    times = read_csv(path).times()
    assert_allclose(times, [0.0, 0.4, 0.5])


def test_bad_files(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
    with pytest.raises(ParseError):
        read_csv(bad)
    short = tmp_path / "short.csv"
    short.write_text("t,q,p,HQ,uncertainty,X\n1,2,3\n", encoding="utf-8")
    with pytest.raises(ParseError):
        read_csv(short)
    with pytest.raises(ParseError):
        read_csv(tmp_path / "missing.csv")
