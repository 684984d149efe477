import numpy as np
import pytest

from taperdyn import ConfigError, IngestError, Trajectory
from taperdyn.dataio import (
    fmt,
    ingest_series,
    read_complex_csv,
    read_nino34_csv,
    read_scalar_csv,
    read_trajectory_csv,
    write_complex_matrix_csv,
    write_csv_atomic,
    write_trajectory_csv,
)


class TestFmt:
    def test_roundtrip_is_lossless(self):
        g = np.random.default_rng(0)
        for x in list(g.standard_normal(200)) + [1e-300, 1e300, 0.1, 2.0 / 3.0]:
            assert float(fmt(x)) == x


class TestWriteCsv:
    def test_header_and_precision(self, tmp_path):
        path = tmp_path / "out.csv"
        write_csv_atomic(path, "a,b", [(0.1, 1.0 / 3.0)])
        lines = path.read_text().splitlines()
        assert lines[0] == "a,b"
        a, b = lines[1].split(",")
        assert float(a) == 0.1
        assert float(b) == 1.0 / 3.0

    def test_no_tmp_leftovers(self, tmp_path):
        write_csv_atomic(tmp_path / "x.csv", "h", [(1.0,)])
        assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]

    def test_complex_matrix(self, tmp_path):
        path = tmp_path / "k.csv"
        write_complex_matrix_csv(path, np.array([[1 + 2j, 3 - 4j]]))
        lines = path.read_text().splitlines()
        assert lines[0] == "re_0,im_0,re_1,im_1"
        assert [float(v) for v in lines[1].split(",")] == [1.0, 2.0, 3.0, -4.0]


class TestScalarComplex:
    def test_scalar_with_header(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("value\n1.5\n-2.0\n")
        np.testing.assert_array_equal(read_scalar_csv(path), [1.5, -2.0])

    def test_scalar_rejects_nan_with_line(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("1.0\nnan\n")
        with pytest.raises(IngestError, match=":2"):
            read_scalar_csv(path)

    def test_parse_error_line_number(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("1.0\n2.0\npotato\n")
        with pytest.raises(IngestError, match=":3"):
            read_scalar_csv(path)

    def test_complex(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("re,im\n1.0,2.0\n0.5,-0.5\n")
        np.testing.assert_array_equal(read_complex_csv(path),
                                      [1 + 2j, 0.5 - 0.5j])

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestError, match="not found"):
            read_scalar_csv(tmp_path / "nope.csv")


class TestNino34:
    def test_well_formed(self, tmp_path):
        path = tmp_path / "n.csv"
        path.write_text("year,month,value\n1999,11,0.5\n1999,12,0.6\n2000,1,0.7\n")
        months, values = read_nino34_csv(path)
        assert months == [(1999, 11), (1999, 12), (2000, 1)]
        np.testing.assert_allclose(values, [0.5, 0.6, 0.7])

    def test_gap_is_named(self, tmp_path):
        path = tmp_path / "n.csv"
        path.write_text("year,month,value\n1999,11,0.5\n2000,1,0.7\n")
        with pytest.raises(IngestError, match="1999-12"):
            read_nino34_csv(path)

    def test_bad_month(self, tmp_path):
        path = tmp_path / "n.csv"
        path.write_text("1999,13,0.5\n")
        with pytest.raises(IngestError, match="13"):
            read_nino34_csv(path)


class TestTrajectoryRoundTrip:
    def test_roundtrip(self, tmp_path):
        g = np.random.default_rng(1)
        traj = Trajectory(g.standard_normal((20, 3)), dt=0.25, seed=42,
                          meta={"system": "demo"})
        path = tmp_path / "traj.csv"
        write_trajectory_csv(path, traj)
        back = read_trajectory_csv(path)
        np.testing.assert_array_equal(back.states, traj.states)
        assert back.dt == 0.25
        assert back.seed == 42
        assert back.meta["system"] == "demo"

    def test_inconsistent_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(IngestError, match="column"):
            read_trajectory_csv(path)


class TestIngestDispatch:
    def test_unknown_format(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("1.0\n")
        with pytest.raises(ConfigError, match="unknown format"):
            ingest_series(path, "yaml")

    def test_dispatch(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("1.0\n2.0\n3.0\n")
        np.testing.assert_array_equal(ingest_series(path, "scalar_csv"),
                                      [1.0, 2.0, 3.0])
