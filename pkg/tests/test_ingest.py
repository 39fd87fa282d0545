"""CSV ingestion/cleaning and the dataset round-trip."""

import numpy as np
import pytest

from pfsgraph.data import BINARY, CONTINUOUS
from pfsgraph.errors import IngestError
from pfsgraph.ingest import IngestSpec, ingest, read_dataset, write_dataset
from pfsgraph.simulate import generate_instance


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@pytest.fixture
def csv_dir(tmp_path):
    return tmp_path


def _spec(path, **kw):
    base = dict(source=str(path), targets=("y",), max_missing_fraction=0.5,
                dedup_correlation=0.999, standardize=False)
    base.update(kw)
    return IngestSpec(**base)


def _numeric_rows(rng, n, cols):
    return [[round(float(v), 6) for v in rng.standard_normal(cols)] for _ in range(n)]


class TestCleaning:
    def test_duplicate_column_dropped_keeping_earlier(self, csv_dir):
        rng = np.random.default_rng(0)
        rows = []
        for _ in range(30):
            a = rng.standard_normal()
            rows.append([rng.standard_normal(), a, a, rng.standard_normal()])
        path = csv_dir / "dup.csv"
        write_csv(path, ["y", "a", "b", "c"], rows)
        matrix, summary = ingest(_spec(path))
        assert matrix.names == ("y", "a", "c")
        assert ("b", "|corr|>0.999 with a") in summary.dropped_columns

    def test_column_over_missing_threshold_dropped(self, csv_dir):
        rng = np.random.default_rng(1)
        rows = []
        for i in range(40):
            gap = "" if i % 5 < 3 else round(float(rng.standard_normal()), 6)  # 60% missing
            rows.append([round(float(rng.standard_normal()), 6), gap,
                         round(float(rng.standard_normal()), 6)])
        path = csv_dir / "miss.csv"
        write_csv(path, ["y", "holey", "b"], rows)
        matrix, summary = ingest(_spec(path, max_missing_fraction=0.5))
        assert "holey" not in matrix.names
        assert any(name == "holey" and "missing fraction" in why for name, why in summary.dropped_columns)

    def test_rows_missing_target_dropped(self, csv_dir):
        rng = np.random.default_rng(2)
        rows = _numeric_rows(rng, 15, 3)
        rows[4][0] = ""
        rows[9][0] = ""
        path = csv_dir / "rows.csv"
        write_csv(path, ["y", "a", "b"], rows)
        matrix, summary = ingest(_spec(path))
        assert matrix.n == 13
        assert summary.dropped_rows["missing_target"] == 2

    def test_row_policy_error(self, csv_dir):
        rng = np.random.default_rng(3)
        rows = _numeric_rows(rng, 12, 2)
        rows[3][0] = ""
        path = csv_dir / "rowerr.csv"
        write_csv(path, ["y", "a"], rows)
        with pytest.raises(IngestError, match="row 5"):
            ingest(_spec(path, row_policy="error"))

    def test_constant_column_dropped(self, csv_dir):
        rng = np.random.default_rng(4)
        rows = [[round(float(rng.standard_normal()), 6), 7.0,
                 round(float(rng.standard_normal()), 6)] for _ in range(20)]
        path = csv_dir / "const.csv"
        write_csv(path, ["y", "flat", "a"], rows)
        matrix, summary = ingest(_spec(path))
        assert "flat" not in matrix.names
        assert ("flat", "constant") in summary.dropped_columns

    def test_unparseable_cell_reports_coordinates(self, csv_dir):
        rng = np.random.default_rng(5)
        rows = _numeric_rows(rng, 12, 2)
        rows[6][1] = "oops"
        path = csv_dir / "bad.csv"
        write_csv(path, ["y", "a"], rows)
        with pytest.raises(IngestError, match=r"row 8.*column 'a'"):
            ingest(_spec(path))

    def test_missing_target_column_rejected(self, csv_dir):
        rng = np.random.default_rng(6)
        path = csv_dir / "notarget.csv"
        write_csv(path, ["a", "b"], _numeric_rows(rng, 12, 2))
        with pytest.raises(IngestError, match="target column 'y'"):
            ingest(_spec(path))

    def test_missing_file_is_ingest_error(self, csv_dir):
        with pytest.raises(IngestError, match="cannot open"):
            ingest(_spec(csv_dir / "nope.csv"))

    def test_row_permutation_changes_nothing_but_row_order(self, csv_dir):
        rng = np.random.default_rng(7)
        rows = _numeric_rows(rng, 25, 4)
        p1, p2 = csv_dir / "a.csv", csv_dir / "b.csv"
        write_csv(p1, ["y", "a", "b", "c"], rows)
        perm = list(np.random.default_rng(8).permutation(len(rows)))
        write_csv(p2, ["y", "a", "b", "c"], [rows[i] for i in perm])
        m1, s1 = ingest(_spec(p1))
        m2, s2 = ingest(_spec(p2))
        assert m1.names == m2.names
        assert s1.dropped_columns == s2.dropped_columns
        assert np.allclose(np.sort(m1.values, axis=0), np.sort(m2.values, axis=0))


class TestEncodingAndKinds:
    def test_one_vs_rest_target_expansion(self, csv_dir):
        rng = np.random.default_rng(9)
        stages = ["I", "II", "III"]
        rows = [[stages[i % 3], round(float(rng.standard_normal()), 6),
                 round(float(rng.standard_normal()), 6)] for i in range(30)]
        path = csv_dir / "ovr.csv"
        write_csv(path, ["stage", "a", "b"], rows)
        spec = IngestSpec(source=str(path), targets=("stage",), one_vs_rest=("stage",))
        matrix, summary = ingest(spec)
        assert summary.encoded_columns["stage"] == ["stage=I", "stage=II", "stage=III"]
        assert summary.target_columns == ["stage=I", "stage=II", "stage=III"]
        assert matrix.kinds[matrix.names.index("stage=I")] == BINARY

    def test_binary_detection_and_override(self, csv_dir):
        rng = np.random.default_rng(10)
        rows = [[round(float(rng.standard_normal()), 6), float(i % 2)] for i in range(24)]
        path = csv_dir / "kinds.csv"
        write_csv(path, ["y", "flag"], rows)
        matrix, _ = ingest(_spec(path))
        assert matrix.kind(2) == BINARY
        forced, _ = ingest(_spec(path, kind_overrides={"flag": CONTINUOUS}))
        assert forced.kind(2) == CONTINUOUS

    def test_binary_override_on_many_valued_column_rejected(self, csv_dir):
        rng = np.random.default_rng(11)
        path = csv_dir / "badkind.csv"
        write_csv(path, ["y", "a"], _numeric_rows(rng, 15, 2))
        with pytest.raises(IngestError, match="binary"):
            ingest(_spec(path, kind_overrides={"a": BINARY}))

    def test_standardize_records_center_scale(self, csv_dir):
        rng = np.random.default_rng(12)
        rows = _numeric_rows(rng, 30, 3)
        path = csv_dir / "std.csv"
        write_csv(path, ["y", "a", "b"], rows)
        matrix, _ = ingest(_spec(path, standardize=True))
        assert np.allclose(matrix.values.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(matrix.values.std(axis=0), 1.0, atol=1e-12)
        assert matrix.center is not None and matrix.scale is not None


class TestRoundTrip:
    def test_simulated_instance_round_trips_bit_identically(self, tmp_path):
        inst = generate_instance("fig1", n=60, p=20, seed=13)
        path = tmp_path / "data.csv"
        write_dataset(inst.samples, path)
        spec = IngestSpec(source=str(path), targets=("X1",),
                          max_missing_fraction=1.0, dedup_correlation=1.0)
        matrix, summary = ingest(spec)
        assert matrix.names == inst.samples.names
        assert matrix.kinds == inst.samples.kinds
        assert np.array_equal(matrix.values, inst.samples.values)
        assert summary.dropped_columns == []

    def test_read_dataset_strict(self, tmp_path):
        inst = generate_instance("fig1", n=40, p=12, seed=14)
        path = tmp_path / "data.csv"
        write_dataset(inst.samples, path)
        matrix = read_dataset(path)
        assert np.array_equal(matrix.values, inst.samples.values)
        broken = path.read_text().replace(repr(float(inst.samples.values[3, 2])), "", 1)
        path.write_text(broken)
        with pytest.raises(IngestError):
            read_dataset(path)
