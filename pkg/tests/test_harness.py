"""File formats, verification sweep, bench plumbing, CLI."""

import numpy as np
import pytest

from gridknn import (Associations, KnnOptions, NeighborMatrix, PointCloud,
                     RowSplits, brute_force_knn, oc_helper)
from gridknn.errors import (FileFormatError, VerificationFailedError)
from gridknn.harness import bench as bench_mod
from gridknn.harness import cli, fileio
from gridknn.harness.datasets import (even_row_splits, generate_associations,
                                      generate_dataset)
from gridknn.harness.verify import (compare_knn_results, distance_checksum,
                                    format_report, raise_on_failure,
                                    run_verification_sweep, sort_neighbor_rows)


class TestDatasets:
    def test_even_row_splits(self):
        assert even_row_splits(10, 2).offsets.tolist() == [0, 5, 10]
        assert even_row_splits(11, 3).offsets.tolist() == [0, 4, 8, 11]
        assert even_row_splits(3, 3).offsets.tolist() == [0, 1, 2, 3]

    def test_generate_deterministic(self):
        a = generate_dataset(50, 3, splits=2, seed=5)
        b = generate_dataset(50, 3, splits=2, seed=5)
        assert np.array_equal(a.coords, b.coords)
        c = generate_dataset(50, 3, splits=2, seed=6)
        assert not np.array_equal(a.coords, c.coords)

    def test_uniform_range_and_mean(self):
        pc = generate_dataset(20000, 2, seed=1)
        assert pc.coords.min() >= 0.0
        assert pc.coords.max() < 1.0
        assert abs(pc.coords.mean() - 0.5) < 0.01

    def test_clusters_mode(self):
        pc = generate_dataset(1000, 3, splits=2, seed=2,
                              distribution="clusters")
        assert pc.n_vertices == 1000
        # clustered points concentrate: sample variance well under uniform's
        assert pc.coords.var() < 1.0 / 12.0

    def test_generate_associations(self):
        a = generate_associations(200, splits=2, n_objects=6, seed=3)
        assert a.n_vertices == 200
        assert a.asso_idx.min() >= -1
        # representatives always belong to themselves
        reps = a.asso_idx[a.asso_idx >= 0]
        assert reps.size > 0


class TestPointFiles:
    def test_binary_roundtrip(self, tmp_path):
        pc = generate_dataset(40, 3, splits=2, seed=4)
        path = tmp_path / "pts.fgc"
        fileio.write_point_cloud(path, pc)
        back = fileio.read_point_cloud(path)
        assert back.row_splits == pc.row_splits
        # storage is f32
        assert np.array_equal(back.coords,
                              pc.coords.astype(np.float32).astype(np.float64))

    def test_csv_roundtrip(self, tmp_path):
        pc = generate_dataset(15, 2, splits=3, seed=5)
        path = tmp_path / "pts.csv"
        fileio.write_point_cloud(path, pc)
        back = fileio.read_point_cloud(path)
        assert back.row_splits == pc.row_splits
        assert np.array_equal(back.coords, pc.coords)  # repr round-trips f64

    def test_csv_without_splits_line(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("0.0,1.0\n2.0,3.0\n")
        back = fileio.read_point_cloud(path)
        assert back.row_splits.offsets.tolist() == [0, 2]
        assert back.coords.tolist() == [[0.0, 1.0], [2.0, 3.0]]

    def test_csv_comments_and_blanks(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("# header\nsplits:0,1\n\n0.5,0.5\n")
        back = fileio.read_point_cloud(path)
        assert back.n_vertices == 1

    def test_empty_csv_rejected(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("# nothing\n")
        with pytest.raises(FileFormatError):
            fileio.read_point_cloud(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "pts.fgc"
        path.write_bytes(b"NOPE" + b"\0" * 40)
        with pytest.raises(FileFormatError):
            fileio.read_point_cloud(path)

    def test_truncated(self, tmp_path):
        pc = generate_dataset(40, 3, seed=6)
        path = tmp_path / "pts.fgc"
        fileio.write_point_cloud(path, pc)
        data = path.read_bytes()
        path.write_bytes(data[:len(data) // 2])
        with pytest.raises(FileFormatError):
            fileio.read_point_cloud(path)


class TestNeighborFiles:
    def test_roundtrip(self, tmp_path):
        pc = generate_dataset(30, 3, seed=7)
        nm = brute_force_knn(pc, KnnOptions(k=5))
        path = tmp_path / "nbr.fgn"
        fileio.write_neighbors(path, nm)
        back = fileio.read_neighbors(path)
        assert np.array_equal(back.indices, nm.indices)
        assert np.array_equal(back.dist2,
                              nm.dist2.astype(np.float32).astype(np.float64))

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "nbr.fgn"
        path.write_bytes(b"XXXX" + b"\0" * 16)
        with pytest.raises(FileFormatError):
            fileio.read_neighbors(path)


class TestAssociationFiles:
    def test_roundtrip(self, tmp_path):
        a = generate_associations(60, splits=2, seed=8)
        path = tmp_path / "a.fga"
        fileio.write_associations(path, a)
        back = fileio.read_associations(path)
        assert np.array_equal(back.asso_idx, a.asso_idx)
        assert back.row_splits == a.row_splits

    def test_rejects_ids_beyond_i32(self, tmp_path):
        a = Associations(np.array([2 ** 40], dtype=np.int64), RowSplits([0, 1]))
        with pytest.raises(FileFormatError):
            fileio.write_associations(tmp_path / "a.fga", a)

    def test_matrices_roundtrip(self, tmp_path):
        a = generate_associations(80, splits=2, n_objects=5, seed=9)
        m = oc_helper(a)
        path = tmp_path / "m.fgm"
        fileio.write_assoc_matrices(path, m)
        back = fileio.read_assoc_matrices(path)
        assert np.array_equal(back.m, m.m)
        assert np.array_equal(back.m_not, m.m_not)
        assert back.visit_count == m.visit_count
        assert np.array_equal(back.unique.unique_idx, m.unique.unique_idx)
        assert np.array_equal(back.unique.unique_rs_asso, m.unique.unique_rs_asso)

    def test_matrices_without_m_not(self, tmp_path):
        a = generate_associations(50, seed=10)
        m = oc_helper(a, calc_m_not=False)
        path = tmp_path / "m.fgm"
        fileio.write_assoc_matrices(path, m)
        back = fileio.read_assoc_matrices(path)
        assert back.m_not is None
        assert np.array_equal(back.m, m.m)


class TestVerifyHelpers:
    def test_sort_neighbor_rows(self):
        nm = NeighborMatrix(
            np.array([[0, 2, 1, -1]], dtype=np.int32),
            np.array([[0.0, 0.5, 0.25, 0.0]]))
        s = sort_neighbor_rows(nm)
        assert s.indices.tolist() == [[0, 1, 2, -1]]
        assert s.dist2.tolist() == [[0.0, 0.25, 0.5, 0.0]]

    def test_checksum_ignores_slot_order(self):
        a = NeighborMatrix(np.array([[0, 1, 2]], dtype=np.int32),
                           np.array([[0.0, 0.7, 0.3]]))
        b = NeighborMatrix(np.array([[0, 2, 1]], dtype=np.int32),
                           np.array([[0.0, 0.3, 0.7]]))
        assert distance_checksum(a) == distance_checksum(b)

    def test_checksum_sees_value_changes(self):
        a = NeighborMatrix(np.array([[0, 1]], dtype=np.int32),
                           np.array([[0.0, 0.5]]))
        b = NeighborMatrix(np.array([[0, 1]], dtype=np.int32),
                           np.array([[0.0, 0.5000001]]))
        assert distance_checksum(a) != distance_checksum(b)

    def test_compare_accepts_exact_match(self):
        pc = generate_dataset(100, 3, seed=11)
        got = brute_force_knn(pc, KnnOptions(k=4))
        ref = brute_force_knn(pc, KnnOptions(k=5))
        ok, n_bad, first = compare_knn_results(got, ref, 4)
        assert ok and n_bad == 0 and first == -1

    def test_compare_flags_wrong_distances(self):
        pc = generate_dataset(50, 2, seed=12)
        got = brute_force_knn(pc, KnnOptions(k=3))
        ref = brute_force_knn(pc, KnnOptions(k=4))
        wrong = NeighborMatrix(got.indices, got.dist2 * 1.001)
        ok, n_bad, first = compare_knn_results(wrong, ref, 3, rtol=1e-5)
        assert not ok and n_bad > 0 and first >= 0

    def test_sweep_small_grid(self):
        cells, all_ok = run_verification_sweep(
            dims=[2, 3], sizes=[60, 150], ks=[1, 4], splits_list=[1, 2],
            seed=0)
        assert all_ok
        assert len(cells) == 16
        for c in cells:
            assert c.checksum_binned == c.checksum_brute
        report = format_report(cells)
        assert report.splitlines()[0].startswith("d,n,k,splits")
        assert len(report.splitlines()) == 17
        raise_on_failure(cells, all_ok)  # no exception

    def test_sweep_report_deterministic(self):
        kw = dict(dims=[2], sizes=[80], ks=[3], splits_list=[1], seed=9)
        cells1, _ = run_verification_sweep(**kw)
        cells2, _ = run_verification_sweep(**kw)
        assert format_report(cells1) == format_report(cells2)

    def test_raise_on_failure(self):
        cells, _ = run_verification_sweep(dims=[2], sizes=[50], ks=[2],
                                          splits_list=[1])
        bad = [type(cells[0])(2, 50, 2, 1, "x", "y", False)]
        with pytest.raises(VerificationFailedError):
            raise_on_failure(bad, False)


class TestBench:
    def test_plan_validation(self):
        with pytest.raises(Exception):
            bench_mod.BenchPlan(sizes=())
        with pytest.raises(Exception):
            bench_mod.BenchPlan(repeats=0)
        with pytest.raises(Exception):
            bench_mod.BenchPlan(methods=("quantum",))

    def test_run_bench_and_roundtrip(self):
        plan = bench_mod.BenchPlan(sizes=(300,), dims=(3,), ks=(4,),
                                   repeats=2, measure_mem=False)
        records = bench_mod.run_bench(plan)
        assert len(records) == 2  # one per method
        by_method = {r.method: r for r in records}
        assert by_method["binned"].checksum == by_method["brute"].checksum
        assert all(r.time_s > 0 and r.qps > 0 for r in records)

        for fmt in ("csv", "jsonl"):
            text = bench_mod.emit_results(records, fmt)
            back = bench_mod.parse_results(text)
            assert back == list(records)

    def test_memory_measurement(self):
        pc = generate_dataset(2000, 3, seed=13)
        mem = bench_mod.measure_knn_memory(pc, 5, "binned")
        assert mem >= 0


class TestCli:
    def test_gen_knn_verify_pipeline(self, tmp_path, capsys):
        pts = str(tmp_path / "pts.fgc")
        out = str(tmp_path / "nbr.fgn")
        assert cli.main(["gen", "--n", "500", "--dim", "3", "--splits", "2",
                         "--seed", "1", "--out", pts]) == 0
        assert cli.main(["knn", pts, "--k", "6", "--out", out]) == 0
        nm = fileio.read_neighbors(out)
        assert nm.n_vertices == 500 and nm.k == 6

        brute_out = str(tmp_path / "brute.fgn")
        assert cli.main(["knn", pts, "--k", "6", "--method", "brute",
                         "--out", brute_out]) == 0
        ref = fileio.read_neighbors(brute_out)
        assert np.array_equal(np.sort(nm.dist2, axis=1),
                              np.sort(ref.dist2, axis=1))

    def test_gen_deterministic_bytes(self, tmp_path):
        a = str(tmp_path / "a.fgc")
        b = str(tmp_path / "b.fgc")
        cli.main(["gen", "--n", "100", "--dim", "2", "--seed", "9", "--out", a])
        cli.main(["gen", "--n", "100", "--dim", "2", "--seed", "9", "--out", b])
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_verify_subcommand(self, tmp_path):
        report = str(tmp_path / "report.csv")
        code = cli.main(["verify", "--dims", "2,3", "--sizes", "80",
                         "--ks", "2", "--splits-list", "1", "--quiet",
                         "--out", report])
        assert code == 0
        lines = open(report).read().splitlines()
        assert len(lines) == 3

    def test_bench_subcommand(self, tmp_path):
        out = str(tmp_path / "bench.csv")
        code = cli.main(["bench", "--sizes", "200", "--dims", "2",
                         "--ks", "3", "--repeats", "1", "--no-mem",
                         "--out", out])
        assert code == 0
        records = bench_mod.parse_results(open(out).read())
        assert {r.method for r in records} == {"binned", "brute"}

    def test_ochelper_subcommand(self, tmp_path):
        a = generate_associations(60, splits=2, seed=14)
        fga = str(tmp_path / "a.fga")
        fgm = str(tmp_path / "m.fgm")
        fileio.write_associations(fga, a)
        assert cli.main(["ochelper", fga, "--out", fgm]) == 0
        m = fileio.read_assoc_matrices(fgm)
        ref = oc_helper(a)
        assert np.array_equal(m.m, ref.m)

    def test_usage_errors_exit_1(self, capsys):
        assert cli.main(["knn"]) == 1                      # missing args
        assert cli.main(["gen", "--n", "x", "--dim", "2",
                         "--out", "p"]) == 1               # bad int
        assert cli.main([]) == 1                           # no subcommand
        capsys.readouterr()

    def test_missing_file_exits_3(self, tmp_path, capsys):
        out = str(tmp_path / "o.fgn")
        assert cli.main(["knn", str(tmp_path / "absent.fgc"),
                         "--k", "3", "--out", out]) == 3
        capsys.readouterr()

    def test_bad_format_exits_3(self, tmp_path, capsys):
        bad = tmp_path / "bad.fgc"
        bad.write_bytes(b"JUNKJUNKJUNK")
        assert cli.main(["knn", str(bad), "--k", "3",
                         "--out", str(tmp_path / "o.fgn")]) == 3
        capsys.readouterr()

    def test_verification_failure_exits_2(self, monkeypatch, capsys):
        def fake_sweep(*args, **kwargs):
            cell = type("C", (), dict(d=2, n=10, k=2, splits=1,
                                      checksum_binned="a",
                                      checksum_brute="b", ok=False))()
            return [cell], False
        monkeypatch.setattr(cli.verify_mod, "run_verification_sweep",
                            fake_sweep)
        assert cli.main(["verify", "--quiet"]) == 2
        capsys.readouterr()

    def test_invalid_k_exits_1(self, tmp_path, capsys):
        pts = str(tmp_path / "p.fgc")
        cli.main(["gen", "--n", "20", "--dim", "2", "--out", pts])
        assert cli.main(["knn", pts, "--k", "0",
                         "--out", str(tmp_path / "o.fgn")]) == 1
        capsys.readouterr()
