from bullion.bench import bench_delete, bench_footer, delete_target_rows


class TestDeleteBench:
    def test_clustered_small_fraction_beats_full_rewrite(self, tmp_path):
        report = bench_delete(pages_per_column=20, rows_per_page=100, columns=1,
                              fraction=0.05, modes=("clustered",), workdir=tmp_path)
        ratio = report.value("clustered", "rewrite_ratio")
        assert ratio < 0.5
        assert report.value("clustered", "pages_rewritten") == 1
        assert report.value("clustered", "io_reduction_vs_full_rewrite") > 2

    def test_full_deletion_ratio_approaches_one(self, tmp_path):
        report = bench_delete(pages_per_column=20, rows_per_page=100, columns=1,
                              fraction=1.0, modes=("clustered",), workdir=tmp_path)
        ratio = report.value("clustered", "rewrite_ratio")
        assert 0.9 <= ratio <= 1.0
        assert report.value("clustered", "bytes_rewritten") <= \
            report.value("clustered", "file_bytes")

    def test_scattered_deletion_is_the_worst_case(self, tmp_path):
        report = bench_delete(pages_per_column=20, rows_per_page=100, columns=1,
                              fraction=0.02, modes=("clustered", "scattered"),
                              workdir=tmp_path)
        scattered = report.value("scattered", "rewrite_ratio")
        clustered = report.value("clustered", "rewrite_ratio")
        assert scattered > 0.8  # every page touched
        assert clustered < scattered

    def test_target_rows_clamped(self):
        rows = delete_target_rows(100, 10, 1.0, "clustered")
        assert rows == list(range(100))
        rows = delete_target_rows(100, 10, 0.02, "scattered")
        assert len(rows) == 2 and all(r < 100 for r in rows)


class TestFooterBench:
    def test_report_rows_one_per_metric(self, tmp_path):
        report = bench_footer([30, 90], trials=2, workdir=tmp_path)
        keys = [(p, m) for p, m, _, _ in report.rows]
        assert len(keys) == len(set(keys))
        assert {p for p, _ in keys} == {30, 90}
        csv_text = report.to_csv()
        assert csv_text.splitlines()[0] == "parameter,metric,value,unit"
        assert len(csv_text.splitlines()) == 1 + len(report.rows)
