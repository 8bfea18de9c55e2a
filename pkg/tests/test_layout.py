import random

import pytest

from bullion.errors import MissingScoreColumn, NonNumericScore, UnknownColumn
from bullion.layout import ColumnOrderSpec, RowOrderSpec, reorder_columns, reorder_rows


class TestReorderRows:
    def test_stable_descending(self):
        batch = {"q": [0.2, 0.9, 0.9, 0.1], "x": ["a", "b", "c", "d"]}
        perm, out = reorder_rows(batch, RowOrderSpec("quality_desc", "q"))
        assert perm == [1, 2, 0, 3]
        assert out["q"] == [0.9, 0.9, 0.2, 0.1]
        assert out["x"] == ["b", "c", "a", "d"]

    def test_sorted_input_identity(self):
        batch = {"q": [5.0, 4.0, 3.0], "x": [1, 2, 3]}
        perm, out = reorder_rows(batch, RowOrderSpec("quality_desc", "q"))
        assert perm == [0, 1, 2]
        assert out == batch

    def test_rows_stay_aligned(self):
        rng = random.Random(0)
        n = 300
        batch = {
            "q": [rng.random() for _ in range(n)],
            "a": [rng.randrange(1000) for _ in range(n)],
            "b": [str(i) for i in range(n)],
        }
        rows = set(zip(batch["q"], batch["a"], batch["b"]))
        perm, out = reorder_rows(batch, RowOrderSpec("quality_desc", "q"))
        assert sorted(perm) == list(range(n))
        assert set(zip(out["q"], out["a"], out["b"])) == rows
        assert out["q"] == sorted(batch["q"], reverse=True)

    def test_none_mode_is_identity(self):
        batch = {"a": [3, 1, 2]}
        perm, out = reorder_rows(batch, RowOrderSpec())
        assert perm == [0, 1, 2]
        assert out == batch

    def test_missing_score_column(self):
        with pytest.raises(MissingScoreColumn):
            reorder_rows({"a": [1]}, RowOrderSpec("quality_desc", "q"))

    def test_non_numeric_score(self):
        with pytest.raises(NonNumericScore):
            reorder_rows({"q": [1.0, "x"]}, RowOrderSpec("quality_desc", "q"))
        with pytest.raises(NonNumericScore):
            reorder_rows({"q": [1.0, float("nan")]}, RowOrderSpec("quality_desc", "q"))


class TestReorderColumns:
    def test_ranked_first_rest_schema_order(self):
        spec = ColumnOrderSpec("frequency", ("c",))
        assert reorder_columns(["a", "b", "c"], spec) == ["c", "a", "b"]

    def test_empty_ranking(self):
        spec = ColumnOrderSpec("frequency", ())
        assert reorder_columns(["a", "b"], spec) == ["a", "b"]

    def test_schema_order_mode(self):
        assert reorder_columns(["a", "b"], ColumnOrderSpec()) == ["a", "b"]

    def test_unknown_column_rejected(self):
        with pytest.raises(UnknownColumn):
            reorder_columns(["a"], ColumnOrderSpec("frequency", ("zz",)))

    def test_duplicate_ranking_collapses(self):
        spec = ColumnOrderSpec("frequency", ("b", "b", "a"))
        assert reorder_columns(["a", "b", "c"], spec) == ["b", "a", "c"]
