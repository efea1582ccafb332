import numpy as np
import pytest

from reach_al.config import apply_overrides, default_config
from reach_al.report import (
    ExperimentGrid,
    ResultRow,
    emit_curve_plots,
    emit_envelope_plots,
    format_summary_table,
    read_results,
    run_grid,
    summarize,
    write_results,
)

TINY_OVERRIDES = {
    "scene.n_images": "120",
    "data.n_samples": "300",
    "data.pool_size": "400",
    "forest.n_trees": "15",
    "al.batch_size": "10",
    "grid.strategies": "random, entropy",
    "grid.init_sizes": "10",
    "grid.budgets": "20",
    "grid.seeds": "0, 1",
}


@pytest.fixture(scope="module")
def tiny_grid():
    cfg = apply_overrides(default_config(), TINY_OVERRIDES)
    return ExperimentGrid.from_config(cfg)


@pytest.fixture(scope="module")
def tiny_results(tiny_grid, tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("sweep")
    results_path, summary_path, errors = run_grid(tiny_grid, out_dir)
    assert errors == []
    return results_path, summary_path


class TestRunGrid:
    def test_row_count(self, tiny_results):
        rows = read_results(tiny_results[0])
        # 2 strategies x 2 seeds, each with round 0 plus 2 batches of 10.
        assert len(rows) == 2 * 2 * 3

    def test_deterministic_files(self, tiny_grid, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        pa, sa, _ = run_grid(tiny_grid, a)
        pb, sb, _ = run_grid(tiny_grid, b)
        assert open(pa, "rb").read() == open(pb, "rb").read()
        assert open(sa, "rb").read() == open(sb, "rb").read()

    def test_parallel_matches_serial(self, tiny_grid, tiny_results, tmp_path):
        out = tmp_path / "par"
        path, _, errors = run_grid(tiny_grid, out, jobs=2)
        assert errors == []
        assert open(path, "rb").read() == open(tiny_results[0], "rb").read()

    def test_results_reparse_identically(self, tiny_results):
        rows = read_results(tiny_results[0])
        assert all(isinstance(r, ResultRow) for r in rows)
        assert all(r.accuracy is not None for r in rows if r.round >= 0)

    def test_write_read_round_trip(self, tiny_results, tmp_path):
        rows = read_results(tiny_results[0])
        path = tmp_path / "copy.csv"
        write_results(path, rows)
        assert open(path, "rb").read() == open(tiny_results[0], "rb").read()


class TestSummary:
    def test_summary_matches_recomputation(self, tiny_results):
        rows = read_results(tiny_results[0])
        summary = summarize(rows)
        for cell in summary:
            finals = {}
            for r in rows:
                if r.strategy != cell["strategy"] or r.init_size != cell["init_size"]:
                    continue
                if r.budget != cell["budget"] or r.round < 0:
                    continue
                cur = finals.get(r.seed)
                if cur is None or r.round > cur.round:
                    finals[r.seed] = r
            accs = [r.accuracy for r in finals.values()]
            assert cell["n_seeds"] == len(accs)
            assert abs(cell["accuracy_mean"] - np.mean(accs)) <= 1e-9
            assert abs(cell["accuracy_std"] - np.std(accs, ddof=1)) <= 1e-9

    def test_table_formatting(self, tiny_results):
        rows = read_results(tiny_results[0])
        table = format_summary_table(summarize(rows))
        assert "entropy" in table and "random" in table
        assert "budget" in table.splitlines()[0]


class TestPlots:
    def test_curve_plots_one_per_combo(self, tiny_results, tmp_path):
        written = emit_curve_plots(tiny_results[0], tmp_path / "plots")
        assert len(written) == 1
        svg = open(written[0]).read()
        assert svg.startswith("<svg") and "polyline" in svg
        assert 'stroke-dasharray' in svg  # random drawn dashed

    def test_envelope_plots_three_views(self, tmp_path):
        rng = np.random.default_rng(0)
        env = rng.uniform(0, 1, size=(500, 3))
        fruit = rng.uniform(0, 1, size=(40, 3))
        labels = rng.integers(0, 2, size=40)
        written = emit_envelope_plots(env, tmp_path, fruit, labels)
        names = {p.split("/")[-1] for p in written}
        assert names == {"envelope_top.svg", "envelope_side.svg", "envelope_front.svg"}

    def test_empty_results_no_plots(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_results(path, [])
        assert emit_curve_plots(path, tmp_path / "plots") == []
