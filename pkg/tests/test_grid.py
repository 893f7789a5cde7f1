"""
Tests for the grid engine, its CSV output and the heatmap/scaling analysis
"""

import numpy as np
import pandas as pd
import pytest

from src.analysis import (
    doubling_ratios,
    fit_scaling_models,
    preferred_model,
    read_heatmap_annotations,
    tau_spread,
    write_grid_heatmaps,
    write_heatmap_svg,
)
from src.errors import ConfigurationError, UsageError
from src.experiments import (
    GRID_COLUMNS,
    cell_setup,
    experiment_from_dict,
    grid_cells,
    load_experiment_config,
    pool_size,
    replication_seed,
    run_grid,
    write_grid_csv,
)
from src.utils.config_loader import get_project_root
from src.utils.io_utils import read_csv


@pytest.fixture
def small_grid(small_grid_config):
    return experiment_from_dict(small_grid_config)


def _synthetic_grid(model: str) -> pd.DataFrame:
    rows = []
    for sigma2 in (1e-3, 1e-5):
        for d in (1, 2, 4, 8):
            for tau in (1, 2, 4, 8):
                x = d + tau if model == 'sum' else d * tau
                rows.append({'d': d, 'tau': tau, 'sigma2': sigma2, 'mean_error': sigma2 * (1.0 + x),
                             'se_error': 0.0, 'mean_oracle_calls': 10.0, 'seed_base': 0})
    return pd.DataFrame(rows, columns=GRID_COLUMNS)


class TestGridEngine:

    def test_cells_and_seeds(self, small_grid):
        cells = grid_cells(small_grid)
        assert [(c.d, c.tau) for c in cells] == [(1, 1), (1, 4), (2, 1), (2, 4)]
        seed = replication_seed(11, cells[1], 2)
        assert seed.entropy == [11, 1, 4, 0, 2]

    def test_cell_setup(self, small_grid):
        problem, chain, params = cell_setup(small_grid, 2, 4, 1e-3)
        assert problem.dim == 2
        assert chain.tau_hold == 4
        assert chain.noise_std == pytest.approx(np.sqrt(1e-3 / 2))
        assert params.gamma == 1e-2
        assert params.p == pytest.approx(1.0 / 3.0)

    def test_theorem_tuned_cells(self, small_grid_config):
        small_grid_config['optimizer'].update({'gamma': 'auto', 'epsilon': 1e-6})
        small_grid_config['estimator']['t'] = 'auto'
        _, _, params = cell_setup(experiment_from_dict(small_grid_config), 2, 1, 1e-3)
        assert params.gamma == pytest.approx(0.75)
        assert params.t == pytest.approx(1e-3)

    def test_grid_rows(self, small_grid):
        frame = run_grid(small_grid, threads=1)
        assert list(frame.columns) == GRID_COLUMNS
        assert len(frame) == 4
        assert np.all(np.isfinite(frame['mean_error']))
        assert np.all(frame['se_error'] >= 0)
        assert (frame['seed_base'] == 11).all()
        assert np.all(frame['mean_oracle_calls'] > 0)

    def test_deterministic_across_pool_sizes(self, small_grid):
        serial = run_grid(small_grid, threads=1)
        pooled = run_grid(small_grid, threads=2)
        pd.testing.assert_frame_equal(serial, pooled)

    def test_divergent_cells_are_nan(self, small_grid_config, tmp_path):
        # chain values of size 1e6 push ||x|| past the divergence guard
        small_grid_config['problem']['dim_grid'] = [1]
        small_grid_config['chain']['tau_grid'] = [1]
        small_grid_config['chain']['sigma2_grid'] = [1e12]
        small_grid_config['optimizer'].update({'gamma': 0.75, 'p': 1.0, 'N': 200, 'replications': 2})
        frame = run_grid(experiment_from_dict(small_grid_config), threads=1)
        assert np.isnan(frame.loc[0, 'mean_error'])
        assert np.isnan(frame.loc[0, 'se_error'])

        path = write_grid_csv(frame, tmp_path / "nan.csv")
        assert "nan" in path.read_text(encoding="utf-8").splitlines()[1]
        assert np.isnan(read_csv(path).loc[0, 'mean_error'])

    def test_csv_layout(self, small_grid, tmp_path):
        frame = run_grid(small_grid, threads=1)
        path = write_grid_csv(frame, tmp_path / "out" / "grid.csv")
        lines = path.read_bytes().split(b"\n")
        assert lines[0] == b"d,tau,sigma2,mean_error,se_error,mean_oracle_calls,seed_base"
        assert b"\r" not in path.read_bytes()
        reread = read_csv(path)
        np.testing.assert_allclose(reread['mean_error'], frame['mean_error'], rtol=1e-9)

    def test_pool_size(self, monkeypatch):
        monkeypatch.setenv("MZ_THREADS", "3")
        assert pool_size(10) == 3
        assert pool_size(2) == 2
        assert pool_size(10, threads=1) == 1
        monkeypatch.setenv("MZ_THREADS", "many")
        with pytest.raises(ConfigurationError):
            pool_size(10)
        monkeypatch.setenv("MZ_THREADS", "0")
        with pytest.raises(ConfigurationError):
            pool_size(10)


class TestHeatmaps:

    def test_annotations_round_trip(self, tmp_path):
        frame = _synthetic_grid('sum')
        frame.loc[3, 'mean_error'] = np.nan
        path = write_heatmap_svg(frame, 1e-3, tmp_path / "hm.svg")
        cells = read_heatmap_annotations(path)
        assert list(cells.columns) == ['d', 'tau', 'value']
        assert len(cells) == 16

        expected = frame[frame['sigma2'] == 1e-3].set_index(['d', 'tau'])['mean_error']
        for row in cells.itertuples():
            value = expected[(row.d, row.tau)]
            if np.isnan(value):
                assert np.isnan(row.value)
            else:
                assert row.value == pytest.approx(value, rel=5e-6)

    def test_svg_is_reproducible(self, tmp_path):
        frame = _synthetic_grid('sum')
        first = write_heatmap_svg(frame, 1e-5, tmp_path / "a.svg").read_bytes()
        second = write_heatmap_svg(frame, 1e-5, tmp_path / "b.svg").read_bytes()
        assert first == second

    def test_one_file_per_noise_level(self, tmp_path):
        paths = write_grid_heatmaps(_synthetic_grid('sum'), tmp_path, prefix="hm")
        assert [p.name for p in paths] == ["hm_sigma2_0.001.svg", "hm_sigma2_1e-05.svg"]
        assert all(p.exists() for p in paths)

    def test_unknown_noise_level(self, tmp_path):
        with pytest.raises(UsageError):
            write_heatmap_svg(_synthetic_grid('sum'), 0.5, tmp_path / "x.svg")

    def test_missing_annotations(self, tmp_path):
        path = tmp_path / "plain.svg"
        path.write_text("<svg></svg>", encoding="utf-8")
        with pytest.raises(UsageError):
            read_heatmap_annotations(path)


class TestScaling:

    @pytest.mark.parametrize("model,expected", [('sum', 'd_plus_tau'), ('product', 'd_times_tau')])
    def test_preferred_model(self, model, expected):
        fits = fit_scaling_models(_synthetic_grid(model))
        assert set(fits['model']) == {'d_plus_tau', 'd_times_tau'}
        assert set(preferred_model(fits).values()) == {expected}

    def test_exact_additive_fit(self):
        fits = fit_scaling_models(_synthetic_grid('sum'))
        row = fits[(fits['model'] == 'd_plus_tau') & (fits['sigma2'] == 1e-3)].iloc[0]
        assert row['slope'] == pytest.approx(1e-3)
        assert row['intercept'] == pytest.approx(1e-3)
        assert row['r_squared'] == pytest.approx(1.0)
        assert row['n_cells'] == 16

    def test_doubling_ratios(self):
        ratios = doubling_ratios(_synthetic_grid('product'))
        # (1 + 2 d tau) / (1 + d tau) for every (d, 2d) pair on the grid
        assert len(ratios) == 2 * 3 * 4
        first = ratios[(ratios['d'] == 1) & (ratios['tau'] == 1)].iloc[0]
        assert first['ratio'] == pytest.approx(3.0 / 2.0)

    def test_tau_spread(self):
        spread = tau_spread(_synthetic_grid('sum'))
        row = spread[(spread['sigma2'] == 1e-5) & (spread['d'] == 1)].iloc[0]
        assert row['spread'] == pytest.approx((10.0 - 3.0) / 3.0)

    def test_missing_columns(self):
        with pytest.raises(UsageError):
            fit_scaling_models(pd.DataFrame({'d': [1], 'tau': [1]}))


@pytest.mark.slow
class TestAcceptance:

    def test_default_grid_pattern_on_a_reduced_grid(self):
        # shipped settings (gamma 1e-3, t 1e-5, N 1000, 200 replications) on a 3 x 3 sub-grid
        config = load_experiment_config(get_project_root() / "config" / "experiment.yaml",
                                        overrides={'problem.dim_grid': "2,8,32", 'chain.tau_grid': "1,8,32"})
        frame = run_grid(config)
        assert np.all(np.isfinite(frame['mean_error']))

        quiet = frame[frame['sigma2'] == 1e-5]
        spread = tau_spread(quiet)
        assert (spread['spread'] < 0.2).all(), spread
        for _, column in quiet.groupby('tau'):
            errors = column.sort_values('d')['mean_error'].to_numpy()
            assert np.all(np.diff(errors) > 0)

        fits = fit_scaling_models(frame[frame['sigma2'] == 1e-3])
        assert preferred_model(fits) == {1e-3: 'd_plus_tau'}
