"""Pruebas del CLI y de la configuración de experimentos."""

import pytest

from controllers.app_controller import EXIT_CONFIG_ERROR, EXIT_FAILURE, EXIT_OK, AppController
from main import build_parser, main
from models.experiment import ExperimentConfig
from services.persistence_service import PersistenceService, write_task_file
from utils.calculations import calculate_average
from utils.exceptions import ConfigError


def _summary(out_dir, experiment: str):
    return PersistenceService(out_dir).read_csv(f"{experiment}_summary.csv")


class TestExperimentConfig:

    def test_defaults(self):
        cfg = ExperimentConfig(experiment='queuing')
        assert cfg.method == 'optimal-nudging'
        assert cfg.run_indices == [0]
        assert not cfg.is_baseline

    def test_from_text_values(self, tmp_path):
        cfg = ExperimentConfig.from_dict({
            'experiment': 'bench-t1', 'n': '20', 'q': '0.1', 'runs': '3',
            'transfer': 'true', 'out': str(tmp_path)
        })
        assert (cfg.n, cfg.q, cfg.runs, cfg.transfer) == (20, 0.1, 3, True)
        assert cfg.run_indices == [0, 1, 2]

    def test_baseline_method(self):
        assert ExperimentConfig(experiment='queuing', method='singh-4').is_baseline

    @pytest.mark.parametrize('data', [
        {'experiment': 'colas'},
        {'experiment': 'queuing', 'runs': 0},
        {'experiment': 'queuing', 'eps': -1.0},
        {'experiment': 'queuing', 'method': 'dqn'},
        {'experiment': 'queuing', 'budget': 0},
        {'experiment': 'queuing', 'd_scale': 0.0},
        {'experiment': 'bench-t1', 'n': 5},
        {'experiment': 'bench-t1', 'q': 2.0},
        {'experiment': 'solve'},
        {'experiment': 'queuing', 'transfer': 'quizá'},
        {'experiment': 'queuing', 'semilla': 3},
        {'seed': 3},
    ])
    def test_invalid(self, data):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(data)


class TestParser:

    def test_solve_requires_task_file(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(['solve'])

    def test_unspecified_options_are_none(self):
        args = vars(build_parser().parse_args(['triangle-mc']))
        assert args['seed'] is None
        assert args['transfer'] is None

    def test_file_values_are_overridden_by_flags(self, tmp_path):
        config = tmp_path / 'exp.cfg'
        config.write_text("seed = 3\nsamples = 50\n", encoding='utf-8')
        options = vars(build_parser().parse_args(
            ['triangle-mc', '--config', str(config), '--seed', '9']))
        cfg = AppController().build_config(options)
        assert (cfg.seed, cfg.samples) == (9, 50)


class TestExitCodes:

    def test_unknown_config_key(self, tmp_path):
        config = tmp_path / 'exp.cfg'
        config.write_text("semilla = 3\n", encoding='utf-8')
        code = main(['triangle-mc', '--config', str(config), '--out', str(tmp_path)])
        assert code == EXIT_CONFIG_ERROR

    def test_invalid_value(self, tmp_path):
        assert main(['triangle-mc', '--runs', '0', '--out', str(tmp_path)]) == EXIT_CONFIG_ERROR

    def test_missing_config_file(self, tmp_path):
        code = main(['triangle-mc', '--config', str(tmp_path / 'no.cfg')])
        assert code == EXIT_CONFIG_ERROR

    def test_missing_task_file_is_a_failure(self, tmp_path):
        code = main(['solve', str(tmp_path / 'no_existe.txt'), '--out', str(tmp_path)])
        assert code == EXIT_FAILURE


class TestTriangleMonteCarlo:

    def test_byte_deterministic(self, tmp_path):
        first, second = tmp_path / 'a', tmp_path / 'b'
        for out in (first, second):
            assert main(['triangle-mc', '--samples', '200', '--seed', '7',
                         '--out', str(out)]) == EXIT_OK
        for name in ('triangle-mc_samples.csv', 'triangle-mc_summary.csv'):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_summary_bounds(self, tmp_path):
        assert main(['triangle-mc', '--samples', '300', '--out', str(tmp_path)]) == EXIT_OK
        row = _summary(tmp_path, 'triangle-mc')[0]
        assert int(row['n_samples']) == 300
        assert float(row['max_ratio']) <= 0.5 + 1e-9
        assert 0.0 < float(row['mean_ratio']) <= float(row['max_ratio'])


class TestSolve:

    def test_split_task_file(self, tmp_path, two_policy_game):
        task_file = write_task_file(two_policy_game, tmp_path / 'juego.txt')
        out = tmp_path / 'out'
        assert main(['solve', str(task_file), '--eps', '1e-6', '--out', str(out)]) == EXIT_OK

        rows = _summary(out, 'solve')
        assert rows[0]['method'] == 'optimal-nudging'
        assert float(rows[0]['gain']) == pytest.approx(0.02, abs=1e-6)
        assert int(rows[0]['work']) > 0
        assert int(rows[0]['d_work']) > 0
        assert rows[-1]['seed'] == 'mean'
        for name in ('solve_seed0_run.csv', 'solve_seed0_triangles.csv',
                     'solve_seed0_sweeps.csv'):
            assert (out / name).exists()

    def test_plain_task_uses_recurrent_state(self, tmp_path, random_split):
        from services.task_service import gain_optimal_oracle
        _, oracle = gain_optimal_oracle(random_split)
        task_file = write_task_file(random_split.merged(), tmp_path / 'tarea.txt')
        out = tmp_path / 'out'
        code = main(['solve', str(task_file), '--recurrent-state', str(random_split.s_I),
                     '--method', 'alpha-nudging', '--alpha', '0.4', '--out', str(out)])
        assert code == EXIT_OK
        assert float(_summary(out, 'solve')[0]['gain']) == pytest.approx(oracle, abs=1e-6)

    def test_baseline_runs_and_means(self, tmp_path, random_split):
        task_file = write_task_file(random_split, tmp_path / 'tarea.txt')
        out = tmp_path / 'out'
        code = main(['solve', str(task_file), '--method', 'singh-4', '--budget', '2000',
                     '--runs', '2', '--out', str(out)])
        assert code == EXIT_OK
        rows = _summary(out, 'solve')
        per_run = [float(row['gain']) for row in rows if row['seed'] != 'mean']
        mean = [row for row in rows if row['seed'] == 'mean'][0]
        assert len(per_run) == 2
        assert float(mean['gain']) == pytest.approx(calculate_average(per_run))
        log = PersistenceService(out).read_csv('solve_seed1_run.csv')
        assert 'policy_gain' in log[0]

    def test_repeated_runs_are_identical(self, tmp_path, random_split):
        task_file = write_task_file(random_split, tmp_path / 'tarea.txt')
        outputs = []
        for name in ('a', 'b'):
            out = tmp_path / name
            main(['solve', str(task_file), '--method', 'smart', '--budget', '1000',
                  '--seed', '4', '--out', str(out)])
            outputs.append((out / 'solve_seed0_run.csv').read_bytes())
        assert outputs[0] == outputs[1]


class TestBench:

    def test_summary_is_mean_of_runs(self, tmp_path):
        out = tmp_path / 'out'
        assert main(['bench-t2', '--n', '10', '--runs', '2', '--budget', '20000',
                     '--out', str(out)]) == EXIT_OK
        service = PersistenceService(out)
        runs = service.read_csv('bench-t2_runs.csv')
        summary = service.read_csv('bench-t2_summary.csv')
        assert len(runs) == 2
        assert len(summary) == 1
        for column in ('ssp_jacobi_sweeps', 'on_sweeps', 'onts_sweeps', 'd_sweeps'):
            expected = calculate_average([float(row[column]) for row in runs])
            assert float(summary[0][column]) == pytest.approx(expected)
        ratios = [float(row['onts_sweeps']) / float(row['on_sweeps']) for row in runs]
        assert float(summary[0]['onts_over_on']) == pytest.approx(calculate_average(ratios))

    def test_d_estimation_has_its_own_column(self, tmp_path):
        out = tmp_path / 'out'
        assert main(['bench-t2', '--n', '10', '--runs', '2', '--budget', '20000',
                     '--out', str(out)]) == EXIT_OK
        service = PersistenceService(out)
        runs = service.read_csv('bench-t2_runs.csv')
        summary = service.read_csv('bench-t2_summary.csv')
        for row in runs:
            assert int(row['d_sweeps']) > 0
            assert 0 < int(row['onts_sweeps']) < int(row['on_sweeps'])
        expected = calculate_average([float(row['d_sweeps']) for row in runs])
        assert float(summary[0]['d_sweeps']) == pytest.approx(expected)
