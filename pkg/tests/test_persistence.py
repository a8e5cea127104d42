"""Pruebas de la persistencia: archivos de tareas, configuración y CSV."""

import numpy as np
import pytest

from models.geometry import GainInterval
from models.run import NudgeRun, RunRecord
from models.task import Policy, SplitTask, TabularSMDP
from services.geometry_service import initial_triangle
from services.persistence_service import (
    PersistenceService,
    parse_config_file,
    read_task_file,
    write_task_file
)
from utils.constants import RUN_LOG_HEADER, TRIANGLE_TRACE_HEADER
from utils.exceptions import ConfigError, InvalidTaskError


class TestTaskFiles:

    def test_split_task_round_trip(self, tmp_path, two_policy_game):
        path = write_task_file(two_policy_game, tmp_path / 'juego.txt')
        loaded = read_task_file(path)
        assert isinstance(loaded, SplitTask)
        assert (loaded.s_I, loaded.s_T) == (two_policy_game.s_I, two_policy_game.s_T)
        assert list(loaded.base.entries()) == list(two_policy_game.base.entries())

    def test_plain_task_round_trip(self, tmp_path, random_split):
        merged = random_split.merged()
        loaded = read_task_file(write_task_file(merged, tmp_path / 'tarea.txt'))
        assert isinstance(loaded, TabularSMDP)
        np.testing.assert_array_equal(loaded.P.toarray(), merged.P.toarray())

    def test_header_and_split_lines(self, tmp_path, one_step_split):
        path = write_task_file(one_step_split, tmp_path / 'uno.txt')
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[0] == 'smdp 2'
        assert lines[-1] == 'split 0 1'

    def test_comments_are_ignored(self, tmp_path):
        path = tmp_path / 'comentada.txt'
        path.write_text("# tarea mínima\nsmdp 1\n0 0 0 1.0 2.0 1.0\n", encoding='utf-8')
        task = read_task_file(path)
        assert task.expected_reward.tolist() == [2.0]

    @pytest.mark.parametrize('content', [
        "0 0 0 1.0 2.0 1.0\n",
        "smdp 1\n0 0 0 1.0 2.0\n",
        "smdp 1\n0 1 0 1.0 2.0 1.0\n",
        "smdp 1\n0 0 0 uno 2.0 1.0\n",
        "smdp 2\n0 0 1 1.0 2.0 1.0\n",
    ])
    def test_malformed_files(self, tmp_path, content):
        path = tmp_path / 'mala.txt'
        path.write_text(content, encoding='utf-8')
        with pytest.raises(InvalidTaskError):
            read_task_file(path)


class TestConfigFiles:

    def test_parses_keys_and_normalizes_dashes(self, tmp_path):
        path = tmp_path / 'exp.cfg'
        path.write_text("# experimento\nseed = 7\n--max-iters = 4\n\neps=1e-6\n",
                        encoding='utf-8')
        values = parse_config_file(path, ['seed', 'max_iters', 'eps'])
        assert values == {'seed': '7', 'max_iters': '4', 'eps': '1e-6'}

    def test_unknown_key(self, tmp_path):
        path = tmp_path / 'exp.cfg'
        path.write_text("semilla = 7\n", encoding='utf-8')
        with pytest.raises(ConfigError):
            parse_config_file(path, ['seed'])

    def test_line_without_equals(self, tmp_path):
        path = tmp_path / 'exp.cfg'
        path.write_text("seed 7\n", encoding='utf-8')
        with pytest.raises(ConfigError):
            parse_config_file(path, ['seed'])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config_file(tmp_path / 'no_existe.cfg', ['seed'])


class TestPersistenceService:

    def test_creates_directory(self, tmp_path):
        service = PersistenceService(tmp_path / 'a' / 'b')
        assert service.out_dir.is_dir()

    def test_csv_round_trip_keeps_exact_floats(self, results_dir):
        service = PersistenceService(results_dir)
        value = 0.1 + 0.2
        service.write_csv('x.csv', ['a', 'b'], [[1, value]])
        rows = service.read_csv('x.csv')
        assert float(rows[0]['b']) == value

    def test_column_count_is_checked(self, results_dir):
        service = PersistenceService(results_dir)
        with pytest.raises(ValueError):
            service.write_csv('x.csv', ['a', 'b'], [[1]])

    def test_run_log_columns(self, results_dir):
        service = PersistenceService(results_dir)
        records = [
            RunRecord(iter=1, rho=0.25, v_star=0.5, policy=Policy((0, 0)), samples=10,
                      interval=GainInterval(0.0, 0.5)),
            RunRecord(iter=2, rho=0.5, v_star=0.0, policy=Policy((0, 0)), samples=20,
                      interval=GainInterval(0.25, 0.5), termination='value_zero'),
        ]
        service.write_run_log('run.csv', records)
        rows = service.read_csv('run.csv')
        assert list(rows[0].keys()) == RUN_LOG_HEADER
        assert rows[0]['P'] == '0.0'
        assert rows[1]['Q'] == '0.25'
        assert rows[1]['termination'] == 'value_zero'
        assert rows[0]['termination'] == ''

    def test_triangle_history(self, results_dir):
        service = PersistenceService(results_dir)
        run = NudgeRun(D=1.0, triangle_history=[initial_triangle(1.0)])
        service.write_triangles('tri.csv', run)
        rows = service.read_csv('tri.csv')
        assert list(rows[0].keys()) == TRIANGLE_TRACE_HEADER
        assert rows[0]['rho'] == ''
        assert float(rows[0]['wC']) == 1.0

    def test_list_artifacts(self, results_dir, one_step_split):
        service = PersistenceService(results_dir)
        service.write_csv('b.csv', ['a'], [[1]])
        service.write_csv('a.csv', ['a'], [[1]])
        service.write_task('tarea.txt', one_step_split)
        assert service.list_artifacts() == ['a.csv', 'b.csv']
        assert service.file_exists('tarea.txt')
