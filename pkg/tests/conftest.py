"""
Fixtures compartidas de las pruebas.

Tareas pequeñas con solución conocida y un directorio de resultados
temporal por prueba.
"""

import numpy as np
import pytest

from models.task import TabularSMDP, SplitTask
from services.task_service import bertsekas_split


def make_one_step(reward: float, cost: float) -> SplitTask:
    """s_I -> s_T con probabilidad 1, recompensa y costo dados."""
    task = TabularSMDP.from_dense(np.ones((1, 1, 1)), [[[reward]]], [[[cost]]])
    return bertsekas_split(task, 0)


def make_two_policy_game() -> SplitTask:
    """
    Juego de dos políticas desde el estado 0.

    Acción 0: gana +1 en 100 pasos (ganancia 0.01).
    Acción 1: gana con probabilidad 0.6 (+1) o pierde (-1) en 10 pasos
    (ganancia 0.02). Los estados 1 y 2 regresan al 0 sin costo.
    """
    P = np.zeros((3, 2, 3))
    R = np.zeros((3, 2, 3))
    K = np.zeros((3, 2, 3))
    P[0, 0, 0], R[0, 0, 0], K[0, 0, 0] = 1.0, 1.0, 100.0
    P[0, 1, 1], R[0, 1, 1], K[0, 1, 1] = 0.6, 1.0, 10.0
    P[0, 1, 2], R[0, 1, 2], K[0, 1, 2] = 0.4, -1.0, 10.0
    P[1, 0, 0] = 1.0
    P[2, 0, 0] = 1.0
    task = TabularSMDP.from_dense(P, R, K, actions_per_state=[2, 1, 1])
    return bertsekas_split(task, 0)


def make_random_task(seed: int, n_states: int = 4, n_actions: int = 2,
                     s_I: int = 0) -> SplitTask:
    """Tarea densa aleatoria: toda política alcanza s_I."""
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(n_states), size=(n_states, n_actions))
    R = rng.uniform(0.0, 1.0, size=(n_states, n_actions, n_states))
    K = rng.uniform(1.0, 2.0, size=(n_states, n_actions, n_states))
    return bertsekas_split(TabularSMDP.from_dense(P, R, K), s_I)


@pytest.fixture
def one_step_split():
    return make_one_step(1.0, 2.0)


@pytest.fixture
def two_policy_game():
    return make_two_policy_game()


@pytest.fixture
def random_split():
    return make_random_task(seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def results_dir(tmp_path):
    out = tmp_path / 'results'
    out.mkdir()
    return out
