"""
Modelos de Entornos.

Parámetros de las tareas de prueba: control de acceso a servidores
y seguimiento discreto de un objetivo en rejilla.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from config import QueuingConfig, TrackingConfig
from utils.validators import validate_queuing_params, validate_tracking_params

Cell = Tuple[int, int]


@dataclass(frozen=True)
class QueuingParams:
    """
    Parámetros de la tarea de colas.

    Sin servidores libres sólo cabe rechazar. Con merge_all_busy esos
    estados se funden en uno solo (4 x 10 + 1 estados); si no, se
    conserva la prioridad en cabeza y el recurrente es el de la
    primera prioridad.

    Attributes:
        n_servers: Número de servidores
        priorities: Pago de cada prioridad (la primera es de aceptación forzada)
        arrival_probs: Probabilidad de cada prioridad en la cabeza de la cola
        free_prob: Probabilidad de que un servidor ocupado se libere entre épocas
        merge_all_busy: Un único estado sin servidores libres
    """

    n_servers: int = QueuingConfig.N_SERVERS
    priorities: Tuple[float, ...] = QueuingConfig.PRIORITIES
    arrival_probs: Tuple[float, ...] = QueuingConfig.ARRIVAL_PROBS
    free_prob: float = QueuingConfig.FREE_PROB
    merge_all_busy: bool = QueuingConfig.MERGE_ALL_BUSY

    def __post_init__(self):
        """Valida los parámetros."""
        object.__setattr__(self, 'priorities', tuple(float(p) for p in self.priorities))
        object.__setattr__(self, 'arrival_probs', tuple(float(p) for p in self.arrival_probs))
        is_valid, errors = validate_queuing_params(
            self.n_servers, self.priorities, self.arrival_probs, self.free_prob
        )
        if not is_valid:
            raise ValueError(f"Errores de validación: {'; '.join(errors)}")

    @property
    def n_states(self) -> int:
        """Prioridad x servidores libres (>= 1), más los estados sin servidores libres."""
        return len(self.priorities) * self.n_servers + len(self.all_busy_states)

    @property
    def all_busy_states(self) -> List[int]:
        first = len(self.priorities) * self.n_servers
        if self.merge_all_busy:
            return [first]
        return [first + i for i in range(len(self.priorities))]

    @property
    def recurrent_state(self) -> int:
        """Sin servidores libres y (si se distingue) la primera prioridad en cabeza."""
        return self.state_index(0, 0)

    def state_index(self, priority_index: int, free: int) -> int:
        """
        Índice del estado (prioridad, servidores libres).

        Args:
            priority_index: Posición de la prioridad en priorities
            free: Servidores libres (0 = todos ocupados)

        Returns:
            Índice de estado
        """
        if free == 0:
            return self.all_busy_states[0 if self.merge_all_busy else priority_index]
        return priority_index * self.n_servers + (free - 1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n_servers': self.n_servers,
            'priorities': list(self.priorities),
            'arrival_probs': list(self.arrival_probs),
            'free_prob': self.free_prob,
            'merge_all_busy': self.merge_all_busy
        }


@dataclass(frozen=True)
class TrackingParams:
    """
    Parámetros de la tarea de seguimiento.

    Las celdas son (x, y) con (0, 0) en la esquina inferior izquierda.
    La primera celda de target_path es la del estado recurrente.

    Attributes:
        grid: Lado de la rejilla cuadrada
        obstacle: Celdas que el agente no puede ocupar
        target_path: Celdas que el objetivo recorre en orden
        move_range: Desplazamiento máximo por eje
    """

    grid: int = TrackingConfig.GRID
    obstacle: Tuple[Cell, ...] = TrackingConfig.OBSTACLE
    target_path: Tuple[Cell, ...] = TrackingConfig.TARGET_PATH
    move_range: int = TrackingConfig.MOVE_RANGE
    free_cells: List[Cell] = field(init=False, repr=False, compare=False)
    cell_index: Dict[Cell, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        """Valida los parámetros y enumera las celdas libres."""
        object.__setattr__(self, 'obstacle', tuple(tuple(c) for c in self.obstacle))
        object.__setattr__(self, 'target_path', tuple(tuple(c) for c in self.target_path))
        is_valid, errors = validate_tracking_params(
            self.grid, self.obstacle, self.target_path, self.move_range
        )
        if not is_valid:
            raise ValueError(f"Errores de validación: {'; '.join(errors)}")

        blocked = set(self.obstacle)
        cells = [(x, y) for x in range(self.grid) for y in range(self.grid)
                 if (x, y) not in blocked]
        object.__setattr__(self, 'free_cells', cells)
        object.__setattr__(self, 'cell_index', {cell: i for i, cell in enumerate(cells)})

    @property
    def n_phases(self) -> int:
        return len(self.target_path)

    @property
    def n_actions(self) -> int:
        """Movimientos del cuadrado (2R+1) x (2R+1) centrado en el agente."""
        return (2 * self.move_range + 1) ** 2

    @property
    def n_states(self) -> int:
        return len(self.free_cells) * self.n_phases

    def is_free(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.grid and 0 <= y < self.grid and cell not in self.obstacle

    def action_index(self, dx: int, dy: int) -> int:
        side = 2 * self.move_range + 1
        return (dx + self.move_range) * side + (dy + self.move_range)

    def action_move(self, action: int) -> Cell:
        side = 2 * self.move_range + 1
        return action // side - self.move_range, action % side - self.move_range

    def state_index(self, cell: Cell, phase: int) -> int:
        """Índice del estado (celda del agente, fase del objetivo)."""
        return phase * len(self.free_cells) + self.cell_index[tuple(cell)]

    @property
    def recurrent_state(self) -> int:
        """Agente y objetivo en la primera celda de la trayectoria."""
        return self.state_index(self.target_path[0], 0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'grid': self.grid,
            'obstacle': [list(c) for c in self.obstacle],
            'target_path': [list(c) for c in self.target_path],
            'move_range': self.move_range
        }
