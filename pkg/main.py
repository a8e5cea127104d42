"""
Punto de entrada principal de la aplicación.

CLI de experimentos: colas, bancos T1/T2, seguimiento, Monte Carlo
de triángulos y resolución de una tarea leída de archivo.

Ejemplos:
    python main.py queuing --method optimal-nudging --samples-per-iter 750000
    python main.py bench-t1 --n 20 --q 0.1 --runs 5
    python main.py triangle-mc --samples 100000 --seed 7
    python main.py solve tarea.txt --backend dp_gauss_seidel
"""

import argparse
import os
import sys
from typing import List, Optional

# Agregar directorio raíz al path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from controllers.app_controller import AppController
from utils.constants import METHODS, SOLVER_BACKENDS, SYSTEM_NAME, SYSTEM_VERSION


def _common_arguments() -> argparse.ArgumentParser:
    """Opciones compartidas por todos los subcomandos (None = no indicada)."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='archivo clave = valor con las mismas opciones')
    common.add_argument('--seed', type=int, help='semilla maestra')
    common.add_argument('--runs', type=int, help='número de ejecuciones')
    common.add_argument('--method', choices=METHODS, help='método de empuje o línea base')
    common.add_argument('--eps', type=float, help='ancho de intervalo para detenerse')
    common.add_argument('--budget', type=int,
                        help='pasos de línea base, o barridos por llamada DP')
    common.add_argument('--transfer', action='store_true', default=None,
                        help='reutilizar la tabla Q entre iteraciones')
    common.add_argument('--out', help='directorio de resultados')
    common.add_argument('--jobs', type=int, help='procesos en paralelo')
    common.add_argument('--alpha', type=float, help='fracción del empuje α')
    common.add_argument('--max-iters', type=int, help='iteraciones máximas de empuje')
    common.add_argument('--backend', choices=SOLVER_BACKENDS, help='solucionador interno')
    common.add_argument('-v', '--verbose', action='store_true', default=None,
                        help='logging DEBUG')
    return common


def build_parser() -> argparse.ArgumentParser:
    """
    Construye el parser con un subcomando por experimento.

    Returns:
        Parser de argparse
    """
    parser = argparse.ArgumentParser(
        prog='main.py',
        description=f"{SYSTEM_NAME} {SYSTEM_VERSION}"
    )
    common = _common_arguments()
    sub = parser.add_subparsers(dest='experiment', required=True)

    queuing = sub.add_parser('queuing', parents=[common], help='tarea de control de acceso')
    queuing.add_argument('--samples-per-iter', type=int, help='muestras por llamada de Q-learning')
    queuing.add_argument('--d-samples', type=int, help='muestras para estimar D')
    queuing.add_argument('--d-scale', type=float, help='factor aplicado a D')

    for name, label in (('bench-t1', 'tareas aleatorias dispersas'),
                        ('bench-t2', 'tareas aleatorias tridiagonales')):
        bench = sub.add_parser(name, parents=[common], help=label)
        bench.add_argument('--n', type=int, help='número de estados')
        if name == 'bench-t1':
            bench.add_argument('--q', type=float, help='densidad de transiciones')

    tracking = sub.add_parser('tracking', parents=[common], help='seguimiento en rejilla')
    tracking.add_argument('--samples-per-iter', type=int, help='muestras por llamada de Q-learning')

    mc = sub.add_parser('triangle-mc', parents=[common], help='Monte Carlo de triángulos')
    mc.add_argument('--samples', type=int, help='triángulos válidos')

    solve = sub.add_parser('solve', parents=[common], help='resolver una tarea de archivo')
    solve.add_argument('task_file', help='archivo de tarea (formato smdp)')
    solve.add_argument('--recurrent-state', type=int,
                       help='estado de la división si la tarea no está dividida')
    solve.add_argument('--samples-per-iter', type=int, help='muestras por llamada de Q-learning')

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Función principal."""
    args = build_parser().parse_args(argv)
    return AppController().run(vars(args))


if __name__ == "__main__":
    sys.exit(main())
