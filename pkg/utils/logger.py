"""
Configuración de logging.

Un único punto de configuración a partir de LogConfig; el resto de
módulos usa logging.getLogger(__name__).
"""

import logging
import sys
from pathlib import Path
from typing import Optional

from config import LogConfig


def setup_logging(level: Optional[str] = None,
                  log_file: Optional[Path] = None) -> logging.Logger:
    """
    Configura handlers de stderr y, opcionalmente, de archivo.

    Args:
        level: Nivel (DEBUG, INFO, ...); por defecto LogConfig.LOG_LEVEL
        log_file: Archivo de log; por defecto LogConfig.LOG_FILE

    Returns:
        Logger raíz configurado
    """
    root = logging.getLogger()
    level_name = (level or LogConfig.LOG_LEVEL).upper()

    if not LogConfig.ENABLED:
        root.setLevel(logging.CRITICAL + 1)
        return root

    for handler in list(root.handlers):
        root.removeHandler(handler)

    formatter = logging.Formatter(LogConfig.LOG_FORMAT)

    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(formatter)
    root.addHandler(stream_handler)

    target = log_file if log_file is not None else LogConfig.LOG_FILE
    if target is not None:
        target = Path(target)
        target.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(target, encoding='utf-8')
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)

    root.setLevel(getattr(logging, level_name, logging.INFO))
    return root
