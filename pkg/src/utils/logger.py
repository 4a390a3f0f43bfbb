"""
Logging Configuration

모든 모듈은 get_logger(__name__) 로 로거를 얻습니다.
콘솔(stdout) + 날짜별 app 로그 + error 전용 로그, 세 곳에 기록합니다.
"""

import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

from src.utils.config import Config

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

_FORMATTER = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)
_PROJECT_LOGGERS = set()


def _level(name: str) -> int:
    return getattr(logging, name.upper())


def _file_handler(path: Path, level: int) -> logging.FileHandler:
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setLevel(level)
    handler.setFormatter(_FORMATTER)
    return handler


def get_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    """
    프로젝트 로거를 반환합니다. 같은 이름이면 핸들러를 다시 붙이지 않습니다.

    Args:
        name: 보통 __name__
        level: 로그 레벨. None 이면 Config.LOG_LEVEL (.env 의 LOG_LEVEL, 기본 INFO)

    Example:
        >>> logger = get_logger(__name__)
        >>> logger.info("실험 시작")
    """
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    logger.setLevel(_level(level or Config.LOG_LEVEL))

    console = logging.StreamHandler(sys.stdout)
    console.setLevel(logging.DEBUG)
    console.setFormatter(_FORMATTER)
    logger.addHandler(console)

    log_dir = Config.LOGS_DIR
    log_dir.mkdir(parents=True, exist_ok=True)
    today = datetime.now().strftime("%Y%m%d")
    logger.addHandler(_file_handler(log_dir / f"app_{today}.log", logging.INFO))
    logger.addHandler(_file_handler(log_dir / f"error_{today}.log", logging.ERROR))

    # 루트 로거로 전파하면 콘솔에 두 번 찍힘
    logger.propagate = False
    _PROJECT_LOGGERS.add(name)
    return logger


def set_log_level(level: str) -> None:
    """이미 만들어진 프로젝트 로거 전체의 레벨을 바꿉니다 (CLI --log-level)."""
    for name in _PROJECT_LOGGERS:
        logging.getLogger(name).setLevel(_level(level))
