# src/utils/config.py
import os
from pathlib import Path
from dotenv import load_dotenv

# .env 파일 로드
load_dotenv()


def _env_float(key: str, default: float) -> float:
    return float(os.getenv(key, str(default)))


def _env_int(key: str, default: int) -> int:
    return int(os.getenv(key, str(default)))


class Config:
    """환경 변수 및 실험 기본값 관리"""

    BASE_DIR = Path(__file__).resolve().parent.parent.parent

    # Logs
    LOGS_DIR = Path(os.getenv("LOGS_DIR", str(BASE_DIR / "logs")))

    # 실험 결과 저장 위치
    OUTPUT_DIR = Path(os.getenv("OUTPUT_DIR", str(BASE_DIR / "results")))

    # Logging
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    # Warm starting (γ, α)
    DEFAULT_GAMMA = _env_float("DEFAULT_GAMMA", 0.1)
    DEFAULT_ALPHA = _env_float("DEFAULT_ALPHA", 0.1)

    # CMA-ES
    DEFAULT_POPULATION_SIZE = _env_int("DEFAULT_POPULATION_SIZE", 8)
    INITIAL_MEAN = 0.5  # 단위 큐브 기준 초기 평균
    INITIAL_SIGMA = 0.2  # N(0.5, 0.2²)
    MAX_RESAMPLE = 100  # 박스 밖 후보 재샘플링 최대 횟수 (초과 시 clamp)

    # Experiment protocol
    DEFAULT_BUDGET = _env_int("DEFAULT_BUDGET", 50)
    DEFAULT_REPETITIONS = _env_int("DEFAULT_REPETITIONS", 20)
    DEFAULT_SOURCE_SIZE = _env_int("DEFAULT_SOURCE_SIZE", 100)  # source task 평가 횟수
    DEFAULT_SOURCE_METHOD = os.getenv("DEFAULT_SOURCE_METHOD", "cma")  # cma | random
    DEFAULT_SEED = _env_int("DEFAULT_SEED", 0)
    DEFAULT_JOBS = _env_int("DEFAULT_JOBS", 1)

    # γ-similarity
    DEFAULT_MC_SAMPLES = _env_int("DEFAULT_MC_SAMPLES", 100_000)
    SIMILARITY_ARCHIVE_SIZE = _env_int("SIMILARITY_ARCHIVE_SIZE", 1000)
    MC_BATCH_SIZE = 16_384  # 몬테카를로 샘플 배치 크기 (워커 수와 무관하게 고정)

    # 민감도 분석 기본 구간 (0.05 ~ 0.25, 0.05 간격)
    SWEEP_VALUES = (0.05, 0.10, 0.15, 0.20, 0.25)
    SYNTHETIC_OFFSETS = (0.4, 0.5, 0.6, 0.7, 0.8)
