# src/main.py
"""
Warm-start CMA-ES 실험 CLI

사용법:
    python -m src.main run --config experiment.cfg
    python -m src.main similarity --problem sphere --offset-source 0.4,0.5,0.6,0.7,0.8
    python -m src.main sweep --parameter alpha --values 0.05,0.1,0.15,0.2,0.25
    python -m src.main gen-source --offset-source 0.6 --out results/sources
    python -m src.main compare --offset-source 0.4,0.6,0.8

종료 코드: 0 = 전체 성공, 2 = 일부 cell 실패, 1 = 설정 오류 또는 실행 오류
"""

import argparse
import sys
from typing import Dict, List, Optional

from src.baselines.optimizers import OptimizerKind
from src.runner.experiment import run_experiment
from src.runner.experiment_config import ExperimentConfig, load_config
from src.runner.reports import (
    SweepParameter,
    generate_source,
    sensitivity_sweep,
    similarity_report,
    transfer_comparison,
    with_methods,
)
from src.utils.config import Config
from src.utils.errors import ConfigError
from src.utils.logger import get_logger, set_log_level

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARTIAL = 2

# CLI 플래그 → 설정 키
_OVERRIDE_FLAGS = {
    "problem": "problem",
    "offset_source": "offset_source",
    "offset_target": "offset_target",
    "method": "methods",
    "budget": "budget",
    "reps": "reps",
    "seed": "seed",
    "gamma": "gamma",
    "alpha": "alpha",
    "lambda_": "lambda",
    "source_method": "source_method",
    "out": "out",
    "jobs": "jobs",
}


def _add_common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="key=value 실험 설정 파일")
    parser.add_argument("--problem", choices=["sphere", "rotated_ellipsoid"], help="벤치마크 함수")
    parser.add_argument("--offset-source", help="source offset 목록 (예: 0.4,0.6,0.8)")
    parser.add_argument("--offset-target", help="target offset")
    parser.add_argument("--method", help="optimizer 목록 (예: cma,ws_cma)")
    parser.add_argument("--budget", help="run 당 평가 횟수")
    parser.add_argument("--reps", help="반복 횟수")
    parser.add_argument("--seed", help="기준 시드 (run k 는 seed + k)")
    parser.add_argument("--gamma", help="상위 γ 비율")
    parser.add_argument("--alpha", help="GMM 성분 표준편차 α")
    parser.add_argument("--lambda", dest="lambda_", help="CMA-ES population size λ")
    parser.add_argument("--source-method", choices=["cma", "random"], help="source archive 를 만드는 optimizer")
    parser.add_argument("--out", help="결과 디렉터리")
    parser.add_argument("--jobs", help="병렬 worker 수")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warm-start-cmaes", description="Warm-start CMA-ES 전이 최적화 실험 CLI"
    )
    parser.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="로그 레벨 (기본: .env 의 LOG_LEVEL)"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    _add_common_arguments(subparsers.add_parser("run", help="방법 × 반복 실험 실행"))
    _add_common_arguments(subparsers.add_parser("similarity", help="γ-similarity 와 개선량 보고서"))
    _add_common_arguments(subparsers.add_parser("compare", help="naive transfer baseline 비교"))
    _add_common_arguments(subparsers.add_parser("gen-source", help="source archive 생성"))

    sweep = subparsers.add_parser("sweep", help="α / γ 민감도 분석")
    _add_common_arguments(sweep)
    sweep.add_argument("--parameter", choices=[p.value for p in SweepParameter], default="alpha")
    sweep.add_argument(
        "--values",
        default=",".join(str(v) for v in Config.SWEEP_VALUES),
        help="쉼표로 구분한 값 목록",
    )
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides: Dict[str, Optional[str]] = {
        key: getattr(args, flag, None) for flag, key in _OVERRIDE_FLAGS.items()
    }
    return load_config(args.config, overrides)


def _parse_values(raw: str) -> List[float]:
    try:
        return [float(token) for token in raw.split(",") if token.strip()]
    except ValueError:
        raise ConfigError(f"--values 형식이 올바르지 않습니다: {raw!r}") from None


class ExperimentCLI:
    """서브커맨드별 실행 후 종료 코드를 반환합니다."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = config_from_args(args)

    def run(self) -> int:
        handler = {
            "run": self.cmd_run,
            "similarity": self.cmd_similarity,
            "sweep": self.cmd_sweep,
            "gen-source": self.cmd_gen_source,
            "compare": self.cmd_compare,
        }[self.args.command]
        return handler()

    def cmd_run(self) -> int:
        summary = run_experiment(self.config)
        print(summary.method_stats.to_string(index=False))
        return EXIT_PARTIAL if summary.has_failures else EXIT_OK

    def cmd_similarity(self) -> int:
        config = with_methods(self.config, (OptimizerKind.CMA, OptimizerKind.WS_CMA))
        summary = run_experiment(config)
        frame = similarity_report(config, summary)
        print(frame.to_string(index=False))
        return EXIT_PARTIAL if summary.has_failures else EXIT_OK

    def cmd_sweep(self) -> int:
        result = sensitivity_sweep(self.config, SweepParameter(self.args.parameter), _parse_values(self.args.values))
        print(f"💾 {self.config.out / f'sweep_{result.parameter.value}.csv'}")
        return EXIT_PARTIAL if result.has_failures else EXIT_OK

    def cmd_gen_source(self) -> int:
        for b in self.config.offset_source:
            generate_source(self.config, b)
        print(f"💾 {self.config.out / 'sources'}")
        return EXIT_OK

    def cmd_compare(self) -> int:
        frame, summary = transfer_comparison(self.config)
        print(frame.to_string(index=False))
        return EXIT_PARTIAL if summary.has_failures else EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """메인 함수"""
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_log_level(args.log_level)
    try:
        return ExperimentCLI(args).run()
    except ConfigError as e:
        logger.error(f"설정 오류: {e}")
        print(f"\n❌ 설정 오류: {e}\n", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"프로그램 실행 오류: {e}", exc_info=True)
        print(f"\n❌ 프로그램 실행 중 오류가 발생했습니다: {e}\n", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
