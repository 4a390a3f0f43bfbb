"""
Exceptions

프로젝트 전용 예외 계층입니다. 모두 ValueError 를 함께 상속하므로
기존처럼 ValueError 로 잡아도 동작합니다.
"""

from typing import Optional


class WarmStartError(Exception):
    """프로젝트 예외의 공통 부모"""


class ArchiveFormatError(WarmStartError, ValueError):
    """trial archive / MGD 파일 형식 오류 (줄 번호 포함)"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class InvalidDistributionError(WarmStartError, ValueError):
    """양의 정부호가 아닌 공분산, 고유분해 실패 등"""


class InsufficientDataError(WarmStartError, ValueError):
    """⌊γ·N⌋ = 0 이라 상위 γ 해를 고를 수 없는 경우"""


class ConfigError(WarmStartError, ValueError):
    """실험 설정 파일/CLI 인자 오류"""


class DistributionCollapseError(InvalidDistributionError):
    """σ·√λmax(C) 가 평균 m 의 부동소수 해상도 아래로 떨어진 경우"""
