# src/optimizer/state_io.py
"""
MGD 상태 저장/로드

ReuseNormal 이 source task 의 최종 분포를 다른 프로세스에서 재사용할 수 있도록
MGDState 를 텍스트 블록으로 저장합니다.

    #ws-mgd v1 d=<dim>
    m=<m_1>,...,<m_d>
    sigma=<sigma>
    p_sigma=...        (선택)
    p_c=...            (선택)
    generation=<g>     (선택)
    C=
    <C_11>,...,<C_1d>
    ...
"""

from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from src.optimizer.cmaes import MGDState, eigen_decomposition
from src.utils.errors import ArchiveFormatError
from src.utils.logger import get_logger

logger = get_logger(__name__)

MGD_MAGIC = "#ws-mgd"
MGD_VERSION = "v1"


def _format_vector(values: np.ndarray) -> str:
    return ",".join(repr(float(v)) for v in values)


def save_state(state: MGDState, destination: Union[str, Path]) -> None:
    path = Path(destination)
    lines = [
        f"{MGD_MAGIC} {MGD_VERSION} d={state.dimension}",
        f"m={_format_vector(state.mean)}",
        f"sigma={state.sigma!r}",
        f"p_sigma={_format_vector(state.p_sigma)}",
        f"p_c={_format_vector(state.p_c)}",
        f"generation={state.generation}",
        "C=",
    ]
    lines.extend(_format_vector(row) for row in state.C)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"MGD 상태 저장 완료 - {path} (generation={state.generation})")


def _parse_vector(text: str, dimension: int, line_number: int) -> np.ndarray:
    try:
        vector = np.array([float(token) for token in text.split(",")])
    except ValueError:
        raise ArchiveFormatError(f"숫자가 아닌 값이 있습니다: {text!r}", line_number) from None
    if vector.shape != (dimension,):
        raise ArchiveFormatError(f"길이 {vector.shape[0]} (기대 {dimension})", line_number)
    return vector


def load_state(source: Union[str, Path]) -> MGDState:
    """
    save_state 로 저장한 파일을 읽습니다.

    Raises:
        ArchiveFormatError: 형식 오류 (줄 번호 포함)
        InvalidDistributionError: C 가 양의 정부호가 아닌 경우
    """
    lines = Path(source).read_text(encoding="utf-8").splitlines()
    header = lines[0].split() if lines else []
    if len(header) != 3 or header[0] != MGD_MAGIC or header[1] != MGD_VERSION or not header[2].startswith("d="):
        raise ArchiveFormatError("MGD 헤더가 아닙니다.", 1)
    try:
        dimension = int(header[2][2:])
    except ValueError:
        raise ArchiveFormatError(f"차원 값이 올바르지 않습니다: {header[2]}", 1) from None

    fields: Dict[str, np.ndarray] = {}
    scalars: Dict[str, float] = {}
    rows: List[np.ndarray] = []
    in_matrix = False
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if in_matrix:
            rows.append(_parse_vector(line, dimension, line_number))
            continue
        key, sep, text = line.partition("=")
        if not sep:
            raise ArchiveFormatError(f"key=value 형식이 아닙니다: {line!r}", line_number)
        if key == "C":
            in_matrix = True
        elif key in ("m", "p_sigma", "p_c"):
            fields[key] = _parse_vector(text, dimension, line_number)
        elif key in ("sigma", "generation"):
            try:
                scalars[key] = float(text)
            except ValueError:
                raise ArchiveFormatError(f"숫자가 아닙니다: {text!r}", line_number) from None
        else:
            raise ArchiveFormatError(f"알 수 없는 키: {key}", line_number)

    if "m" not in fields or "sigma" not in scalars:
        raise ArchiveFormatError("m 과 sigma 는 필수입니다.")
    if len(rows) != dimension:
        raise ArchiveFormatError(f"C 의 행 수 {len(rows)} (기대 {dimension})")
    if not scalars["sigma"] > 0:
        raise ArchiveFormatError(f"sigma 는 양수여야 합니다: {scalars['sigma']}")

    C = np.vstack(rows)
    eigen_decomposition(C)
    state = MGDState(
        mean=fields["m"],
        sigma=scalars["sigma"],
        C=C,
        p_sigma=fields.get("p_sigma", np.zeros(dimension)),
        p_c=fields.get("p_c", np.zeros(dimension)),
        generation=int(scalars.get("generation", 0)),
    )
    logger.info(f"MGD 상태 로드 완료 - {source} (d={dimension})")
    return state
