# src/similarity/divergence.py
"""
KL Divergence & γ-similarity

몬테카를로 KL 추정과 두 task 사이의 γ-similarity
    s(γ₁, γ₂) = KL(P* ‖ P₂) − KL(P₁ ‖ P₂)
를 계산합니다. 양수면 source 의 promising 영역이 사전분포보다 target 에 대해 더 유익하다는 뜻입니다.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np

from src.similarity.densities import Density, GMMDensity, prior_density
from src.space.archive import TrialArchive
from src.utils.config import Config
from src.utils.logger import get_logger
from src.warmstart.promising import build_gmm, select_top_gamma

logger = get_logger(__name__)


class KLEstimate(NamedTuple):
    estimate: float
    standard_error: float
    # n = 1 이라 표준오차를 추정할 수 없음
    low_confidence: bool = False


@dataclass(frozen=True)
class SimilarityEstimate:
    s_hat: float
    standard_error: float
    n_samples: int
    kl_prior: float
    kl_source: float
    low_confidence: bool = False


def _batch_sizes(n: int, batch_size: int) -> List[int]:
    full, rest = divmod(n, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def _batch_log_ratio(P: Density, Q: Density, size: int, seed: int, batch: int) -> np.ndarray:
    rng = np.random.default_rng([seed, batch])
    x = P.sample(size, rng)
    log_ratio = P.log_prob(x) - Q.log_prob(x)
    bad = ~np.isfinite(log_ratio)
    if bad.any():
        point = x[int(np.argmax(bad))]
        raise ValueError(f"유한하지 않은 로그 밀도가 나왔습니다: x={point.tolist()}")
    return log_ratio


def kl_mc(
    P: Density,
    Q: Density,
    n: int = Config.DEFAULT_MC_SAMPLES,
    seed: int = 0,
    batch_size: int = Config.MC_BATCH_SIZE,
    jobs: int = 1,
) -> KLEstimate:
    """
    KL(P‖Q) ≈ (1/n) Σ [log p(X_k) − log q(X_k)],  X_k ~ P

    샘플은 고정 크기 배치로 나뉘고 배치마다 (seed, batch) 로 시드를 정하므로
    jobs 값과 무관하게 결과가 같습니다.

    Returns:
        (estimate, standard_error, low_confidence). 표준오차 = 표본표준편차 / √n.
        n = 1 이면 표준오차 0, low_confidence = True.
    """
    if n < 1:
        raise ValueError(f"샘플 수는 1 이상이어야 합니다: {n}")
    if P is Q:
        return KLEstimate(0.0, 0.0)

    seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
    sizes = _batch_sizes(n, batch_size)
    if jobs > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda args: _batch_log_ratio(P, Q, args[1], seed, args[0]), enumerate(sizes)))
    else:
        parts = [_batch_log_ratio(P, Q, size, seed, batch) for batch, size in enumerate(sizes)]

    log_ratio = np.concatenate(parts)
    estimate = float(np.mean(log_ratio))
    if n == 1:
        logger.warning("샘플 1개로 추정한 KL 입니다 - 신뢰도가 낮습니다 (표준오차 0 으로 표기).")
        return KLEstimate(estimate, 0.0, low_confidence=True)
    standard_error = float(np.std(log_ratio, ddof=1) / math.sqrt(n))
    return KLEstimate(estimate, standard_error)


def gaussian_kl(mean_p, cov_p, mean_q, cov_q) -> float:
    """두 정규분포 사이의 해석적 KL(N_p ‖ N_q)."""
    mean_p, mean_q = np.asarray(mean_p, float), np.asarray(mean_q, float)
    cov_p, cov_q = np.asarray(cov_p, float), np.asarray(cov_q, float)
    d = mean_p.shape[0]
    cov_q_inv = np.linalg.inv(cov_q)
    diff = mean_q - mean_p
    _, logdet_p = np.linalg.slogdet(cov_p)
    _, logdet_q = np.linalg.slogdet(cov_q)
    return 0.5 * float(np.trace(cov_q_inv @ cov_p) + diff @ cov_q_inv @ diff - d + logdet_q - logdet_p)


def promising_density(archive: TrialArchive, gamma: float, alpha: float) -> GMMDensity:
    return GMMDensity(build_gmm(select_top_gamma(archive, gamma), alpha))


def gamma_similarity(
    source_archive: TrialArchive,
    target_archive: TrialArchive,
    gamma1: float = Config.DEFAULT_GAMMA,
    gamma2: float = Config.DEFAULT_GAMMA,
    alpha: float = Config.DEFAULT_ALPHA,
    prior: Optional[Density] = None,
    n: int = Config.DEFAULT_MC_SAMPLES,
    seed: int = 0,
    jobs: int = 1,
) -> SimilarityEstimate:
    """
    source → target 의 γ-similarity 를 추정합니다.

    두 KL 항은 서로 독립적인 샘플 스트림으로 추정합니다.

    Raises:
        InsufficientDataError: 어느 한 쪽 archive 에서 ⌊γ·N⌋ = 0 인 경우
    """
    if source_archive.dimension != target_archive.dimension:
        raise ValueError("source 와 target archive 의 차원이 다릅니다.")

    source = promising_density(source_archive, gamma1, alpha)
    target = promising_density(target_archive, gamma2, alpha)
    prior = prior or prior_density("gaussian", source_archive.dimension)

    seed_prior, seed_source = (
        int(s) for s in np.random.SeedSequence(int(seed) & 0xFFFF_FFFF_FFFF_FFFF).generate_state(2)
    )
    kl_prior = kl_mc(prior, target, n, seed_prior, jobs=jobs)
    kl_source = kl_mc(source, target, n, seed_source, jobs=jobs)

    s_hat = kl_prior.estimate - kl_source.estimate
    standard_error = math.sqrt(kl_prior.standard_error ** 2 + kl_source.standard_error ** 2)
    logger.info(
        f"γ-similarity = {s_hat:.4f} ± {standard_error:.4f} "
        f"(KL(P*‖P₂)={kl_prior.estimate:.4f}, KL(P₁‖P₂)={kl_source.estimate:.4f}, n={n})"
    )
    return SimilarityEstimate(
        s_hat=s_hat,
        standard_error=standard_error,
        n_samples=n,
        kl_prior=kl_prior.estimate,
        kl_source=kl_source.estimate,
        low_confidence=kl_prior.low_confidence or kl_source.low_confidence,
    )
