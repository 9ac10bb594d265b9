"""
镜面对原子辐射的修正

坐标系 (x̂, ŷ, ẑ)：x̂ 为镜面法线，ẑ 沿偶极矩 D̂31（平行于镜面）。
|3⟩→|1⟩ 跃迁的辐射与镜像干涉，衰减率与能级都被修正；
|3⟩→|2⟩ 跃迁的频率低于镜面的截止频率，镜面对这部分光子透明，其衰减率与辐射不受镜面影响。
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from app.core.errors import (
    GridTooCoarse,
    InvalidParameterError,
    NonFinite,
    NonPositiveDistance,
    NonPositiveRate,
)
from app.schemas.params import AtomParams, MirrorConfig
from app.schemas.radiation import Direction, RadiativeCorrection

logger = logging.getLogger(__name__)

# u = 2·k31·r 低于该值时用级数计算 1 − F(u)
SERIES_THRESHOLD = 0.1

# F(u) = (3/2)·Σ (−1)^m (2m+2)² u^(2m) / (2m+3)!，m = 0 项为 1
_SERIES_COEFFS = tuple(
    1.5 * (-1) ** m * (2 * m + 2) ** 2 / math.factorial(2 * m + 3) for m in range(1, 7)
)

DIPOLE_31 = (0.0, 0.0, 1.0)
DIPOLE_32 = (0.0, 0.0, 1.0)

MIN_GRID = 8
MAX_GRID = (1024, 2048)


def _check_k31r(k31r: float) -> float:
    if not math.isfinite(k31r):
        raise NonFinite(f"k31r 必须是有限数: {k31r}")
    if k31r <= 0:
        raise NonPositiveDistance(f"k31r 必须为正: {k31r}")
    return k31r


def _check_rate(gamma: float) -> float:
    if not math.isfinite(gamma):
        raise NonFinite(f"衰减率必须是有限数: {gamma}")
    if gamma <= 0:
        raise NonPositiveRate(f"衰减率必须为正: {gamma}")
    return gamma


def decay_factor(k31r: float) -> float:
    """Γ̄1/Γ1 = 1 − (3/2)(sin u/u + cos u/u² − sin u/u³)，u = 2k31r"""
    u = 2.0 * _check_k31r(k31r)
    if u < SERIES_THRESHOLD:
        u2 = u * u
        return -math.fsum(c * u2 ** (m + 1) for m, c in enumerate(_SERIES_COEFFS))
    s, c = math.sin(u), math.cos(u)
    return 1.0 - 1.5 * (s / u + c / u**2 - s / u**3)


def shift_factor(k31r: float) -> float:
    """Δ/Γ1 = (3/4)(cos u/u − sin u/u² − cos u/u³)"""
    u = 2.0 * _check_k31r(k31r)
    s, c = math.sin(u), math.cos(u)
    return 0.75 * (c / u - s / u**2 - c / u**3)


def gamma_bar_1(cfg: MirrorConfig, gamma1: float) -> float:
    """
    镜面修正后的 |3⟩→|1⟩ 衰减率

    参数:
        cfg: 镜面配置
        gamma1: 自由空间衰减率 Γ1

    返回:
        Γ̄1，取值在 [0, 2Γ1]
    """
    return _check_rate(gamma1) * decay_factor(cfg.k31r)


def level_shift(cfg: MirrorConfig, gamma1: float) -> float:
    """
    |3⟩ 的能级移动 Δ（带符号）

    参数:
        cfg: 镜面配置
        gamma1: 自由空间衰减率 Γ1

    返回:
        Δ，单位与 gamma1 相同
    """
    return _check_rate(gamma1) * shift_factor(cfg.k31r)


def radiative_correction(cfg: MirrorConfig, p: AtomParams) -> RadiativeCorrection:
    """汇总某一距离下的 Γ̄1、Γ̄2 与 Δ"""
    return RadiativeCorrection(
        gamma_bar_1=gamma_bar_1(cfg, p.gamma1),
        gamma_bar_2=p.gamma2,
        shift=level_shift(cfg, p.gamma1),
        k31r=cfg.k31r,
    )


def _check_population(p3: float) -> float:
    if not math.isfinite(p3) or not 0.0 <= p3 <= 1.0:
        raise InvalidParameterError(f"布居必须在 [0, 1] 内: {p3}")
    return p3


def _unit(vector: Sequence[float]) -> np.ndarray:
    v = np.asarray(vector, dtype=float)
    norm = np.linalg.norm(v)
    if v.shape != (3,) or not norm > 0:
        raise InvalidParameterError(f"偶极方向无效: {vector}")
    return v / norm


def _intensity_1_kernel(kx, kz, k31r: float, gamma1: float, p3: float):
    # kx、kz 为 k̂ 在镜面法线与 D̂31 上的分量，可以是数组
    return 3.0 * gamma1 / (4.0 * math.pi) * (1.0 - kz**2) * p3 * np.sin(k31r * kx) ** 2


def intensity_1(dir: Direction, p3: float, cfg: MirrorConfig, p: AtomParams) -> float:
    """
    |3⟩→|1⟩ 跃迁在 k̂ 方向的荧光强度

    参数:
        dir: 探测方向
        p3: 激发态布居
        cfg: 镜面配置
        p: 原子参数

    返回:
        强度，单位 MHz/sr
    """
    kx, _, kz = dir.unit_vector()
    value = _intensity_1_kernel(kx, kz, cfg.k31r, p.gamma1, _check_population(p3))
    return float(max(value, 0.0))


def intensity_2(
    dir: Direction,
    p3: float,
    p: AtomParams,
    dipole_32: Optional[Sequence[float]] = None,
) -> float:
    """|3⟩→|2⟩ 跃迁的荧光强度，与 r 无关"""
    k = np.asarray(dir.unit_vector())
    d = _unit(dipole_32 if dipole_32 is not None else DIPOLE_32)
    projection = float(np.dot(d, k))
    value = 3.0 * p.gamma2 / (8.0 * math.pi) * (1.0 - projection**2) * _check_population(p3)
    return max(value, 0.0)


def quadrature_total_rate(
    cfg: MirrorConfig,
    p: AtomParams,
    n_theta: int,
    n_phi: int,
    p3: float = 1.0,
) -> float:
    """
    对 intensity_1 做全球面积分

    cosθ 方向用 Gauss-Legendre 节点，φ 方向用周期梯形公式。

    参数:
        cfg: 镜面配置
        p: 原子参数
        n_theta: cosθ 方向节点数
        n_phi: φ 方向节点数
        p3: 激发态布居，积分结果与之成正比

    返回:
        总辐射率，p3 = 1 时收敛到 Γ̄1
    """
    if n_theta < MIN_GRID or n_phi < MIN_GRID:
        raise GridTooCoarse(f"积分网格过粗: {n_theta}×{n_phi}，至少 {MIN_GRID}×{MIN_GRID}")
    if p3 < 0 or not math.isfinite(p3):
        raise InvalidParameterError(f"布居必须非负: {p3}")

    mu, w_mu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    w_phi = 2.0 * math.pi / n_phi

    sin_theta = np.sqrt(1.0 - mu**2)
    kx = mu[:, None]
    kz = sin_theta[:, None] * np.sin(phi)[None, :]
    integrand = _intensity_1_kernel(kx, kz, cfg.k31r, p.gamma1, p3)
    return float(np.sum(w_mu[:, None] * integrand) * w_phi)


def converged_total_rate(
    cfg: MirrorConfig,
    p: AtomParams,
    tol: float = 1e-9,
    start: Tuple[int, int] = (16, 32),
) -> Tuple[float, int, int]:
    """
    逐级加倍网格直到相邻两级的相对差 < tol

    返回:
        (积分值, n_theta, n_phi)；达到 1024×2048 仍未收敛时返回最细一级
    """
    n_theta, n_phi = start
    previous = quadrature_total_rate(cfg, p, n_theta, n_phi)
    while n_theta < MAX_GRID[0]:
        n_theta, n_phi = n_theta * 2, n_phi * 2
        current = quadrature_total_rate(cfg, p, n_theta, n_phi)
        if abs(current - previous) <= tol * max(abs(current), 1e-300):
            return current, n_theta, n_phi
        previous = current
    logger.warning("球面积分在 %d×%d 网格上仍未收敛 (k31r=%.6g)", n_theta, n_phi, cfg.k31r)
    return previous, n_theta, n_phi
