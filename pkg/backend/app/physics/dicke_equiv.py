"""
两原子偶极-偶极相互作用与镜像等价性

间距为 d 的两个全同原子（偶极矩垂直于连线）形成对称/反对称 Dicke 态。
镜前距离 r 的原子与间距 2r 的原子对处于反对称态时的衰减率和能级移动相同。
这里用球贝塞尔函数独立计算，不复用 mirror_em 中的展开式。
"""

import logging
import math
from typing import Iterable, List, Union

from scipy.special import spherical_jn, spherical_yn

from app.core.errors import NonFinite, NonPositiveRate
from app.physics.mirror_em import gamma_bar_1, level_shift
from app.schemas.dicke import (
    AtomPairConfig,
    CollectiveRates,
    MirrorImagePoint,
    MirrorImageReport,
)
from app.schemas.params import MirrorConfig

logger = logging.getLogger(__name__)

# 偶极矩与连线的夹角
DIPOLE_ANGLE = math.pi / 2
DEFAULT_TOLERANCE = 1e-12


def _angular_weights(alpha: float):
    return math.sin(alpha) ** 2, 1.0 - 3.0 * math.cos(alpha) ** 2


def collective_decay(v: float, gamma: float, alpha: float = DIPOLE_ANGLE) -> float:
    """Γ12 = (3Γ/2)[sin²α·j0(v) − (1 − 3cos²α)·j1(v)/v]"""
    transverse, longitudinal = _angular_weights(alpha)
    return 1.5 * gamma * (transverse * spherical_jn(0, v) - longitudinal * spherical_jn(1, v) / v)


def dipole_coupling(v: float, gamma: float, alpha: float = DIPOLE_ANGLE) -> float:
    """Ω12 = (3Γ/4)[sin²α·y0(v) − (1 − 3cos²α)·y1(v)/v]"""
    transverse, longitudinal = _angular_weights(alpha)
    return 0.75 * gamma * (transverse * spherical_yn(0, v) - longitudinal * spherical_yn(1, v) / v)


def collective_rates(cfg: AtomPairConfig, gamma: float) -> CollectiveRates:
    """
    原子对的集体衰减率与能级移动

    参数:
        cfg: 原子对配置
        gamma: 单原子衰减率 Γ

    返回:
        CollectiveRates，gamma_sym/gamma_anti = Γ ± Γ12，反对称态能级移动为 −Ω12
    """
    if not math.isfinite(gamma):
        raise NonFinite(f"衰减率必须是有限数: {gamma}")
    if gamma <= 0:
        raise NonPositiveRate(f"衰减率必须为正: {gamma}")
    v = cfg.kd
    g12 = float(collective_decay(v, gamma))
    o12 = float(dipole_coupling(v, gamma))
    return CollectiveRates(
        kd=v,
        gamma_sym=gamma + g12,
        gamma_anti=gamma - g12,
        dipole_coupling=o12,
        dipole_shift=-o12,
    )


def _relative_residual(a: float, b: float, gamma: float) -> float:
    return abs(a - b) / max(gamma, abs(a), abs(b))


def verify_mirror_image(
    cfg_m: Union[MirrorConfig, Iterable[MirrorConfig]],
    gamma1: float,
    tolerance: float = DEFAULT_TOLERANCE,
) -> MirrorImageReport:
    """
    逐点比较镜面修正与间距 2r 的反对称 Dicke 态

    参数:
        cfg_m: 单个镜面配置或一组配置
        gamma1: 自由空间衰减率 Γ1
        tolerance: 相对容差，残差定义为 |a − b| / max(Γ1, |a|, |b|)

    返回:
        MirrorImageReport
    """
    configs: List[MirrorConfig] = [cfg_m] if isinstance(cfg_m, MirrorConfig) else list(cfg_m)
    points = []
    for cfg in configs:
        pair = collective_rates(AtomPairConfig(d=2.0 * cfg.r, k=cfg.k31), gamma1)
        rate = gamma_bar_1(cfg, gamma1)
        shift = level_shift(cfg, gamma1)
        rate_residual = _relative_residual(rate, pair.gamma_anti, gamma1)
        shift_residual = _relative_residual(shift, pair.dipole_shift, gamma1)
        points.append(
            MirrorImagePoint(
                k31r=cfg.k31r,
                gamma_bar_1=rate,
                gamma_anti=pair.gamma_anti,
                rate_residual=rate_residual,
                level_shift=shift,
                dipole_shift=pair.dipole_shift,
                shift_residual=shift_residual,
                passed=rate_residual < tolerance and shift_residual < tolerance,
            )
        )

    max_rate = max((pt.rate_residual for pt in points), default=0.0)
    max_shift = max((pt.shift_residual for pt in points), default=0.0)
    passed = all(pt.passed for pt in points)
    if not passed:
        logger.warning("镜像等价性检验未通过: 最大残差 %.3e / %.3e", max_rate, max_shift)
    return MirrorImageReport(
        tolerance=tolerance,
        points=points,
        max_rate_residual=max_rate,
        max_shift_residual=max_shift,
        passed=passed,
    )
