"""
稳态激发态布居 P3 的闭式解、两种近似以及调制指标
"""

import logging
import math
from typing import List, Tuple

import numpy as np

from app.core.errors import (
    DegenerateDenominator,
    InsufficientSamples,
    InvalidSweepSpec,
    ZeroDetuning,
    ZeroDriving,
)
from app.schemas.params import AtomParams
from app.schemas.radiation import RadiativeCorrection
from app.schemas.steady import EffectiveDetunings, ModulationMetrics
from app.schemas.sweep import SweepResult

logger = logging.getLogger(__name__)

DENOMINATOR_FLOOR = 1e-30

# 调制周期（以 k31r 计）为 π
MODULATION_PERIOD = math.pi
MIN_PERIODS = 2.0
MIN_SAMPLES_PER_PERIOD = 64
FLAT_TOLERANCE = 1e-12


def effective_detunings(p: AtomParams, rc: RadiativeCorrection) -> EffectiveDetunings:
    """Δ̄j = Δj − Δ"""
    return EffectiveDetunings(
        dbar1=p.delta1 - rc.shift,
        dbar2=p.delta2 - rc.shift,
        two_photon=p.delta1 - p.delta2,
    )


def _denominator_terms(p: AtomParams, rc: RadiativeCorrection, e: EffectiveDetunings) -> List[float]:
    g1, g2 = rc.gamma_bar_1, rc.gamma_bar_2
    o1, o2 = p.omega1**2, p.omega2**2
    d1, d2, d = e.dbar1, e.dbar2, e.two_photon
    dd = d * d
    return [
        ((o1 + o2) ** 2 + 8.0 * dd * g1 * g2) * (g1 * o2 + g2 * o1),
        4.0 * dd * g1 * g2 * (g1 * o1 + g2 * o2),
        4.0 * dd * (g1**3 * o2 + 2.0 * (g1 + g2) * o1 * o2 + g2**3 * o1),
        -8.0 * d * (d1 * g1 * o2**2 - d2 * g2 * o1**2),
        16.0 * dd * (d1 * d1 * g1 * o2 + d2 * d2 * g2 * o1),
    ]


def p3_closed(p: AtomParams, rc: RadiativeCorrection) -> float:
    """
    稳态激发态布居的闭式解

    参数:
        p: 原子参数
        rc: 镜面修正

    返回:
        P3 ∈ [0, 1/2]；Δ1 = Δ2 时严格为 0
    """
    e = effective_detunings(p, rc)
    terms = _denominator_terms(p, rc, e)
    denominator = math.fsum(sorted(terms, key=abs, reverse=True))
    if not denominator > DENOMINATOR_FLOOR:
        raise DegenerateDenominator(
            f"P3 分母退化 ({denominator:.3e})，Ω1={p.omega1}, Ω2={p.omega2}"
        )

    d = e.two_photon
    numerator = 4.0 * d * d * (rc.gamma_bar_1 + rc.gamma_bar_2) * p.omega1**2 * p.omega2**2
    if numerator == 0.0:
        return 0.0
    return numerator / denominator


def p3_weak_detuning(p: AtomParams, rc: RadiativeCorrection) -> float:
    """
    失谐远小于拉比频率时的近似

    只依赖裸失谐之差 Δ1 − Δ2，能级移动 Δ 在差中抵消。
    """
    o1, o2 = p.omega1**2, p.omega2**2
    if o1 + o2 == 0.0:
        raise ZeroDriving("Ω1 与 Ω2 不能同时为 0")
    g1, g2 = rc.gamma_bar_1, rc.gamma_bar_2
    weight = g1 * o2 + g2 * o1
    if weight == 0.0:
        raise DegenerateDenominator("Γ̄1Ω2² + Γ̄2Ω1² = 0")
    d = p.delta1 - p.delta2
    return 4.0 * d * d * o1 * o2 / (o1 + o2) ** 2 * (g1 + g2) / weight


def p3_large_detuning(p: AtomParams, rc: RadiativeCorrection) -> float:
    """失谐远大于拉比频率与衰减率时的近似"""
    e = effective_detunings(p, rc)
    if e.dbar1 == 0.0 or e.dbar2 == 0.0:
        raise ZeroDetuning(f"有效失谐不能为 0: Δ̄1={e.dbar1}, Δ̄2={e.dbar2}")
    g1, g2 = rc.gamma_bar_1, rc.gamma_bar_2
    o1, o2 = p.omega1**2, p.omega2**2
    denominator = e.dbar1**2 * g1 * o2 + e.dbar2**2 * g2 * o1
    if denominator == 0.0:
        raise ZeroDriving("Ω1 与 Ω2 不能同时为 0")
    return 0.25 * o1 * o2 * (g1 + g2) / denominator


def is_dark_state(p: AtomParams, rc: RadiativeCorrection) -> bool:
    """双光子共振 Δ̄1 = Δ̄2 且两束光都在驱动时，原子被囚禁在暗态"""
    return effective_detunings(p, rc).two_photon == 0.0 and p.omega1 > 0 and p.omega2 > 0


def wrap_phase(angle: float) -> float:
    """把相位折回 [−π, π]"""
    return math.remainder(angle, 2.0 * math.pi)


def _refine_extremum(x: np.ndarray, y: np.ndarray, i: int) -> float:
    # 过三点的抛物线顶点
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    curvature = y0 - 2.0 * y1 + y2
    if curvature == 0.0:
        return float(x[i])
    offset = 0.5 * (y0 - y2) / curvature
    return float(x[i] + offset * (x[i + 1] - x[i]))


def _extrema(x: np.ndarray, y: np.ndarray) -> Tuple[List[float], List[float]]:
    maxima, minima = [], []
    for i in range(1, len(y) - 1):
        if y[i] > y[i - 1] and y[i] >= y[i + 1]:
            maxima.append(_refine_extremum(x, y, i))
        elif y[i] < y[i - 1] and y[i] <= y[i + 1]:
            minima.append(_refine_extremum(x, y, i))
    return maxima, minima


def curve_metrics(k31r, values) -> ModulationMetrics:
    """
    计算一条曲线的调制指标

    参数:
        k31r: 等间距且递增的 k31·r 采样点
        values: 对应的曲线值

    返回:
        ModulationMetrics，相位以 sin²(k31r) 为参考
    """
    x = np.asarray(k31r, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or len(x) < 3:
        raise InsufficientSamples(f"采样数组无效: {x.shape} vs {y.shape}")

    periods = (x[-1] - x[0]) / MODULATION_PERIOD
    if periods < MIN_PERIODS * (1.0 - 1e-9):
        raise InsufficientSamples(f"只覆盖了 {periods:.3f} 个周期，至少需要 {MIN_PERIODS:g} 个")
    if (len(x) - 1) / periods < MIN_SAMPLES_PER_PERIOD:
        raise InsufficientSamples(f"每周期采样点不足 {MIN_SAMPLES_PER_PERIOD} 个")

    y_max, y_min = float(np.max(y)), float(np.min(y))
    total = y_max + y_min
    visibility = (y_max - y_min) / total if total != 0.0 else 0.0

    design = np.column_stack([np.ones_like(x), np.cos(2.0 * x), np.sin(2.0 * x)])
    (mean, a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    amplitude = math.hypot(a, b)

    scale = max(abs(y_max), abs(y_min))
    flat = scale == 0.0 or (y_max - y_min) <= FLAT_TOLERANCE * scale
    if flat:
        logger.debug("曲线平坦，相位无定义")
        return ModulationMetrics(
            visibility=visibility,
            amplitude=amplitude,
            mean=float(mean),
            phase=None,
            flat=True,
            periods=periods,
        )

    # sin²x = 1/2 − cos(2x)/2 的拟合系数为 (a, b) = (−1/2, 0)，对应相位 0
    phase = wrap_phase(math.atan2(b, a) - math.pi)
    maxima, minima = _extrema(x, y)
    return ModulationMetrics(
        visibility=visibility,
        amplitude=amplitude,
        mean=float(mean),
        phase=phase,
        flat=False,
        periods=periods,
        maxima=maxima,
        minima=minima,
    )


def modulation_metrics(curve: SweepResult, column: str = "P3") -> ModulationMetrics:
    """
    计算扫描结果中某一列关于 k31r 的调制指标

    参数:
        curve: 关于 r 的扫描结果
        column: 要分析的列名

    返回:
        ModulationMetrics
    """
    if "k31r" not in curve.columns:
        raise InvalidSweepSpec(f"调制分析需要关于 r 的扫描，当前扫描变量为 {curve.variable}")
    if column not in curve.columns:
        raise InvalidSweepSpec(f"扫描结果中没有 {column} 列")
    return curve_metrics(curve.column("k31r"), curve.column(column))


def local_visibility(curve: SweepResult, column: str, window: float = 2.0 * MODULATION_PERIOD) -> List[Tuple[float, float]]:
    """
    分窗可见度

    把 k31r 轴从起点开始切成宽度为 window 的相邻窗口，末尾不足一个窗口的部分丢弃。

    参数:
        curve: 关于 r 的扫描结果
        column: 要分析的列名
        window: 窗口宽度（以 k31r 计），默认两个调制周期

    返回:
        每个窗口的 (r 的平均值, 可见度)，按 r 递增
    """
    if "k31r" not in curve.columns:
        raise InvalidSweepSpec(f"分窗分析需要关于 r 的扫描，当前扫描变量为 {curve.variable}")
    if column not in curve.columns:
        raise InvalidSweepSpec(f"扫描结果中没有 {column} 列")
    if not (math.isfinite(window) and window > 0):
        raise InvalidSweepSpec(f"窗口宽度必须为正: {window}")

    r = curve.column(curve.variable)
    x = curve.column("k31r")
    y = curve.column(column)
    if len(x) < 3:
        raise InsufficientSamples(f"采样点太少: {len(x)}")

    count = math.floor((x[-1] - x[0]) / window * (1.0 + 1e-12))
    windows = []
    for i in range(count):
        start = x[0] + i * window
        mask = (x >= start) & (x <= start + window)
        if np.count_nonzero(mask) < 3:
            raise InsufficientSamples(f"第 {i + 1} 个窗口内采样点不足")
        y_max, y_min = float(np.max(y[mask])), float(np.min(y[mask]))
        total = y_max + y_min
        windows.append((float(np.mean(r[mask])), (y_max - y_min) / total if total != 0.0 else 0.0))
    return windows
