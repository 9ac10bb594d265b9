"""
主方程的数值求解

在随两束激光旋转的参考系中，条件哈密顿量与重置项都不含时，
ρ̇ = −i(H_eff ρ − ρ H_eff†) + Σj Γ̄j |j⟩⟨3|ρ|3⟩⟨j| 可以写成 9×9 的刘维尔矩阵。
ρ 按行优先展开为 9 维向量，基矢顺序 |1⟩, |2⟩, |3⟩。
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from app.core.errors import (
    CalibrationAmbiguous,
    DegenerateNullSpace,
    InvalidDensityMatrix,
    InvalidParameterError,
    NonFinite,
    NonPositiveRate,
    StepTooLarge,
)
from app.physics.mirror_em import radiative_correction
from app.physics.steady_closed import p3_closed
from app.schemas.params import AtomParams, MirrorConfig
from app.schemas.radiation import RadiativeCorrection

logger = logging.getLogger(__name__)

DIM = 3
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
NULLSPACE_TOL = 1e-12
CALIBRATION_TOL = 1e-8
STEP_FACTOR = 0.01

# 对角元 ρ11, ρ22, ρ33 在展开向量中的位置
_TRACE_INDICES = (0, 4, 8)


def _projector(i: int, j: int) -> np.ndarray:
    m = np.zeros((DIM, DIM), dtype=complex)
    m[i, j] = 1.0
    return m


@dataclass(frozen=True, eq=False)
class DensityMatrix3:
    """三能级密度矩阵，构造时检查厄米性、迹与半正定性"""

    data: np.ndarray

    def __post_init__(self):
        rho = np.array(self.data, dtype=complex)
        if rho.shape != (DIM, DIM):
            raise InvalidDensityMatrix(f"密度矩阵形状应为 3×3，实际为 {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise NonFinite("密度矩阵含有非有限元素")
        if np.linalg.norm(rho - rho.conj().T) >= HERMITIAN_TOL:
            raise InvalidDensityMatrix("密度矩阵不是厄米矩阵")
        if abs(np.trace(rho) - 1.0) >= TRACE_TOL:
            raise InvalidDensityMatrix(f"密度矩阵的迹不为 1: {np.trace(rho)}")
        min_eig = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
        if min_eig <= -POSITIVITY_TOL:
            raise InvalidDensityMatrix(f"密度矩阵不是半正定的，最小本征值 {min_eig:.3e}")
        rho.setflags(write=False)
        object.__setattr__(self, "data", rho)

    @classmethod
    def pure(cls, level: int) -> "DensityMatrix3":
        """能级 |level⟩ 上的纯态，level 取 1、2、3"""
        if level not in (1, 2, 3):
            raise InvalidParameterError(f"能级编号必须是 1、2 或 3: {level}")
        return cls(_projector(level - 1, level - 1))

    @property
    def populations(self) -> Tuple[float, float, float]:
        return tuple(float(v) for v in np.real(np.diag(self.data)))

    @property
    def p3(self) -> float:
        return float(self.data[2, 2].real)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))

    def vector(self) -> np.ndarray:
        return self.data.reshape(DIM * DIM)

    def to_dict(self) -> dict:
        return {"real": self.data.real.tolist(), "imag": self.data.imag.tolist()}


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """
    作用在行优先展开 ρ 上的 9×9 生成元

    rate_scale 是 max(Γ1, Ω1, Ω2, |Δ̄1|, |Δ̄2|)，用来限制时间步长。
    """

    matrix: np.ndarray
    rate_scale: float
    sign: int = 1

    @property
    def max_step(self) -> float:
        return STEP_FACTOR / self.rate_scale

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ np.asarray(rho, dtype=complex).reshape(DIM * DIM)).reshape(DIM, DIM)


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise InvalidParameterError(f"sign 只能是 ±1: {sign}")
    return sign


def build_hamiltonian(p: AtomParams, rc: RadiativeCorrection, sign: int = 1) -> np.ndarray:
    """
    旋转参考系中的厄米哈密顿量

    H = (Ω1/2)(|1⟩⟨3| + h.c.) + (Ω2/2)(|2⟩⟨3| + h.c.) + Δ|3⟩⟨3| + sign·(Δ1|1⟩⟨1| + Δ2|2⟩⟨2|)

    参数:
        p: 原子参数
        rc: 镜面修正，只用到能级移动 Δ
        sign: 基态失谐的符号约定

    返回:
        3×3 复矩阵
    """
    sign = _check_sign(sign)
    h = np.zeros((DIM, DIM), dtype=complex)
    h[0, 2] = h[2, 0] = p.omega1 / 2.0
    h[1, 2] = h[2, 1] = p.omega2 / 2.0
    h[0, 0] = sign * p.delta1
    h[1, 1] = sign * p.delta2
    h[2, 2] = rc.shift
    return h


def build_liouvillian(p: AtomParams, rc: RadiativeCorrection, sign: int = 1) -> Liouvillian:
    """
    构造刘维尔矩阵

    参数:
        p: 原子参数
        rc: 镜面修正
        sign: 基态失谐的符号约定

    返回:
        Liouvillian
    """
    if rc.gamma_bar_1 < 0 or rc.gamma_bar_2 <= 0:
        raise NonPositiveRate(f"要求 Γ̄1 ≥ 0 且 Γ̄2 > 0: Γ̄1={rc.gamma_bar_1}, Γ̄2={rc.gamma_bar_2}")

    identity = np.eye(DIM, dtype=complex)
    h_eff = build_hamiltonian(p, rc, sign)
    h_eff[2, 2] -= 0.5j * (rc.gamma_bar_1 + rc.gamma_bar_2)

    matrix = -1j * (np.kron(h_eff, identity) - np.kron(identity, h_eff.conj()))
    for level, rate in ((0, rc.gamma_bar_1), (1, rc.gamma_bar_2)):
        jump = _projector(level, 2)
        matrix += rate * np.kron(jump, jump.conj())

    scale = max(
        p.gamma1,
        p.omega1,
        p.omega2,
        abs(p.delta1 - rc.shift),
        abs(p.delta2 - rc.shift),
    )
    return Liouvillian(matrix=matrix, rate_scale=scale, sign=sign)


def steady_state(L: Liouvillian) -> DensityMatrix3:
    """
    求 L·vec(ρ) = 0 且 tr ρ = 1 的稳态

    用迹约束替换第一行后直接求解线性方程组。

    参数:
        L: 刘维尔矩阵

    返回:
        稳态密度矩阵
    """
    singular_values = np.linalg.svd(L.matrix, compute_uv=False)
    tol = NULLSPACE_TOL * max(singular_values[0], 1.0)
    nullity = int(np.sum(singular_values <= tol))
    if nullity > 1:
        raise DegenerateNullSpace(f"稳态不唯一，零空间维数为 {nullity}")

    system = L.matrix.copy()
    system[0, :] = 0.0
    system[0, list(_TRACE_INDICES)] = 1.0
    rhs = np.zeros(DIM * DIM, dtype=complex)
    rhs[0] = 1.0
    try:
        solution = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as e:
        raise DegenerateNullSpace(f"稳态方程组奇异: {e}") from e

    rho = solution.reshape(DIM, DIM)
    return DensityMatrix3((rho + rho.conj().T) / 2.0)


def propagate(L: Liouvillian, rho0: DensityMatrix3, t: float, dt: float) -> DensityMatrix3:
    """
    四阶 Runge-Kutta 时间演化

    实际步长取 t/ceil(t/dt)，保证恰好落在 t。

    参数:
        L: 刘维尔矩阵
        rho0: 初态
        t: 演化时间（μs）
        dt: 最大步长，不得超过 L.max_step

    返回:
        t 时刻的密度矩阵
    """
    if not (math.isfinite(t) and math.isfinite(dt)):
        raise NonFinite(f"t 与 dt 必须是有限数: t={t}, dt={dt}")
    if t < 0:
        raise InvalidParameterError(f"演化时间不能为负: {t}")
    if dt <= 0:
        raise InvalidParameterError(f"步长必须为正: {dt}")
    if dt > L.max_step * (1.0 + 1e-12):
        raise StepTooLarge(f"步长 {dt:.3e} 超过上限 {L.max_step:.3e}")
    if t == 0:
        return rho0

    steps = math.ceil(t / dt)
    h = t / steps
    rho = np.array(rho0.data, dtype=complex)
    for _ in range(steps):
        k1 = L.apply(rho)
        k2 = L.apply(rho + 0.5 * h * k1)
        k3 = L.apply(rho + 0.5 * h * k2)
        k4 = L.apply(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    return DensityMatrix3((rho + rho.conj().T) / 2.0)


def calibrate_sign(p: AtomParams, rc: RadiativeCorrection) -> int:
    """
    确定基态失谐的符号约定

    分别用 sign = ±1 求数值稳态，与闭式解比较，恰好一个符号吻合时返回它。

    参数:
        p: 参考点的原子参数，需要 Δ1 ≠ Δ2
        rc: 参考点的镜面修正，需要 Δ ≠ 0

    返回:
        1 或 -1
    """
    target = p3_closed(p, rc)
    matches: List[int] = []
    residuals = {}
    for sign in (1, -1):
        rho = steady_state(build_liouvillian(p, rc, sign))
        residuals[sign] = abs(rho.p3 - target)
        if residuals[sign] < CALIBRATION_TOL:
            matches.append(sign)

    logger.debug("符号校准残差: +1 → %.3e, -1 → %.3e", residuals[1], residuals[-1])
    if len(matches) != 1:
        raise CalibrationAmbiguous(
            f"无法唯一确定符号: 吻合的符号 {matches}，残差 {residuals}"
        )
    return matches[0]


# 参考点：Ω1=10, Ω2=5, Δ1=2, Δ2=0, Γ1=15.1, Γ2=5.4，k31r = 10π
REFERENCE_ATOM = AtomParams(omega1=10.0, omega2=5.0, delta1=2.0, delta2=0.0, gamma1=15.1, gamma2=5.4)
REFERENCE_K31R = 10.0 * math.pi


@lru_cache(maxsize=1)
def reference_sign() -> int:
    """在固定参考点上校准一次符号并缓存"""
    rc = radiative_correction(MirrorConfig.from_k31r(REFERENCE_K31R), REFERENCE_ATOM)
    sign = calibrate_sign(REFERENCE_ATOM, rc)
    logger.info("哈密顿量符号约定: %+d", sign)
    return sign
