from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.params import AtomParams, MirrorConfig
from app.schemas.radiation import Direction, RadiativeCorrection


class EffectiveDetunings(BaseModel):
    """
    有效失谐 Δ̄j = Δj − Δ

    two_photon 直接取自裸失谐之差 Δ1 − Δ2，保证暗态判断不受舍入影响。
    """

    model_config = ConfigDict(frozen=True)

    dbar1: float
    dbar2: float
    two_photon: float


class ModulationMetrics(BaseModel):
    """曲线关于 k31·r 的调制指标"""

    model_config = ConfigDict(frozen=True)

    visibility: float = Field(..., description="(max − min)/(max + min)")
    amplitude: float = Field(..., description="cos/sin(2k31r) 最小二乘拟合的振幅")
    mean: float = Field(..., description="拟合的常数项")
    phase: Optional[float] = Field(None, description="相对 sin²(k31r) 的相位，平坦曲线为 None")
    flat: bool = False
    periods: float = Field(..., description="采样区间覆盖的调制周期数")
    maxima: List[float] = Field(default_factory=list, description="极大值位置（k31r）")
    minima: List[float] = Field(default_factory=list, description="极小值位置（k31r）")


class SteadyRequest(BaseModel):
    """单点稳态计算请求"""

    atom: AtomParams
    mirror: MirrorConfig
    direction_1: Direction = Direction()
    direction_2: Direction = Direction()
    cross_check: bool = False


class SteadyStateSummary(BaseModel):
    """单点稳态计算结果"""

    atom: AtomParams
    mirror: MirrorConfig
    k31r: float
    correction: RadiativeCorrection
    detunings: EffectiveDetunings
    P3: float = Field(..., description="闭式解给出的 |3⟩ 布居")
    I1: float = Field(..., description="1→3 跃迁荧光强度（1e-2 MHz/sr）")
    I2: float = Field(..., description="2→3 跃迁荧光强度（1e-2 MHz/sr）")
    dark_state: bool
    P3_numeric: Optional[float] = None
    P3_residual: Optional[float] = None
    populations: Optional[List[float]] = None
    density_matrix: Optional[Dict[str, List[List[float]]]] = Field(None, description="稳态密度矩阵的实部与虚部")
    hamiltonian_sign: Optional[int] = None
