import math
from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.errors import InvalidParameterError, NonFinite, NonPositiveSeparation


class AtomPairConfig(BaseModel):
    """自由空间中的两个全同原子，d 以 λ 为单位"""

    model_config = ConfigDict(frozen=True)

    d: float = Field(..., description="两原子间距（λ 单位）")
    k: float = Field(2 * math.pi, description="波数 k = 2π/λ")
    dipole_perpendicular: bool = Field(True, description="偶极矩是否垂直于连线")

    @model_validator(mode="after")
    def _check(self) -> "AtomPairConfig":
        if not (math.isfinite(self.d) and math.isfinite(self.k)):
            raise NonFinite(f"d 与 k 必须是有限数: d={self.d}, k={self.k}")
        if self.d <= 0:
            raise NonPositiveSeparation(f"原子间距必须为正: d={self.d}")
        if self.k <= 0:
            raise InvalidParameterError(f"k 必须为正: {self.k}")
        if not self.dipole_perpendicular:
            raise InvalidParameterError("目前只支持偶极矩垂直于连线的配置")
        return self

    @property
    def kd(self) -> float:
        return self.k * self.d


class CollectiveRates(BaseModel):
    """两原子的集体衰减率与偶极-偶极能级移动"""

    model_config = ConfigDict(frozen=True)

    kd: float
    gamma_sym: float = Field(..., description="对称态衰减率 Γ + Γ12")
    gamma_anti: float = Field(..., description="反对称态衰减率 Γ − Γ12")
    dipole_coupling: float = Field(..., description="偶极-偶极耦合 Ω12")
    dipole_shift: float = Field(..., description="反对称态能级移动 −Ω12")


class MirrorImagePoint(BaseModel):
    k31r: float
    gamma_bar_1: float
    gamma_anti: float
    rate_residual: float
    level_shift: float
    dipole_shift: float
    shift_residual: float
    passed: bool


class MirrorImageReport(BaseModel):
    """镜像原子等价性检验结果，残差为相对量"""

    tolerance: float
    points: List[MirrorImagePoint]
    max_rate_residual: float
    max_shift_residual: float
    passed: bool
