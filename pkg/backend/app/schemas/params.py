import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.errors import (
    InvalidGeometry,
    InvalidParameterError,
    NonFinite,
    NonPositiveDistance,
    NonPositiveRate,
)


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise NonFinite(f"{name} 必须是有限数，当前为 {value}")


class AtomParams(BaseModel):
    """
    Λ 型三能级原子的驱动与衰减参数

    所有量均为角频率，单位 MHz（rad/μs）。
    """

    model_config = ConfigDict(frozen=True)

    omega1: float = Field(..., description="|1⟩↔|3⟩ 跃迁的拉比频率 Ω1")
    omega2: float = Field(..., description="|2⟩↔|3⟩ 跃迁的拉比频率 Ω2")
    delta1: float = Field(..., description="激光 1 的失谐 Δ1")
    delta2: float = Field(..., description="激光 2 的失谐 Δ2")
    gamma1: float = Field(..., description="|3⟩→|1⟩ 的自由空间衰减率 Γ1")
    gamma2: float = Field(..., description="|3⟩→|2⟩ 的自由空间衰减率 Γ2")

    @model_validator(mode="after")
    def _check(self) -> "AtomParams":
        _require_finite(
            omega1=self.omega1,
            omega2=self.omega2,
            delta1=self.delta1,
            delta2=self.delta2,
            gamma1=self.gamma1,
            gamma2=self.gamma2,
        )
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise NonPositiveRate(f"衰减率必须为正: Γ1={self.gamma1}, Γ2={self.gamma2}")
        if self.omega1 < 0 or self.omega2 < 0:
            raise InvalidParameterError(f"拉比频率不能为负: Ω1={self.omega1}, Ω2={self.omega2}")
        return self

    def with_value(self, name: str, value: float) -> "AtomParams":
        """返回替换单个字段后重新校验的副本"""
        data = self.model_dump()
        if name not in data:
            raise InvalidParameterError(f"未知的原子参数: {name}")
        data[name] = value
        return AtomParams(**data)


class MirrorConfig(BaseModel):
    """原子与镜面的几何配置，r 以 λ31 为单位"""

    model_config = ConfigDict(frozen=True)

    r: float = Field(..., description="原子到镜面的距离（λ31 单位）")
    k31: float = Field(2 * math.pi, description="波数 k31 = 2π/λ31（以 1/λ31 为单位）")
    dipole_parallel: bool = Field(True, description="D̂31 是否平行于镜面")

    @model_validator(mode="after")
    def _check(self) -> "MirrorConfig":
        _require_finite(r=self.r, k31=self.k31)
        if self.r <= 0:
            raise NonPositiveDistance(f"原子到镜面的距离必须为正: r={self.r}")
        if self.k31 <= 0:
            raise InvalidParameterError(f"k31 必须为正: {self.k31}")
        if not self.dipole_parallel:
            raise InvalidParameterError("目前只支持 D̂31 平行于镜面的配置")
        return self

    @property
    def k31r(self) -> float:
        return self.k31 * self.r

    @classmethod
    def from_k31r(cls, k31r: float, k31: float = 2 * math.pi) -> "MirrorConfig":
        return cls(r=k31r / k31, k31=k31)


class LensGeometry(BaseModel):
    """
    透镜成像几何，长度单位 mm

    f: 透镜焦距
    R: 曲面镜曲率半径，须满足 R > f
    """

    model_config = ConfigDict(frozen=True)

    f: float = Field(..., description="焦距 f（mm）")
    R: float = Field(..., description="曲率半径 R（mm）")

    @model_validator(mode="after")
    def _check(self) -> "LensGeometry":
        _require_finite(f=self.f, R=self.R)
        if self.f <= 0 or self.R <= 0:
            raise InvalidGeometry(f"f 与 R 必须为正: f={self.f}, R={self.R}")
        if self.R <= self.f:
            raise InvalidGeometry(f"要求 R > f: f={self.f}, R={self.R}")
        return self


class LensResponse(BaseModel):
    """等效像距计算结果"""

    f: float
    R: float
    effective_distance_um: float = Field(..., description="等效原子-镜面距离（μm）")
    note: Optional[str] = None
