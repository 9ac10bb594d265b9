import math
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.errors import InvalidParameterError, NonFinite, NonPositiveRate
from app.schemas.params import AtomParams


class Direction(BaseModel):
    """
    探测方向

    坐标系为 (x̂, ŷ, ẑ) = (镜面法线, ŷ, D̂31)。
    theta 是与镜面法线 x̂ 的夹角，phi 是在 ŷẑ 平面内从 ŷ 量起的方位角。
    """

    model_config = ConfigDict(frozen=True)

    theta: float = Field(0.0, description="极角 θ ∈ [0, π]")
    phi: float = Field(0.0, description="方位角 φ ∈ [0, 2π)")

    @model_validator(mode="after")
    def _check(self) -> "Direction":
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise NonFinite(f"方向角必须是有限数: θ={self.theta}, φ={self.phi}")
        if not 0.0 <= self.theta <= math.pi:
            raise InvalidParameterError(f"θ 超出 [0, π]: {self.theta}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise InvalidParameterError(f"φ 超出 [0, 2π): {self.phi}")
        return self

    def unit_vector(self) -> Tuple[float, float, float]:
        """返回 k̂ = (cosθ, sinθ·cosφ, sinθ·sinφ)"""
        s = math.sin(self.theta)
        return (math.cos(self.theta), s * math.cos(self.phi), s * math.sin(self.phi))

    @classmethod
    def from_vector(cls, x: float, y: float, z: float) -> "Direction":
        norm = math.sqrt(x * x + y * y + z * z)
        if not norm > 0:
            raise InvalidParameterError("方向向量不能为零向量")
        theta = math.acos(max(-1.0, min(1.0, x / norm)))
        phi = math.atan2(z, y) % (2 * math.pi) if (y or z) else 0.0
        return cls(theta=theta, phi=phi)


class RadiativeCorrection(BaseModel):
    """镜面修正后的衰减率与能级移动"""

    model_config = ConfigDict(frozen=True)

    gamma_bar_1: float = Field(..., description="修正后的 |3⟩→|1⟩ 衰减率 Γ̄1")
    gamma_bar_2: float = Field(..., description="|3⟩→|2⟩ 衰减率 Γ̄2（ω32 低于镜面截止频率，不受修正）")
    shift: float = Field(..., description="|3⟩ 的能级移动 Δ")
    k31r: Optional[float] = Field(None, description="对应的 k31·r，None 表示自由空间或手工构造")

    @model_validator(mode="after")
    def _check(self) -> "RadiativeCorrection":
        for name in ("gamma_bar_1", "gamma_bar_2", "shift"):
            if not math.isfinite(getattr(self, name)):
                raise NonFinite(f"{name} 必须是有限数")
        if self.gamma_bar_1 < 0 or self.gamma_bar_2 <= 0:
            raise NonPositiveRate(
                f"修正后的衰减率无效: Γ̄1={self.gamma_bar_1}, Γ̄2={self.gamma_bar_2}"
            )
        return self

    @classmethod
    def free_space(cls, p: AtomParams) -> "RadiativeCorrection":
        """没有镜面时的修正：Γ̄1 = Γ1，Δ = 0"""
        return cls(gamma_bar_1=p.gamma1, gamma_bar_2=p.gamma2, shift=0.0)
