import math
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.errors import InvalidSweepSpec
from app.schemas.params import AtomParams, MirrorConfig
from app.schemas.radiation import Direction
from app.schemas.steady import ModulationMetrics

SweepVariable = Literal["r", "omega1", "omega2", "delta1", "delta2"]
OutputName = Literal["I1", "I2", "P3", "gamma_bar_1", "shift"]

# 输出列的固定顺序
OUTPUT_ORDER: Tuple[str, ...] = ("I1", "I2", "P3", "gamma_bar_1", "shift")

UNITS: Dict[str, str] = {
    "r": "lambda31",
    "k31r": "rad",
    "omega1": "MHz",
    "omega2": "MHz",
    "delta1": "MHz",
    "delta2": "MHz",
    "I1": "1e-2 MHz/sr",
    "I2": "1e-2 MHz/sr",
    "P3": "1",
    "gamma_bar_1": "MHz",
    "shift": "MHz",
    "P3_numeric": "1",
    "P3_residual": "1",
}


class SweepSpec(BaseModel):
    """
    一维参数扫描描述

    variable 取 r 时网格以 λ31 为单位，其余变量以 MHz 为单位；
    atom/mirror 中与 variable 同名的字段在每个网格点上被覆盖。
    """

    model_config = ConfigDict(frozen=True)

    variable: SweepVariable = "r"
    lo: float
    hi: float
    count: int
    atom: AtomParams
    mirror: MirrorConfig
    outputs: List[OutputName] = Field(default_factory=lambda: list(OUTPUT_ORDER))
    direction_1: Direction = Direction()
    direction_2: Direction = Direction()
    cross_check: bool = False

    @model_validator(mode="after")
    def _check(self) -> "SweepSpec":
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise InvalidSweepSpec(f"扫描区间必须有限: [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise InvalidSweepSpec(f"要求 lo < hi: lo={self.lo}, hi={self.hi}")
        if self.count < 2:
            raise InvalidSweepSpec(f"网格点数至少为 2: count={self.count}")
        if not self.outputs:
            raise InvalidSweepSpec("至少需要一个输出量")
        if len(set(self.outputs)) != len(self.outputs):
            raise InvalidSweepSpec(f"输出量重复: {self.outputs}")
        if self.variable == "r" and self.lo <= 0:
            raise InvalidSweepSpec(f"距离扫描要求 lo > 0: lo={self.lo}")
        if self.variable in ("omega1", "omega2") and self.lo < 0:
            raise InvalidSweepSpec(f"拉比频率扫描要求 lo ≥ 0: lo={self.lo}")
        return self

    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    def ordered_outputs(self) -> List[str]:
        return [name for name in OUTPUT_ORDER if name in self.outputs]

    def point(self, value: float) -> Tuple[AtomParams, MirrorConfig]:
        """返回某个网格点上的参数"""
        if self.variable == "r":
            return self.atom, MirrorConfig(r=value, k31=self.mirror.k31)
        return self.atom.with_value(self.variable, value), self.mirror


class SweepResult(BaseModel):
    """
    扫描结果

    columns 按插入顺序保存：扫描变量、k31r（仅距离扫描）、各输出量。
    """

    variable: str
    columns: Dict[str, List[float]]
    units: Dict[str, str]
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "SweepResult":
        lengths = {len(values) for values in self.columns.values()}
        if len(lengths) > 1:
            raise InvalidSweepSpec(f"各列长度不一致: {sorted(lengths)}")
        if self.columns and self.variable not in self.columns:
            raise InvalidSweepSpec(f"缺少扫描变量列: {self.variable}")
        return self

    @property
    def grid(self) -> List[float]:
        return self.columns.get(self.variable, [])

    def __len__(self) -> int:
        return len(self.grid)

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name], dtype=float)

    def headers(self) -> List[str]:
        return [f"{name} [{self.units.get(name, '1')}]" for name in self.columns]

    @classmethod
    def empty(cls, variable: str, names: List[str], metadata: Optional[Dict[str, Any]] = None) -> "SweepResult":
        return cls(
            variable=variable,
            columns={name: [] for name in [variable, *names]},
            units={name: UNITS.get(name, "1") for name in [variable, *names]},
            metadata=metadata or {},
        )


class SweepRequest(BaseModel):
    """HTTP 扫描请求，未给出的字段取配置默认值"""

    variable: SweepVariable = "r"
    lo: Optional[float] = None
    hi: Optional[float] = None
    count: Optional[int] = None
    atom: Optional[AtomParams] = None
    mirror: Optional[MirrorConfig] = None
    outputs: Optional[List[OutputName]] = None
    direction_1: Direction = Direction()
    direction_2: Direction = Direction()
    cross_check: bool = False


class PresetResult(BaseModel):
    """复现图形的一组扫描及其调制指标"""

    name: str
    sweeps: Dict[str, SweepResult]
    metrics: Dict[str, ModulationMetrics]
    summary: Dict[str, float] = Field(default_factory=dict)


class SaturationReport(BaseModel):
    """饱和研究：P3 关于 k31r 的调制振幅随 Ω1 的变化"""

    omega2: float
    omega1_grid: List[float]
    amplitudes: List[float]
    omega_sat: float = Field(..., description="振幅最大处的 Ω1")
    amplitude_sat: float
    amplitude_3sat: float = Field(..., description="Ω1 = 3·Ω_sat 处的振幅")
    ratio: float = Field(..., description="amplitude_sat / amplitude_3sat")
    expected_window: Tuple[float, float] = (15.0, 60.0)
    within_expected: bool
    definition: str = "amplitude = sqrt(a^2 + b^2) of the fit P3 ≈ c0 + a·cos(2k31r) + b·sin(2k31r)"
