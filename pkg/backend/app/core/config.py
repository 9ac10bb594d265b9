import math
import os
from typing import Any, List, Optional, Union

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.errors import IoFailure


class Settings(BaseSettings):
    API_V1_STR: str = "/api/v1"

    # 调试模式
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # CORS配置
    BACKEND_CORS_ORIGINS: List[str] = []

    @field_validator("BACKEND_CORS_ORIGINS", mode="before")
    @classmethod
    def assemble_cors_origins(cls, v: Union[str, List[str]]) -> Union[List[str], str]:
        if isinstance(v, str) and not v.startswith("["):
            return [i.strip() for i in v.split(",") if i.strip()]
        elif isinstance(v, (list, str)):
            return v
        raise ValueError(v)

    # 项目名称
    PROJECT_NAME: str = "MirrorFluorescence"
    VERSION: str = "1.0.0"

    # 原子参数（角频率单位 MHz，即 rad/μs）
    OMEGA1: float = 10.0
    OMEGA2: float = 5.0
    DELTA1: float = 2.0
    DELTA2: float = 0.0
    GAMMA1: float = 15.1
    GAMMA2: float = 5.4

    # 镜面参数，距离以 λ31 为单位，k31 = 2π/λ31
    R: float = 5.0
    K31: float = 2 * math.pi

    # 探测方向（相对镜面法线 x̂ 的极角与方位角）
    THETA: float = 0.0
    PHI: float = 0.0

    # 扫描网格：r ∈ [1, 6] λ31，即 k31·r ∈ [2π, 12π]
    GRID_LO: float = 1.0
    GRID_HI: float = 6.0
    GRID_N: int = 1200

    # 输出配置
    OUTPUT_FORMAT: str = "csv"
    OUTPUT_DIR: str = "./output"

    # 并行与进度条
    MAX_WORKERS: int = 4
    SHOW_PROGRESS: bool = True

    model_config = SettingsConfigDict(case_sensitive=False, env_file=".env", extra="ignore")

    def dump(self) -> str:
        """以 KEY=value 形式导出全部配置，按键名排序"""
        lines = []
        for key, value in sorted(self.model_dump().items()):
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{key}={value}")
        return "\n".join(lines)


def load_settings(config_path: Optional[str] = None) -> Settings:
    """
    加载配置

    参数:
        config_path: key=value 格式的配置文件路径，None 时只读取默认 .env

    返回:
        Settings 实例
    """
    if config_path is None:
        return Settings()
    if not os.path.isfile(config_path):
        raise IoFailure(f"配置文件不存在: {config_path}")
    return Settings(_env_file=config_path)


def configure(config_path: Optional[str] = None, **overrides: Any) -> Settings:
    """
    重新加载配置并写回全局 settings 实例

    优先级：命令行覆盖 > 环境变量 > 配置文件 > 默认值

    参数:
        config_path: 配置文件路径
        overrides: 字段名（大小写不敏感）到取值的映射，None 表示不覆盖

    返回:
        更新后的全局 settings
    """
    loaded = load_settings(config_path)
    data = loaded.model_dump()
    data.update({key.upper(): value for key, value in overrides.items() if value is not None})
    merged = Settings.model_validate(data)
    for key, value in merged.model_dump().items():
        setattr(settings, key, value)
    return settings


# 创建设置实例
settings = Settings()
