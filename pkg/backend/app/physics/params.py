"""
参数校验与透镜成像几何
"""

from app.schemas.params import AtomParams, LensGeometry


def validate(p: AtomParams) -> AtomParams:
    """
    校验原子参数

    AtomParams 在构造时已经完成校验，这里对 model_construct 绕过校验
    得到的实例重新走一遍校验流程。

    参数:
        p: 原子参数

    返回:
        校验通过的参数（值不变）
    """
    return AtomParams.model_validate(p.model_dump())


def effective_image_distance(g: LensGeometry) -> float:
    """
    透镜与曲面镜组合下原子到有效镜面的距离

    参数:
        g: 透镜几何，f 与 R 单位 mm

    返回:
        f²/R，单位 μm
    """
    g = LensGeometry.model_validate(g.model_dump())
    return g.f * g.f / g.R * 1000.0
