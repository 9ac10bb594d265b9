from typing import Optional

from fastapi import APIRouter, Depends, Query

from app.api.deps import get_simulation_service
from app.schemas.sweep import PresetResult, SaturationReport, SweepRequest, SweepResult
from app.services.simulation_service import SimulationService

router = APIRouter()


@router.post("/sweeps", response_model=SweepResult)
def create_sweep(
    request: SweepRequest,
    service: SimulationService = Depends(get_simulation_service),
):
    """
    执行一维参数扫描

    未给出的网格与参数取服务端配置的默认值，返回按列存放的结果
    """
    overrides = request.model_dump(exclude_none=True, exclude={"atom", "mirror"})
    spec = service.default_spec(atom=request.atom, mirror=request.mirror, **overrides)
    return service.run_sweep(spec)


@router.get("/presets/{name}", response_model=PresetResult)
def run_preset(
    name: str,
    count: Optional[int] = Query(None, ge=2, description="r 网格点数，默认取配置"),
    include_sweeps: bool = Query(False, description="是否返回每条扫描的完整数据"),
    service: SimulationService = Depends(get_simulation_service),
):
    """
    运行 fig4 / fig5 / fig6 预设

    默认只返回调制指标与汇总量
    """
    result = service.run_preset(name, count=count)
    if not include_sweeps:
        result = result.model_copy(update={"sweeps": {}})
    return result


@router.get("/saturation", response_model=SaturationReport)
def saturation(service: SimulationService = Depends(get_simulation_service)):
    """P3 调制振幅的饱和研究"""
    return service.saturation_study()
