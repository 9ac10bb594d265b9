from fastapi import APIRouter, Depends, Query

from app.api.deps import get_simulation_service
from app.physics.params import effective_image_distance
from app.schemas.params import LensGeometry, LensResponse
from app.schemas.steady import SteadyRequest, SteadyStateSummary
from app.services.simulation_service import SimulationService

router = APIRouter()


@router.post("/steady", response_model=SteadyStateSummary)
def compute_steady_state(
    request: SteadyRequest,
    service: SimulationService = Depends(get_simulation_service),
):
    """
    计算单个参数点的稳态

    返回闭式解 P3、镜面修正、两个跃迁的荧光强度；cross_check 为真时附带数值稳态
    """
    return service.steady_point(
        request.atom,
        request.mirror,
        direction_1=request.direction_1,
        direction_2=request.direction_2,
        cross_check=request.cross_check,
    )


@router.get("/lens", response_model=LensResponse)
def lens_distance(
    f: float = Query(..., description="透镜焦距（mm）"),
    R: float = Query(..., description="曲面镜曲率半径（mm）"),
):
    """
    透镜成像下的等效原子-镜面距离

    参数:
        f: 焦距，单位 mm
        R: 曲率半径，单位 mm，须大于 f
    """
    geometry = LensGeometry(f=f, R=R)
    return LensResponse(f=f, R=R, effective_distance_um=effective_image_distance(geometry))
