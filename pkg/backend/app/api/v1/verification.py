from fastapi import APIRouter, Depends

from app.api.deps import get_verification_service
from app.schemas.verification import VerificationReport
from app.services.verification_service import VerificationService

router = APIRouter()


@router.get("", response_model=VerificationReport)
def run_verification(service: VerificationService = Depends(get_verification_service)):
    """
    运行全部自检

    返回每一项的最大残差与是否通过；HTTP 状态码始终为 200，结果看 passed 字段
    """
    return service.verify_all()
