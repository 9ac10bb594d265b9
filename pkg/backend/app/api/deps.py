from app.services.simulation_service import SimulationService
from app.services.verification_service import VerificationService

# 服务全局单例
_SIMULATION_SERVICE = None
_VERIFICATION_SERVICE = None


def get_simulation_service() -> SimulationService:
    """获取模拟服务实例，HTTP 请求中不显示进度条"""
    global _SIMULATION_SERVICE
    if _SIMULATION_SERVICE is None:
        _SIMULATION_SERVICE = SimulationService(show_progress=False)
    return _SIMULATION_SERVICE


def get_verification_service() -> VerificationService:
    """获取自检服务实例"""
    global _VERIFICATION_SERVICE
    if _VERIFICATION_SERVICE is None:
        _VERIFICATION_SERVICE = VerificationService(simulation=get_simulation_service())
    return _VERIFICATION_SERVICE
