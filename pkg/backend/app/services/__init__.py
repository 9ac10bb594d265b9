from .simulation_service import SimulationService
from .verification_service import VerificationService

__all__ = [
    "SimulationService",
    "VerificationService"
]
