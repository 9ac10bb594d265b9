from fastapi import APIRouter

from .simulation import router as simulation_router
from .sweeps import router as sweeps_router
from .verification import router as verification_router

api_router = APIRouter()

api_router.include_router(simulation_router, tags=["simulation"])
api_router.include_router(sweeps_router, tags=["sweeps"])
api_router.include_router(verification_router, prefix="/verification", tags=["verification"])
