from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.api import api_router
from app.core.config import settings
from app.core.errors import MirrorSimError

app = FastAPI(
    title=settings.PROJECT_NAME,
    version=settings.VERSION,
    openapi_url=f"{settings.API_V1_STR}/openapi.json"
)

# 设置CORS
if settings.BACKEND_CORS_ORIGINS:
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[str(origin) for origin in settings.BACKEND_CORS_ORIGINS],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )

# 包含API路由
app.include_router(api_router, prefix=settings.API_V1_STR)


# 参数或计算错误
@app.exception_handler(MirrorSimError)
async def simulation_exception_handler(request: Request, exc: MirrorSimError):
    return JSONResponse(
        status_code=422,
        content={"detail": exc.message, "code": exc.code}
    )


# 全局异常处理
@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    return JSONResponse(
        status_code=500,
        content={"detail": f"服务器内部错误: {str(exc)}"}
    )


@app.get("/")
def read_root():
    return {"message": "欢迎使用镜前原子荧光模拟服务", "version": settings.VERSION}


@app.get("/health")
def health_check():
    return {"status": "healthy", "version": settings.VERSION}
