from typing import List, Optional

from pydantic import BaseModel, Field


class CheckResult(BaseModel):
    """单项自检结果"""

    name: str
    passed: bool
    max_residual: Optional[float] = None
    tolerance: Optional[float] = None
    soft: bool = Field(False, description="软检查不影响退出码")
    detail: str = ""


class VerificationReport(BaseModel):
    """全部自检结果"""

    checks: List[CheckResult]
    passed: bool
    exit_status: int

    def failed(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed and not c.soft]
