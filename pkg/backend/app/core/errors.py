"""
统一的异常定义

所有异常都不继承 ValueError，pydantic 校验器中抛出时会原样向上传递。
"""


class MirrorSimError(Exception):
    """模拟库的基础异常"""

    code = "MirrorSimError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code

    def to_dict(self):
        return {"code": self.code, "detail": self.message}


class InvalidParameterError(MirrorSimError):
    """输入参数不满足约束"""

    code = "InvalidParameter"


class NonPositiveRate(InvalidParameterError):
    code = "NonPositiveRate"


class NonFinite(InvalidParameterError):
    code = "NonFinite"


class NonPositiveDistance(InvalidParameterError):
    code = "NonPositiveDistance"


class NonPositiveSeparation(InvalidParameterError):
    code = "NonPositiveSeparation"


class InvalidGeometry(InvalidParameterError):
    code = "InvalidGeometry"


class InvalidSweepSpec(InvalidParameterError):
    code = "InvalidSweepSpec"


class GridTooCoarse(InvalidParameterError):
    code = "GridTooCoarse"


class StepTooLarge(InvalidParameterError):
    code = "StepTooLarge"


class InvalidDensityMatrix(InvalidParameterError):
    code = "InvalidDensityMatrix"


class ComputationError(MirrorSimError):
    """计算过程中出现的退化情况"""

    code = "ComputationError"


class DegenerateDenominator(ComputationError):
    code = "DegenerateDenominator"


class ZeroDriving(ComputationError):
    code = "ZeroDriving"


class ZeroDetuning(ComputationError):
    code = "ZeroDetuning"


class DegenerateNullSpace(ComputationError):
    code = "DegenerateNullSpace"


class CalibrationAmbiguous(ComputationError):
    code = "CalibrationAmbiguous"


class InsufficientSamples(ComputationError):
    code = "InsufficientSamples"


class FlatCurve(ComputationError):
    code = "FlatCurve"


class IoFailure(MirrorSimError):
    code = "IoFailure"


# 命令行退出码
EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INVALID_INPUT = 2
