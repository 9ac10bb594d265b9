import argparse
import logging
import os
import sys

import uvicorn
from pydantic import ValidationError

from app.core.config import configure, settings
from app.core.errors import EXIT_INVALID_INPUT, EXIT_OK, InvalidSweepSpec, MirrorSimError
from app.physics.params import effective_image_distance
from app.schemas.params import AtomParams, LensGeometry, MirrorConfig
from app.schemas.radiation import Direction
from app.services.simulation_service import SimulationService
from app.services.verification_service import VerificationService
from app.utils.file_utils import FORMATS, dumps_json, emit, emit_preset, save_json

logger = logging.getLogger("main")

# 命令行参数名 -> 配置字段
PARAMETER_FLAGS = {
    "r": "R",
    "omega1": "OMEGA1",
    "omega2": "OMEGA2",
    "delta1": "DELTA1",
    "delta2": "DELTA2",
    "gamma1": "GAMMA1",
    "gamma2": "GAMMA2",
    "theta": "THETA",
    "phi": "PHI",
}


def parse_grid(text):
    """解析 lo:hi:n 形式的网格"""
    try:
        lo, hi, n = text.split(":")
        return float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"网格格式应为 lo:hi:n，实际为 {text!r}")


def build_parser():
    """构造命令行解析器"""
    parser = argparse.ArgumentParser(description="镜前 Λ 型三能级原子荧光模拟")
    parser.add_argument("--config", help="key=value 格式的配置文件")
    parser.add_argument("--dump-config", action="store_true", help="打印全部配置后退出")
    parser.add_argument("--debug", action="store_true", help="启用调试日志")

    # 各子命令共用的物理参数
    physics = argparse.ArgumentParser(add_help=False)
    physics.add_argument("--r", type=float, help="原子到镜面的距离（λ31 单位）")
    physics.add_argument("--omega1", type=float, help="拉比频率 Ω1（MHz）")
    physics.add_argument("--omega2", type=float, help="拉比频率 Ω2（MHz）")
    physics.add_argument("--delta1", type=float, help="失谐 Δ1（MHz）")
    physics.add_argument("--delta2", type=float, help="失谐 Δ2（MHz）")
    physics.add_argument("--gamma1", type=float, help="衰减率 Γ1（MHz）")
    physics.add_argument("--gamma2", type=float, help="衰减率 Γ2（MHz）")
    physics.add_argument("--theta", type=float, help="探测方向与镜面法线的夹角（rad）")
    physics.add_argument("--phi", type=float, help="探测方向的方位角（rad）")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=FORMATS, help="输出格式")
    output.add_argument("--out", help="输出路径")

    sub = parser.add_subparsers(dest="command")

    steady = sub.add_parser("steady", parents=[physics], help="单点稳态")
    steady.add_argument("--no-numeric", action="store_true", help="不求刘维尔矩阵的数值稳态")

    sweep = sub.add_parser("sweep", parents=[physics, output], help="一维参数扫描")
    sweep.add_argument("--variable", default="r", choices=["r", "omega1", "omega2", "delta1", "delta2"])
    sweep.add_argument("--grid", type=parse_grid, help="扫描网格 lo:hi:n")
    sweep.add_argument("--outputs", help="逗号分隔的输出量，如 I1,I2,P3")
    sweep.add_argument("--cross-check", action="store_true", help="附加数值稳态列")

    preset = sub.add_parser("preset", parents=[output], help="复现图形的预设扫描")
    preset.add_argument("name", choices=["fig4", "fig5", "fig6"])
    preset.add_argument("--grid", type=parse_grid, help="r 网格 lo:hi:n")

    saturation = sub.add_parser("saturation", parents=[physics], help="P3 调制振幅的饱和研究")
    saturation.add_argument("--out", help="报告 JSON 路径")

    verify = sub.add_parser("verify", help="运行全部自检")
    verify.add_argument("--out", help="报告 JSON 路径")

    lens = sub.add_parser("lens", help="透镜成像的等效距离")
    lens.add_argument("--f", type=float, required=True, help="焦距（mm）")
    lens.add_argument("--R", type=float, required=True, help="曲率半径（mm）")

    serve = sub.add_parser("serve", help="启动 HTTP 服务")
    serve.add_argument("--host", default="0.0.0.0", help="服务器主机")
    serve.add_argument("--port", type=int, default=8000, help="服务器端口")
    serve.add_argument("--reload", action="store_true", help="是否启用热重载")

    return parser


def setup_logging(debug: bool):
    logging.basicConfig(
        level=logging.DEBUG if debug else settings.LOG_LEVEL.upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


def apply_configuration(args):
    """配置文件、环境变量与命令行参数合并到全局 settings"""
    overrides = {field: getattr(args, flag, None) for flag, field in PARAMETER_FLAGS.items()}
    overrides["OUTPUT_FORMAT"] = getattr(args, "format", None)
    if args.debug:
        overrides["DEBUG"] = True
    grid = getattr(args, "grid", None)
    if grid is not None and getattr(args, "variable", "r") == "r":
        overrides.update(GRID_LO=grid[0], GRID_HI=grid[1], GRID_N=grid[2])
    return configure(args.config, **overrides)


def current_atom() -> AtomParams:
    return AtomParams(
        omega1=settings.OMEGA1,
        omega2=settings.OMEGA2,
        delta1=settings.DELTA1,
        delta2=settings.DELTA2,
        gamma1=settings.GAMMA1,
        gamma2=settings.GAMMA2,
    )


def current_direction() -> Direction:
    return Direction(theta=settings.THETA, phi=settings.PHI)


def print_json(data):
    sys.stdout.write(dumps_json(data))


def run_steady(args):
    service = SimulationService()
    direction = current_direction()
    summary = service.steady_point(
        current_atom(),
        MirrorConfig(r=settings.R, k31=settings.K31),
        direction_1=direction,
        direction_2=direction,
        cross_check=not args.no_numeric,
    )
    print_json(summary.model_dump(mode="json"))
    return EXIT_OK


def run_sweep(args):
    variable = args.variable
    if variable != "r" and getattr(args, variable) is not None:
        raise InvalidSweepSpec(f"扫描变量 {variable} 不能同时作为固定参数给出")
    if variable == "r" and args.r is not None:
        raise InvalidSweepSpec("扫描变量 r 不能同时作为固定参数给出")

    service = SimulationService()
    overrides = {
        "atom": current_atom(),
        "mirror": MirrorConfig(r=settings.R, k31=settings.K31),
        "direction_1": current_direction(),
        "direction_2": current_direction(),
        "cross_check": args.cross_check,
    }
    if args.grid is not None:
        overrides.update(lo=args.grid[0], hi=args.grid[1], count=args.grid[2])
    if args.outputs:
        overrides["outputs"] = [name.strip() for name in args.outputs.split(",") if name.strip()]
    try:
        spec = service.default_spec(variable, **overrides)
    except ValidationError as e:
        raise InvalidSweepSpec(str(e))

    result = service.run_sweep(spec)
    fmt = settings.OUTPUT_FORMAT
    path = args.out or os.path.join(settings.OUTPUT_DIR, f"sweep_{variable}.{fmt}")
    emit(result, fmt, path)
    print(f"扫描结果已保存至: {path}")
    return EXIT_OK


def run_preset(args):
    service = SimulationService()
    result = service.run_preset(args.name)
    paths = emit_preset(result, settings.OUTPUT_FORMAT, args.out or settings.OUTPUT_DIR)
    print_json({"name": result.name, "summary": result.summary, "files": paths})
    return EXIT_OK


def run_saturation(args):
    service = SimulationService()
    # 未显式给出时使用 Δ1=0, Δ2=0.1, Ω2=1 的默认研究参数
    if all(getattr(args, flag) is None for flag in ("omega2", "delta1", "delta2")):
        report = service.saturation_study()
    else:
        report = service.saturation_study(atom=current_atom())
    data = report.model_dump(mode="json")
    if args.out:
        save_json(data, args.out)
    print_json(data)
    return EXIT_OK


def run_verify(args):
    report = VerificationService().verify_all()
    data = report.model_dump(mode="json")
    if args.out:
        save_json(data, args.out)
    print_json(data)
    return report.exit_status


def run_lens(args):
    distance = effective_image_distance(LensGeometry(f=args.f, R=args.R))
    print(f"x = {distance:g} μm")
    return EXIT_OK


def run_serve(args):
    uvicorn.run(
        "app.main:app",
        host=args.host,
        port=args.port,
        reload=args.reload
    )
    return EXIT_OK


COMMANDS = {
    "steady": run_steady,
    "sweep": run_sweep,
    "preset": run_preset,
    "saturation": run_saturation,
    "verify": run_verify,
    "lens": run_lens,
    "serve": run_serve,
}


def main(argv=None):
    """主函数，返回退出码"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.debug)

    try:
        apply_configuration(args)
    except ValidationError as e:
        logger.error("配置无效: %s", e)
        return EXIT_INVALID_INPUT
    except MirrorSimError as e:
        logger.error("%s: %s", e.code, e.message)
        return EXIT_INVALID_INPUT
    setup_logging(args.debug or settings.DEBUG)

    if args.dump_config:
        print(settings.dump())
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_INVALID_INPUT

    try:
        return COMMANDS[args.command](args)
    except MirrorSimError as e:
        logger.error("%s: %s", e.code, e.message)
        return EXIT_INVALID_INPUT
    except ValidationError as e:
        logger.error("参数无效: %s", e)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
