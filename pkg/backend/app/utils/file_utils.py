import json
import logging
import os
from typing import Any, Dict, List

import pandas as pd

from app.core.errors import InvalidParameterError, IoFailure
from app.schemas.sweep import PresetResult, SweepResult

logger = logging.getLogger(__name__)

# %.17g 保证 float64 往返无损
FLOAT_FORMAT = "%.17g"
FORMATS = ("csv", "json", "xlsx")


def ensure_dir(directory):
    """确保目录存在，如果不存在则创建"""
    if directory and not os.path.exists(directory):
        os.makedirs(directory, exist_ok=True)


def _ensure_parent(file_path):
    ensure_dir(os.path.dirname(os.path.abspath(file_path)))


def dumps_json(data: Any) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2, allow_nan=False) + "\n"


def save_json(data, file_path):
    """保存数据为JSON文件"""
    try:
        _ensure_parent(file_path)
        with open(file_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(dumps_json(data))
    except (OSError, ValueError) as e:
        raise IoFailure(f"写入 {file_path} 失败: {e}") from e
    logger.info("数据已保存到: %s", file_path)


def load_json(file_path):
    """从JSON文件加载数据"""
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise IoFailure(f"加载JSON文件出错: {e}") from e


def result_to_frame(result: SweepResult) -> pd.DataFrame:
    """把扫描结果转为 DataFrame，列名带单位"""
    return pd.DataFrame(
        {header: pd.Series(values, dtype="float64") for header, values in zip(result.headers(), result.columns.values())}
    )


def result_to_dict(result: SweepResult) -> Dict[str, Any]:
    return {
        "metadata": result.metadata,
        "variable": result.variable,
        "units": result.units,
        "columns": result.columns,
    }


def emit_csv(result: SweepResult, file_path):
    """写出 CSV，首行为带单位的列名"""
    try:
        _ensure_parent(file_path)
        result_to_frame(result).to_csv(file_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise IoFailure(f"写入 {file_path} 失败: {e}") from e
    logger.info("扫描结果已保存到: %s", file_path)


def emit_json(result: SweepResult, file_path):
    """写出 JSON，包含元数据与按列存放的数据"""
    save_json(result_to_dict(result), file_path)


def emit(result: SweepResult, fmt: str, file_path):
    """
    按指定格式写出扫描结果

    参数:
        result: 扫描结果
        fmt: csv、json 或 xlsx
        file_path: 输出文件路径

    返回:
        输出文件路径
    """
    if fmt == "csv":
        emit_csv(result, file_path)
    elif fmt == "json":
        emit_json(result, file_path)
    elif fmt == "xlsx":
        from .excel_utils import save_excel

        save_excel(result, file_path)
    else:
        raise InvalidParameterError(f"不支持的输出格式: {fmt}，可选 {', '.join(FORMATS)}")
    return file_path


def metrics_to_frame(preset: PresetResult) -> pd.DataFrame:
    """每条扫描一行：可见度、振幅、均值与相位，平坦曲线的相位留空"""
    rows = [
        {
            "label": label,
            "visibility": m.visibility,
            "amplitude": m.amplitude,
            "mean": m.mean,
            "phase": m.phase,
            "flat": m.flat,
        }
        for label, m in preset.metrics.items()
    ]
    return pd.DataFrame(rows, columns=["label", "visibility", "amplitude", "mean", "phase", "flat"])


def emit_preset(preset: PresetResult, fmt: str, directory) -> List[str]:
    """
    写出预设的全部扫描与指标表

    文件名为 <preset>_<label>.<ext> 与 <preset>_metrics.<ext>

    返回:
        写出的文件路径列表
    """
    ensure_dir(directory)
    paths = [
        emit(result, fmt, os.path.join(directory, f"{preset.name}_{label}.{fmt}"))
        for label, result in preset.sweeps.items()
    ]

    metrics_path = os.path.join(directory, f"{preset.name}_metrics.{fmt}")
    if fmt == "json":
        save_json(
            {
                "name": preset.name,
                "summary": preset.summary,
                "metrics": {label: m.model_dump() for label, m in preset.metrics.items()},
            },
            metrics_path,
        )
    else:
        frame = metrics_to_frame(preset)
        try:
            if fmt == "csv":
                frame.to_csv(metrics_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
            else:
                frame.to_excel(metrics_path, index=False, engine="openpyxl")
        except OSError as e:
            raise IoFailure(f"写入 {metrics_path} 失败: {e}") from e
    paths.append(metrics_path)
    return paths


def read_csv_columns(file_path) -> Dict[str, list]:
    """读回 emit_csv 写出的文件，列名去掉单位后缀"""
    try:
        df = pd.read_csv(file_path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        raise IoFailure(f"读取 {file_path} 失败: {e}") from e
    return {header.split(" [", 1)[0]: df[header].astype(float).tolist() for header in df.columns}
