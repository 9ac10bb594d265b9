import logging

import pandas as pd
from openpyxl.styles import Alignment
from openpyxl.utils import get_column_letter

from app.core.errors import IoFailure
from app.schemas.sweep import SweepResult

from .file_utils import _ensure_parent, result_to_frame

logger = logging.getLogger(__name__)


def save_excel(result: SweepResult, file_path):
    """
    将扫描结果保存为Excel文件

    第一个工作表为数据，第二个工作表为元数据。

    参数:
        result: 扫描结果
        file_path: 输出Excel文件路径
    """
    df = result_to_frame(result)
    meta = pd.DataFrame(
        {"键": list(result.metadata.keys()), "值": [str(v) for v in result.metadata.values()]}
    )

    try:
        _ensure_parent(file_path)
        with pd.ExcelWriter(file_path, engine="openpyxl") as writer:
            df.to_excel(writer, sheet_name="扫描数据", index=False)
            meta.to_excel(writer, sheet_name="元数据", index=False)

            worksheet = writer.sheets["扫描数据"]
            # 设置列宽
            for col_idx, column in enumerate(df.columns):
                worksheet.column_dimensions[get_column_letter(col_idx + 1)].width = min(len(column) + 6, 40)

            center_alignment = Alignment(horizontal="center", vertical="center")
            for cell in worksheet[1]:
                cell.alignment = center_alignment
    except OSError as e:
        raise IoFailure(f"写入 {file_path} 失败: {e}") from e

    logger.info("数据已保存到Excel文件: %s", file_path)
