from .file_utils import ensure_dir, save_json, load_json, emit, emit_csv, emit_json, emit_preset, read_csv_columns
from .excel_utils import save_excel

__all__ = [
    'ensure_dir', 'save_json', 'load_json',
    'emit', 'emit_csv', 'emit_json', 'emit_preset', 'read_csv_columns',
    'save_excel',
]
