# file_utils.py
import json
from pathlib import Path
from typing import Any

from errors import ConfigError


def load_json(path: str | Path) -> Any:
    """
    Read a JSON document. Unreadable files and syntax errors become
    ConfigError with a file:line:column prefix.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read file ({exc.strerror or exc})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def dump_json(doc: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def save_json(path: str | Path, doc: Any) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(doc), encoding="utf-8")
    return path


def load_matrix(path: str | Path):
    """Hermitian matrix from a {"dim", "re", "im"} document."""
    from config import MatrixDocument, validate_document

    doc = validate_document(MatrixDocument, load_json(path), source=str(path))
    return doc.to_matrix()
