"""
输出目录、JSON 摘要与运行 manifest
"""
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from models import RunConfig

MANIFEST_NAME = "manifest.json"


def ensure_out_dir(out_dir: str | Path) -> Path:
    """确保输出目录存在"""
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path: str | Path, model: BaseModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def read_json(path: str | Path, model_type: type[BaseModel]) -> BaseModel:
    return model_type.model_validate_json(Path(path).read_text(encoding="utf-8"))


def write_manifest(
    out_dir: str | Path,
    command: str,
    options: dict[str, Any],
    seed: int,
    threads: int,
) -> Path:
    """写出 manifest.json，记录完整的解析后配置"""
    manifest = RunConfig(
        command=command,
        options={k: (str(v) if isinstance(v, Path) else v) for k, v in options.items()},
        seed=seed,
        threads=threads,
        out_dir=str(out_dir),
        created_at=datetime.now(timezone.utc),
    )
    return write_json(Path(out_dir) / MANIFEST_NAME, manifest)
