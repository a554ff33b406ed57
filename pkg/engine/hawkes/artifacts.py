"""
Model files, CSV artifacts and run manifests
"""
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import pandas as pd

from . import __version__
from .config import get_settings
from .schemas import HawkesModel, RunConfig

logger = logging.getLogger(__name__)

MANIFEST_NAME = "run-manifest.json"
FLOAT_FORMAT = "%.10g"


def load_model(path: Path) -> HawkesModel:
    """Read and validate a JSON model file"""
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        data = json.load(handle)
    model = HawkesModel.model_validate(data)
    logger.debug(f"Loaded model '{model.name or path.stem}' (d={model.d}) from {path}")
    return model


def dump_model(model: HawkesModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = model.model_dump(mode="json", by_alias=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def load_run_config(path: Path) -> RunConfig:
    """RunConfig from a JSON file; unknown keys are rejected"""
    with Path(path).open("r", encoding="utf-8") as handle:
        return RunConfig.model_validate(json.load(handle))


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_csv(frame: pd.DataFrame, path: Optional[Path]) -> Optional[Path]:
    """
    Write a result table with a fixed float format

    Args:
        frame: Table to write
        path: Target file; None writes to stdout

    Returns:
        The written path, or None for stdout
    """
    text = frame_to_csv(frame)
    if path is None:
        sys.stdout.write(text)
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def sha256_digest(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for block in iter(lambda: handle.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(directory: Path, config: RunConfig, artifacts: Iterable[Path],
                   seeds: Optional[Dict[str, Any]] = None, extra: Optional[Dict[str, Any]] = None) -> Path:
    """
    run-manifest.json beside the artifacts: config echo, seeds, tool version
    and SHA-256 digests. No timestamps, so identical runs give identical files.
    """
    directory = Path(directory)
    manifest = {
        "tool": get_settings().app_name,
        "version": __version__,
        "config": config.model_dump(mode="json"),
        "seeds": seeds or {},
        "artifacts": [{"name": Path(p).name, "sha256": sha256_digest(p)} for p in artifacts],
    }
    if extra:
        manifest["results"] = extra
    path = directory / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
