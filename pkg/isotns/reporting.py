"""
CSV/JSON result files and flat TOML experiment configuration files.
"""
import csv
import json
import logging
import pathlib
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import tomli
from pydantic import BaseModel

from .exceptions import ConfigurationError
from .models import CSV_COLUMNS, ExperimentConfig, RunManifest, VarianceRecord
from .version import __version__

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]


def build_manifest(config: ExperimentConfig, wall_time: float) -> RunManifest:
    return RunManifest(
        config_hash=config.config_hash(),
        code_version=__version__,
        wall_time=wall_time,
        master_seed=config.seed,
        config=config.model_dump(),
    )


def _format_for(path: pathlib.Path, fmt: Optional[str]) -> str:
    if fmt:
        return fmt
    return "json" if path.suffix.lower() == ".json" else "csv"


def emit(records: Sequence[VarianceRecord], path: PathLike, fmt: Optional[str] = None,
         manifest: Optional[RunManifest] = None, extra: Optional[Mapping[str, Any]] = None) -> pathlib.Path:
    """
    Write variance records as CSV (exact column order, header only when empty) or as
    JSON with a run manifest.

    Raises:
        OSError: If the file cannot be written; the message names the path
    """
    path = pathlib.Path(path)
    fmt = _format_for(path, fmt)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            with path.open("w", newline="") as f:
                writer = csv.DictWriter(f, fieldnames=list(CSV_COLUMNS), lineterminator="\n")
                writer.writeheader()
                for record in records:
                    writer.writerow({k: _csv_value(v) for k, v in record.csv_row().items()})
        else:
            payload: Dict[str, Any] = {
                "manifest": manifest.model_dump() if manifest else None,
                "records": [r.model_dump() for r in records],
            }
            if extra:
                payload.update(extra)
            write_json(payload, path)
    except OSError as e:
        raise OSError(f"Cannot write results to {path}: {e.strerror or e}") from e
    logger.info("Wrote %d records to %s", len(records), path)
    return path


def _csv_value(value: Any) -> Any:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return value


def write_json(payload: Any, path: PathLike) -> pathlib.Path:
    path = pathlib.Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as f:
            json.dump(_jsonable(payload), f, indent=2, sort_keys=False)
            f.write("\n")
    except OSError as e:
        raise OSError(f"Cannot write {path}: {e.strerror or e}") from e
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def load_records(path: PathLike) -> List[VarianceRecord]:
    """
    Parse a CSV or JSON file written by :func:`emit`.

    Raises:
        ConfigurationError: If a row does not describe a valid record
    """
    path = pathlib.Path(path)
    try:
        if path.suffix.lower() == ".json":
            with path.open() as f:
                rows = json.load(f)["records"]
        else:
            with path.open(newline="") as f:
                rows = list(csv.DictReader(f))
    except OSError as e:
        raise OSError(f"Cannot read results from {path}: {e.strerror or e}") from e
    except (KeyError, json.JSONDecodeError) as e:
        raise ConfigurationError([f"{path}: not a results file ({e})"]) from None
    records = []
    violations = []
    for n, row in enumerate(rows, start=1):
        try:
            records.append(VarianceRecord.model_validate(row))
        except ValueError as e:
            violations.append(f"{path}, record {n}: {e}")
    if violations:
        raise ConfigurationError(violations)
    return records


def load_config(path: Optional[PathLike] = None, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    Read a flat TOML config and apply overrides; ``None`` overrides mean "not given".

    Raises:
        ConfigurationError: On nested tables, unknown keys or violated rules
    """
    data: Dict[str, Any] = {}
    if path is not None:
        path = pathlib.Path(path)
        try:
            with path.open("rb") as f:
                data = tomli.load(f)
        except OSError as e:
            raise OSError(f"Cannot read config {path}: {e.strerror or e}") from e
        except tomli.TOMLDecodeError as e:
            raise ConfigurationError([f"{path}: {e}"]) from None
        nested = [k for k, v in data.items() if isinstance(v, dict)]
        if nested:
            raise ConfigurationError([f"nested table '{k}' is not allowed; use flat keys" for k in nested])
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig.from_mapping(data)
