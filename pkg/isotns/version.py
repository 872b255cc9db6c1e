"""
Version information for isotns.

Installed distributions report their metadata version; a source checkout reads the
manifest next to the package.
"""
import importlib.metadata
import pathlib
from typing import Any, Dict

import tomli

DISTRIBUTION = "isotns-gradients"
_DEFAULT_VERSION = "0.1.0"
_MANIFEST = pathlib.Path(__file__).parent.parent / "pyproject.toml"


def _manifest_version(data: Dict[str, Any]) -> str:
    # Poetry table first, PEP 621 table second
    poetry = data.get("tool", {}).get("poetry", {})
    if "version" in poetry:
        return str(poetry["version"])
    return str(data["project"]["version"])


def resolve_version() -> str:
    try:
        return importlib.metadata.version(DISTRIBUTION)
    except importlib.metadata.PackageNotFoundError:
        pass
    try:
        with _MANIFEST.open("rb") as f:
            return _manifest_version(tomli.load(f))
    except (OSError, KeyError, tomli.TOMLDecodeError):
        return _DEFAULT_VERSION


__version__ = resolve_version()
