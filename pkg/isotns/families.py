"""
Tensor network family table.

Per-family metadata (branching ratio, default interaction width, sampled tensor kind,
channel constructions, analytic eta key) is packaged as ``families.json``.
"""
import importlib.resources
import json
from typing import Dict, List, Optional

from pydantic import BaseModel

from .exceptions import UnsupportedConfigurationError


class FamilyInfo(BaseModel):
    """Metadata for one network family."""

    name: str
    family: str
    branching: int
    default_width: int
    tensor_kinds: List[str]
    default_kind: Optional[str] = None
    cone_width: int
    channels: List[str]
    eta: str
    sampled: bool
    default_samples: int

    model_config = {"frozen": True}


class FamilyRegistry:
    """Loader and lookup for the packaged family table."""

    _families_cache: Optional[Dict[str, FamilyInfo]] = None

    @classmethod
    def load_families(cls) -> Dict[str, FamilyInfo]:
        """
        Load family metadata from families.json.

        Returns:
            Family metadata indexed by name (e.g. ``"mera-binary"``)
        """
        if cls._families_cache is not None:
            return cls._families_cache

        try:
            with importlib.resources.files("isotns").joinpath("families.json").open() as f:
                raw = json.load(f)
        except Exception as e:
            raise UnsupportedConfigurationError(f"Failed to load family table: {e}")
        cls._families_cache = {name: FamilyInfo(name=name, **entry) for name, entry in raw.items()}
        return cls._families_cache

    @classmethod
    def get(cls, name: str) -> FamilyInfo:
        """
        Get metadata for a family by name.

        Raises:
            UnsupportedConfigurationError: If the name is not in the table
        """
        families = cls.load_families()
        if name not in families:
            available = ", ".join(families.keys())
            raise UnsupportedConfigurationError(
                f"Family '{name}' not found. Available families: {available}"
            )
        return families[name]

    @classmethod
    def key_for(cls, family: str, branching: int) -> str:
        """Table key for an (ansatz family, branching ratio) pair."""
        if family == "mps":
            return "mps"
        suffix = {2: "binary", 3: "ternary"}.get(branching)
        if suffix is None:
            raise UnsupportedConfigurationError(
                f"Branching ratio {branching} is not supported for {family}; use 2 or 3"
            )
        return f"{family}-{suffix}"

    @classmethod
    def lookup(cls, family: str, branching: int) -> FamilyInfo:
        return cls.get(cls.key_for(family, branching))

    @classmethod
    def sampled_names(cls) -> List[str]:
        return [name for name, info in cls.load_families().items() if info.sampled]

    @classmethod
    def channel_tags(cls) -> List[str]:
        return [tag for info in cls.load_families().values() for tag in info.channels]
