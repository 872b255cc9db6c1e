"""
Data models for experiment configuration, Monte Carlo records and decay fits.
"""
import hashlib
import json
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, ValidationError, model_validator

from .ansatz import AnsatzSpec
from .exceptions import ConfigurationError
from .families import FamilyInfo, FamilyRegistry
from .tensor_core import is_power_of_two

CSV_COLUMNS: Tuple[str, ...] = (
    "family", "chi", "d", "size", "tau_or_site", "homogeneous",
    "trotter_t", "n_samples", "mean_var", "stderr", "seed",
)


class ExperimentConfig(BaseModel):
    """
    One Monte Carlo study.

    ``size`` is L for MPS and T for hierarchical families. Optional fields fall back to
    the family defaults from the family table: ``branching`` (2 for ttns/mera),
    ``d`` (chi), ``interaction_width``, ``tensor_kind``, ``n_samples``, ``positions``
    (all sites or layers) and the fit window [2, T-2].
    """

    family: Literal["mps", "ttns", "mera"]
    branching: Optional[int] = None
    chi: int = 2
    d: Optional[int] = None
    size: int
    homogeneous: bool = False
    trotter_steps: int = 0
    interaction_width: Optional[int] = None
    tensor_kind: Optional[Literal["site", "isometry", "disentangler"]] = None
    n_samples: Optional[int] = None
    seed: int = 0
    positions: Optional[List[int]] = None
    fit_min: Optional[int] = None
    fit_max: Optional[int] = None
    workers: Optional[int] = None
    chunk_size: int = 100
    output: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    chis: Optional[List[int]] = None
    sizes: Optional[List[int]] = None

    model_config = {"extra": "forbid", "frozen": True}

    @model_validator(mode="after")
    def _check_rules(self) -> "ExperimentConfig":
        violations: List[str] = []
        try:
            spec = self.spec
        except ValidationError as e:
            violations += [_message(err) for err in e.errors()]
            spec = None
        if self.n_samples is not None and self.n_samples < 2:
            violations.append(f"n_samples must be >= 2, got {self.n_samples}")
        if self.chunk_size < 1:
            violations.append(f"chunk_size must be >= 1, got {self.chunk_size}")
        if self.workers is not None and self.workers < 1:
            violations.append(f"workers must be >= 1, got {self.workers}")
        if self.trotter_steps and not is_power_of_two(self.chi):
            violations.append(f"trotter_steps needs chi = 2^q, got chi={self.chi}")
        if spec is not None:
            violations += self._position_violations(spec)
        if violations:
            raise ValueError("\n".join(violations))
        return self

    def _position_violations(self, spec: AnsatzSpec) -> List[str]:
        out = []
        info = spec.info
        top = spec.size
        noun = "layer" if spec.is_hierarchical else "site"
        for p in self.positions or ():
            if not 1 <= p <= top:
                out.append(f"{noun} {p} outside 1..{top}")
        width = self.interaction_width
        if width is not None:
            limit = info.default_width if spec.is_hierarchical else spec.size
            if not 1 <= width <= limit:
                out.append(f"interaction_width must be in 1..{limit} for {info.name}, got {width}")
        if self.tensor_kind is not None and self.tensor_kind not in info.tensor_kinds:
            out.append(f"tensor_kind '{self.tensor_kind}' not in {info.tensor_kinds} for {info.name}")
        if spec.is_hierarchical:
            for name, value in (("fit_min", self.fit_min), ("fit_max", self.fit_max)):
                if value is not None and not 1 <= value <= top:
                    out.append(f"{name} {value} outside 1..{top}")
            if self.fit_min is not None and self.fit_max is not None and self.fit_min > self.fit_max:
                out.append(f"fit window [{self.fit_min}, {self.fit_max}] is empty")
        for chi in self.chis or ():
            if chi < (2 if spec.is_hierarchical else 1):
                out.append(f"chi {chi} in chis is too small for {info.name}")
        for size in self.sizes or ():
            if size < 1:
                out.append(f"size {size} in sizes must be positive")
        return out

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        """
        Validate a flat mapping.

        Raises:
            ConfigurationError: Listing every violated rule and unknown key
        """
        try:
            return cls(**data)
        except ValidationError as e:
            violations = []
            for err in e.errors():
                violations += _message(err).split("\n")
            raise ConfigurationError(violations) from None

    @property
    def resolved_branching(self) -> int:
        if self.branching is not None:
            return self.branching
        return 1 if self.family == "mps" else 2

    @property
    def spec(self) -> AnsatzSpec:
        return AnsatzSpec(
            family=self.family,
            branching=self.resolved_branching,
            chi=self.chi,
            d=self.d if self.d is not None else self.chi,
            size=self.size,
            homogeneous=self.homogeneous,
            trotter_steps=self.trotter_steps,
        )

    @property
    def info(self) -> FamilyInfo:
        return FamilyRegistry.lookup(self.family, self.resolved_branching)

    @property
    def samples(self) -> int:
        return self.n_samples if self.n_samples is not None else self.info.default_samples

    @property
    def kind(self) -> str:
        return self.tensor_kind or self.info.default_kind or "site"

    @property
    def width(self) -> int:
        return self.interaction_width or self.info.default_width

    def sampled_positions(self) -> List[int]:
        return list(self.positions) if self.positions else list(range(1, self.size + 1))

    def fit_window(self) -> Tuple[int, int]:
        lo = self.fit_min if self.fit_min is not None else 2
        hi = self.fit_max if self.fit_max is not None else self.size - 2
        return lo, hi

    def replaced(self, **changes: Any) -> "ExperimentConfig":
        return ExperimentConfig.from_mapping({**self.model_dump(), **changes})

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the configuration, excluding output settings."""
        payload = self.model_dump(exclude={"output", "format", "workers"})
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _message(err: Mapping[str, Any]) -> str:
    msg = str(err.get("msg", ""))
    if msg.startswith("Value error, "):
        msg = msg[len("Value error, "):]
    loc = ".".join(str(p) for p in err.get("loc", ()))
    if err.get("type") == "extra_forbidden":
        return f"unknown key '{loc}'"
    return f"{loc}: {msg}" if loc else msg


class VarianceRecord(BaseModel):
    """Monte Carlo estimate of (1/N) Tr(g^dagger g) at one site or layer."""

    family: str
    chi: int
    d: int
    size: int
    tau_or_site: int
    homogeneous: bool = False
    trotter_t: int = 0
    n_samples: int
    mean_var: float
    stderr: float
    seed: int
    wall_time: float = 0.0
    interaction_width: Optional[int] = None
    tensor_kind: Optional[str] = None

    def csv_row(self) -> Dict[str, Any]:
        return {c: getattr(self, c) for c in CSV_COLUMNS}


class DecayFit(BaseModel):
    """exp(slope) of a weighted fit of ln(mean) against the layer index."""

    decay_factor: float
    ci_low: float
    ci_high: float
    window: Tuple[int, int]
    r_squared: float
    slope: float
    intercept: float
    n_points: int
    weighted: bool = True

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


class ChiScanRow(BaseModel):
    chi: int
    decay_factor: float
    ci_low: float
    ci_high: float
    predicted: float
    tau1_variance: float
    tau1_stderr: float


class SizeScanRow(BaseModel):
    size: int
    mean_var: float
    stderr: float


class RunManifest(BaseModel):
    """Provenance written next to every JSON result."""

    config_hash: str
    code_version: str
    wall_time: float
    master_seed: int
    config: Dict[str, Any]
