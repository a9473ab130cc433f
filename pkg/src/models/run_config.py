"""YAML run files and their merge with settings and command-line flags."""

import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.core.errors import ConfigurationError
from src.models.settings import Settings

logger = logging.getLogger(__name__)


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


# RunConfig field -> Settings field
SETTINGS_FIELDS = {
    "seed": "seed",
    "samples": "samples",
    "workers": "workers",
    "h": "pde_h",
    "nodes": "sigma_nodes",
}


class RunConfig(BaseModel):
    """One laboratory run: what to compute, on what, and where to write it."""

    model_config = ConfigDict(extra="forbid", use_enum_values=True)

    command: Optional[str] = Field(None, description="Command this file is meant for")
    body: Optional[Path] = Field(None, description="Body document")
    corpus: Optional[Path] = Field(None, description="Corpus of check cases")
    n: Optional[int] = Field(None, ge=1, description="Dimension")
    seed: Optional[int] = Field(None, ge=0, le=2**64 - 1, description="Monte Carlo seed")
    samples: Optional[int] = Field(None, ge=0, description="Monte Carlo sample count")
    h: Optional[float] = Field(None, gt=0.0, le=0.5, description="PDE grid spacing")
    nodes: Optional[int] = Field(None, ge=1000, description="Sigma table nodes")
    out: Optional[Path] = Field(None, description="Output file")
    format: OutputFormat = Field(OutputFormat.JSON, description="json or csv")
    workers: Optional[int] = Field(None, ge=1, description="Worker threads")

    @classmethod
    def from_yaml(cls, yaml_path: Union[str, Path]) -> "RunConfig":
        """Load a run file; OSError propagates for unreadable files."""
        with open(yaml_path, "r", encoding="utf-8") as f:
            text = f.read()
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"{yaml_path}: not valid YAML ({e})") from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"{yaml_path}: a run file must be a mapping")
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigurationError(f"{yaml_path}: invalid run file\n{e}") from e

    def resolve(self, settings: Settings, **flags: Any) -> "RunConfig":
        """Command-line flag, then GBM_* environment, then this file, then the default."""
        explicit = settings.model_fields_set
        update: Dict[str, Any] = {}
        for name in RunConfig.model_fields:
            flag = flags.get(name)
            if flag is not None:
                update[name] = flag
                continue
            settings_name = SETTINGS_FIELDS.get(name)
            if settings_name is None:
                continue
            if settings_name in explicit or getattr(self, name) is None:
                update[name] = getattr(settings, settings_name)
        try:
            return RunConfig.model_validate({**self.model_dump(), **update})
        except ValidationError as e:
            raise ConfigurationError(f"invalid run configuration\n{e}") from e

    def require_seed(self) -> int:
        """Monte Carlo commands never fall back to a wall-clock seed."""
        if self.seed is None:
            raise ConfigurationError(
                "a seed is required for sampling: pass --seed, set GBM_SEED or add seed to the run file"
            )
        return self.seed
