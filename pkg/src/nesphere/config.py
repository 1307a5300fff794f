import os
from pathlib import Path

import yaml
from pydantic import BaseModel, Field, ValidationError

from .errors import ConfigError
from .hypersphere import FitConfig
from .transport import EmdConfig, TransportConfig
from .volume import McConfig

CONFIG_ENV = "NESPHERE_CONFIG"


def default_config_path() -> Path:
    """``$NESPHERE_CONFIG`` if set, else ``~/.nesphere/config.yaml``."""
    env = os.environ.get(CONFIG_ENV)
    return Path(env) if env else Path.home() / ".nesphere" / "config.yaml"


config_path = default_config_path()


class Settings(BaseModel):
    fit: FitConfig = FitConfig()
    mc: McConfig = McConfig()
    transport: TransportConfig = TransportConfig()
    emd: EmdConfig = EmdConfig()
    seed: int = 42
    split_ratio: float = Field(0.9, gt=0, lt=1)
    ridge: float = Field(1e-3, ge=0)
    candidates: int = Field(100, ge=1)
    neighbors: int = Field(5, ge=1)
    emd_max_words: int = Field(500, ge=1)

    def save(self, path: Path | None = None):
        path = Path(path or config_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            yaml.safe_dump(self.model_dump(mode="json"), f, sort_keys=False)

    @classmethod
    def load(cls, path: Path | None = None):
        """Settings from YAML; a missing or empty file gives the defaults."""
        path = Path(path or config_path)
        if not path.exists():
            return cls()
        with open(path, "r") as f:
            data = yaml.safe_load(f)
        if not data:
            return cls()
        try:
            return cls(**data)
        except (ValidationError, TypeError) as e:
            raise ConfigError(f"Invalid settings in {path}: {e}") from e
