import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from ..config import DEFAULT_CONFIG_PATH, SEED_OVERRIDE
from ..sampler import SamplerConfig, SamplerMode
from ..taskspace import PriorConfig
from ..world import WorldConfig

logger = logging.getLogger(__name__)


class ExperimentConfig(BaseModel):
    """Everything that determines a training run; two equal configs give identical metrics"""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(0, ge=0)
    iterations: int = Field(10_000, gt=0)
    eval_interval: int = Field(1_000, gt=0)
    eval_episodes: int = Field(50, gt=0)
    batch_size: int = Field(128, gt=0)
    lr: float = Field(3e-4, gt=0.0)
    mode: SamplerMode = SamplerMode.ATR
    sampler: SamplerConfig = Field(default_factory=SamplerConfig)
    prior: PriorConfig = Field(default_factory=PriorConfig)
    world: WorldConfig = Field(default_factory=WorldConfig)
    log_episodes: bool = True
    out: Optional[str] = None

    @property
    def value_min_buffer(self) -> int:
        # value updates wait for one full batch of labelled tasks
        return self.batch_size

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json", exclude={"out"}), sort_keys=True)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def config_hash(config: ExperimentConfig) -> str:
    return config.config_hash()


def load_config(path: Optional[Union[str, Path]] = None, **overrides: Any) -> ExperimentConfig:
    """Read a JSON config, then apply ACTIVETASK_SEED and any non-None keyword overrides"""
    path = Path(path) if path else DEFAULT_CONFIG_PATH
    data: Dict[str, Any] = {}
    if path.exists():
        data = json.loads(path.read_text(encoding="utf-8"))
        logger.debug(f"Loaded config from {path}")
    else:
        logger.warning(f"Config file {path} not found. Using defaults.")

    if SEED_OVERRIDE:
        data["seed"] = int(SEED_OVERRIDE)
        logger.info(f"Seed overridden from environment: {data['seed']}")
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    return ExperimentConfig.model_validate(data)
