"""Run checkpoints: all parameters, optimizer moments, the replay buffer, the
training RNG state and the metrics so far, in the learnsub checkpoint format."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..errors import ActiveTaskError
from ..learnsub import AdamState, ArchMismatchError, CheckpointFormatError, read_checkpoint, write_checkpoint
from ..sampler import ReplayBuffer
from ..taskspace import SKILL_KINDS
from .experiment import ExperimentConfig
from .state import TrainingState, new_training_state

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "checkpoint.bin"
STATE_SCHEMA = 1


class ConfigHashMismatch(ActiveTaskError):
    pass


def _arch(state: TrainingState) -> Dict[str, Any]:
    return {
        "policy": {k.value: state.policies[k].params.arch() for k in SKILL_KINDS},
        "sampler": state.sampler.joint().arch(),
    }


def _adam_arrays(prefix: str, adam: AdamState) -> Dict[str, np.ndarray]:
    return {f"{prefix}/adam/{name}": arr for name, arr in adam.to_arrays().items()}


def _adam_from(arrays: Dict[str, np.ndarray], prefix: str) -> AdamState:
    return AdamState.from_arrays({name: arrays[f"{prefix}/adam/{name}"] for name in ("m", "v", "hyper")})


def state_arrays(state: TrainingState) -> Dict[str, np.ndarray]:
    arrays: Dict[str, np.ndarray] = {}
    for k in SKILL_KINDS:
        policy = state.policies[k]
        prefix = f"policy/{k.value}"
        arrays[f"{prefix}/params"] = policy.params.values
        arrays[f"{prefix}/updates"] = np.array([policy.updates], dtype=np.float64)
        arrays.update(_adam_arrays(prefix, policy.adam))
    arrays["sampler/params"] = state.sampler.joint().values
    arrays["sampler/updates"] = np.array([state.sampler.updates], dtype=np.float64)
    arrays.update(_adam_arrays("sampler", state.sampler.adam))
    arrays.update(state.buffer.to_arrays())
    arrays["progress"] = np.array([state.iteration, state.env_steps], dtype=np.float64)
    return arrays


def save_checkpoint(path: Union[str, Path], state: TrainingState) -> Path:
    cfg = state.config
    meta = {
        "schema": STATE_SCHEMA,
        "config": cfg.model_dump(mode="json", exclude={"out"}),
        "config_hash": cfg.config_hash(),
        "buffer_digest": state.buffer.digest(),
        "rng_state": state.rng.bit_generator.state,
        "metrics": state.rows,
    }
    return write_checkpoint(path, state_arrays(state), _arch(state), meta)


def load_checkpoint(path: Union[str, Path], config: Optional[ExperimentConfig] = None) -> TrainingState:
    """Rebuild a TrainingState; ``config``, when given, must hash to the stored config"""
    arrays, arch, meta = read_checkpoint(path)
    if meta.get("schema") != STATE_SCHEMA:
        raise CheckpointFormatError(f"unsupported run state schema {meta.get('schema')!r}")

    stored = ExperimentConfig.model_validate(meta["config"])
    if stored.config_hash() != meta["config_hash"]:
        raise ConfigHashMismatch("stored config does not match its recorded hash")
    if config is not None and config.config_hash() != meta["config_hash"]:
        raise ConfigHashMismatch(
            f"config hash {config.config_hash()[:12]} differs from checkpoint {meta['config_hash'][:12]}"
        )

    state = new_training_state(config or stored)
    if json.dumps(arch, sort_keys=True) != json.dumps(_arch(state), sort_keys=True):
        raise ArchMismatchError("checkpoint parameter layout does not match the current models")

    for k in SKILL_KINDS:
        policy = state.policies[k]
        prefix = f"policy/{k.value}"
        policy.params = policy.params.with_values(arrays[f"{prefix}/params"].copy())
        policy.adam = _adam_from(arrays, prefix)
        policy.updates = int(arrays[f"{prefix}/updates"][0])
    state.sampler.assign(state.sampler.joint().with_values(arrays["sampler/params"].copy()))
    state.sampler.adam = _adam_from(arrays, "sampler")
    state.sampler.updates = int(arrays["sampler/updates"][0])

    state.buffer = ReplayBuffer.from_arrays({n: a for n, a in arrays.items() if n.startswith("buffer/")})
    if state.buffer.digest() != meta["buffer_digest"]:
        raise CheckpointFormatError("replay buffer digest mismatch")
    state.rng.bit_generator.state = meta["rng_state"]
    state.iteration, state.env_steps = (int(x) for x in arrays["progress"])
    state.rows = list(meta["metrics"])
    logger.info(f"Loaded checkpoint {path} at iteration {state.iteration}")
    return state
