from .encoder import EMBED_DIM, TaskEncoder, encode_batch, encode_task, encode_tasks, new_encoder, task_graph
from .value import VALUE_ARCH, SamplerModel, ValueHead, new_sampler_model, new_value_head, predict, value, value_update, values
from .neighbors import EmbeddingIndex, InsufficientBuffer, density_estimate, knn_distance, unit_ball_log_volume
from .replay import EmptyBufferError, Episode, ReplayBuffer, Transition, buffer_push, buffer_sample
from .selection import (
    SamplerConfig,
    SamplerMode,
    Scores,
    Selection,
    combine,
    particle_subset,
    score,
    select_task,
    selection_probs,
)

__all__ = [
    "EMBED_DIM",
    "VALUE_ARCH",
    "EmbeddingIndex",
    "EmptyBufferError",
    "Episode",
    "InsufficientBuffer",
    "ReplayBuffer",
    "SamplerConfig",
    "SamplerMode",
    "SamplerModel",
    "Scores",
    "Selection",
    "TaskEncoder",
    "Transition",
    "ValueHead",
    "buffer_push",
    "buffer_sample",
    "combine",
    "density_estimate",
    "encode_batch",
    "encode_task",
    "encode_tasks",
    "knn_distance",
    "new_encoder",
    "new_sampler_model",
    "new_value_head",
    "particle_subset",
    "predict",
    "score",
    "select_task",
    "selection_probs",
    "task_graph",
    "unit_ball_log_volume",
    "value",
    "value_update",
    "values",
]
