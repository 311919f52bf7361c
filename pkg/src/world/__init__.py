from .state import Action, ObjectState, Observation, UnknownObject, WorldConfig, WorldState, table_state
from .geometry import (
    check_invariants,
    in_workspace,
    is_nextto,
    is_on,
    is_under,
    scene_relations,
    support_map,
)
from .simulator import (
    InstantiationInfeasible,
    InvalidTaskError,
    UnknownSkill,
    execute_primitive,
    instantiate,
    success,
)
from .observation import camera_direction, observe
from .episode_log import (
    EpisodeRecord,
    ReplayReport,
    StepRecord,
    append_episode,
    episode_rngs,
    read_episodes,
    relation_strings,
    replay_episode,
    replay_log,
)

__all__ = [
    "Action",
    "EpisodeRecord",
    "InstantiationInfeasible",
    "InvalidTaskError",
    "ObjectState",
    "Observation",
    "ReplayReport",
    "StepRecord",
    "UnknownObject",
    "UnknownSkill",
    "WorldConfig",
    "WorldState",
    "append_episode",
    "camera_direction",
    "check_invariants",
    "episode_rngs",
    "execute_primitive",
    "in_workspace",
    "instantiate",
    "is_nextto",
    "is_on",
    "is_under",
    "observe",
    "read_episodes",
    "relation_strings",
    "replay_episode",
    "replay_log",
    "scene_relations",
    "success",
    "support_map",
    "table_state",
]
