from .scene_graph import SceneGraph, extract_scene_graph
from .schemas import (
    SCHEMAS,
    Literal,
    PreconditionViolated,
    SkillSchema,
    applicable,
    apply_schema,
    goal_satisfied,
    holds,
)
from .planner import MAX_DEPTH, NoPlanFound, ground_contexts, plan, simulate_plan, successor

__all__ = [
    "MAX_DEPTH",
    "SCHEMAS",
    "Literal",
    "NoPlanFound",
    "PreconditionViolated",
    "SceneGraph",
    "SkillSchema",
    "applicable",
    "apply_schema",
    "extract_scene_graph",
    "goal_satisfied",
    "ground_contexts",
    "holds",
    "plan",
    "simulate_plan",
    "successor",
]
