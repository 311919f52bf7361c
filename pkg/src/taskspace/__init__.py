from .params import (
    MAX_OBJECTS,
    OBJECT_KINDS,
    RELATION_KINDS,
    SKILL_KINDS,
    TABLE_ID,
    TABLE_SIZE,
    EnvContext,
    ObjectKind,
    ObjectSpec,
    Relation,
    RelationKind,
    SkillContext,
    SkillKind,
    TaskParam,
    inworkspace,
    nextto,
    on,
    table_spec,
    under,
)
from .prior import PriorConfig, PriorExhaustedError, ValidationReport, sample_prior, validate
from .codec import WIDTH, SerializationError, canonical_deserialize, canonical_serialize

__all__ = [
    "MAX_OBJECTS",
    "OBJECT_KINDS",
    "RELATION_KINDS",
    "SKILL_KINDS",
    "TABLE_ID",
    "TABLE_SIZE",
    "WIDTH",
    "EnvContext",
    "ObjectKind",
    "ObjectSpec",
    "PriorConfig",
    "PriorExhaustedError",
    "Relation",
    "RelationKind",
    "SerializationError",
    "SkillContext",
    "SkillKind",
    "TaskParam",
    "ValidationReport",
    "canonical_deserialize",
    "canonical_serialize",
    "inworkspace",
    "nextto",
    "on",
    "sample_prior",
    "table_spec",
    "under",
    "validate",
]
