"""STRIPS-style skill schemas over the scene graph.

Predicates are the relations plus ``kind``, ``clear`` (nothing rests on it) and
``uncovered`` (not under a rack). Arguments of a literal are the schema variables
``i`` and ``j``, the constant ``table``, or ``*`` (delete lists only) which matches any object.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Optional, Tuple, Union

from ..errors import ActiveTaskError
from ..taskspace import TABLE_ID, ObjectKind, Relation, RelationKind, SkillKind
from .scene_graph import SceneGraph

logger = logging.getLogger(__name__)

_VARS = ("i", "j", "table")
_RELATIONS = {k.value: k for k in RelationKind}


class PreconditionViolated(ActiveTaskError):
    pass


@dataclass(frozen=True)
class Literal:
    predicate: str
    args: Tuple[str, ...]
    positive: bool = True

    def __str__(self) -> str:
        text = f"{self.predicate}({', '.join(self.args)})"
        return text if self.positive else f"not {text}"


def _bind(arg: str, i: int, j: int) -> Optional[int]:
    if arg == "i":
        return i
    if arg == "j":
        return j
    if arg == "table":
        return TABLE_ID
    return None


def holds(lit: Literal, g: SceneGraph, i: int, j: int) -> bool:
    x = _bind(lit.args[0], i, j)
    if lit.predicate == "kind":
        value = g.kind_of(x) is ObjectKind(lit.args[1])
    elif lit.predicate == "clear":
        value = not any(r.kind is RelationKind.ON and r.dst == x for r in g.edges)
    elif lit.predicate == "uncovered":
        value = not any(r.kind is RelationKind.UNDER and r.src == x for r in g.edges)
    elif lit.predicate == "inworkspace":
        # the table is never a manipulated object; its top counts as reachable
        value = x == TABLE_ID or Relation(RelationKind.INWORKSPACE, x) in g.edges
    else:
        value = Relation(_RELATIONS[lit.predicate], x, _bind(lit.args[1], i, j)) in g.edges
    return value == lit.positive


def _matches(lit: Literal, rel: Relation, i: int, j: int) -> bool:
    if rel.kind.value != lit.predicate:
        return False
    slots = (rel.src, rel.dst) if rel.kind.is_binary else (rel.src,)
    return all(a == "*" or _bind(a, i, j) == s for a, s in zip(lit.args, slots))


def _ground(lit: Literal, i: int, j: int) -> Relation:
    kind = _RELATIONS[lit.predicate]
    dst = _bind(lit.args[1], i, j) if kind.is_binary else None
    return Relation(kind, _bind(lit.args[0], i, j), dst)


@dataclass(frozen=True)
class SkillSchema:
    skill: SkillKind
    preconditions: Tuple[Literal, ...]
    add: Tuple[Literal, ...]
    delete: Tuple[Literal, ...]

    def __post_init__(self):
        for lit in self.add:
            if lit.predicate not in _RELATIONS or any(a not in _VARS for a in lit.args):
                raise ValueError(f"{self.skill.value}: add literal {lit} must be a relation over bound variables")
        for lit in self.delete:
            if lit.predicate not in _RELATIONS or any(a not in _VARS + ("*",) for a in lit.args):
                raise ValueError(f"{self.skill.value}: delete literal {lit} uses an unbound variable")

    def unmet(self, g: SceneGraph, i: int, j: int) -> Tuple[Literal, ...]:
        return tuple(lit for lit in self.preconditions if not holds(lit, g, i, j))

    def add_set(self, i: int, j: int) -> FrozenSet[Relation]:
        return frozenset(_ground(lit, i, j) for lit in self.add)

    def delete_set(self, edges: Iterable[Relation], i: int, j: int) -> FrozenSet[Relation]:
        return frozenset(r for r in edges if any(_matches(lit, r, i, j) for lit in self.delete))


def _lit(text: str, positive: bool = True) -> Literal:
    name, rest = text.split("(")
    return Literal(name, tuple(a.strip() for a in rest.rstrip(")").split(",")), positive)


_FORGET_NEXTTO = (_lit("nextto(i, *)"), _lit("nextto(*, i)"))

SCHEMAS: Dict[SkillKind, SkillSchema] = {
    SkillKind.PLACE_ONTO: SkillSchema(
        skill=SkillKind.PLACE_ONTO,
        preconditions=(_lit("inworkspace(i)"), _lit("inworkspace(j)"), _lit("clear(i)"), _lit("uncovered(j)")),
        add=(_lit("on(i, j)"),),
        delete=(_lit("on(i, *)"), _lit("under(i, *)")) + _FORGET_NEXTTO,
    ),
    SkillKind.PLACE_NEXTTO: SkillSchema(
        skill=SkillKind.PLACE_NEXTTO,
        preconditions=(
            _lit("inworkspace(i)"),
            _lit("inworkspace(j)"),
            _lit("on(j, table)"),
            _lit("uncovered(j)"),
        ),
        add=(_lit("nextto(i, j)"), _lit("nextto(j, i)"), _lit("on(i, table)")),
        delete=(_lit("on(i, *)"), _lit("under(i, *)")) + _FORGET_NEXTTO,
    ),
    SkillKind.PUSH_UNDER: SkillSchema(
        skill=SkillKind.PUSH_UNDER,
        preconditions=(_lit("inworkspace(i)"), _lit("kind(j, rack)"), _lit("on(i, table)")),
        add=(_lit("under(i, j)"),),
        delete=_FORGET_NEXTTO,
    ),
    SkillKind.PULL_WITH: SkillSchema(
        skill=SkillKind.PULL_WITH,
        preconditions=(
            _lit("kind(j, hook)"),
            _lit("inworkspace(j)"),
            _lit("inworkspace(i)", positive=False),
            _lit("on(i, table)"),
        ),
        add=(_lit("inworkspace(i)"),),
        delete=(_lit("under(i, *)"),) + _FORGET_NEXTTO,
    ),
}


def apply_schema(g: SceneGraph, schema: Union[SkillSchema, SkillKind], i: int, j: int) -> SceneGraph:
    """edges' = (edges minus delete-set) union add-set"""
    if isinstance(schema, SkillKind):
        schema = SCHEMAS[schema]
    if i == j or i == TABLE_ID:
        raise PreconditionViolated(f"{schema.skill.value}({i}, {j}): invalid binding")
    if i not in g.objects or j not in g.objects:
        raise PreconditionViolated(f"{schema.skill.value}({i}, {j}): unknown object")
    unmet = schema.unmet(g, i, j)
    if unmet:
        raise PreconditionViolated(f"{schema.skill.value}({i}, {j}): unmet {', '.join(str(u) for u in unmet)}")
    edges = (g.edges - schema.delete_set(g.edges, i, j)) | schema.add_set(i, j)
    return g.with_edges(edges)


def applicable(g: SceneGraph, skill: SkillKind, i: int, j: int) -> bool:
    if i == j or i == TABLE_ID:
        return False
    return not SCHEMAS[skill].unmet(g, i, j)


def goal_satisfied(g: SceneGraph, goal: Iterable[Relation]) -> bool:
    return frozenset(goal) <= g.edges
