from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, Tuple

from ..taskspace import TABLE_ID, ObjectKind, Relation, RelationKind
from ..world import UnknownObject, WorldState, scene_relations


@dataclass(frozen=True)
class SceneGraph:
    """Symbolic state (O, E); kinds ride along because schemas test them"""

    objects: FrozenSet[int]
    edges: FrozenSet[Relation]
    kinds: Tuple[Tuple[int, ObjectKind], ...]

    def __post_init__(self):
        for rel in self.edges:
            ids = (rel.src, rel.dst) if rel.kind.is_binary else (rel.src,)
            for i in ids:
                if i not in self.objects:
                    raise UnknownObject(f"edge {rel} references unknown object {i}")
        supports = {r.src: r.dst for r in self.edges if r.kind is RelationKind.ON}
        for start in supports:
            seen, node = {start}, supports.get(start)
            while node is not None:
                if node in seen:
                    raise ValueError(f"on-edges form a cycle through object {node}")
                seen.add(node)
                node = supports.get(node)

    @classmethod
    def build(cls, kinds: Dict[int, ObjectKind], edges: Iterable[Relation]) -> "SceneGraph":
        return cls(objects=frozenset(kinds), edges=frozenset(edges), kinds=tuple(sorted(kinds.items())))

    def kind_of(self, object_id: int) -> ObjectKind:
        for i, k in self.kinds:
            if i == object_id:
                return k
        raise UnknownObject(f"no object with id {object_id}")

    def with_edges(self, edges: Iterable[Relation]) -> "SceneGraph":
        return SceneGraph(objects=self.objects, edges=frozenset(edges), kinds=self.kinds)

    def support_of(self, object_id: int):
        for rel in self.edges:
            if rel.kind is RelationKind.ON and rel.src == object_id:
                return rel.dst
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "objects": [{"id": i, "kind": k.value} for i, k in self.kinds],
            "edges": [r.to_dict() for r in sorted(self.edges)],
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "SceneGraph":
        kinds = {int(o["id"]): ObjectKind(o["kind"]) for o in d["objects"]}
        kinds.setdefault(TABLE_ID, ObjectKind.TABLE)
        return cls.build(kinds, (Relation.from_dict(r) for r in d.get("edges", [])))


def extract_scene_graph(world: WorldState) -> SceneGraph:
    """Relations read off the ground-truth bounding boxes"""
    return SceneGraph.build({o.id: o.kind for o in world.objects}, scene_relations(world))
