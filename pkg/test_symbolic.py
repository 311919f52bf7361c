import numpy as np
import pytest

from src.symbolic import (
    NoPlanFound,
    PreconditionViolated,
    SceneGraph,
    applicable,
    apply_schema,
    extract_scene_graph,
    goal_satisfied,
    ground_contexts,
    plan,
    simulate_plan,
    successor,
)
from src.taskspace import (
    ObjectKind,
    PriorConfig,
    SkillContext,
    SkillKind,
    inworkspace,
    nextto,
    on,
    sample_prior,
    under,
)
from src.world import InstantiationInfeasible, UnknownObject, instantiate, scene_relations

KINDS = {0: ObjectKind.TABLE, 1: ObjectKind.CAN, 2: ObjectKind.BOX, 3: ObjectKind.HOOK, 4: ObjectKind.RACK}


def graph(*edges, kinds=KINDS):
    return SceneGraph.build(kinds, edges)


def shortest_by_iddfs(g, goal, limit):
    """Exhaustive iterative deepening; independent of the breadth-first planner"""
    contexts = ground_contexts(g)

    def search(state, depth):
        if goal_satisfied(state, goal):
            return True
        if depth == 0:
            return False
        for c in contexts:
            nxt = successor(state, c)
            if nxt is not None and search(nxt, depth - 1):
                return True
        return False

    for depth in range(limit + 1):
        if search(g, depth):
            return depth
    return None


def test_place_onto_moves_support_and_forgets_neighbours():
    g = graph(on(1, 0), on(2, 0), inworkspace(1), inworkspace(2), nextto(1, 2), nextto(2, 1))
    after = apply_schema(g, SkillKind.PLACE_ONTO, 1, 2)
    assert on(1, 2) in after.edges
    assert on(1, 0) not in after.edges
    assert nextto(1, 2) not in after.edges and nextto(2, 1) not in after.edges
    assert inworkspace(1) in after.edges


def test_preconditions_are_enforced():
    g = graph(on(1, 0), on(2, 1), on(4, 0), inworkspace(1), inworkspace(2), inworkspace(4))
    with pytest.raises(PreconditionViolated):
        apply_schema(g, SkillKind.PLACE_ONTO, 1, 4)  # 1 carries 2
    with pytest.raises(PreconditionViolated):
        apply_schema(g, SkillKind.PULL_WITH, 1, 2)  # 2 is not a hook
    with pytest.raises(PreconditionViolated):
        apply_schema(g, SkillKind.PLACE_ONTO, 1, 1)
    with pytest.raises(PreconditionViolated):
        apply_schema(g, SkillKind.PLACE_ONTO, 1, 9)
    assert not applicable(g, SkillKind.PUSH_UNDER, 1, 2)
    assert applicable(g, SkillKind.PUSH_UNDER, 1, 4)


def test_nothing_is_placed_onto_an_object_under_a_rack():
    g = graph(on(1, 0), on(2, 0), on(4, 0), under(2, 4), inworkspace(1), inworkspace(2), inworkspace(4))
    assert not applicable(g, SkillKind.PLACE_ONTO, 1, 2)
    assert not applicable(g, SkillKind.PLACE_NEXTTO, 1, 2)
    assert applicable(g, SkillKind.PLACE_ONTO, 1, 4)


def test_pull_with_adds_reach():
    g = graph(on(1, 0), on(3, 0), inworkspace(3))
    after = apply_schema(g, SkillKind.PULL_WITH, 1, 3)
    assert inworkspace(1) in after.edges
    with pytest.raises(PreconditionViolated):
        apply_schema(after, SkillKind.PULL_WITH, 1, 3)


def test_plan_is_empty_when_goal_holds():
    g = graph(on(1, 0), inworkspace(1))
    assert plan(g, {on(1, 0)}) == []


def test_plan_pulls_before_placing():
    g = graph(on(1, 0), on(2, 0), on(3, 0), inworkspace(2), inworkspace(3))
    steps = plan(g, {on(1, 2)})
    assert len(steps) == 2
    assert steps[0] == SkillContext(SkillKind.PULL_WITH, 1, 3)
    assert goal_satisfied(simulate_plan(g, steps), {on(1, 2)})


def test_plan_is_deterministic():
    g = graph(on(1, 0), on(2, 0), on(3, 0), on(4, 0), inworkspace(2), inworkspace(3), inworkspace(4))
    goal = {on(1, 2), under(2, 4)}
    assert plan(g, goal) == plan(g, goal)


def test_no_plan_for_unreachable_or_unknown_goals():
    g = graph(on(1, 0), on(2, 0), inworkspace(1), inworkspace(2))
    with pytest.raises(NoPlanFound):
        plan(g, {under(1, 2)}, max_depth=3)  # 2 is a box, not a rack
    with pytest.raises(NoPlanFound):
        plan(g, {on(1, 7)})


def test_simulate_plan_rejects_bad_steps():
    g = graph(on(1, 0), on(3, 0), inworkspace(3))
    with pytest.raises(PreconditionViolated):
        simulate_plan(g, [SkillContext(SkillKind.PLACE_ONTO, 1, 3)])


def test_scene_graph_validation_and_round_trip():
    with pytest.raises(UnknownObject):
        graph(on(1, 9))
    with pytest.raises(ValueError):
        graph(on(1, 2), on(2, 1))
    g = graph(on(1, 0), on(2, 1), inworkspace(2))
    assert SceneGraph.from_dict(g.to_dict()) == g


def test_plans_are_shortest_on_random_instances():
    cfg = PriorConfig(object_count=(2, 4))
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 15:
        w = sample_prior(rng, cfg)
        try:
            world = instantiate(w, rng)
        except InstantiationInfeasible:
            continue
        g = extract_scene_graph(world)
        assert g.edges == scene_relations(world)

        # goal: a few relations of a state reached by a random walk
        state = g
        for _ in range(int(rng.integers(1, 4))):
            options = [s for s in (successor(state, c) for c in ground_contexts(state)) if s is not None]
            if not options:
                break
            state = options[int(rng.integers(len(options)))]
        new = sorted(state.edges - g.edges)
        if not new:
            continue
        picks = rng.choice(len(new), size=min(2, len(new)), replace=False)
        goal = {new[int(p)] for p in picks}

        steps = plan(g, goal, max_depth=3)
        assert goal_satisfied(simulate_plan(g, steps), goal)
        assert len(steps) == shortest_by_iddfs(g, goal, 3)
        checked += 1
