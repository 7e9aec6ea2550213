"""Action layer: condition nesting, motion primitives, transitions, wiring."""
import math
import random

import pytest

from posgraph import Box, GapRect, Pose, WorldModel, build_actions
from posgraph.actions import (
    GaitAction,
    JumpAction,
    TransitionQueue,
    graph_checks,
    transition_feasible,
)

from conftest import make_random_world, random_pose


def gait(world, profile, tag, step=0.3):
    return GaitAction(tag, profile, world, step)


# -- necessary vs sufficient ----------------------------------------------


def test_posture_bands_gate_necessary(open_world, profile):
    walk = gait(open_world, profile, "walk")
    crawl = gait(open_world, profile, "crawl")
    assert walk.necessary_vertex(Pose(5, 4, 0, 1.0))
    assert walk.necessary_vertex(Pose(5, 4, 0, 1.15))
    assert not walk.necessary_vertex(Pose(5, 4, 0, 1.2))
    assert crawl.necessary_vertex(Pose(5, 4, 0, 0.44))
    assert not crawl.necessary_vertex(Pose(5, 4, 0, 0.5))


def test_sufficient_requires_exact_nominal_height(open_world, profile):
    walk = gait(open_world, profile, "walk")
    assert walk.sufficient_vertex(Pose(5, 4, 0, 1.0))
    assert not walk.sufficient_vertex(Pose(5, 4, 0, 1.0 + 1e-6))


def test_probe_volume_nested_inside_sufficient_volume(open_world, profile):
    for tag in ("walk", "crawl"):
        a = gait(open_world, profile, tag)
        nz = a.necessary_volume.z_band
        sz = a.sufficient_volume.z_band
        assert sz[0] <= nz[0] and nz[1] <= sz[1]
        assert a.necessary_volume.footprint.radius < profile.r_walk


def test_sufficient_implies_necessary_fuzz(profile):
    rng = random.Random(77)
    hits = {"walk": 0, "crawl": 0}
    edge_hits = 0
    for _ in range(6):
        world = make_random_world(rng, with_gaps=True)
        actions = {a.tag: a for a in build_actions(["walk", "crawl"], profile, world)}
        for tag, a in actions.items():
            for _ in range(250):
                p = random_pose(rng, world)
                if rng.random() < 0.5:
                    p = Pose(p.x, p.y, p.theta, a.nominal_h)
                if a.sufficient_vertex(p):
                    hits[tag] += 1
                    assert a.necessary_vertex(p), (tag, p)
            for _ in range(120):
                p0 = random_pose(rng, world)
                p0 = Pose(p0.x, p0.y, p0.theta, a.nominal_h)
                p1 = Pose(
                    min(max(p0.x + rng.uniform(-0.8, 0.8), 0.0), 10.0),
                    min(max(p0.y + rng.uniform(-0.8, 0.8), 0.0), 8.0),
                    rng.uniform(-math.pi, math.pi),
                    a.nominal_h,
                )
                if a.sufficient_edge(p0, p1):
                    edge_hits += 1
                    assert a.necessary_edge(p0, p1), (tag, p0, p1)
    assert hits["walk"] > 80 and hits["crawl"] > 80
    assert edge_hits > 100


def test_jump_sufficient_is_constantly_false(open_world, profile):
    jump = build_actions(["jump"], profile, open_world)[0]
    assert not jump.sufficient_vertex(Pose(5, 4, 0, 1.0))
    assert not jump.sufficient_edge(Pose(2, 4, 0, 1.0), Pose(3, 4, 0, 0.3))
    assert not jump.necessary_vertex(Pose(5, 4, 0, 1.0))


# -- motion primitives ----------------------------------------------------


def test_extend_towards_caps_step_and_turns(open_world, profile):
    walk = gait(open_world, profile, "walk")
    p = walk.extend_towards(Pose(1, 1, 2.0, 1.0), Pose(5, 1, 0, 1.0))
    assert (p.x, p.y) == (pytest.approx(1.3), pytest.approx(1.0))
    assert p.theta == pytest.approx(0.0)
    near = walk.extend_towards(Pose(1, 1, 2.0, 1.0), Pose(1.2, 1.1, 0, 1.0))
    assert (near.x, near.y) == (1.2, 1.1)


def test_extend_towards_slides_height_towards_nominal(open_world, profile):
    walk = gait(open_world, profile, "walk")
    p = walk.extend_towards(Pose(1, 1, 0, 0.3), Pose(5, 1, 0, 1.0))
    assert p.h == pytest.approx(0.6)
    p = walk.extend_towards(Pose(1, 1, 0, 0.9), Pose(5, 1, 0, 1.0))
    assert p.h == pytest.approx(1.0)


def test_project_clamps_bounds_and_height(open_world, profile):
    crawl = gait(open_world, profile, "crawl")
    p = crawl.project(Pose(-1.0, 9.5, 0.8, 0.55))
    assert (p.x, p.y, p.theta, p.h) == (0.0, 8.0, 0.8, profile.h_crawl)


# -- transitions ----------------------------------------------------------


def test_transition_feasible_cases(profile):
    open_world = WorldModel((0, 10), (0, 8), [], [])
    assert transition_feasible(Pose(5, 4, 0, 0.3), profile, open_world)
    barred = WorldModel((0, 10), (0, 8), [Box((4, 5), (0, 8), (0.7, 1.9))], [])
    # standing sweeps the column through the bar even though crawling fits
    assert not transition_feasible(Pose(4.5, 4, 0, 0.3), profile, barred)
    holed = WorldModel((0, 10), (0, 8), [], [GapRect((4.0, 5.0), (0, 8))])
    assert not transition_feasible(Pose(3.8, 4, 0.0, 0.3), profile, holed)  # rect overhangs
    assert transition_feasible(Pose(3.5, 4, 0.0, 0.3), profile, holed)  # rect ends at 3.95


def test_transition_from_switches_manifold_in_place(open_world, profile):
    walk = gait(open_world, profile, "walk")
    dest = walk.transition_from(Pose(5, 4, 0.7, 0.3))
    assert dest == Pose(5, 4, 0.7, 1.0)
    barred = WorldModel((0, 10), (0, 8), [Box((4, 5), (0, 8), (0.7, 1.9))], [])
    assert gait(barred, profile, "walk").transition_from(Pose(4.5, 4, 0, 0.3)) is None


def test_jump_never_accepts_transitions(open_world, profile):
    jump = build_actions(["jump"], profile, open_world)[0]
    assert jump.transition_from(Pose(5, 4, 0, 1.0)) is None


def test_transition_queue_admits_each_vertex_once():
    q = TransitionQueue()
    for vid in (3, 7, 3, 9, 7):
        q.add(vid)
    assert len(q) == 3
    rng = random.Random(0)
    popped = {q.pop_random(rng) for _ in range(3)}
    assert popped == {3, 7, 9}
    q.add(3)  # lifetime dedup: popping does not re-admit
    assert len(q) == 0


# -- jump geometry --------------------------------------------------------


def test_find_launch_point_faces_target(open_world, profile):
    jump = build_actions(["jump"], profile, open_world)[0]
    p = jump.find_launch_point(Pose(2, 2, 1.0, 1.0), Pose(4, 4, 0, 0.3))
    assert (p.x, p.y, p.h) == (2, 2, profile.h_walk)
    assert p.theta == pytest.approx(math.pi / 4)


def test_find_landing_point_faces_away_from_target(open_world, profile):
    jump = build_actions(["jump"], profile, open_world)[0]
    p = jump.find_landing_point(Pose(4, 2, 1.0, 0.3), Pose(2, 2, 0, 1.0))
    assert (p.x, p.y, p.h) == (4, 2, profile.h_crawl)
    assert p.theta == pytest.approx(0.0)


def test_jump_extend_spans_at_most_range(open_world, profile):
    jump = build_actions(["jump"], profile, open_world)[0]
    far = jump.extend_towards(Pose(2, 2, 0.0, 1.0), Pose(9, 2, 0, 1.0))
    assert (far.x, far.y, far.h) == (pytest.approx(3.5), pytest.approx(2.0), profile.h_crawl)
    near = jump.extend_towards(Pose(2, 2, 0.0, 1.0), Pose(2.8, 2, 0, 1.0))
    assert far.theta == near.theta == 0.0
    assert near.x == pytest.approx(2.8)


def test_reverse_extend_places_launch_beyond_landing(open_world, profile):
    jump = build_actions(["jump"], profile, open_world)[0]
    launch = jump.reverse_extend(Pose(4, 2, 0.3, 0.3), Pose(1, 2, 0, 1.0))
    assert (launch.x, launch.y, launch.h) == (pytest.approx(2.5), pytest.approx(2.0), profile.h_walk)
    # heading points back at the landing vertex
    assert launch.theta == pytest.approx(0.0)


def test_edge_apex_escalates_over_low_block(profile):
    block = Box((4.1, 4.4), (0.0, 6.0), (0.0, 0.62))
    world = WorldModel((0, 10), (0, 6), [block], [])
    jump = build_actions(["jump"], profile, world)[0]
    apex = jump.edge_apex(Pose(3.8, 3.0, 0, 1.0), Pose(5.0, 3.0, 0, 0.3))
    assert apex is not None and apex > profile.apex_grid[0]
    assert jump.necessary_edge(Pose(3.8, 3.0, 0, 1.0), Pose(5.0, 3.0, 0, 0.3))


def test_edge_apex_rejects_bad_geometry(open_world, profile):
    jump = build_actions(["jump"], profile, open_world)[0]
    # beyond range
    assert jump.edge_apex(Pose(2, 2, 0, 1.0), Pose(3.6, 2, 0, 0.3)) is None
    # zero length
    assert jump.edge_apex(Pose(2, 2, 0, 1.0), Pose(2, 2, 0, 0.3)) is None
    barred = WorldModel((0, 10), (0, 6), [Box((4, 5), (0, 6), (0.7, 1.9))], [])
    bjump = build_actions(["jump"], profile, barred)[0]
    # launch point fails the walk manifold under the bar
    assert bjump.edge_apex(Pose(4.5, 3, 0, 1.0), Pose(5.7, 3, 0, 0.3)) is None
    # arc through the bar fails even with clean endpoints
    assert bjump.edge_apex(Pose(3.8, 3, 0, 1.0), Pose(5.3, 3, 0, 0.3)) is None


# -- assembly -------------------------------------------------------------


def test_build_actions_canonical_order(open_world, profile):
    tags = [a.tag for a in build_actions(["jump", "walk"], profile, open_world)]
    assert tags == ["walk", "jump"]
    tags = [a.tag for a in build_actions(("crawl", "jump", "walk"), profile, open_world)]
    assert tags == ["walk", "crawl", "jump"]


def test_build_actions_validation(open_world, profile):
    with pytest.raises(ValueError, match="unknown actions"):
        build_actions(["walk", "swim"], profile, open_world)
    with pytest.raises(ValueError, match="at least one action"):
        build_actions([], profile, open_world)


def test_jump_only_build_still_checks_gait_endpoints(open_world, profile):
    jump = build_actions(["jump"], profile, open_world)[0]
    assert isinstance(jump, JumpAction)
    assert jump.edge_apex(Pose(2, 4, 0, 1.0), Pose(3.2, 4, 0, 0.3)) is not None


def test_graph_checks_wiring(open_world, profile):
    actions = build_actions(["walk", "crawl", "jump"], profile, open_world)
    checks = graph_checks(actions, profile, open_world)
    assert set(checks) == {"walk", "crawl", "jump", "transition"}
    assert checks["jump"].vertex is None
    assert checks["walk"].vertex(Pose(5, 4, 0, 1.0))
    trans = checks["transition"].edge
    assert trans(Pose(2, 2, 0, 1.0), Pose(2, 2, 0, 0.3))
    assert not trans(Pose(2, 2, 0, 1.0), Pose(2.5, 2, 0, 0.3))  # moved planar pose
    barred = WorldModel((0, 10), (0, 8), [Box((4, 5), (0, 8), (0.7, 1.9))], [])
    bchecks = graph_checks(build_actions(["walk"], profile, barred), profile, barred)
    assert "crawl" not in bchecks
    assert not bchecks["transition"].edge(Pose(4.5, 4, 0, 1.0), Pose(4.5, 4, 0, 0.3))
