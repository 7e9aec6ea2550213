"""Search loop that interlaces per-action growth with lazy path confirmation.

Each cycle applies finished confirmation verdicts, lets every action perform
queued posture transitions and grow toward one random target, broadcasts new
vertices to the other actions, and then tries to extract and confirm a
start-to-goal path. Indeterminate edges on a candidate path are pulled from
the graph and handed to background jobs; the path is only returned once every
edge on it is proven.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field

from . import confirm as confirm_mod
from .actions import Action, GaitAction, JumpAction, build_actions, graph_checks
from .confirm import CONFIRMED, ConfirmationQueue, EdgeSnapshot
from .graph import (
    EdgeStatus,
    PathResult,
    PossibilityGraph,
    TAG_CRAWL,
    TAG_JUMP,
    TAG_TRANSITION,
    TAG_WALK,
    VERTEX_TAGS,
)
from .world import (
    DEFAULT_METRIC_WEIGHTS,
    Pose,
    RobotProfile,
    WorldModel,
    pose_distance,
    sample_pose,
    segment_crosses_gap,
)


class PlannerInputError(ValueError):
    """Start or goal rejected before any search happened."""


@dataclass
class PlannerConfig:
    t_max: float = 60.0
    max_transitions_per_cycle: int = 5
    goal_radius: float = 0.3
    seed: int = 0
    workers: int = 4
    step: float = 0.3
    goal_bias: float = 0.1
    quanta_per_cycle: int = 8
    metric_weights: tuple[float, float, float, float] = DEFAULT_METRIC_WEIGHTS
    transition_surcharge: float = 0.5
    jump_surcharge: float = 1.0

    def __post_init__(self):
        if self.t_max <= 0 or self.step <= 0 or self.goal_radius < 0:
            raise ValueError("planner config requires positive t_max/step and non-negative goal radius")
        if self.workers < 1 or self.max_transitions_per_cycle < 1:
            raise ValueError("planner config requires workers >= 1 and a positive transition cap")


@dataclass
class PlannerStats:
    cycles: int = 0
    elapsed: float = 0.0
    jobs_spawned: int = 0
    jobs_confirmed: int = 0
    jobs_refuted: int = 0


class Planner:
    """One search instance: owns the graph, the actions, and the job queue."""

    def __init__(
        self,
        world: WorldModel,
        profile: RobotProfile,
        start: Pose,
        goals: list[Pose],
        action_names: list[str] | tuple[str, ...],
        config: PlannerConfig | None = None,
    ):
        self.world = world
        self.profile = profile
        self.config = config or PlannerConfig()
        self.start_pose = start
        self.goal_poses = list(goals)
        if not self.goal_poses:
            raise PlannerInputError("at least one goal pose is required")
        self.actions: list[Action] = build_actions(action_names, profile, world, self.config.step)
        self.actions_by_tag = {a.tag: a for a in self.actions}
        self.graph = PossibilityGraph(
            checks=graph_checks(self.actions, profile, world),
            transition_surcharge=self.config.transition_surcharge,
            jump_surcharge=self.config.jump_surcharge,
        )
        self.queue = ConfirmationQueue(world)
        self.rng = random.Random(self.config.seed)
        self.stats = PlannerStats()
        self.trajectories: dict[int, confirm_mod.JumpTrajectory] = {}
        self.events: list[str] = []
        self._gait_tags = [a.tag for a in self.actions if isinstance(a, GaitAction)]

    # -- setup ------------------------------------------------------------

    def _manifold_tag(self, pose: Pose) -> str | None:
        for tag in (TAG_WALK, TAG_CRAWL):
            a = self.actions_by_tag.get(tag)
            if a is not None and a.necessary_vertex(pose):
                return tag
        return None

    def _init_endpoints(self):
        tag = self._manifold_tag(self.start_pose)
        if tag is None:
            raise PlannerInputError(f"start pose fails every enabled gait condition: {self.start_pose}")
        start_id = self.graph.insert_vertex(self.start_pose, tag)
        goal_ids = []
        for i, g in enumerate(self.goal_poses):
            gtag = self._manifold_tag(g)
            if gtag is None:
                raise PlannerInputError(f"goal {i} fails every enabled gait condition: {g}")
            goal_ids.append(self.graph.insert_vertex(g, gtag))
        self.graph.set_endpoints(start_id, goal_ids)
        for vid in [start_id] + goal_ids:
            self._broadcast(None, [vid])
        self._link_goals([start_id])

    # -- cycle pieces -----------------------------------------------------

    def _broadcast(self, source: Action | None, new_ids: list[int]):
        for a in self.actions:
            if a is source:
                continue
            for vid in new_ids:
                a.queue.add(vid)

    def _try_edge(
        self,
        action_tag: str,
        src: int,
        dst: int,
        status: EdgeStatus,
        bidirectional: bool,
        apex: float | None = None,
        cost: float | None = None,
    ) -> list[int]:
        """Insert an edge after re-checking against the stored endpoint poses.

        Vertex dedup can snap an intended pose onto an existing vertex whose
        heading differs, so the necessary condition must be judged on what the
        graph actually holds.
        """
        g = self.graph
        p0 = g.vertices[src].pose
        p1 = g.vertices[dst].pose
        if g.edge_blocked(action_tag, p0, p1):
            return []
        chk = g.checks.get(action_tag)
        if chk and chk.edge and not chk.edge(p0, p1):
            return []
        return g.insert_edge(src, dst, action_tag, status, bidirectional, apex=apex, cost=cost)

    def perform_transitions(self, action: Action) -> list[int]:
        """Pop up to the per-cycle cap of queued foreign vertices and try to
        transition from each onto this action's manifold."""
        new_ids: list[int] = []
        cap = min(self.config.max_transitions_per_cycle, len(action.queue))
        for _ in range(cap):
            vid = action.queue.pop_random(self.rng)
            v = self.graph.vertices.get(vid)
            if v is None:
                continue
            if action.necessary_vertex(v.pose):
                continue  # already on this manifold; nothing to transition
            cand = action.transition_from(v.pose)
            if cand is None:
                continue
            before = self.graph._next_vid
            dest = self.graph.insert_vertex(cand, action.tag)
            if dest == vid:
                continue
            added = self._try_edge(TAG_TRANSITION, vid, dest, EdgeStatus.SUFFICIENT, True)
            if not added:
                continue
            if dest >= before:
                new_ids.append(dest)
        return new_ids

    def connect(self, action: GaitAction, from_id: int, target: Pose) -> list[int]:
        """Extend-project repeatedly from a vertex straight toward the target.

        Dedup merges and already-live edges are walked through, so a chain can
        thread previously explored space; it stops at the first failed
        condition, on a refuted or pending edge key, or at the target.
        """
        g = self.graph
        new_ids: list[int] = []
        last_id = from_id
        limit = (
            math.ceil(
                math.hypot(
                    self.world.bounds_x[1] - self.world.bounds_x[0],
                    self.world.bounds_y[1] - self.world.bounds_y[0],
                )
                / action.step
            )
            + 4
        )
        for _ in range(limit):
            last_pose = g.vertices[last_id].pose
            vp = action.project(action.extend_towards(last_pose, target))
            if pose_distance(last_pose, vp, (1, 1, 0, 1)) < 1e-9:
                break
            vp = self._steer_clear(action, vp)
            if not action.necessary_vertex(vp):
                break
            if not action.necessary_edge(last_pose, vp):
                break
            before = g._next_vid
            vid = g.insert_vertex(vp, action.tag)
            stored = g.vertices[vid].pose
            if vid == last_id:
                break
            if not g.edge_live(action.tag, last_pose, stored):
                if g.edge_blocked(action.tag, last_pose, stored):
                    break
                status = (
                    EdgeStatus.SUFFICIENT
                    if action.sufficient_edge(last_pose, stored)
                    else EdgeStatus.INDETERMINATE
                )
                added = self._try_edge(action.tag, last_id, vid, status, True)
                if not added:
                    break
                if vid >= before:
                    new_ids.append(vid)
            last_id = vid
            if math.hypot(stored.x - target.x, stored.y - target.y) < 1e-9:
                break
        return new_ids

    def _steer_clear(self, action: GaitAction, vp: Pose) -> Pose:
        """Nudge a chain vertex sideways into sufficient-condition clearance.

        Vertices planted right at the necessary margin breed indeterminate
        wall-hugging edges that confirmation then has to refute one by one;
        a small lateral shift toward open space avoids most of them.
        """
        if action.sufficient_vertex(vp):
            return vp
        px = -math.sin(vp.theta)
        py = math.cos(vp.theta)
        for mag in (0.08, 0.16, 0.24):
            for sgn in (1.0, -1.0):
                cand = Pose(vp.x + sgn * mag * px, vp.y + sgn * mag * py, vp.theta, vp.h)
                if action.necessary_vertex(cand) and action.sufficient_vertex(cand):
                    return cand
        return vp

    def grow_holonomic(self, action: GaitAction, target: Pose) -> list[int]:
        """Two-sided growth: extend the nearest component toward the target,
        then pull the next eligible component toward whatever was just built."""
        entries = self.graph.subgraph_closest(action.tag, target, self.config.metric_weights)
        if not entries:
            return []
        first = entries[0]
        new_ids = self.connect(action, first.vertex_id, target)
        retarget = self.graph.vertices[new_ids[-1]].pose if new_ids else target
        idx = 1
        goal_set = self.graph.goal_reaching_set()
        if first.vertex_id in goal_set:
            while idx < len(entries) and entries[idx].vertex_id in goal_set:
                idx += 1
        if idx < len(entries):
            new_ids += self.connect(action, entries[idx].vertex_id, retarget)
        return new_ids

    def grow_nonholonomic(self, action: JumpAction, target: Pose) -> list[int]:
        """Seed jump edges off existing gait vertices, nearest to the target
        first. Walk vertices that cannot yet reach a goal offer launches;
        crawl vertices not yet reachable from the start offer landings. After
        a success the vertices behind it (for the same target) are masked off.

        A jump is only proposed when the ground segment under the flight is
        interrupted by a gap; over continuous floor the gaits already cover
        the same motion at lower cost.
        """
        g = self.graph
        cands = [
            vid
            for tag in VERTEX_TAGS
            for vid in g._tag_vertices[tag]
        ]
        cands.sort(key=lambda vid: (pose_distance(g.vertices[vid].pose, target, self.config.metric_weights), vid))
        useful = {vid: True for vid in cands}
        start_set = g.start_reachable_set()
        goal_set = g.goal_reaching_set()
        new_ids: list[int] = []
        for vid in cands:
            if not useful.get(vid, False):
                continue
            v = g.vertices[vid]
            if v.tag == TAG_WALK and vid not in goal_set:
                launch = action.find_launch_point(v.pose, target)
                landing = action.extend_towards(launch, target)
                if not segment_crosses_gap(self.world, launch.x, launch.y, landing.x, landing.y):
                    continue
                apex = action.edge_apex(launch, landing)
                if apex is None or g.edge_blocked(TAG_JUMP, launch, landing):
                    continue
                before = g._next_vid
                launch_id = g.insert_vertex(launch, TAG_WALK)
                if launch_id != vid:
                    if not self._try_edge(TAG_WALK, vid, launch_id, self._gait_status(TAG_WALK, vid, launch_id), True):
                        continue
                    if launch_id >= before:
                        new_ids.append(launch_id)
                before = g._next_vid
                landing_id = g.insert_vertex(landing, TAG_CRAWL)
                if not self._try_edge(TAG_JUMP, launch_id, landing_id, EdgeStatus.INDETERMINATE, False, apex=apex):
                    continue
                if landing_id >= before:
                    new_ids.append(landing_id)
                    self._snap_link(landing_id)
                for u in g._bfs([launch_id], g._in, False):
                    useful[u] = False
            elif v.tag == TAG_CRAWL and vid not in start_set:
                landing = action.find_landing_point(v.pose, target)
                launch = action.reverse_extend(landing, target)
                if not segment_crosses_gap(self.world, launch.x, launch.y, landing.x, landing.y):
                    continue
                apex = action.edge_apex(launch, landing)
                if apex is None or g.edge_blocked(TAG_JUMP, launch, landing):
                    continue
                before = g._next_vid
                landing_id = g.insert_vertex(landing, TAG_CRAWL)
                if landing_id != vid:
                    if not self._try_edge(TAG_CRAWL, vid, landing_id, self._gait_status(TAG_CRAWL, vid, landing_id), True):
                        continue
                    if landing_id >= before:
                        new_ids.append(landing_id)
                before = g._next_vid
                launch_id = g.insert_vertex(launch, TAG_WALK)
                if not self._try_edge(TAG_JUMP, launch_id, landing_id, EdgeStatus.INDETERMINATE, False, apex=apex):
                    continue
                if launch_id >= before:
                    new_ids.append(launch_id)
                    self._snap_link(launch_id)
                for u in g._bfs([landing_id], g._out, True):
                    useful[u] = False
        return new_ids

    def _snap_link(self, vid: int):
        """Tie a freshly planted jump endpoint into nearby same-manifold
        vertices so it does not float as its own component."""
        g = self.graph
        v = g.vertices[vid]
        for nb in g.nearest_vertices(v.tag, v.pose, k=4, max_dist=0.45, weights=(1.0, 1.0, 0.0, 1.0)):
            if nb == vid:
                continue
            self._try_edge(v.tag, vid, nb, self._gait_status(v.tag, vid, nb), True)

    def _sample_target(self) -> Pose:
        """Uniform sample over the world, occasionally biased to a goal so
        growth keeps pulling toward it."""
        if self.rng.random() < self.config.goal_bias:
            gid = self.rng.choice(self.graph.goal_ids)
            return self.graph.vertices[gid].pose
        return sample_pose(self.world, self.rng)

    def _gait_status(self, tag: str, src: int, dst: int) -> EdgeStatus:
        action = self.actions_by_tag[tag]
        p0 = self.graph.vertices[src].pose
        p1 = self.graph.vertices[dst].pose
        return EdgeStatus.SUFFICIENT if action.sufficient_edge(p0, p1) else EdgeStatus.INDETERMINATE

    def _link_goals(self, new_ids: list[int]):
        """Wire a zero-cost edge whenever a fresh vertex sits within the goal
        radius of a same-manifold goal vertex."""
        g = self.graph
        for vid in new_ids:
            v = g.vertices[vid]
            for gid in g.goal_ids:
                if gid == vid:
                    continue
                gv = g.vertices[gid]
                if gv.tag != v.tag:
                    continue
                if math.hypot(gv.pose.x - v.pose.x, gv.pose.y - v.pose.y) > self.config.goal_radius:
                    continue
                self._try_edge(v.tag, vid, gid, self._gait_status(v.tag, vid, gid), True, cost=0.0)

    # -- confirmation -----------------------------------------------------

    def confirm_path(self, path: PathResult) -> bool:
        """Alg-2 style pass over a candidate path.

        Edges already proven stay; edges whose sufficient condition holds now
        get upgraded in place; the rest are speculatively removed and handed to
        confirmation jobs. True only when every edge on the path is proven.
        """
        g = self.graph
        all_ok = True
        for eid in path.edge_ids:
            e = g.edges.get(eid)
            if e is None:
                all_ok = False
                continue
            if e.status in (EdgeStatus.SUFFICIENT, EdgeStatus.JOB_CONFIRMED):
                continue
            p0 = g.vertices[e.src].pose
            p1 = g.vertices[e.dst].pose
            if e.tag == TAG_TRANSITION:
                # the transition check is itself sufficient and the world is
                # static, so surviving insertion means proven
                e.status = EdgeStatus.SUFFICIENT
                if e.twin is not None and e.twin in g.edges:
                    g.edges[e.twin].status = EdgeStatus.SUFFICIENT
                continue
            action = self.actions_by_tag[e.tag]
            if action.sufficient_edge(p0, p1):
                e.status = EdgeStatus.SUFFICIENT
                if e.twin is not None and e.twin in g.edges:
                    g.edges[e.twin].status = EdgeStatus.SUFFICIENT
                continue
            all_ok = False
            bidir = e.tag != TAG_JUMP
            snapshot = EdgeSnapshot(
                edge_id=e.id,
                tag=e.tag,
                src=e.src,
                dst=e.dst,
                pose_src=p0,
                pose_dst=p1,
                cost=e.cost,
                apex=e.apex,
            )
            if action.necessary_edge(p0, p1):
                g.mark_pending(e.tag, p0, p1, both_directions=bidir)
                g.remove_edge(eid, register=False)
                self.queue.submit(action.spawn_confirmation_job(snapshot))
                self.stats.jobs_spawned += 1
            else:
                g.remove_edge(eid, register=True)
        return all_ok

    def _apply_verdicts(self):
        for v in self.queue.drain_verdicts():
            snap = v.edge
            bidir = snap.tag != TAG_JUMP
            self.graph.clear_pending(snap.tag, snap.pose_src, snap.pose_dst, both_directions=bidir)
            if v.outcome == CONFIRMED:
                self.stats.jobs_confirmed += 1
                ids = self._try_edge(
                    snap.tag,
                    snap.src,
                    snap.dst,
                    EdgeStatus.JOB_CONFIRMED,
                    bidir,
                    apex=snap.apex,
                    cost=snap.cost,
                )
                if ids and v.trajectory is not None:
                    self.trajectories[ids[0]] = v.trajectory
            else:
                self.stats.jobs_refuted += 1
                self.graph.register_refuted(snap.tag, snap.pose_src, snap.pose_dst, both_directions=bidir)
            self.events.append(f"CONFIRM {snap.edge_id} {v.outcome}")

    # -- main loop --------------------------------------------------------

    def find_path(self) -> PathResult | None:
        t0 = time.monotonic()
        self._init_endpoints()
        threaded = self.config.workers >= 2
        if threaded:
            self.queue.launch(self.config.workers)
        try:
            n = 0
            deadline = t0 + self.config.t_max
            while time.monotonic() < deadline:
                n += 1
                self.stats.cycles = n
                self.events.append(f"CYCLE {n}")
                if not threaded:
                    self.queue.step(self.config.quanta_per_cycle)
                self._apply_verdicts()
                for action in self.actions:
                    if time.monotonic() >= deadline:
                        break
                    new_ids = self.perform_transitions(action)
                    if new_ids:
                        self.events.append(f"TRANS {action.tag} {len(new_ids)}")
                    target = self._sample_target()
                    if isinstance(action, GaitAction):
                        grown = self.grow_holonomic(action, target)
                    else:
                        grown = self.grow_nonholonomic(action, target)
                    new_ids += grown
                    self.events.append(f"GROW {action.tag} {len(grown)}")
                    self._broadcast(action, new_ids)
                    self._link_goals(new_ids)
                for gid in self.graph.goal_ids:
                    if not self.graph.connected(self.graph.start_id, gid):
                        continue
                    path = self.graph.shortest_path(self.graph.start_id, gid)
                    if path is not None and self.confirm_path(path):
                        self.stats.elapsed = time.monotonic() - t0
                        return path
            self.stats.elapsed = time.monotonic() - t0
            return None
        finally:
            if threaded:
                self.queue.shutdown()

    # -- reporting --------------------------------------------------------

    def describe_path(self, path: PathResult) -> dict:
        """JSON-ready description of a confirmed path."""
        g = self.graph
        edges = []
        for eid in path.edge_ids:
            e = g.edges[eid]
            p0 = g.vertices[e.src].pose
            p1 = g.vertices[e.dst].pose
            entry = {
                "action": e.tag,
                "status": e.status.value,
                "cost": round(e.cost, 9),
                "from": {"x": p0.x, "y": p0.y, "theta": p0.theta, "h": p0.h},
                "to": {"x": p1.x, "y": p1.y, "theta": p1.theta, "h": p1.h},
            }
            traj = self.trajectories.get(eid)
            if traj is not None:
                entry["trajectory"] = {
                    "speed": round(traj.speed, 9),
                    "elevation": round(traj.elevation, 9),
                    "flight_time": round(traj.flight_time, 9),
                    "points": [[round(c, 9) for c in p] for p in traj.points],
                }
            edges.append(entry)
        return {"cost": round(path.cost, 9), "edges": edges}

    def event_log(self) -> str:
        return "\n".join(self.events) + "\n"


def find_path(
    world: WorldModel,
    profile: RobotProfile,
    start: Pose,
    goals: list[Pose],
    actions: list[str] | tuple[str, ...],
    config: PlannerConfig | None = None,
) -> PathResult | None:
    """Convenience wrapper: build a planner, run it, return the result."""
    return Planner(world, profile, start, goals, actions, config).find_path()
