"""Confirmation jobs: fine-grained gait sweeps and ballistic jump solves.

Indeterminate edges pulled off candidate paths become resumable jobs. Workers
execute jobs in bounded quanta (collision checks are the unit of work) and
requeue unfinished jobs at the back, so short jobs never starve behind long
ones. Verdicts accumulate until the planner drains them.
"""
from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .world import (
    Pose,
    RectFootprint,
    RobotProfile,
    VolumeSpec,
    WorldModel,
    _floor_points_solid,
    _spheres_hit_boxes,
    _volume_clear_batch,
    floor_solid,
    interpolate_poses,
    sweep_steps,
)

CONFIRMED = "confirmed"
REFUTED = "refuted"


@dataclass(frozen=True)
class EdgeSnapshot:
    """Immutable copy of everything a job needs to judge one edge."""

    edge_id: int
    tag: str
    src: int
    dst: int
    pose_src: Pose
    pose_dst: Pose
    cost: float
    apex: float | None = None


@dataclass(frozen=True)
class JumpTrajectory:
    """Solved take-off: speed (m/s), elevation (rad), flight time (s), arc samples."""

    speed: float
    elevation: float
    flight_time: float
    points: tuple[tuple[float, float, float], ...]


@dataclass
class Verdict:
    job_id: int
    edge: EdgeSnapshot
    outcome: str
    trajectory: JumpTrajectory | None = None


# ---------------------------------------------------------------------------
# ballistic boundary-value solve


def _takeoff_speed_sq(T: float, d: float, dz: float, g: float) -> float:
    vh = d / T
    vz = dz / T + 0.5 * g * T
    return vh * vh + vz * vz


def solve_jump_bvp(p_launch: Pose, p_land: Pose, profile: RobotProfile) -> JumpTrajectory | None:
    """Pick the standing jump that needs the least take-off effort.

    The jump starts from rest, so take-off speed squared is the proxy for the
    accelerations spent leaving the ground. Candidate trajectories form a
    one-parameter family in flight time T; the launch-elevation window bounds
    T, a 64-point grid plus local refinement finds the minimum, and the result
    stands only if the speed fits under v_max.
    """
    dx = p_land.x - p_launch.x
    dy = p_land.y - p_launch.y
    d = math.hypot(dx, dy)
    if d < 1e-9:
        return None
    dz = p_land.h - p_launch.h
    g = profile.g
    # tan(elevation) = (dz + g T^2 / 2) / d is increasing in T, so the angle
    # window is exactly a T interval
    hi2 = 2.0 * (d * math.tan(profile.jump_angle_max) - dz) / g
    if hi2 <= 0.0:
        return None
    t_hi = math.sqrt(hi2)
    lo2 = 2.0 * (d * math.tan(profile.jump_angle_min) - dz) / g
    t_lo = math.sqrt(lo2) if lo2 > 0.0 else min(1e-4, 0.5 * t_hi)
    if t_lo >= t_hi:
        return None
    ts = np.linspace(t_lo, t_hi, 64)
    vv = (d / ts) ** 2 + (dz / ts + 0.5 * g * ts) ** 2
    i = int(np.argmin(vv))
    a = ts[max(0, i - 1)]
    b = ts[min(len(ts) - 1, i + 1)]
    # objective is unimodal in T on this bracket; golden-section to 1e-6
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - (b - a) * invphi
    e = a + (b - a) * invphi
    fc = _takeoff_speed_sq(c, d, dz, g)
    fe = _takeoff_speed_sq(e, d, dz, g)
    while b - a > 1e-6:
        if fc < fe:
            b, e, fe = e, c, fc
            c = b - (b - a) * invphi
            fc = _takeoff_speed_sq(c, d, dz, g)
        else:
            a, c, fc = c, e, fe
            e = a + (b - a) * invphi
            fe = _takeoff_speed_sq(e, d, dz, g)
    T = 0.5 * (a + b)
    v2 = _takeoff_speed_sq(T, d, dz, g)
    speed = math.sqrt(v2)
    if speed > profile.v_max + 1e-12:
        return None
    vh = d / T
    vz0 = dz / T + 0.5 * g * T
    elevation = math.atan2(vz0, vh)
    rise = vz0 * vz0 / (2.0 * g) if vz0 > 0 else 0.0
    arc_len = d + 2.0 * rise
    n = max(8, math.ceil(arc_len / (0.5 * profile.res)))
    t = np.linspace(0.0, T, n + 1)
    ux, uy = dx / d, dy / d
    hx = vh * t
    xs = p_launch.x + ux * hx
    ys = p_launch.y + uy * hx
    zs = p_launch.h + vz0 * t - 0.5 * g * t * t
    points = tuple((float(px), float(py), float(pz)) for px, py, pz in zip(xs, ys, zs))
    return JumpTrajectory(speed=speed, elevation=elevation, flight_time=T, points=points)


def landing_support_pose(p_land: Pose, profile: RobotProfile) -> Pose:
    """Where the crawl rectangle rests after touch-down.

    The support footprint is the crawl rectangle centered on the touch-down
    point and aligned with the flight heading, matching the footprint every
    later crawl or stand-up check will use at that pose.
    """
    return Pose(p_land.x, p_land.y, p_land.theta, p_land.h)


# ---------------------------------------------------------------------------
# jobs


class GaitConfirmJob:
    """Fine re-check of a walk/crawl edge: full volume swept at half the
    exploration resolution, plus discrete footholds on solid floor.

    Footholds sit at stride spacing along the edge line with alternating
    lateral offsets of a quarter footprint width.
    """

    def __init__(
        self,
        edge: EdgeSnapshot,
        volume: VolumeSpec,
        stride: float,
        lateral_offset: float,
        res: float,
    ):
        self.edge = edge
        self.volume = volume
        self.job_id = -1
        p0, p1 = edge.pose_src, edge.pose_dst
        # the sufficient-side sweep pads its shapes by half its sample spacing,
        # which proves the continuous sweep clear; sampling the same line more
        # densely with the unpadded shapes therefore cannot refute that pass
        n = 2 * sweep_steps(p0, p1, volume, res)
        self._xs, self._ys, self._ths, _ = interpolate_poses(p0, p1, n)
        fx: list[float] = []
        fy: list[float] = []
        seg = math.hypot(p1.x - p0.x, p1.y - p0.y)
        if seg < 1e-12:
            fx.append(p0.x)
            fy.append(p0.y)
        else:
            ux, uy = (p1.x - p0.x) / seg, (p1.y - p0.y) / seg
            px, py = -uy, ux
            k = 0
            s = 0.0
            while s < seg:
                sign = 1.0 if k % 2 == 0 else -1.0
                fx.append(p0.x + ux * s + px * lateral_offset * sign)
                fy.append(p0.y + uy * s + py * lateral_offset * sign)
                k += 1
                s += stride
            sign = 1.0 if k % 2 == 0 else -1.0
            fx.append(p1.x + px * lateral_offset * sign)
            fy.append(p1.y + py * lateral_offset * sign)
        self._fx = np.array(fx)
        self._fy = np.array(fy)
        self._cursor = 0
        self._foot_cursor = 0

    def step(self, budget: int, world: WorldModel) -> Verdict | None:
        """Run up to `budget` collision checks; verdict when finished."""
        while budget > 0:
            if self._cursor < len(self._xs):
                k = min(budget, len(self._xs) - self._cursor)
                sl = slice(self._cursor, self._cursor + k)
                if not _volume_clear_batch(self._xs[sl], self._ys[sl], self._ths[sl], self.volume, world):
                    return Verdict(self.job_id, self.edge, REFUTED)
                self._cursor += k
                budget -= k
            elif self._foot_cursor < len(self._fx):
                k = min(budget, len(self._fx) - self._foot_cursor)
                sl = slice(self._foot_cursor, self._foot_cursor + k)
                if not _floor_points_solid(self._fx[sl], self._fy[sl], world):
                    return Verdict(self.job_id, self.edge, REFUTED)
                self._foot_cursor += k
                budget -= k
            else:
                return Verdict(self.job_id, self.edge, CONFIRMED)
        if self._cursor >= len(self._xs) and self._foot_cursor >= len(self._fx):
            return Verdict(self.job_id, self.edge, CONFIRMED)
        return None


class JumpConfirmJob:
    """Solve the take-off problem for a jump edge, then fly the solved arc
    through the world and check the landing support."""

    # rough work charge for the grid+refine solve, in collision-check units
    SOLVE_COST = 100

    def __init__(self, edge: EdgeSnapshot, profile: RobotProfile):
        self.edge = edge
        self.profile = profile
        self.job_id = -1
        self._solved = False
        self._trajectory: JumpTrajectory | None = None
        self._pts: np.ndarray | None = None
        self._cursor = 0

    def step(self, budget: int, world: WorldModel) -> Verdict | None:
        prof = self.profile
        while budget > 0:
            if not self._solved:
                if budget < self.SOLVE_COST:
                    return None
                self._trajectory = solve_jump_bvp(self.edge.pose_src, self.edge.pose_dst, prof)
                self._solved = True
                budget -= self.SOLVE_COST
                if self._trajectory is None:
                    return Verdict(self.job_id, self.edge, REFUTED)
                self._pts = np.array(self._trajectory.points)
            elif self._pts is not None and self._cursor < len(self._pts):
                k = min(budget, len(self._pts) - self._cursor)
                chunk = self._pts[self._cursor : self._cursor + k]
                if _spheres_hit_boxes(chunk[:, 0], chunk[:, 1], chunk[:, 2], prof.r_jump, world._obs):
                    return Verdict(self.job_id, self.edge, REFUTED)
                self._cursor += k
                budget -= k
            else:
                support = landing_support_pose(self.edge.pose_dst, prof)
                ok = floor_solid(support, RectFootprint(prof.crawl_len, prof.crawl_wid), world)
                outcome = CONFIRMED if ok else REFUTED
                return Verdict(self.job_id, self.edge, outcome, self._trajectory if ok else None)
        return None


ConfirmationJob = GaitConfirmJob | JumpConfirmJob


def confirm_gait_edge(job: GaitConfirmJob, world: WorldModel) -> Verdict:
    """Run a gait job to completion synchronously."""
    while True:
        v = job.step(1_000_000_000, world)
        if v is not None:
            return v


def confirm_jump_edge(job: JumpConfirmJob, world: WorldModel) -> Verdict:
    """Run a jump job to completion synchronously."""
    while True:
        v = job.step(1_000_000_000, world)
        if v is not None:
            return v


# ---------------------------------------------------------------------------
# worker pool


class ConfirmationQueue:
    """FIFO of resumable jobs plus a verdict outbox.

    Jobs run in quanta of at most `quantum` collision checks and go to the back
    of the line when unfinished: with k pending jobs needing q quanta each, no
    job waits more than k*q quanta. Worker threads and the cooperative step()
    path share the same scheduling discipline.
    """

    def __init__(self, world: WorldModel, quantum: int = 1000):
        self.world = world
        self.quantum = quantum
        self._pending: deque[ConfirmationJob] = deque()
        self._verdicts: list[Verdict] = []
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._threads: list[threading.Thread] = []
        self._stop = False
        self._next_job_id = 0

    def submit(self, job: ConfirmationJob) -> int:
        with self._cond:
            job.job_id = self._next_job_id
            self._next_job_id += 1
            self._pending.append(job)
            self._cond.notify()
            return job.job_id

    def pending_count(self) -> int:
        with self._lock:
            return len(self._pending)

    def step(self, max_quanta: int) -> int:
        """Cooperatively run up to max_quanta quanta on the calling thread.

        Deterministic given the submit order; this is what single-worker mode
        uses instead of threads.
        """
        ran = 0
        for _ in range(max_quanta):
            with self._lock:
                if not self._pending:
                    break
                job = self._pending.popleft()
            verdict = job.step(self.quantum, self.world)
            with self._lock:
                if verdict is None:
                    self._pending.append(job)
                else:
                    self._verdicts.append(verdict)
            ran += 1
        return ran

    def _worker(self):
        while True:
            with self._cond:
                while not self._stop and not self._pending:
                    self._cond.wait()
                if self._stop:
                    return
                job = self._pending.popleft()
            verdict = job.step(self.quantum, self.world)
            with self._cond:
                if verdict is None:
                    self._pending.append(job)
                    self._cond.notify()
                else:
                    self._verdicts.append(verdict)

    def launch(self, n_workers: int):
        with self._lock:
            self._stop = False
        for _ in range(n_workers):
            t = threading.Thread(target=self._worker, daemon=True)
            t.start()
            self._threads.append(t)

    def shutdown(self):
        """Stop workers; the quantum in flight finishes and lands its verdict."""
        with self._cond:
            self._stop = True
            self._cond.notify_all()
        for t in self._threads:
            t.join()
        self._threads.clear()

    def drain_verdicts(self) -> list[Verdict]:
        with self._lock:
            out = self._verdicts
            self._verdicts = []
            return out


def run_workers(queue: ConfirmationQueue, n_workers: int):
    """Start n worker threads over the queue."""
    queue.launch(n_workers)


def drain_verdicts(queue: ConfirmationQueue) -> list[Verdict]:
    """Collect and clear all verdicts completed so far."""
    return queue.drain_verdicts()
