"""2.5D world model and the geometric queries behind action feasibility checks.

The exploration space is a planar pose plus a posture height: (x, y, theta, h).
Worlds are axis-aligned: box obstacles in 3D, rectangular floor gaps, and a
solid floor at z = 0 everywhere else. Angled structures are expected to be
approximated by staircases of boxes before they get here.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

# Weights over (dx, dy, shortest-arc dtheta, dh) used wherever a single scalar
# distance between poses is needed. Heading is deliberately cheap.
DEFAULT_METRIC_WEIGHTS = (1.0, 1.0, 0.3, 1.0)


def normalize_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]. The tie at pi resolves to +pi."""
    a = math.remainder(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    return a


def _normalize_angles(a: np.ndarray) -> np.ndarray:
    r = np.mod(np.asarray(a, dtype=float) + math.pi, TWO_PI)
    # mod lands ties at 0; push them to 2*pi so the result stays in (-pi, pi]
    r[r == 0.0] = TWO_PI
    return r - math.pi


@dataclass(frozen=True)
class Pose:
    """A reduced-space configuration: planar position, heading, posture height."""

    x: float
    y: float
    theta: float = 0.0
    h: float = 0.0

    def __post_init__(self):
        if self.h < 0.0:
            raise ValueError(f"pose height must be >= 0, got {self.h}")
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


def pose_distance(a: Pose, b: Pose, weights: tuple[float, float, float, float] = DEFAULT_METRIC_WEIGHTS) -> float:
    """Weighted Euclidean distance over (dx, dy, shortest-arc dtheta, dh)."""
    dth = normalize_angle(b.theta - a.theta)
    return math.sqrt(
        (weights[0] * (b.x - a.x)) ** 2
        + (weights[1] * (b.y - a.y)) ** 2
        + (weights[2] * dth) ** 2
        + (weights[3] * (b.h - a.h)) ** 2
    )


@dataclass(frozen=True)
class DiscFootprint:
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("disc footprint radius must be > 0")

    @property
    def max_radius(self) -> float:
        return self.radius


@dataclass(frozen=True)
class RectFootprint:
    """Oriented rectangle: length runs along the heading, width across it."""

    length: float
    width: float

    def __post_init__(self):
        if self.length <= 0.0 or self.width <= 0.0:
            raise ValueError("rect footprint extents must be > 0")

    @property
    def max_radius(self) -> float:
        return 0.5 * math.hypot(self.length, self.width)


Footprint = DiscFootprint | RectFootprint


@dataclass(frozen=True)
class VolumeSpec:
    """A footprint extruded over an absolute z band [z_low, z_high]."""

    footprint: Footprint
    z_band: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.z_band
        if not lo < hi:
            raise ValueError(f"volume z band must be ascending, got {self.z_band}")


@dataclass(frozen=True)
class Box:
    """Axis-aligned obstacle: x, y, z intervals."""

    x: tuple[float, float]
    y: tuple[float, float]
    z: tuple[float, float]

    def __post_init__(self):
        for name, (lo, hi) in (("x", self.x), ("y", self.y), ("z", self.z)):
            if not lo < hi:
                raise ValueError(f"box {name} interval must be ascending, got {(lo, hi)}")


@dataclass(frozen=True)
class GapRect:
    """Axis-aligned rectangular hole in the floor."""

    x: tuple[float, float]
    y: tuple[float, float]

    def __post_init__(self):
        for name, (lo, hi) in (("x", self.x), ("y", self.y)):
            if not lo < hi:
                raise ValueError(f"gap {name} interval must be ascending, got {(lo, hi)}")


@dataclass
class RobotProfile:
    """Robot geometry, posture bands, and jump physics limits."""

    h_walk: float = 1.0
    delta_walk: float = 0.15
    h_crawl: float = 0.3
    delta_crawl: float = 0.15
    body_top_walk: float = 1.6
    body_top_crawl: float = 0.6
    r_walk: float = 0.25
    crawl_len: float = 0.9
    crawl_wid: float = 0.5
    r_necessary: float = 0.05
    jump_range_max: float = 1.5
    v_max: float = 4.0
    g: float = 9.81
    r_jump: float = 0.35
    stride: float = 0.4
    res: float = 0.05
    apex_grid: tuple[float, ...] = (0.2, 0.4, 0.6)
    jump_angle_min: float = math.radians(15.0)
    jump_angle_max: float = math.radians(80.0)

    def __post_init__(self):
        if not 0.0 < self.h_crawl < self.h_walk:
            raise ValueError("profile requires 0 < h_crawl < h_walk")
        if self.h_crawl + self.delta_crawl >= self.h_walk - self.delta_walk:
            raise ValueError("profile posture bands overlap: crawl band must sit below walk band")
        if self.r_necessary >= self.r_walk:
            raise ValueError("profile r_necessary must be smaller than r_walk")
        if self.r_necessary >= 0.5 * self.crawl_wid:
            raise ValueError("profile r_necessary must be smaller than half the crawl width")
        if self.jump_range_max > self.v_max ** 2 / self.g + 1e-9:
            raise ValueError("profile jump_range_max exceeds the level-ground ballistic range v_max^2/g")
        if self.res <= 0.0:
            raise ValueError("profile res must be > 0")
        if not 0.0 <= self.jump_angle_min < self.jump_angle_max < 0.5 * math.pi:
            raise ValueError("profile jump angle window must satisfy 0 <= min < max < pi/2")


@dataclass
class WorldModel:
    """Bounded 2.5D world: rectangle bounds, box obstacles, floor gaps."""

    bounds_x: tuple[float, float]
    bounds_y: tuple[float, float]
    obstacles: tuple[Box, ...] = ()
    gaps: tuple[GapRect, ...] = ()
    _obs: np.ndarray = field(init=False, repr=False, compare=False)
    _gap: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.bounds_x[0] < self.bounds_x[1] or not self.bounds_y[0] < self.bounds_y[1]:
            raise ValueError("world bounds must be ascending intervals")
        self.obstacles = tuple(self.obstacles)
        self.gaps = tuple(self.gaps)
        for i, b in enumerate(self.obstacles):
            if not self._interval_inside(b.x, self.bounds_x) or not self._interval_inside(b.y, self.bounds_y):
                raise ValueError(f"obstacle {i} lies outside world bounds")
        for i, g in enumerate(self.gaps):
            if not self._interval_inside(g.x, self.bounds_x) or not self._interval_inside(g.y, self.bounds_y):
                raise ValueError(f"gap {i} lies outside world bounds")
        self._obs = np.array(
            [[b.x[0], b.x[1], b.y[0], b.y[1], b.z[0], b.z[1]] for b in self.obstacles],
            dtype=float,
        ).reshape(len(self.obstacles), 6)
        self._gap = np.array(
            [[g.x[0], g.x[1], g.y[0], g.y[1]] for g in self.gaps], dtype=float
        ).reshape(len(self.gaps), 4)

    @staticmethod
    def _interval_inside(inner: tuple[float, float], outer: tuple[float, float]) -> bool:
        return inner[0] >= outer[0] - 1e-9 and inner[1] <= outer[1] + 1e-9

    @property
    def ceiling(self) -> float:
        """Upper bound for sampled posture heights."""
        top = max((b.z[1] for b in self.obstacles), default=0.0)
        return max(2.0, top)

    def contains(self, x: float, y: float) -> bool:
        return (
            self.bounds_x[0] <= x <= self.bounds_x[1]
            and self.bounds_y[0] <= y <= self.bounds_y[1]
        )


# ---------------------------------------------------------------------------
# collision kernels


def _discs_hit_boxes(xs, ys, radius, zlo, zhi, obs) -> bool:
    """True if any disc (same radius, z band) strictly penetrates any box."""
    if obs.shape[0] == 0:
        return False
    zmask = (obs[:, 4] < zhi) & (obs[:, 5] > zlo)
    if not zmask.any():
        return False
    sel = obs[zmask]
    xs = np.asarray(xs, dtype=float)[:, None]
    ys = np.asarray(ys, dtype=float)[:, None]
    dx = np.maximum(np.maximum(sel[None, :, 0] - xs, xs - sel[None, :, 1]), 0.0)
    dy = np.maximum(np.maximum(sel[None, :, 2] - ys, ys - sel[None, :, 3]), 0.0)
    return bool((dx * dx + dy * dy < radius * radius).any())


def _rect_overlaps_aabbs(cx, cy, theta, length, width, rects) -> np.ndarray:
    """Strict-interior overlap of one oriented rect against rows of [xlo,xhi,ylo,yhi]."""
    c = math.cos(theta)
    s = math.sin(theta)
    hl = 0.5 * length
    hw = 0.5 * width
    bcx = 0.5 * (rects[:, 0] + rects[:, 1])
    bcy = 0.5 * (rects[:, 2] + rects[:, 3])
    bhx = 0.5 * (rects[:, 1] - rects[:, 0])
    bhy = 0.5 * (rects[:, 3] - rects[:, 2])
    # separating axis test on the two world axes and the two rect axes
    ox = np.abs(cx - bcx) < abs(c) * hl + abs(s) * hw + bhx
    oy = np.abs(cy - bcy) < abs(s) * hl + abs(c) * hw + bhy
    cu = c * cx + s * cy
    cw = -s * cx + c * cy
    ou = np.abs(cu - (c * bcx + s * bcy)) < hl + np.abs(c) * bhx + np.abs(s) * bhy
    ow = np.abs(cw - (-s * bcx + c * bcy)) < hw + np.abs(s) * bhx + np.abs(c) * bhy
    return ox & oy & ou & ow


def rect_corners(cx: float, cy: float, theta: float, length: float, width: float) -> np.ndarray:
    c = math.cos(theta)
    s = math.sin(theta)
    hl = 0.5 * length
    hw = 0.5 * width
    ux, uy = c * hl, s * hl
    wx, wy = -s * hw, c * hw
    return np.array(
        [
            [cx + ux + wx, cy + uy + wy],
            [cx + ux - wx, cy + uy - wy],
            [cx - ux + wx, cy - uy + wy],
            [cx - ux - wx, cy - uy - wy],
        ]
    )


def _volume_clear_batch(xs, ys, thetas, vol: VolumeSpec, world: WorldModel) -> bool:
    """All sampled placements inside bounds and free of strict obstacle overlap."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    inb = (
        (xs >= world.bounds_x[0])
        & (xs <= world.bounds_x[1])
        & (ys >= world.bounds_y[0])
        & (ys <= world.bounds_y[1])
    )
    if not inb.all():
        return False
    zlo, zhi = vol.z_band
    fp = vol.footprint
    if isinstance(fp, DiscFootprint):
        return not _discs_hit_boxes(xs, ys, fp.radius, zlo, zhi, world._obs)
    obs = world._obs
    if obs.shape[0] == 0:
        return True
    zmask = (obs[:, 4] < zhi) & (obs[:, 5] > zlo)
    if not zmask.any():
        return True
    sel = obs[zmask][:, 0:4]
    thetas = np.asarray(thetas, dtype=float)
    for i in range(xs.shape[0]):
        if _rect_overlaps_aabbs(xs[i], ys[i], thetas[i], fp.length, fp.width, sel).any():
            return False
    return True


def volume_clear(pose: Pose, vol: VolumeSpec, world: WorldModel) -> bool:
    """True iff the volume at this pose stays inside bounds and off every obstacle.

    A pose outside the world bounds is reported as not clear rather than an
    error, so callers can probe freely.
    """
    return _volume_clear_batch(
        np.array([pose.x]), np.array([pose.y]), np.array([pose.theta]), vol, world
    )


def sweep_steps(p0: Pose, p1: Pose, vol: VolumeSpec, res: float) -> int:
    """Number of interpolation intervals so sample spacing stays <= res."""
    trans = math.sqrt((p1.x - p0.x) ** 2 + (p1.y - p0.y) ** 2 + (p1.h - p0.h) ** 2)
    rot = abs(normalize_angle(p1.theta - p0.theta)) * vol.footprint.max_radius
    return max(1, math.ceil((trans + rot) / res))


def interpolate_poses(p0: Pose, p1: Pose, n: int):
    """(n+1)-sample linear interpolation with exact endpoints; theta runs
    along the shortest arc."""
    t = np.linspace(0.0, 1.0, n + 1)
    xs = np.linspace(p0.x, p1.x, n + 1)
    ys = np.linspace(p0.y, p1.y, n + 1)
    hs = np.linspace(p0.h, p1.h, n + 1)
    dth = normalize_angle(p1.theta - p0.theta)
    thetas = _normalize_angles(p0.theta + dth * t)
    return xs, ys, thetas, hs


def swept_clear(p0: Pose, p1: Pose, vol: VolumeSpec, world: WorldModel, res: float) -> bool:
    """volume_clear along the straight interpolation from p0 to p1, endpoints included."""
    n = sweep_steps(p0, p1, vol, res)
    xs, ys, thetas, _ = interpolate_poses(p0, p1, n)
    return _volume_clear_batch(xs, ys, thetas, vol, world)


# ---------------------------------------------------------------------------
# floor support


def floor_point_solid(x: float, y: float, world: WorldModel) -> bool:
    """A single support point: inside bounds and not strictly inside any gap."""
    if not world.contains(x, y):
        return False
    g = world._gap
    if g.shape[0] == 0:
        return True
    inside = (g[:, 0] < x) & (x < g[:, 1]) & (g[:, 2] < y) & (y < g[:, 3])
    return not bool(inside.any())


def segment_crosses_gap(world: WorldModel, x0: float, y0: float, x1: float, y1: float) -> bool:
    """True when the open planar segment passes strictly inside some gap.

    Exact slab test per gap rectangle; touching a gap boundary does not
    count, matching the strict-interior convention everywhere else.
    """
    dx = x1 - x0
    dy = y1 - y0
    for gx0, gx1, gy0, gy1 in world._gap:
        t_lo, t_hi = 0.0, 1.0
        ok = True
        for p, d, lo, hi in ((x0, dx, gx0, gx1), (y0, dy, gy0, gy1)):
            if abs(d) < 1e-15:
                if not lo < p < hi:
                    ok = False
                    break
            else:
                ta = (lo - p) / d
                tb = (hi - p) / d
                if ta > tb:
                    ta, tb = tb, ta
                t_lo = max(t_lo, ta)
                t_hi = min(t_hi, tb)
        if ok and t_lo < t_hi:
            return True
    return False


FOOT_BEARING = 0.04


def _floor_points_solid(xs, ys, world: WorldModel) -> bool:
    """Discrete footholds: every point carries a small square bearing pad that
    must sit inside the world and clear of every gap.

    A point exactly on a gap lip has zero bearing area and cannot take a
    step, so the pad makes gaps effectively a bearing-width larger than the
    footprint-based support checks see them.
    """
    e = FOOT_BEARING
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    inb = (
        (xs - e >= world.bounds_x[0] - 1e-12)
        & (xs + e <= world.bounds_x[1] + 1e-12)
        & (ys - e >= world.bounds_y[0] - 1e-12)
        & (ys + e <= world.bounds_y[1] + 1e-12)
    )
    if not inb.all():
        return False
    g = world._gap
    if g.shape[0] == 0:
        return True
    xs = xs[:, None]
    ys = ys[:, None]
    inside = (
        (g[None, :, 0] - e < xs)
        & (xs < g[None, :, 1] + e)
        & (g[None, :, 2] - e < ys)
        & (ys < g[None, :, 3] + e)
    )
    return not bool(inside.any())


def floor_solid(pose: Pose, footprint: Footprint, world: WorldModel) -> bool:
    """The whole footprint is supported: inside bounds, no strict gap overlap.

    Disc footprints ignore pose.theta and pose.h entirely.
    """
    g = world._gap
    if isinstance(footprint, DiscFootprint):
        r = footprint.radius
        if not (
            pose.x - r >= world.bounds_x[0] - 1e-12
            and pose.x + r <= world.bounds_x[1] + 1e-12
            and pose.y - r >= world.bounds_y[0] - 1e-12
            and pose.y + r <= world.bounds_y[1] + 1e-12
        ):
            return False
        if g.shape[0] == 0:
            return True
        dx = np.maximum(np.maximum(g[:, 0] - pose.x, pose.x - g[:, 1]), 0.0)
        dy = np.maximum(np.maximum(g[:, 2] - pose.y, pose.y - g[:, 3]), 0.0)
        return not bool((dx * dx + dy * dy < r * r).any())
    corners = rect_corners(pose.x, pose.y, pose.theta, footprint.length, footprint.width)
    if not (
        (corners[:, 0] >= world.bounds_x[0] - 1e-12).all()
        and (corners[:, 0] <= world.bounds_x[1] + 1e-12).all()
        and (corners[:, 1] >= world.bounds_y[0] - 1e-12).all()
        and (corners[:, 1] <= world.bounds_y[1] + 1e-12).all()
    ):
        return False
    if g.shape[0] == 0:
        return True
    return not bool(
        _rect_overlaps_aabbs(pose.x, pose.y, pose.theta, footprint.length, footprint.width, g).any()
    )


def _floor_solid_batch(xs, ys, thetas, footprint: Footprint, world: WorldModel) -> bool:
    if isinstance(footprint, DiscFootprint):
        r = footprint.radius
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        inb = (
            (xs - r >= world.bounds_x[0] - 1e-12)
            & (xs + r <= world.bounds_x[1] + 1e-12)
            & (ys - r >= world.bounds_y[0] - 1e-12)
            & (ys + r <= world.bounds_y[1] + 1e-12)
        )
        if not inb.all():
            return False
        g = world._gap
        if g.shape[0] == 0:
            return True
        cx = xs[:, None]
        cy = ys[:, None]
        dx = np.maximum(np.maximum(g[None, :, 0] - cx, cx - g[None, :, 1]), 0.0)
        dy = np.maximum(np.maximum(g[None, :, 2] - cy, cy - g[None, :, 3]), 0.0)
        return not bool((dx * dx + dy * dy < r * r).any())
    for i in range(len(xs)):
        if not floor_solid(Pose(float(xs[i]), float(ys[i]), float(thetas[i]), 0.0), footprint, world):
            return False
    return True


# ---------------------------------------------------------------------------
# ballistic arc probe


def parabola_clear(
    p0: Pose, p1: Pose, apex_rise: float, radius: float, world: WorldModel, res: float
) -> bool:
    """Carry a sphere along a vertical-plane parabola between the two poses.

    The arc starts at (p0.x, p0.y, p0.h), ends at (p1.x, p1.y, p1.h), and peaks
    apex_rise above the chord midpoint. Only box obstacles matter; floor gaps
    are irrelevant to a body in flight.
    """
    if apex_rise < 0.0:
        raise ValueError("apex_rise must be >= 0")
    dx = p1.x - p0.x
    dy = p1.y - p0.y
    dz = p1.h - p0.h
    chord = math.hypot(dx, dy)
    # |dP/ds| <= sqrt(chord^2 + (|dz| + 4a)^2); spacing <= res along the arc
    lmax = math.sqrt(chord * chord + (abs(dz) + 4.0 * apex_rise) ** 2)
    n = max(2, math.ceil(lmax / res))
    s = np.linspace(0.0, 1.0, n + 1)
    xs = p0.x + dx * s
    ys = p0.y + dy * s
    zs = p0.h + dz * s + 4.0 * apex_rise * s * (1.0 - s)
    return not _spheres_hit_boxes(xs, ys, zs, radius, world._obs)


def _spheres_hit_boxes(xs, ys, zs, radius, obs) -> bool:
    if obs.shape[0] == 0:
        return False
    xs = np.asarray(xs, dtype=float)[:, None]
    ys = np.asarray(ys, dtype=float)[:, None]
    zs = np.asarray(zs, dtype=float)[:, None]
    dx = np.maximum(np.maximum(obs[None, :, 0] - xs, xs - obs[None, :, 1]), 0.0)
    dy = np.maximum(np.maximum(obs[None, :, 2] - ys, ys - obs[None, :, 3]), 0.0)
    dz = np.maximum(np.maximum(obs[None, :, 4] - zs, zs - obs[None, :, 5]), 0.0)
    return bool((dx * dx + dy * dy + dz * dz < radius * radius).any())


def sample_pose(world: WorldModel, rng: random.Random) -> Pose:
    """Uniform sample over bounds x bounds x (-pi, pi] x [0, ceiling]."""
    x = rng.uniform(*world.bounds_x)
    y = rng.uniform(*world.bounds_y)
    theta = normalize_angle(rng.uniform(-math.pi, math.pi))
    h = rng.uniform(0.0, world.ceiling)
    return Pose(x, y, theta, h)
