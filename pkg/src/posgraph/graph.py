"""Master possibility graph: vertices, lazily-validated edges, per-action components.

Edges carry a trichotomy-aware status. Anything inserted must at least satisfy
its action's necessary condition; edges whose sufficient condition held at
creation (or at a later re-check) are marked accordingly, and edges proven out
by a confirmation job come back as job-confirmed.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

from .world import Pose, pose_distance, DEFAULT_METRIC_WEIGHTS

TAG_WALK = "walk"
TAG_CRAWL = "crawl"
TAG_JUMP = "jump"
TAG_TRANSITION = "transition"

VERTEX_TAGS = (TAG_WALK, TAG_CRAWL)
EDGE_TAGS = (TAG_WALK, TAG_CRAWL, TAG_JUMP, TAG_TRANSITION)

# quantization used by the removed-edge registry and vertex dedup: 1 cm in
# x/y/h, 0.01 rad in heading
_Q_XY = 0.01
_Q_TH = 0.01
_Q_H = 0.01


class EdgeStatus(str, Enum):
    SUFFICIENT = "sufficient-confirmed"
    INDETERMINATE = "indeterminate"
    JOB_CONFIRMED = "job-confirmed"


class ConditionViolation(RuntimeError):
    """Raised when an insertion fails the re-asserted necessary condition."""


@dataclass
class VertexRecord:
    id: int
    pose: Pose
    tag: str


@dataclass
class EdgeRecord:
    id: int
    tag: str
    src: int
    dst: int
    status: EdgeStatus
    cost: float
    apex: float | None = None
    twin: int | None = None


@dataclass(frozen=True)
class PathResult:
    vertex_ids: tuple[int, ...]
    edge_ids: tuple[int, ...]
    cost: float


@dataclass
class TagChecks:
    """Re-assertable necessary conditions for one action tag."""

    vertex: Callable[[Pose], bool] | None = None
    edge: Callable[[Pose, Pose], bool] | None = None


class _UnionFind:
    """Plain union-find with path compression; components counted on demand."""

    def __init__(self):
        self.parent: dict[int, int] = {}

    def add(self, x: int):
        if x not in self.parent:
            self.parent[x] = x

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def _qv(v: float, q: float) -> int:
    return int(round(v / q))


def quantize_pose(pose: Pose) -> tuple[int, int, int, int]:
    return (_qv(pose.x, _Q_XY), _qv(pose.y, _Q_XY), _qv(pose.theta, _Q_TH), _qv(pose.h, _Q_H))


def edge_key(tag: str, p0: Pose, p1: Pose) -> tuple:
    return (tag, quantize_pose(p0), quantize_pose(p1))


@dataclass
class _ClosestEntry:
    component: int
    vertex_id: int
    distance: float


class PossibilityGraph:
    """Single shared graph over all actions, plus per-action component tracking.

    Parameters
    ----------
    checks : mapping of action tag to TagChecks, used to re-assert necessary
        conditions at insertion time. Tags absent from the mapping skip
        validation (handy in unit tests).
    """

    def __init__(
        self,
        checks: dict[str, TagChecks] | None = None,
        transition_surcharge: float = 0.5,
        jump_surcharge: float = 1.0,
    ):
        self.checks = checks or {}
        self.transition_surcharge = transition_surcharge
        self.jump_surcharge = jump_surcharge
        self.vertices: dict[int, VertexRecord] = {}
        self.edges: dict[int, EdgeRecord] = {}
        self.start_id: int | None = None
        self.goal_ids: list[int] = []
        self._next_vid = 0
        self._next_eid = 0
        self._out: dict[int, list[int]] = {}
        self._in: dict[int, list[int]] = {}
        self._tag_vertices: dict[str, list[int]] = {t: [] for t in VERTEX_TAGS}
        self._uf: dict[str, _UnionFind] = {t: _UnionFind() for t in VERTEX_TAGS}
        self._uf_dirty: set[str] = set()
        self._removed_registry: set[tuple] = set()
        self._pending_keys: set[tuple] = set()
        self._live_keys: set[tuple] = set()
        self._vertex_keys: dict[tuple, int] = {}
        self._version = 0
        self._reach_cache: dict[str, tuple[int, frozenset[int]]] = {}

    # -- bookkeeping ------------------------------------------------------

    @property
    def version(self) -> int:
        return self._version

    def _bump(self):
        self._version += 1

    def set_endpoints(self, start_id: int, goal_ids: Iterable[int]):
        self.start_id = start_id
        self.goal_ids = list(goal_ids)
        self._bump()

    def vertex_count(self, tag: str | None = None) -> int:
        if tag is None:
            return len(self.vertices)
        return len(self._tag_vertices.get(tag, ()))

    def edge_count(self, tag: str | None = None) -> int:
        if tag is None:
            return len(self.edges)
        return sum(1 for e in self.edges.values() if e.tag == tag)

    # -- vertices ---------------------------------------------------------

    def insert_vertex(self, pose: Pose, tag: str, dedup: bool = True) -> int:
        """Add a vertex on the tagged manifold; re-asserts the vertex condition.

        With dedup on, a pose landing within registry quantization of an
        existing same-tag vertex (heading ignored) reuses that vertex, which is
        what lets independently grown chains knit together.
        """
        if tag not in VERTEX_TAGS:
            raise ValueError(f"unknown vertex tag {tag!r}")
        chk = self.checks.get(tag)
        if chk and chk.vertex and not chk.vertex(pose):
            raise ConditionViolation(f"vertex pose fails necessary condition for {tag!r}: {pose}")
        key = (tag, _qv(pose.x, _Q_XY), _qv(pose.y, _Q_XY), _qv(pose.h, _Q_H))
        if dedup and key in self._vertex_keys:
            return self._vertex_keys[key]
        vid = self._next_vid
        self._next_vid += 1
        self.vertices[vid] = VertexRecord(vid, pose, tag)
        self._out[vid] = []
        self._in[vid] = []
        self._tag_vertices[tag].append(vid)
        self._uf[tag].add(vid)
        if dedup:
            self._vertex_keys[key] = vid
        self._bump()
        return vid

    # -- edges ------------------------------------------------------------

    def _edge_cost(self, p0: Pose, p1: Pose, tag: str) -> float:
        length = math.sqrt((p1.x - p0.x) ** 2 + (p1.y - p0.y) ** 2 + (p1.h - p0.h) ** 2)
        if tag == TAG_TRANSITION:
            return length + self.transition_surcharge
        if tag == TAG_JUMP:
            return length + self.jump_surcharge
        return length

    def edge_blocked(self, tag: str, p0: Pose, p1: Pose) -> bool:
        """True if this quantized endpoint pair was refuted, is pending a job,
        or already exists live."""
        k = edge_key(tag, p0, p1)
        return k in self._removed_registry or k in self._pending_keys or k in self._live_keys

    def edge_live(self, tag: str, p0: Pose, p1: Pose) -> bool:
        """True if an edge with these quantized endpoints currently exists."""
        return edge_key(tag, p0, p1) in self._live_keys

    def insert_edge(
        self,
        src: int,
        dst: int,
        tag: str,
        status: EdgeStatus,
        bidirectional: bool,
        apex: float | None = None,
        cost: float | None = None,
    ) -> list[int]:
        """Insert a directed edge (and its twin when bidirectional).

        Registry hits are skipped silently and return an empty list. A failed
        necessary-condition re-check raises: the caller was supposed to verify.
        """
        if tag not in EDGE_TAGS:
            raise ValueError(f"unknown edge tag {tag!r}")
        if src not in self.vertices or dst not in self.vertices:
            raise KeyError("edge endpoints must be existing vertices")
        p0 = self.vertices[src].pose
        p1 = self.vertices[dst].pose
        if self.edge_blocked(tag, p0, p1):
            return []
        chk = self.checks.get(tag)
        if chk and chk.edge and not chk.edge(p0, p1):
            raise ConditionViolation(f"edge fails necessary condition for {tag!r}: {p0} -> {p1}")
        c = self._edge_cost(p0, p1, tag) if cost is None else cost
        ids = [self._add_one(src, dst, tag, status, c, apex)]
        if bidirectional:
            back = edge_key(tag, p1, p0)
            if back not in self._removed_registry and back not in self._live_keys:
                ids.append(self._add_one(dst, src, tag, status, c, apex))
                self.edges[ids[0]].twin = ids[1]
                self.edges[ids[1]].twin = ids[0]
        if (
            tag in VERTEX_TAGS
            and self.vertices[src].tag == tag
            and self.vertices[dst].tag == tag
            and tag not in self._uf_dirty
        ):
            self._uf[tag].union(src, dst)
        self._bump()
        return ids

    def _add_one(self, src, dst, tag, status, cost, apex) -> int:
        eid = self._next_eid
        self._next_eid += 1
        self.edges[eid] = EdgeRecord(eid, tag, src, dst, status, cost, apex)
        self._out[src].append(eid)
        self._in[dst].append(eid)
        self._live_keys.add(edge_key(tag, self.vertices[src].pose, self.vertices[dst].pose))
        return eid

    def remove_edge(self, eid: int, register: bool = False):
        """Drop an edge (and its twin). Unknown ids are a no-op.

        With register=True the quantized endpoint pair is recorded so the pair
        can never be re-inserted for this tag; with register=False the removal
        is speculative (a pending confirmation) and re-insertion stays legal.
        """
        e = self.edges.get(eid)
        if e is None:
            return
        doom = [e]
        if e.twin is not None and e.twin in self.edges:
            doom.append(self.edges[e.twin])
        for rec in doom:
            del self.edges[rec.id]
            self._out[rec.src].remove(rec.id)
            self._in[rec.dst].remove(rec.id)
            k = edge_key(rec.tag, self.vertices[rec.src].pose, self.vertices[rec.dst].pose)
            self._live_keys.discard(k)
            if register:
                self._removed_registry.add(k)
            if rec.tag in VERTEX_TAGS:
                self._uf_dirty.add(rec.tag)
        self._bump()

    def register_refuted(self, tag: str, p0: Pose, p1: Pose, both_directions: bool = True):
        self._removed_registry.add(edge_key(tag, p0, p1))
        if both_directions:
            self._removed_registry.add(edge_key(tag, p1, p0))

    def mark_pending(self, tag: str, p0: Pose, p1: Pose, both_directions: bool = True):
        self._pending_keys.add(edge_key(tag, p0, p1))
        if both_directions:
            self._pending_keys.add(edge_key(tag, p1, p0))

    def clear_pending(self, tag: str, p0: Pose, p1: Pose, both_directions: bool = True):
        self._pending_keys.discard(edge_key(tag, p0, p1))
        if both_directions:
            self._pending_keys.discard(edge_key(tag, p1, p0))

    # -- connectivity -----------------------------------------------------

    def _rebuild_uf(self, tag: str):
        uf = _UnionFind()
        for vid in self._tag_vertices[tag]:
            uf.add(vid)
        for e in self.edges.values():
            if (
                e.tag == tag
                and self.vertices[e.src].tag == tag
                and self.vertices[e.dst].tag == tag
            ):
                uf.union(e.src, e.dst)
        self._uf[tag] = uf
        self._uf_dirty.discard(tag)

    def components(self, tag: str) -> dict[int, list[int]]:
        """Connected components of the per-action undirected view."""
        if tag in self._uf_dirty:
            self._rebuild_uf(tag)
        uf = self._uf[tag]
        comps: dict[int, list[int]] = {}
        for vid in self._tag_vertices[tag]:
            comps.setdefault(uf.find(vid), []).append(vid)
        return comps

    def _bfs(self, seeds: Iterable[int], adjacency: dict[int, list[int]], forward: bool) -> frozenset[int]:
        seen = set(s for s in seeds if s in self.vertices)
        q = deque(seen)
        while q:
            v = q.popleft()
            for eid in adjacency[v]:
                e = self.edges[eid]
                nxt = e.dst if forward else e.src
                if nxt not in seen:
                    seen.add(nxt)
                    q.append(nxt)
        return frozenset(seen)

    def reachable_from(self, src: int) -> frozenset[int]:
        return self._bfs([src], self._out, True)

    def start_reachable_set(self) -> frozenset[int]:
        """Vertices reachable from the start along directed edges (cached)."""
        cached = self._reach_cache.get("start")
        if cached and cached[0] == self._version:
            return cached[1]
        result = self._bfs([self.start_id] if self.start_id is not None else [], self._out, True)
        self._reach_cache["start"] = (self._version, result)
        return result

    def goal_reaching_set(self) -> frozenset[int]:
        """Vertices from which some goal is reachable (cached)."""
        cached = self._reach_cache.get("goal")
        if cached and cached[0] == self._version:
            return cached[1]
        result = self._bfs(self.goal_ids, self._in, False)
        self._reach_cache["goal"] = (self._version, result)
        return result

    def reachability_label(self, vid: int, direction: str) -> bool:
        """direction: 'from-start' or 'to-goal'."""
        if direction == "from-start":
            return vid in self.start_reachable_set()
        if direction == "to-goal":
            return vid in self.goal_reaching_set()
        raise ValueError(f"unknown direction {direction!r}")

    def connected(self, src: int, dst: int) -> bool:
        """Directed reachability src -> dst over all live edges."""
        if src not in self.vertices or dst not in self.vertices:
            return False
        if src == self.start_id:
            return dst in self.start_reachable_set()
        return dst in self.reachable_from(src)

    # -- queries ----------------------------------------------------------

    def shortest_path(self, src: int, dst: int) -> PathResult | None:
        """Dijkstra over edge costs; equal-cost ties prefer wiring through the
        lower incoming edge id, which keeps results deterministic."""
        if src not in self.vertices or dst not in self.vertices:
            return None
        dist: dict[int, float] = {src: 0.0}
        prev_edge: dict[int, int] = {}
        heap: list[tuple[float, int, int]] = [(0.0, -1, src)]
        done: set[int] = set()
        while heap:
            d, _, v = heapq.heappop(heap)
            if v in done:
                continue
            done.add(v)
            if v == dst:
                break
            for eid in sorted(self._out[v]):
                e = self.edges[eid]
                nd = d + e.cost
                u = e.dst
                if u in done:
                    continue
                old = dist.get(u)
                if old is None or nd < old or (nd == old and eid < prev_edge.get(u, eid + 1)):
                    dist[u] = nd
                    prev_edge[u] = eid
                    heapq.heappush(heap, (nd, eid, u))
        if dst not in done:
            return None
        verts = [dst]
        eids: list[int] = []
        v = dst
        while v != src:
            eid = prev_edge[v]
            eids.append(eid)
            v = self.edges[eid].src
            verts.append(v)
        verts.reverse()
        eids.reverse()
        return PathResult(tuple(verts), tuple(eids), dist[dst])

    def subgraph_closest(
        self,
        tag: str,
        target: Pose,
        weights: tuple[float, float, float, float] = DEFAULT_METRIC_WEIGHTS,
    ) -> list[_ClosestEntry]:
        """Per-component nearest vertex to target, sorted ascending by distance
        (ties toward the lower vertex id)."""
        best: dict[int, tuple[float, int]] = {}
        comps = self.components(tag)
        for root, vids in comps.items():
            b = None
            for vid in vids:
                d = pose_distance(self.vertices[vid].pose, target, weights)
                if b is None or d < b[0] or (d == b[0] and vid < b[1]):
                    b = (d, vid)
            best[root] = b
        entries = [_ClosestEntry(root, vid, d) for root, (d, vid) in best.items()]
        entries.sort(key=lambda e: (e.distance, e.vertex_id))
        return entries

    def nearest_vertices(
        self,
        tag: str,
        pose: Pose,
        k: int = 3,
        max_dist: float | None = None,
        weights: tuple[float, float, float, float] = DEFAULT_METRIC_WEIGHTS,
    ) -> list[int]:
        """The k vertices of one manifold closest to a pose, nearest first."""
        scored = []
        for vid in self._tag_vertices[tag]:
            d = pose_distance(self.vertices[vid].pose, pose, weights)
            if max_dist is None or d <= max_dist:
                scored.append((d, vid))
        scored.sort()
        return [vid for _, vid in scored[:k]]

    # -- serialization ----------------------------------------------------

    def dump(self) -> str:
        """Line-oriented text: V id tag x y theta h / E id tag from to status cost."""
        lines = []
        for vid in sorted(self.vertices):
            v = self.vertices[vid]
            p = v.pose
            lines.append(f"V {vid} {v.tag} {p.x:.6f} {p.y:.6f} {p.theta:.6f} {p.h:.6f}")
        for eid in sorted(self.edges):
            e = self.edges[eid]
            lines.append(f"E {eid} {e.tag} {e.src} {e.dst} {e.status.value} {e.cost:.6f}")
        return "\n".join(lines) + "\n"

    # -- self checks ------------------------------------------------------

    def audit(self):
        """Structural invariants; raises AssertionError on violation."""
        for v in self.vertices.values():
            assert v.tag in VERTEX_TAGS
            chk = self.checks.get(v.tag)
            if chk and chk.vertex:
                assert chk.vertex(v.pose), f"vertex {v.id} fails {v.tag} condition"
        for e in self.edges.values():
            assert e.tag in EDGE_TAGS
            assert e.src in self.vertices and e.dst in self.vertices
            chk = self.checks.get(e.tag)
            if chk and chk.edge:
                assert chk.edge(self.vertices[e.src].pose, self.vertices[e.dst].pose)
        for tag in VERTEX_TAGS:
            comps = self.components(tag)
            # compare against a fresh undirected BFS
            seen: set[int] = set()
            for root, vids in comps.items():
                group = set(vids)
                probe = next(iter(group))
                frontier = {probe}
                reach = {probe}
                while frontier:
                    nxt = set()
                    for v in frontier:
                        for eid in self._out[v] + self._in[v]:
                            e = self.edges[eid]
                            if e.tag != tag:
                                continue
                            for u in (e.src, e.dst):
                                if (
                                    self.vertices[u].tag == tag
                                    and u not in reach
                                ):
                                    reach.add(u)
                                    nxt.add(u)
                    frontier = nxt
                assert reach == group, f"union-find mismatch for {tag}"
                seen |= group
