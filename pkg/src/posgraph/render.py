"""Top-down SVG rendering of a world, a possibility graph, and a solution.

Output is plain text built with fixed-precision formatting in insertion
order, so the same planner state always renders to identical bytes.
"""
from __future__ import annotations

from .graph import PathResult, PossibilityGraph, TAG_CRAWL, TAG_JUMP, TAG_TRANSITION, TAG_WALK
from .world import WorldModel

SCALE = 80.0
MARGIN = 24.0

EDGE_STYLE = {
    TAG_WALK: ("#2f9e44", 1.6),
    TAG_CRAWL: ("#4dabf7", 1.6),
    TAG_JUMP: ("#d6179b", 2.0),
}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Canvas:
    def __init__(self, world: WorldModel):
        self.world = world
        self.width = (world.bounds_x[1] - world.bounds_x[0]) * SCALE + 2 * MARGIN
        self.height = (world.bounds_y[1] - world.bounds_y[0]) * SCALE + 2 * MARGIN
        self.parts: list[str] = []

    def pt(self, x: float, y: float) -> tuple[float, float]:
        # svg y grows downward
        px = MARGIN + (x - self.world.bounds_x[0]) * SCALE
        py = MARGIN + (self.world.bounds_y[1] - y) * SCALE
        return px, py

    def rect(self, x0, y0, x1, y1, fill, extra=""):
        ax, ay = self.pt(x0, y1)
        w = (x1 - x0) * SCALE
        h = (y1 - y0) * SCALE
        self.parts.append(
            f'<rect x="{_fmt(ax)}" y="{_fmt(ay)}" width="{_fmt(w)}" height="{_fmt(h)}" fill="{fill}"{extra}/>'
        )

    def line(self, x0, y0, x1, y1, stroke, width, extra=""):
        ax, ay = self.pt(x0, y0)
        bx, by = self.pt(x1, y1)
        self.parts.append(
            f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" y2="{_fmt(by)}" '
            f'stroke="{stroke}" stroke-width="{_fmt(width)}"{extra}/>'
        )

    def curve(self, x0, y0, x1, y1, stroke, width):
        """Quadratic arc bowed sideways so jump edges read as hops."""
        ax, ay = self.pt(x0, y0)
        bx, by = self.pt(x1, y1)
        mx, my = (ax + bx) / 2, (ay + by) / 2
        dx, dy = bx - ax, by - ay
        n = max((dx * dx + dy * dy) ** 0.5, 1e-9)
        cx = mx - dy / n * 0.18 * n
        cy = my + dx / n * 0.18 * n
        self.parts.append(
            f'<path d="M {_fmt(ax)} {_fmt(ay)} Q {_fmt(cx)} {_fmt(cy)} {_fmt(bx)} {_fmt(by)}" '
            f'fill="none" stroke="{stroke}" stroke-width="{_fmt(width)}"/>'
        )

    def circle(self, x, y, r_px, fill, extra=""):
        ax, ay = self.pt(x, y)
        self.parts.append(
            f'<circle cx="{_fmt(ax)}" cy="{_fmt(ay)}" r="{_fmt(r_px)}" fill="{fill}"{extra}/>'
        )

    def text(self, x, y, s, size=14):
        ax, ay = self.pt(x, y)
        self.parts.append(
            f'<text x="{_fmt(ax + 6)}" y="{_fmt(ay - 6)}" font-size="{size}" '
            f'font-family="sans-serif" fill="#111">{s}</text>'
        )


def render_svg(
    world: WorldModel,
    graph: PossibilityGraph | None = None,
    path: PathResult | None = None,
) -> str:
    c = _Canvas(world)
    header = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(c.width)}" '
        f'height="{_fmt(c.height)}" viewBox="0 0 {_fmt(c.width)} {_fmt(c.height)}">\n'
        "<defs><pattern id=\"bar\" width=\"8\" height=\"8\" patternUnits=\"userSpaceOnUse\" "
        "patternTransform=\"rotate(45)\"><rect width=\"8\" height=\"8\" fill=\"#e9dab2\"/>"
        "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"8\" stroke=\"#8a6d1a\" stroke-width=\"2\"/>"
        "</pattern></defs>\n"
    )
    c.rect(
        world.bounds_x[0],
        world.bounds_y[0],
        world.bounds_x[1],
        world.bounds_y[1],
        "#f4f4f0",
        ' stroke="#333" stroke-width="2"',
    )
    for g in world.gaps:
        c.rect(g.x[0], g.y[0], g.x[1], g.y[1], "#14141c")
    for b in world.obstacles:
        # anything a crawler fits under renders as a hatched bar, the rest as wall
        fill = "url(#bar)" if b.z[0] >= 0.65 else "#7a7a7a"
        c.rect(b.x[0], b.y[0], b.x[1], b.y[1], fill, ' stroke="#555" stroke-width="1"')

    if graph is not None:
        for e in graph.edges.values():
            if e.twin is not None and e.twin < e.id:
                continue  # draw each undirected pair once
            p0 = graph.vertices[e.src].pose
            p1 = graph.vertices[e.dst].pose
            if e.tag == TAG_TRANSITION:
                c.circle(p0.x, p0.y, 4.0, "#f59f00")
            elif e.tag == TAG_JUMP:
                stroke, w = EDGE_STYLE[TAG_JUMP]
                c.curve(p0.x, p0.y, p1.x, p1.y, stroke, w)
            else:
                stroke, w = EDGE_STYLE[e.tag]
                c.line(p0.x, p0.y, p1.x, p1.y, stroke, w)

    if path is not None and graph is not None:
        for eid in path.edge_ids:
            e = graph.edges[eid]
            p0 = graph.vertices[e.src].pose
            p1 = graph.vertices[e.dst].pose
            if e.tag == TAG_JUMP:
                c.curve(p0.x, p0.y, p1.x, p1.y, "#7a0b5c", 4.5)
            else:
                c.line(p0.x, p0.y, p1.x, p1.y, "#1b1b40", 4.5, ' stroke-linecap="round"')
        for vid in (path.vertex_ids[0], path.vertex_ids[-1]):
            p = graph.vertices[vid].pose
            c.circle(p.x, p.y, 6.0, "#e03131", ' stroke="#111" stroke-width="1.5"')
        c.text(*graph.vertices[path.vertex_ids[0]].pose.xy(), "S")
        c.text(*graph.vertices[path.vertex_ids[-1]].pose.xy(), "G")

    return header + "\n".join(c.parts) + "\n</svg>\n"
