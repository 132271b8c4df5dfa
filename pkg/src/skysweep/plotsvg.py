"""Static SVG rendering of a plan: grid, blocks, laps, and the team route.

Pure string construction, deterministic for a given plan, no plotting
dependencies. Output coordinates flip y so north is up.
"""

from __future__ import annotations

from .schedule import SupercyclePlan

_CANVAS = 900.0
_MARGIN = 24.0

# One colour per UAV slot, reused cyclically past ten slots.
_SLOT_COLORS = (
    "#d95f02",
    "#1b9e77",
    "#7570b3",
    "#e7298a",
    "#66a61e",
    "#e6ab02",
    "#a6761d",
    "#386cb0",
    "#f0027f",
    "#bf5b17",
)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_plan_svg(plan: SupercyclePlan) -> str:
    """Render the plan's spatial layout; raises for infeasible plans."""
    if not plan.feasible:
        raise ValueError("cannot render an infeasible plan")
    grid = plan.grid
    scale = (_CANVAS - 2 * _MARGIN) / max(grid.width, grid.height)

    def px(x: float) -> str:
        return _fmt(_MARGIN + x * scale)

    def py(y: float) -> str:
        return _fmt(_MARGIN + (grid.height - y) * scale)

    w = _MARGIN * 2 + grid.width * scale
    h = _MARGIN * 2 + grid.height * scale
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'viewBox="0 0 {_fmt(w)} {_fmt(h)}">',
        f'<rect x="0" y="0" width="{_fmt(w)}" height="{_fmt(h)}" fill="#ffffff"/>',
    ]

    out.append('<g stroke="#dddddd" stroke-width="1">')
    for c in range(grid.cols + 1):
        x = c * grid.cell_size
        out.append(f'<line x1="{px(x)}" y1="{py(0)}" x2="{px(x)}" y2="{py(grid.height)}"/>')
    for r in range(grid.rows + 1):
        y = r * grid.cell_size
        out.append(f'<line x1="{px(0)}" y1="{py(y)}" x2="{px(grid.width)}" y2="{py(y)}"/>')
    out.append("</g>")

    out.append('<g fill="none" stroke="#667799" stroke-width="2">')
    for part in plan.partitions.partitions:
        x0 = part.anchor_col * grid.cell_size
        y0 = part.anchor_row * grid.cell_size
        bw = part.span_cols * grid.cell_size * scale
        bh = part.span_rows * grid.cell_size * scale
        out.append(
            f'<rect x="{px(x0)}" y="{py(y0 + part.span_rows * grid.cell_size)}" '
            f'width="{_fmt(bw)}" height="{_fmt(bh)}"/>'
        )
    out.append("</g>")

    out.append('<g fill="none" stroke-width="1.5" stroke-opacity="0.85">')
    for asg in plan.assignments:
        color = _SLOT_COLORS[(asg.slot - 1) % len(_SLOT_COLORS)]
        pts = " ".join(f"{px(p[0])},{py(p[1])}" for p in asg.waypoints)
        out.append(f'<polyline stroke="{color}" points="{pts}"/>')
    out.append("</g>")

    centroids = [plan.partitions.partitions[i].centroid for i in plan.partition_order]
    if centroids:
        loop = centroids + [centroids[0]]
        pts = " ".join(f"{px(c[0])},{py(c[1])}" for c in loop)
        out.append(f'<polyline fill="none" stroke="#222222" stroke-width="2.5" points="{pts}"/>')
        for visit, c in enumerate(centroids):
            out.append(
                f'<circle cx="{px(c[0])}" cy="{py(c[1])}" r="5" fill="#222222"/>'
                f'<text x="{px(c[0])}" y="{_fmt(float(py(c[1])) - 9)}" font-size="12" '
                f'text-anchor="middle" fill="#222222">{visit + 1}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
