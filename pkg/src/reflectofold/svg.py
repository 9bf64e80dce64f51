"""Deterministic SVG rendering of face pictures.

Tile labels go at tile centroids, facet labels of the neighbouring facets
just outside the boundary.  Coordinates are rescaled to a fixed canvas, so
the pictures are combinatorial rather than metric.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .linkgeom import FacePicture

SIZE = 360
MARGIN = 60


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _label_text(label) -> str:
    return escape(str(label))


def render_svg(pic: FacePicture, title: str = "") -> str:
    pts = [p for poly, _ in pic.tiles for p in poly]
    xs = [float(p[0]) for p in pts]
    ys = [float(p[1]) for p in pts]
    span = max(max(xs) - min(xs), max(ys) - min(ys)) or 1.0
    scale = SIZE / span
    x0, y1 = min(xs), max(ys)

    def tr(p):
        return (MARGIN + (float(p[0]) - x0) * scale, MARGIN + (y1 - float(p[1])) * scale)

    width = _fmt(2 * MARGIN + (max(xs) - x0) * scale)
    height = _fmt(2 * MARGIN + (y1 - min(ys)) * scale)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="11">',
        f"<title>{escape(title or str(pic.facet))}</title>",
    ]
    for poly, labels in pic.tiles:
        q = [tr(p) for p in poly]
        path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in q)
        out.append(f'<polygon points="{path}" fill="none" stroke="#888" stroke-width="1"/>')
        cx = sum(a for a, _ in q) / len(q)
        cy = sum(b for _, b in q) / len(q)
        top = cy - 7 * (len(labels) - 1)
        for k, lab in enumerate(labels):
            out.append(
                f'<text x="{_fmt(cx)}" y="{_fmt(top + 14 * k + 4)}" text-anchor="middle">{_label_text(lab)}</text>'
            )
    q = [tr(p) for p in pic.outline]
    path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in q)
    out.append(f'<polygon points="{path}" fill="none" stroke="#000" stroke-width="2"/>')
    mx = sum(a for a, _ in q) / len(q)
    my = sum(b for _, b in q) / len(q)
    for (p, r), lab in pic.edge_labels:
        (ax, ay), (bx, by) = tr(p), tr(r)
        ex, ey = (ax + bx) / 2, (ay + by) / 2
        dx, dy = ex - mx, ey - my
        norm = (dx * dx + dy * dy) ** 0.5 or 1.0
        lx, ly = ex + 22 * dx / norm, ey + 22 * dy / norm
        out.append(
            f'<text x="{_fmt(lx)}" y="{_fmt(ly + 4)}" text-anchor="middle" font-weight="bold">'
            f"{_label_text(lab)}</text>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_filename(n: int, facet) -> str:
    safe = str(facet).replace("{", "(").replace("}", ")").replace(",", "-")
    return f"P{n}_{safe}.svg"
