"""Explanation diagrams: a renderer-independent model plus an SVG emitter.

A diagram is a grid of radar-style charts. The first column shows the
assessment polygons being explained, the first row shows one assignment
chart per label (partition cells coloured by the label's weights, class
prototype drawn on top), and each interior position holds a matching chart:
the row's assessment polygon filled with the column's cell colours.

Every number displayed is taken verbatim from the fitted instance and its
predictions: assessment tags show polygon areas, assignment tags show
thresholds, matching tags show the predicted scores. The renderer never
recomputes anything, which is what makes the diagram a faithful record of
the forward computation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PolygridInstance, Prediction

TAG_GREEN = "green"
TAG_YELLOW = "yellow"
TAG_GREY = "grey"
TAG_PLAIN = "plain"


def _complex_to_pairs(vertices) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(vertices, dtype=complex)]


@dataclass
class Tag:
    value: float
    state: str = TAG_PLAIN

    def to_dict(self) -> dict:
        return {"value": self.value, "state": self.state}


@dataclass
class Cell:
    vertices: list[list[float]]
    weight: float
    color: str
    coverage: float | None = None        # matching charts: area covered
    contribution: float | None = None    # matching charts: weight * coverage

    def to_dict(self) -> dict:
        doc = {"vertices": self.vertices, "weight": self.weight, "color": self.color}
        if self.coverage is not None:
            doc["coverage"] = self.coverage
        if self.contribution is not None:
            doc["contribution"] = self.contribution
        return doc


@dataclass
class Chart:
    kind: str                            # assessment | assignment | matching
    row: int
    col: int
    polygon: list[list[float]]
    tag: Tag | None
    cells: list[Cell] = field(default_factory=list)
    axis_labels: list[str] = field(default_factory=list)
    title: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "row": self.row,
            "col": self.col,
            "polygon": self.polygon,
            "tag": None if self.tag is None else self.tag.to_dict(),
            "cells": [c.to_dict() for c in self.cells],
            "axis_labels": self.axis_labels,
            "title": self.title,
            "extra": self.extra,
        }


@dataclass
class DiagramModel:
    n_rows: int                          # includes the header row
    n_cols: int                          # includes the header column
    config_tag: str
    charts: list[Chart]
    colorbar: dict                       # {"vmin", "vmax", "ticks": [...]}
    label_order: list[int]               # column order as label indices
    label_names: list[str]
    domain_names: list[str]
    intercepts: list[float] | None
    thresholds: list[float | None]
    task: str

    def to_dict(self) -> dict:
        return {
            "format": "polygrid-diagram",
            "version": 1,
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "config_tag": self.config_tag,
            "charts": [c.to_dict() for c in self.charts],
            "colorbar": self.colorbar,
            "label_order": self.label_order,
            "label_names": self.label_names,
            "domain_names": self.domain_names,
            "intercepts": self.intercepts,
            "thresholds": self.thresholds,
            "task": self.task,
        }


def diverging_color(value: float, vmax: float) -> str:
    """Blue-white-red diverging map centred at zero over [-vmax, vmax]."""
    if vmax <= 0:
        t = 0.5
    else:
        t = 0.5 + 0.5 * max(-1.0, min(1.0, value / vmax))
    blue = (33, 102, 172)
    white = (247, 247, 247)
    red = (178, 24, 43)
    if t < 0.5:
        f = t / 0.5
        rgb = tuple(round(b + (w - b) * f) for b, w in zip(blue, white))
    else:
        f = (t - 0.5) / 0.5
        rgb = tuple(round(w + (r - w) * f) for w, r in zip(white, red))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _colorbar(weights: np.ndarray, n_ticks: int = 5) -> dict:
    vmax = float(np.max(np.abs(weights))) if weights.size else 0.0
    if vmax == 0.0:
        return {"vmin": 0.0, "vmax": 0.0, "ticks": [0.0]}
    ticks = [float(v) for v in np.linspace(-vmax, vmax, n_ticks)]
    return {"vmin": -vmax, "vmax": vmax, "ticks": ticks}


def build_diagram(
    instance: PolygridInstance,
    assessments: np.ndarray,
    predictions: list[Prediction],
    sort_rows_by_area: bool = True,
) -> DiagramModel:
    """Assemble the explanation grid for one or more predicted assessments.

    Assignment columns are ordered by ascending class-prototype area;
    assessment rows by ascending polygon area (stable). Predictions must
    come from the same instance that is being displayed.
    """
    assessments = np.atleast_2d(np.asarray(assessments, dtype=float))
    if len(assessments) != len(predictions):
        raise ValueError("one prediction per assessment row is required")
    n = instance.n_labels
    for p in predictions:
        if p.scores.shape != (n,):
            raise ValueError("prediction does not match the instance's labels")

    label_order = list(np.argsort(instance.prototype_areas(), kind="stable"))
    row_order = list(range(len(assessments)))
    if sort_rows_by_area:
        row_order.sort(key=lambda i: predictions[i].area)

    colorbar = _colorbar(instance.W)
    vmax = colorbar["vmax"]
    domain_labels = [instance.domain_names[k] for k in instance.vertex_order]

    charts: list[Chart] = []
    cell_polys = [_complex_to_pairs(ring) for ring in instance.partition.cells]

    # header row: assignment charts in prototype-area order
    for col, j in enumerate(label_order, start=1):
        weights = instance.W[j]
        cells = [
            Cell(cell_polys[r], float(weights[r]), diverging_color(weights[r], vmax))
            for r in range(instance.partition.n_cells)
        ]
        proto = instance.prototypes[j][instance.vertex_order]
        proto_poly: list[list[float]] = []
        if np.all(proto > 0):
            from .geometry import uh_to_ud

            Zp, _ = uh_to_ud(proto[np.newaxis, :])
            proto_poly = _complex_to_pairs(Zp[0])
        tag = None
        if instance.task != "multiclass" and np.isfinite(instance.thresholds[j]):
            tag = Tag(float(instance.thresholds[j]), TAG_PLAIN)
        charts.append(
            Chart(
                kind="assignment",
                row=0,
                col=col,
                polygon=proto_poly,
                tag=tag,
                cells=cells,
                axis_labels=domain_labels,
                title=instance.label_names[j],
                extra={"label_index": int(j)},
            )
        )

    for out_row, i in enumerate(row_order, start=1):
        pred = predictions[i]
        poly = _complex_to_pairs(pred.polygon)
        charts.append(
            Chart(
                kind="assessment",
                row=out_row,
                col=0,
                polygon=poly,
                tag=Tag(float(pred.area), TAG_PLAIN),
                axis_labels=domain_labels,
                title=f"assessment {i}",
                extra={"assessment_index": int(i)},
            )
        )
        for col, j in enumerate(label_order, start=1):
            weights = instance.W[j]
            cells = [
                Cell(
                    cell_polys[r],
                    float(weights[r]),
                    diverging_color(weights[r], vmax),
                    coverage=float(pred.coverages[r]),
                    contribution=float(pred.per_cell_contributions[j, r]),
                )
                for r in range(instance.partition.n_cells)
            ]
            state = TAG_GREEN if pred.labels[j] == 1 else TAG_YELLOW
            charts.append(
                Chart(
                    kind="matching",
                    row=out_row,
                    col=col,
                    polygon=poly,
                    tag=Tag(float(pred.scores[j]), state),
                    cells=cells,
                    axis_labels=domain_labels,
                    title="",
                    extra={"label_index": int(j), "assessment_index": int(i)},
                )
            )

    intercepts = None
    if instance.intercepts is not None:
        intercepts = [float(instance.intercepts[j]) for j in label_order]

    return DiagramModel(
        n_rows=1 + len(assessments),
        n_cols=1 + n,
        config_tag=instance.config.short_label(),
        charts=charts,
        colorbar=colorbar,
        label_order=[int(j) for j in label_order],
        label_names=[instance.label_names[j] for j in label_order],
        domain_names=domain_labels,
        intercepts=intercepts,
        thresholds=[
            None if not np.isfinite(instance.thresholds[j]) else float(instance.thresholds[j])
            for j in label_order
        ],
        task=instance.task,
    )


def replay_scores(dm: DiagramModel) -> dict[int, dict[int, float]]:
    """Recompute every matching tag from the diagram's own cells.

    Returns {row: {col: weight*coverage summed (+ intercept)}}. Used to
    check that the diagram embeds the forward computation.
    """
    out: dict[int, dict[int, float]] = {}
    for chart in dm.charts:
        if chart.kind != "matching":
            continue
        total = sum(c.weight * c.coverage for c in chart.cells)
        if dm.intercepts is not None:
            total += dm.intercepts[chart.col - 1]
        out.setdefault(chart.row, {})[chart.col] = total
    return out


# ---------------------------------------------------------------------------
# SVG emission

_CHART_SIZE = 170.0
_MARGIN = 14.0
_COLORBAR_W = 56.0


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _svg_points(vertices, cx, cy, radius) -> str:
    pts = [f"{cx + radius * x:.2f},{cy - radius * y:.2f}" for x, y in vertices]
    return " ".join(pts)


def render_svg(dm: DiagramModel, scale: float = 1.0) -> str:
    """Deterministic SVG 1.1 text for a diagram model.

    Tag text rounds to three decimals; the model keeps full precision.
    """
    cs = _CHART_SIZE * scale
    margin = _MARGIN * scale
    radius = cs * 0.42
    width = dm.n_cols * (cs + margin) + margin + _COLORBAR_W * scale
    height = dm.n_rows * (cs + margin) + margin

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}" '
        f'font-family="sans-serif" font-size="{10 * scale:.1f}">'
    )
    parts.append(
        "<style>"
        ".tag-green{fill:#1a9850;}"
        ".tag-yellow{fill:#c8b900;}"
        ".tag-grey{fill:#888888;}"
        ".tag-plain{fill:#333333;}"
        ".cfg{fill:#7a6a00;font-weight:bold;}"
        "</style>"
    )

    def origin(row, col):
        x = margin + col * (cs + margin)
        y = margin + row * (cs + margin)
        return x, y

    # config tag occupies the (0, 0) grid position
    x0, y0 = origin(0, 0)
    parts.append(
        f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{cs:.2f}" height="{cs:.2f}" '
        f'fill="#fffbe6" stroke="#ddd"/>'
    )
    parts.append(
        f'<text class="cfg" x="{x0 + 6:.2f}" y="{y0 + 16:.2f}">{dm.config_tag}</text>'
    )

    for chart in sorted(dm.charts, key=lambda c: (c.row, c.col)):
        x, y = origin(chart.row, chart.col)
        cx, cy = x + cs / 2, y + cs / 2
        parts.append(f'<g data-kind="{chart.kind}" data-row="{chart.row}" data-col="{chart.col}">')
        parts.append(
            f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{radius:.2f}" '
            f'fill="none" stroke="#cccccc"/>'
        )
        for idx, cell in enumerate(chart.cells):
            parts.append(
                f'<polygon data-cell="{idx}" points="{_svg_points(cell.vertices, cx, cy, radius)}" '
                f'fill="{cell.color}" stroke="none"/>'
            )
        if chart.polygon:
            fill = "#f5d76e" if chart.kind == "assessment" else "none"
            opacity = ' fill-opacity="0.85"' if chart.kind == "assessment" else ""
            parts.append(
                f'<polygon points="{_svg_points(chart.polygon, cx, cy, radius)}" '
                f'fill="{fill}" stroke="#333333" stroke-width="1.2"{opacity}/>'
            )
        if chart.title:
            parts.append(
                f'<text x="{cx:.2f}" y="{y + 11:.2f}" text-anchor="middle">{chart.title}</text>'
            )
        if chart.tag is not None:
            parts.append(
                f'<text class="tag-{chart.tag.state}" x="{cx:.2f}" y="{y + cs - 4:.2f}" '
                f'text-anchor="middle">{_fmt(chart.tag.value)}</text>'
            )
        parts.append("</g>")

    if dm.intercepts is not None:
        row = dm.n_rows
        for col, b in enumerate(dm.intercepts, start=1):
            x, y = origin(row - 1, col)
            parts.append(
                f'<text class="tag-grey" x="{x + cs / 2:.2f}" y="{y + cs + margin - 2:.2f}" '
                f'text-anchor="middle">{_fmt(b)}</text>'
            )

    # colorbar on the right edge
    bar_x = dm.n_cols * (cs + margin) + margin
    bar_y = margin + cs / 4
    bar_h = cs * 1.5
    vmin, vmax = dm.colorbar["vmin"], dm.colorbar["vmax"]
    steps = 24
    for s in range(steps):
        frac = s / (steps - 1)
        value = vmax - frac * (vmax - vmin)
        color = diverging_color(value, max(abs(vmin), abs(vmax)))
        parts.append(
            f'<rect x="{bar_x:.2f}" y="{bar_y + frac * bar_h:.2f}" '
            f'width="{14 * scale:.2f}" height="{bar_h / steps + 0.5:.2f}" fill="{color}"/>'
        )
    for tick in dm.colorbar["ticks"]:
        if vmax == vmin:
            frac = 0.5
        else:
            frac = (vmax - tick) / (vmax - vmin)
        parts.append(
            f'<text x="{bar_x + 18 * scale:.2f}" y="{bar_y + frac * bar_h + 3:.2f}">'
            f"{_fmt(tick)}</text>"
        )

    parts.append("</svg>")
    return "\n".join(parts)
