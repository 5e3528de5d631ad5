import type { DiagramChart, DiagramModel } from "./types";

// In-browser SVG rendering from the diagram document. Every displayed
// number is a formatted copy of a document value; hover metadata rides on
// data-* attributes so the inspector can quote exact values later.

const CHART = 170;
const MARGIN = 14;

export function fmt(value: number): string {
  return value.toFixed(3);
}

function pointAttr(vertices: [number, number][], cx: number, cy: number, r: number): string {
  return vertices.map(([x, y]) => `${(cx + r * x).toFixed(2)},${(cy - r * y).toFixed(2)}`).join(" ");
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function chartGroup(chart: DiagramChart, x: number, y: number): string {
  const cx = x + CHART / 2;
  const cy = y + CHART / 2;
  const r = CHART * 0.42;
  const parts: string[] = [];
  const ref = `data-kind="${chart.kind}" data-row="${chart.row}" data-col="${chart.col}"`;
  parts.push(`<g ${ref}>`);
  parts.push(`<circle cx="${cx}" cy="${cy}" r="${r}" fill="none" stroke="#ccc"/>`);
  chart.cells.forEach((cell, idx) => {
    parts.push(
      `<polygon class="cell" data-chart="${chart.row}:${chart.col}" data-cell="${idx}" ` +
        `points="${pointAttr(cell.vertices, cx, cy, r)}" fill="${cell.color}"/>`
    );
  });
  if (chart.polygon.length >= 3) {
    const fill = chart.kind === "assessment" ? "#f5d76e" : "none";
    const extra = chart.kind === "assessment" ? ' fill-opacity="0.85"' : "";
    parts.push(
      `<polygon class="shape" data-chart="${chart.row}:${chart.col}" ` +
        `points="${pointAttr(chart.polygon, cx, cy, r)}" fill="${fill}" ` +
        `stroke="#333" stroke-width="1.2"${extra}/>`
    );
  }
  if (chart.title) {
    parts.push(`<text x="${cx}" y="${y + 11}" text-anchor="middle">${esc(chart.title)}</text>`);
  }
  if (chart.tag) {
    parts.push(
      `<text class="tag tag-${chart.tag.state}" data-chart="${chart.row}:${chart.col}" ` +
        `x="${cx}" y="${y + CHART - 4}" text-anchor="middle">${fmt(chart.tag.value)}</text>`
    );
  }
  parts.push("</g>");
  return parts.join("");
}

export function renderDiagram(dm: DiagramModel): string {
  const width = dm.n_cols * (CHART + MARGIN) + MARGIN + 60;
  const height = dm.n_rows * (CHART + MARGIN) + MARGIN + (dm.intercepts ? 16 : 0);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="10">`
  );
  parts.push(
    "<style>.tag-green{fill:#1a9850;font-weight:bold;}.tag-yellow{fill:#c8b900;}" +
      ".tag-grey{fill:#888;}.tag-plain{fill:#333;}.cfg{fill:#7a6a00;font-weight:bold;}" +
      ".cell:hover{stroke:#000;stroke-width:1;}</style>"
  );
  const origin = (row: number, col: number): [number, number] => [
    MARGIN + col * (CHART + MARGIN),
    MARGIN + row * (CHART + MARGIN),
  ];
  const [cx0, cy0] = origin(0, 0);
  parts.push(
    `<rect x="${cx0}" y="${cy0}" width="${CHART}" height="${CHART}" fill="#fffbe6" stroke="#ddd"/>` +
      `<text class="cfg" data-config="1" x="${cx0 + 6}" y="${cy0 + 16}">${esc(dm.config_tag)}</text>`
  );
  const sorted = [...dm.charts].sort((a, b) => a.row - b.row || a.col - b.col);
  for (const chart of sorted) {
    const [x, y] = origin(chart.row, chart.col);
    parts.push(chartGroup(chart, x, y));
  }
  if (dm.intercepts) {
    dm.intercepts.forEach((b, idx) => {
      const [x, y] = origin(dm.n_rows - 1, idx + 1);
      parts.push(
        `<text class="tag tag-grey" data-intercept="${idx}" x="${x + CHART / 2}" ` +
          `y="${y + CHART + MARGIN - 2}" text-anchor="middle">${fmt(b)}</text>`
      );
    });
  }
  const barX = dm.n_cols * (CHART + MARGIN) + MARGIN;
  dm.colorbar.ticks.forEach((tick, idx) => {
    const frac = dm.colorbar.ticks.length === 1 ? 0.5 : idx / (dm.colorbar.ticks.length - 1);
    parts.push(
      `<text data-tick="${idx}" x="${barX}" y="${MARGIN + 20 + frac * CHART}">${fmt(tick)}</text>`
    );
  });
  parts.push("</svg>");
  return parts.join("\n");
}
