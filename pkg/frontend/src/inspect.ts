import type { DiagramChart, DiagramModel } from "./types";

// Popover content for diagram elements. Values are quoted from the
// document at full precision; the only arithmetic here is the row-sum
// identity used by tests to check the diagram against its own tags.

export interface InspectLine {
  label: string;
  value: string;
}

export function findChart(dm: DiagramModel, row: number, col: number): DiagramChart | undefined {
  return dm.charts.find((c) => c.row === row && c.col === col);
}

export function inspectCell(dm: DiagramModel, chart: DiagramChart, cellIndex: number): InspectLine[] {
  const cell = chart.cells[cellIndex];
  if (!cell) return [];
  const lines: InspectLine[] = [
    { label: "cell", value: String(cellIndex) },
    { label: "weight", value: String(cell.weight) },
  ];
  if (chart.kind === "matching") {
    lines.push({ label: "coverage", value: String(cell.coverage ?? 0) });
    lines.push({ label: "contribution", value: String(cell.contribution ?? 0) });
  }
  if (chart.kind === "assignment" || chart.kind === "matching") {
    const label = dm.label_names[chart.col - 1];
    if (label) lines.unshift({ label: "label", value: label });
  }
  return lines;
}

export function inspectTag(dm: DiagramModel, chart: DiagramChart): InspectLine[] {
  if (!chart.tag) return [];
  const kind =
    chart.kind === "assessment" ? "polygon area" : chart.kind === "assignment" ? "threshold" : "prediction";
  const lines: InspectLine[] = [{ label: kind, value: String(chart.tag.value) }];
  if (chart.kind === "matching" && dm.intercepts) {
    lines.push({ label: "intercept", value: String(dm.intercepts[chart.col - 1]) });
  }
  if (chart.kind === "matching") {
    const threshold = dm.thresholds[chart.col - 1];
    lines.push({ label: "threshold", value: threshold === null ? "never assigns" : String(threshold) });
    lines.push({ label: "assigned", value: chart.tag.state === "green" ? "yes" : "no" });
  }
  return lines;
}

export function inspectVertex(
  dm: DiagramModel,
  chart: DiagramChart,
  vertexIndex: number,
  rawScores: number[] | null
): InspectLine[] {
  const name = dm.domain_names[vertexIndex] ?? `domain ${vertexIndex}`;
  const [x, y] = chart.polygon[vertexIndex] ?? [0, 0];
  const scaled = Math.hypot(x, y);
  const lines: InspectLine[] = [
    { label: "domain", value: name },
    { label: "scaled score", value: String(scaled) },
  ];
  if (rawScores && rawScores[vertexIndex] !== undefined) {
    lines.push({ label: "raw score", value: String(rawScores[vertexIndex]) });
  }
  return lines;
}

export function inspectConfig(dm: DiagramModel): InspectLine[] {
  return [{ label: "config", value: dm.config_tag }];
}

/** Sum of a matching chart's contributions; equals tag minus intercept. */
export function contributionSum(chart: DiagramChart): number {
  return chart.cells.reduce((acc, cell) => acc + (cell.contribution ?? 0), 0);
}
