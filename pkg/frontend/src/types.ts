// Wire formats served by the prediction service. The viewer renders these
// documents verbatim; it never recomputes a displayed number.

export interface ModelInfo {
  task: string;
  config_tag: string;
  domain_names: string[];
  label_names: string[];
  thresholds: (number | null)[];
  size: number;
  scaling_maxima: number[] | null;
  ranges: [number, number][] | null;
  epsilon: number;
}

export interface DiagramTag {
  value: number;
  state: "green" | "yellow" | "grey" | "plain";
}

export interface DiagramCell {
  vertices: [number, number][];
  weight: number;
  color: string;
  coverage?: number;
  contribution?: number;
}

export interface DiagramChart {
  kind: "assessment" | "assignment" | "matching";
  row: number;
  col: number;
  polygon: [number, number][];
  tag: DiagramTag | null;
  cells: DiagramCell[];
  axis_labels: string[];
  title: string;
  extra: Record<string, number>;
}

export interface DiagramModel {
  format: string;
  version: number;
  n_rows: number;
  n_cols: number;
  config_tag: string;
  charts: DiagramChart[];
  colorbar: { vmin: number; vmax: number; ticks: number[] };
  label_order: number[];
  label_names: string[];
  domain_names: string[];
  intercepts: number[] | null;
  thresholds: (number | null)[];
  task: string;
}

export interface PredictionInfo {
  scores: number[];
  labels: number[];
  label_names: string[];
  ranking: number[] | null;
  area: number;
}

export interface PredictResponse {
  prediction: PredictionInfo;
  diagram: DiagramModel;
}
