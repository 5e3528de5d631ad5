import type { ApiClient } from "./api";
import type { DiagramModel, ModelInfo, PredictionInfo } from "./types";

// Slider edits are debounced; each completed request carries a monotone
// sequence number and only the newest response may update the view, so the
// rendered diagram always reflects the latest completed prediction. A
// failing or malformed response surfaces an error message but never clears
// the last valid diagram.

export const DEBOUNCE_MS = 150;

export interface ViewerSnapshot {
  scores: number[];
  diagram: DiagramModel | null;
  prediction: PredictionInfo | null;
  error: string | null;
  pending: boolean;
}

type Listener = (snap: ViewerSnapshot) => void;

export interface Scheduler {
  set(fn: () => void, ms: number): unknown;
  clear(handle: unknown): void;
}

const defaultScheduler: Scheduler = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (handle) => clearTimeout(handle as number),
};

export class ViewerState {
  readonly model: ModelInfo;
  private api: ApiClient;
  private scheduler: Scheduler;
  private scores: number[];
  private diagram: DiagramModel | null = null;
  private prediction: PredictionInfo | null = null;
  private error: string | null = null;
  private listeners: Listener[] = [];
  private timer: unknown = null;
  private requestCounter = 0;
  private lastApplied = 0;
  private inFlight = 0;

  constructor(model: ModelInfo, api: ApiClient, scheduler: Scheduler = defaultScheduler) {
    this.model = model;
    this.api = api;
    this.scheduler = scheduler;
    this.scores = defaultScores(model);
  }

  snapshot(): ViewerSnapshot {
    return {
      scores: [...this.scores],
      diagram: this.diagram,
      prediction: this.prediction,
      error: this.error,
      pending: this.inFlight > 0 || this.timer !== null,
    };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    const snap = this.snapshot();
    for (const listener of this.listeners) listener(snap);
  }

  /** Clamp a slider edit to the domain's range and schedule a prediction. */
  editScore(domain: number, value: number): void {
    const range = this.model.ranges?.[domain];
    if (range) {
      value = Math.min(Math.max(value, range[0]), range[1]);
    }
    this.scores[domain] = value;
    if (this.timer !== null) this.scheduler.clear(this.timer);
    this.timer = this.scheduler.set(() => {
      this.timer = null;
      void this.requestPrediction();
    }, DEBOUNCE_MS);
    this.emit();
  }

  /** Fire an immediate prediction (initial load). */
  async refresh(): Promise<void> {
    await this.requestPrediction();
  }

  private async requestPrediction(): Promise<void> {
    const seq = ++this.requestCounter;
    const scores = [...this.scores];
    this.inFlight += 1;
    try {
      const resp = await this.api.predict(scores, false);
      if (seq > this.lastApplied) {
        this.lastApplied = seq;
        this.diagram = resp.diagram;
        this.prediction = resp.prediction;
        this.error = null;
      }
    } catch (err) {
      // a superseded request's failure is irrelevant; a current one is
      // surfaced without touching the last valid diagram
      if (seq > this.lastApplied) {
        this.lastApplied = seq;
        this.error = err instanceof Error ? err.message : String(err);
      }
    } finally {
      this.inFlight -= 1;
      this.emit();
    }
  }
}

export function defaultScores(model: ModelInfo): number[] {
  if (model.ranges) {
    return model.ranges.map(([lo, hi]) => (lo + hi) / 2);
  }
  if (model.scaling_maxima) {
    return model.scaling_maxima.map((m) => m / 2);
  }
  return model.domain_names.map(() => 0.5);
}

/** Native-unit slider value for a range minimum; never a hard zero. */
export function sliderFloor(lo: number, epsilon: number, maximum: number | null): number {
  if (lo > 0) return lo;
  return epsilon * (maximum ?? 1);
}
