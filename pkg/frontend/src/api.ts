import type { ModelInfo, PredictResponse } from "./types";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  status: number;
  fields: Record<string, string>;

  constructor(status: number, message: string, fields: Record<string, string> = {}) {
    super(message);
    this.status = status;
    this.fields = fields;
  }
}

export class ApiClient {
  private base: string;
  private fetcher: FetchLike;

  constructor(base = "", fetcher: FetchLike = (u, i) => fetch(u, i)) {
    this.base = base.replace(/\/$/, "");
    this.fetcher = fetcher;
  }

  async model(): Promise<ModelInfo> {
    const resp = await this.fetcher(`${this.base}/model`);
    if (!resp.ok) {
      throw new ServiceError(resp.status, `model request failed (${resp.status})`);
    }
    return (await resp.json()) as ModelInfo;
  }

  async predict(scores: number[], scaled = false): Promise<PredictResponse> {
    const resp = await this.fetcher(`${this.base}/predict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ scores, scaled }),
    });
    let body: unknown;
    try {
      body = await resp.json();
    } catch {
      throw new ServiceError(resp.status, "malformed response from service");
    }
    if (!resp.ok) {
      const doc = body as { error?: string; fields?: Record<string, string> };
      throw new ServiceError(resp.status, doc.error ?? `predict failed (${resp.status})`, doc.fields ?? {});
    }
    const out = body as PredictResponse;
    if (!out || !out.diagram || out.diagram.format !== "polygrid-diagram" || !out.prediction) {
      throw new ServiceError(200, "response is not a diagram document");
    }
    return out;
  }
}
