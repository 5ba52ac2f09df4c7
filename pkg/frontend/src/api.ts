// Typed client for the studio HTTP API. The UI never computes pipeline
// math; everything it knows arrives through these calls.

import type { WireArray } from "./wire";

export type EditRequestWire = {
  source_tokens: string[];
  target_prompt: string;
  rho: number;
  lambda_hed: number;
  seed: number;
  guidance_scale?: number;
  use_mask: boolean;
  use_hed: boolean;
  num_samples: number;
};

export type BoxWire = { x0: number; y0: number; x1: number; y1: number };

export type SegmentResponse = {
  found: boolean;
  labels: string[];
  matched?: string[];
  bbox?: BoxWire;
  mask?: WireArray;
};

export type JobSummary = {
  id: string;
  status: "queued" | "running" | "done" | "error";
  request: EditRequestWire;
  accepted_sample: number | null;
  error?: string;
  layer?: string;
  bbox?: BoxWire;
  sample_count?: number;
  samples?: string[];
  artifacts?: Record<string, string>;
};

export type ProjectInfo = {
  project_dir: string;
  frame_count: number;
  height: number;
  width: number;
  atlas_resolution: number;
  psnr_db: number;
  converged: boolean;
  layers: string[];
  providers: { kind: string; name: string }[];
  edits: JobSummary[];
};

export type AcceptResponse = {
  job_id: string;
  sample: number;
  frame_count: number;
  frames: string[];
};

const PROVIDER_KINDS = [
  "segmenter",
  "edge_detector",
  "embedder",
  "captioner",
  "noise_predictor",
  "state_encoder",
];

export function providerKindIn(detail: string): string | null {
  const lower = detail.toLowerCase();
  for (const kind of PROVIDER_KINDS) {
    if (lower.includes(kind)) return kind;
  }
  return null;
}

export class ApiError extends Error {
  status: number;
  detail: string;
  providerKind: string | null;

  constructor(status: number, detail: string) {
    super(`${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
    this.providerKind = providerKindIn(detail);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class StudioClient {
  readonly base: string;
  private fetchFn: FetchLike;

  constructor(base = "", fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => globalThis.fetch(url, init));
  }

  private async call<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (typeof body?.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.call<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  projectInfo(): Promise<ProjectInfo> {
    return this.call("/project");
  }

  atlasUrl(layer: string): string {
    return `${this.base}/atlas/${layer}`;
  }

  segment(
    layer: string,
    at: { token?: string; point?: { x: number; y: number } },
  ): Promise<SegmentResponse> {
    return this.post("/segment", { layer, ...at });
  }

  submitEdit(
    request: EditRequestWire,
    idempotencyKey: string,
  ): Promise<{ job_id: string; duplicate: boolean }> {
    return this.post("/edits", { request, idempotency_key: idempotencyKey });
  }

  listEdits(): Promise<JobSummary[]> {
    return this.call("/edits");
  }

  job(id: string): Promise<JobSummary> {
    return this.call(`/edits/${id}`);
  }

  accept(id: string, sample: number): Promise<AcceptResponse> {
    return this.post(`/edits/${id}/accept`, { sample });
  }

  frameUrl(k: number, variant: "original" | "edited" = "original", editId?: string): string {
    const url = `${this.base}/frames/${k}?variant=${variant}`;
    return variant === "edited" ? `${url}&edit=${editId}` : url;
  }

  artifactUrl(jobId: string, name: string): string {
    return `${this.base}/edits/${jobId}/artifacts/${name}`;
  }

  async fetchBytes(url: string): Promise<Uint8Array> {
    const resp = await this.fetchFn(url);
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return new Uint8Array(await resp.arrayBuffer());
  }
}

// The surface the app needs; fakes in tests implement this instead of
// subclassing the real client.
export type StudioApi = Pick<
  StudioClient,
  | "projectInfo"
  | "atlasUrl"
  | "segment"
  | "submitEdit"
  | "listEdits"
  | "job"
  | "accept"
  | "frameUrl"
  | "artifactUrl"
>;
