// Session state for one studio tab. Everything that matters for
// correctness also lives on the server (jobs, accepted samples), so a
// reload rebuilds this from /project; what is kept here is the draft the
// editor is still shaping.

import type { EditRequestWire, JobSummary } from "./api";
import type { BoolMask } from "./wire";

export const RHO_RANGE = { min: 0, max: 1, step: 0.05 };
export const LAMBDA_RANGE = { min: 0, max: 2, step: 0.05 };
export const SAMPLES_RANGE = { min: 1, max: 8 };

function clamp(value: number, min: number, max: number): number {
  if (!Number.isFinite(value)) return min;
  return Math.min(max, Math.max(min, value));
}

export type Draft = {
  targetPrompt: string;
  rho: number;
  lambda: number;
  seed: number;
  samples: number;
  useMask: boolean;
  useHed: boolean;
};

export class SessionState {
  layer: "foreground" | "background" = "foreground";
  maskPreview: BoolMask | null = null;
  matchedTokens: string[] = [];
  jobs: JobSummary[] = [];
  selectedJob: string | null = null;
  selectedSample = 0;
  acceptedJob: string | null = null;
  frameCount = 0;
  scrubFrame = 0;

  draft: Draft = {
    targetPrompt: "",
    rho: 0.7,
    lambda: 0.5,
    seed: 0,
    samples: 1,
    useMask: true,
    useHed: true,
  };

  setLayer(layer: "foreground" | "background") {
    // the atlas view swaps; the draft the editor is typing must survive
    this.layer = layer;
    this.maskPreview = null;
    this.matchedTokens = [];
  }

  setRho(value: number) {
    this.draft.rho = clamp(value, RHO_RANGE.min, RHO_RANGE.max);
  }

  setLambda(value: number) {
    this.draft.lambda = clamp(value, LAMBDA_RANGE.min, LAMBDA_RANGE.max);
  }

  setSamples(value: number) {
    this.draft.samples = Math.round(clamp(value, SAMPLES_RANGE.min, SAMPLES_RANGE.max));
  }

  setSeed(value: number) {
    this.draft.seed = Number.isFinite(value) ? Math.round(value) : 0;
  }

  setSegment(tokens: string[], mask: BoolMask) {
    this.matchedTokens = tokens;
    this.maskPreview = mask;
  }

  canSubmit(): boolean {
    // an edit needs an object; mask-off is a deliberate ablation, not a default
    if (this.matchedTokens.length === 0) return false;
    return this.maskPreview !== null || !this.draft.useMask;
  }

  toRequestWire(): EditRequestWire {
    return {
      source_tokens: [...this.matchedTokens],
      target_prompt: this.draft.targetPrompt,
      rho: this.draft.rho,
      lambda_hed: this.draft.lambda,
      seed: this.draft.seed,
      use_mask: this.draft.useMask,
      use_hed: this.draft.useHed,
      num_samples: this.draft.samples,
    };
  }

  setScrub(frame: number) {
    this.scrubFrame = Math.round(clamp(frame, 0, Math.max(0, this.frameCount - 1)));
  }
}
