// The studio: atlas view with click-to-segment, a draft panel of knobs,
// job cards with sample grids, and a wipe-compare viewer. Pure client of
// the studio API; the server owns every number that matters.

import { ApiError, type JobSummary, type StudioApi } from "./api";
import { LAMBDA_RANGE, RHO_RANGE, SAMPLES_RANGE, SessionState } from "./state";
import { installToasts, type Toaster } from "./toast";
import { decodeBoolMask, type BoolMask } from "./wire";

export type AppOptions = {
  autoPoll?: boolean;
  pollMs?: number;
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function randomKey(): string {
  const c = globalThis.crypto;
  if (c?.randomUUID) return c.randomUUID();
  return `key-${Date.now()}-${Math.floor(Math.random() * 1e9)}`;
}

export class StudioApp {
  readonly state = new SessionState();
  private client: StudioApi;
  private root: HTMLElement;
  private toaster: Toaster;
  private autoPoll: boolean;
  private pollMs: number;
  private pollTimer: ReturnType<typeof setTimeout> | null = null;
  private pending: Promise<unknown>[] = [];

  // looked up once in mount(); non-null for the lifetime of the app
  private atlasImg!: HTMLImageElement;
  private overlay!: HTMLCanvasElement;
  private notice!: HTMLElement;
  private jobsHost!: HTMLElement;
  private frameOriginal!: HTMLImageElement;
  private frameEdited!: HTMLImageElement;
  private patchIn!: HTMLImageElement;
  private patchOut!: HTMLImageElement;

  constructor(root: HTMLElement, client: StudioApi, opts: AppOptions = {}) {
    this.root = root;
    this.client = client;
    this.autoPoll = opts.autoPoll ?? true;
    this.pollMs = opts.pollMs ?? 1000;
    this.toaster = installToasts(root);
    this.mount();
  }

  // wraps a handler promise so tests can await idle() instead of sleeping
  private track<T>(p: Promise<T>): Promise<T> {
    this.pending.push(p.catch(() => undefined));
    return p;
  }

  async idle(): Promise<void> {
    while (this.pending.length) {
      const batch = this.pending;
      this.pending = [];
      await Promise.all(batch);
    }
  }

  private guard<T>(p: Promise<T>): Promise<T | undefined> {
    return this.track(
      p.catch((err) => {
        if (err instanceof ApiError) {
          this.toaster.show(err.detail, err.providerKind);
        } else {
          this.toaster.show(String(err));
        }
        return undefined;
      }),
    );
  }

  private mount() {
    const header = el("header");
    header.append(el("h1", {}, "atlasedit studio"), el("div", { id: "project-line" }));

    const atlasPanel = el("section", { class: "panel", id: "atlas-panel" });
    const layerRow = el("div", { class: "row" });
    for (const layer of ["foreground", "background"] as const) {
      const btn = el("button", { id: `layer-${layer}`, class: "layer-btn" }, layer);
      btn.addEventListener("click", () => this.toggleLayer(layer));
      layerRow.append(btn);
    }
    this.atlasImg = el("img", { id: "atlas-img", alt: "blended atlas" });
    this.atlasImg.addEventListener("click", (ev) => {
      const { x, y } = this.atlasCoords(ev);
      this.guard(this.onAtlasClick(x, y));
    });
    this.overlay = el("canvas", { id: "mask-overlay" });
    this.notice = el("div", { id: "segment-notice" });
    const stage = el("div", { class: "atlas-stage" });
    stage.append(this.atlasImg, this.overlay);
    atlasPanel.append(layerRow, stage, this.notice);

    const draft = el("section", { class: "panel", id: "draft-panel" });
    draft.append(
      this.labelled("prompt", this.promptInput()),
      this.labelled("rho", this.slider("rho", RHO_RANGE, this.state.draft.rho, (v) => {
        this.state.setRho(v);
        return this.state.draft.rho;
      })),
      this.labelled("lambda", this.slider("lambda", LAMBDA_RANGE, this.state.draft.lambda, (v) => {
        this.state.setLambda(v);
        return this.state.draft.lambda;
      })),
      this.labelled("samples", this.numberInput("samples", this.state.draft.samples, (v) => {
        this.state.setSamples(v);
        return this.state.draft.samples;
      }, SAMPLES_RANGE)),
      this.labelled("seed", this.numberInput("seed", this.state.draft.seed, (v) => {
        this.state.setSeed(v);
        return this.state.draft.seed;
      })),
      this.checkbox("mask-toggle", "mask", true, (on) => (this.state.draft.useMask = on)),
      this.checkbox("hed-toggle", "edges", true, (on) => (this.state.draft.useHed = on)),
    );
    const submit = el("button", { id: "submit-btn" }, "submit edit");
    submit.addEventListener("click", () => this.guard(this.submitDraft()));
    draft.append(submit);

    const jobs = el("section", { class: "panel", id: "jobs-panel" });
    jobs.append(el("h2", {}, "jobs"));
    this.jobsHost = el("div", { id: "jobs" });
    jobs.append(this.jobsHost);

    const viewer = el("section", { class: "panel", id: "viewer-panel" });
    this.patchIn = el("img", { id: "patch-in-img", alt: "patch before" });
    this.patchOut = el("img", { id: "patch-out-img", alt: "patch sample" });
    const patchCompare = el("div", { id: "patch-compare", class: "compare" });
    patchCompare.append(this.patchIn, this.patchOut);

    this.frameOriginal = el("img", { id: "frame-original", alt: "original frame" });
    this.frameEdited = el("img", { id: "frame-edited", alt: "edited frame" });
    const frameCompare = el("div", { id: "frame-compare", class: "compare" });
    frameCompare.append(this.frameOriginal, this.frameEdited);

    const scrub = el("input", {
      id: "frame-scrub", type: "range", min: "0", max: "0", step: "1", value: "0",
    });
    scrub.addEventListener("input", () => this.setScrub(Number(scrub.value)));
    const wipe = el("input", {
      id: "wipe-slider", type: "range", min: "0", max: "100", step: "1", value: "50",
    });
    wipe.addEventListener("input", () => this.setWipe(Number(wipe.value)));

    viewer.append(
      el("h2", {}, "compare"),
      patchCompare,
      frameCompare,
      this.labelled("frame", scrub),
      this.labelled("wipe", wipe),
    );
    this.setWipe(50);

    this.root.append(header, atlasPanel, draft, jobs, viewer);
  }

  private labelled(text: string, control: HTMLElement): HTMLElement {
    const wrap = el("label", { class: "field" });
    wrap.append(el("span", {}, text), control);
    return wrap;
  }

  private promptInput(): HTMLInputElement {
    const input = el("input", { id: "prompt-input", type: "text", placeholder: "target prompt" });
    input.addEventListener("input", () => (this.state.draft.targetPrompt = input.value));
    return input;
  }

  private slider(
    name: string,
    range: { min: number; max: number; step: number },
    initial: number,
    apply: (v: number) => number,
  ): HTMLElement {
    const wrap = el("span", { class: "slider-wrap" });
    const input = el("input", {
      id: `${name}-slider`, type: "range",
      min: String(range.min), max: String(range.max), step: String(range.step),
      value: String(initial),
    });
    const value = el("span", { id: `${name}-value`, class: "mono" }, initial.toFixed(2));
    input.addEventListener("input", () => {
      const applied = apply(Number(input.value));
      value.textContent = applied.toFixed(2);
    });
    wrap.append(input, value);
    return wrap;
  }

  private numberInput(
    name: string,
    initial: number,
    apply: (v: number) => number,
    range?: { min: number; max: number },
  ): HTMLInputElement {
    const attrs: Record<string, string> = {
      id: `${name}-input`, type: "number", value: String(initial),
    };
    if (range) {
      attrs.min = String(range.min);
      attrs.max = String(range.max);
    }
    const input = el("input", attrs);
    input.addEventListener("input", () => {
      const applied = apply(Number(input.value));
      input.value = String(applied);
    });
    return input;
  }

  private checkbox(
    id: string,
    text: string,
    checked: boolean,
    apply: (on: boolean) => void,
  ): HTMLElement {
    const wrap = el("label", { class: "field" });
    const input = el("input", { id, type: "checkbox" });
    input.checked = checked;
    input.addEventListener("change", () => apply(input.checked));
    wrap.append(input, el("span", {}, text));
    return wrap;
  }

  // --- atlas view ---------------------------------------------------------

  async boot(): Promise<void> {
    const info = await this.client.projectInfo();
    this.state.frameCount = info.frame_count;
    this.state.jobs = info.edits;
    const line = this.root.querySelector("#project-line")!;
    line.textContent =
      `${info.project_dir} | ${info.frame_count} frames ${info.width}x${info.height}` +
      ` | atlas ${info.atlas_resolution} | ${info.psnr_db.toFixed(1)} dB`;
    const scrub = this.root.querySelector<HTMLInputElement>("#frame-scrub")!;
    scrub.max = String(Math.max(0, info.frame_count - 1));
    this.showAtlas();
    this.renderJobs();
    this.setScrub(0);
    if (this.autoPoll) this.schedulePoll();
  }

  private showAtlas() {
    this.atlasImg.src = this.client.atlasUrl(this.state.layer);
    for (const layer of ["foreground", "background"]) {
      this.root
        .querySelector(`#layer-${layer}`)!
        .classList.toggle("active", layer === this.state.layer);
    }
  }

  toggleLayer(layer: "foreground" | "background") {
    this.state.setLayer(layer); // draft survives; only the mask preview resets
    this.clearOverlay();
    this.showAtlas();
  }

  private atlasCoords(ev: MouseEvent): { x: number; y: number } {
    // the img is displayed at its intrinsic size, so offset coords are texel coords
    return { x: Math.floor(ev.offsetX || 0), y: Math.floor(ev.offsetY || 0) };
  }

  async onAtlasClick(x: number, y: number): Promise<void> {
    const result = await this.client.segment(this.state.layer, { point: { x, y } });
    this.applySegment(result);
  }

  async segmentByToken(token: string): Promise<void> {
    const result = await this.client.segment(this.state.layer, { token });
    this.applySegment(result);
  }

  private applySegment(result: {
    found: boolean;
    labels: string[];
    matched?: string[];
    mask?: Parameters<typeof decodeBoolMask>[0];
  }) {
    if (!result.found || !result.mask) {
      this.state.maskPreview = null;
      this.state.matchedTokens = [];
      this.clearOverlay();
      this.notice.textContent = `no segment here (labels: ${result.labels.join(", ") || "none"})`;
      return;
    }
    const mask = decodeBoolMask(result.mask);
    this.state.setSegment(result.matched ?? [], mask);
    this.notice.textContent = `segment: ${this.state.matchedTokens.join(", ")}`;
    this.paintOverlay(mask);
  }

  private clearOverlay() {
    this.overlay.width = 0;
    this.overlay.height = 0;
  }

  private paintOverlay(mask: BoolMask) {
    this.overlay.width = mask.width;
    this.overlay.height = mask.height;
    let ctx: CanvasRenderingContext2D | null = null;
    try {
      ctx = this.overlay.getContext("2d");
    } catch {
      // no canvas backend (headless tests); state still holds the mask
    }
    if (!ctx) return;
    const image = ctx.createImageData(mask.width, mask.height);
    for (let i = 0; i < mask.data.length; i++) {
      if (mask.data[i]) {
        image.data[i * 4] = 64;
        image.data[i * 4 + 1] = 160;
        image.data[i * 4 + 2] = 255;
        image.data[i * 4 + 3] = 110;
      }
    }
    ctx.putImageData(image, 0, 0);
  }

  // --- jobs ---------------------------------------------------------------

  async submitDraft(): Promise<string | undefined> {
    if (!this.state.canSubmit()) {
      this.toaster.show("select an object first (click the atlas), or turn mask mode off");
      return undefined;
    }
    const out = await this.client.submitEdit(this.state.toRequestWire(), randomKey());
    await this.refreshJobs();
    if (this.autoPoll) this.schedulePoll();
    return out.job_id;
  }

  async refreshJobs(): Promise<void> {
    this.state.jobs = await this.client.listEdits();
    this.renderJobs();
  }

  private schedulePoll() {
    if (this.pollTimer !== null) return;
    const active = this.state.jobs.some((j) => j.status === "queued" || j.status === "running");
    if (!active) return;
    this.pollTimer = setTimeout(() => {
      this.pollTimer = null;
      this.guard(this.refreshJobs());
    }, this.pollMs);
  }

  private renderJobs() {
    this.jobsHost.textContent = "";
    // newest first: the card being watched sits on top
    for (const job of [...this.state.jobs].reverse()) {
      this.jobsHost.append(this.jobCard(job));
    }
    if (this.autoPoll) this.schedulePoll();
  }

  private jobCard(job: JobSummary): HTMLElement {
    const card = el("article", { class: "job-card", "data-job": job.id });
    const head = el("div", { class: "row" });
    head.append(
      el("strong", {}, job.id),
      el("span", { class: `job-status status-${job.status}` }, job.status),
    );
    card.append(head);

    // every parameter the server will act on, visible on the card
    const r = job.request;
    card.append(
      el(
        "div",
        { class: "job-params mono" },
        `[${r.source_tokens.join(", ")}] -> "${r.target_prompt}" | ` +
          `rho ${r.rho} lambda ${r.lambda_hed} seed ${r.seed} n ${r.num_samples} | ` +
          `mask ${r.use_mask ? "on" : "off"} edges ${r.use_hed ? "on" : "off"}`,
      ),
    );

    if (job.error) {
      card.append(el("div", { class: "job-error" }, job.error));
    }

    if (job.status === "done" && job.samples) {
      const grid = el("div", { class: "samples" });
      job.samples.forEach((url, k) => {
        const cell = el("figure", { class: "sample-cell" });
        const img = el("img", { class: "thumb", "data-sample": String(k), alt: `sample ${k}` });
        img.src = this.absolute(url);
        const pick = el("button", { class: "select-sample", "data-sample": String(k) }, `use ${k}`);
        pick.addEventListener("click", () => this.selectSample(job.id, k));
        if (this.state.selectedJob === job.id && this.state.selectedSample === k) {
          cell.classList.add("selected");
        }
        cell.append(img, pick);
        grid.append(cell);
      });
      card.append(grid);

      const actions = el("div", { class: "row" });
      const accept = el("button", { class: "accept-btn" }, "accept selected");
      accept.addEventListener("click", () => this.guard(this.acceptSelected(job.id)));
      actions.append(accept);
      if (job.artifacts?.["edit_manifest.json"]) {
        const link = el("a", { class: "manifest-link", target: "_blank" }, "manifest");
        (link as HTMLAnchorElement).href = this.absolute(job.artifacts["edit_manifest.json"]);
        actions.append(link);
      }
      card.append(actions);
    }

    if (job.accepted_sample !== null && job.accepted_sample !== undefined) {
      card.append(el("div", { class: "job-accepted" }, `accepted sample ${job.accepted_sample}`));
    }
    return card;
  }

  private absolute(path: string): string {
    const base = (this.client as { base?: string }).base ?? "";
    return path.startsWith("/") ? base + path : path;
  }

  selectSample(jobId: string, k: number) {
    this.state.selectedJob = jobId;
    this.state.selectedSample = k;
    this.patchIn.src = this.absolute(this.client.artifactUrl(jobId, "patch_in.png"));
    this.patchOut.src = this.absolute(this.client.artifactUrl(jobId, `patch_out_${k}.png`));
    this.renderJobs();
  }

  async acceptSelected(jobId: string): Promise<void> {
    const sample = this.state.selectedJob === jobId ? this.state.selectedSample : 0;
    const out = await this.client.accept(jobId, sample);
    this.state.acceptedJob = out.job_id;
    this.state.frameCount = out.frame_count;
    await this.refreshJobs();
    this.setScrub(this.state.scrubFrame);
  }

  // --- viewer -------------------------------------------------------------

  setScrub(frame: number) {
    this.state.setScrub(frame);
    const k = this.state.scrubFrame;
    this.frameOriginal.src = this.client.frameUrl(k, "original");
    if (this.state.acceptedJob) {
      this.frameEdited.src = this.client.frameUrl(k, "edited", this.state.acceptedJob);
      this.frameEdited.style.display = "";
    } else {
      this.frameEdited.style.display = "none";
    }
  }

  setWipe(percent: number) {
    // the edited frame sits on top; the wipe reveals it from the left
    const keep = Math.min(100, Math.max(0, percent));
    this.frameEdited.style.clipPath = `inset(0 ${100 - keep}% 0 0)`;
  }
}
