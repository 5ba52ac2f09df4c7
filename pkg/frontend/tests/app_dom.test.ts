// The studio against a faked API: rendering, gating, toasts, and state
// retention. The live end-to-end session lives in studio_flow.test.ts.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiError, type JobSummary, type StudioApi } from "../src/api";
import { StudioApp } from "../src/app";
import type { WireArray } from "../src/wire";

function encodeBool(rows: number[][]): WireArray {
  const height = rows.length;
  const width = rows[0].length;
  const bytes = new Uint8Array(width * height);
  rows.forEach((row, y) => row.forEach((v, x) => (bytes[y * width + x] = v ? 1 : 0)));
  let raw = "";
  for (const b of bytes) raw += String.fromCharCode(b);
  return { shape: [height, width], dtype: "bool", data: btoa(raw) };
}

const BLOB_MASK = encodeBool([
  [0, 0, 0, 0],
  [0, 1, 1, 0],
  [0, 1, 1, 0],
  [0, 0, 0, 0],
]);

type Fake = StudioApi & {
  jobs: JobSummary[];
  submissions: { request: JobSummary["request"]; key: string }[];
  accepted: { id: string; sample: number }[];
};

function fakeApi(): Fake {
  const fake: Fake = {
    jobs: [],
    submissions: [],
    accepted: [],

    async projectInfo() {
      return {
        project_dir: "/tmp/proj",
        frame_count: 4,
        height: 64,
        width: 64,
        atlas_resolution: 64,
        psnr_db: 34.2,
        converged: true,
        layers: ["foreground", "background"],
        providers: [],
        edits: fake.jobs,
      };
    },
    atlasUrl: (layer) => `/atlas/${layer}`,
    async segment(_layer, at) {
      if (at.token === "red" || (at.point && at.point.x >= 1 && at.point.y >= 1)) {
        return { found: true, labels: ["red"], matched: ["red"], mask: BLOB_MASK };
      }
      return { found: false, labels: ["red"] };
    },
    async submitEdit(request, key) {
      fake.submissions.push({ request, key });
      const id = `edit-${String(fake.jobs.length + 1).padStart(4, "0")}`;
      fake.jobs.push({
        id,
        status: "done",
        request,
        accepted_sample: null,
        sample_count: request.num_samples,
        samples: Array.from(
          { length: request.num_samples },
          (_, k) => `/edits/${id}/artifacts/patch_out_${k}.png`,
        ),
        artifacts: { "edit_manifest.json": `/edits/${id}/artifacts/edit_manifest.json` },
      });
      return { job_id: id, duplicate: false };
    },
    async listEdits() {
      return fake.jobs;
    },
    async job(id) {
      return fake.jobs.find((j) => j.id === id)!;
    },
    async accept(id, sample) {
      fake.accepted.push({ id, sample });
      const job = fake.jobs.find((j) => j.id === id)!;
      job.accepted_sample = sample;
      return {
        job_id: id,
        sample,
        frame_count: 4,
        frames: [0, 1, 2, 3].map((k) => `/frames/${k}?variant=edited&edit=${id}`),
      };
    },
    frameUrl: (k, variant = "original", editId) =>
      variant === "edited"
        ? `/frames/${k}?variant=edited&edit=${editId}`
        : `/frames/${k}?variant=original`,
    artifactUrl: (jobId, name) => `/edits/${jobId}/artifacts/${name}`,
  };
  return fake;
}

function setInput(root: HTMLElement, selector: string, value: string) {
  const input = root.querySelector<HTMLInputElement>(selector)!;
  input.value = value;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "";
  root = document.createElement("div");
  document.body.append(root);
});

describe("boot", () => {
  it("renders the project line and existing job cards from the server", async () => {
    const fake = fakeApi();
    fake.jobs.push({
      id: "edit-0001",
      status: "done",
      request: {
        source_tokens: ["red"],
        target_prompt: "a blue square",
        rho: 0.7,
        lambda_hed: 0.5,
        seed: 3,
        use_mask: true,
        use_hed: true,
        num_samples: 2,
      },
      accepted_sample: 1,
      sample_count: 2,
      samples: ["/edits/edit-0001/artifacts/patch_out_0.png", "/edits/edit-0001/artifacts/patch_out_1.png"],
      artifacts: { "edit_manifest.json": "/edits/edit-0001/artifacts/edit_manifest.json" },
    });
    const app = new StudioApp(root, fake, { autoPoll: false });
    await app.boot();

    expect(root.querySelector("#project-line")!.textContent).toContain("34.2 dB");
    const card = root.querySelector<HTMLElement>(".job-card[data-job='edit-0001']")!;
    expect(card).not.toBeNull();
    expect(card.querySelector(".job-accepted")!.textContent).toContain("accepted sample 1");
    // the full parameter set is on the card
    const params = card.querySelector(".job-params")!.textContent!;
    for (const bit of ["red", "a blue square", "rho 0.7", "lambda 0.5", "seed 3", "n 2", "mask on"]) {
      expect(params).toContain(bit);
    }
  });
});

describe("click-to-segment", () => {
  it("shows a notice when the click hits nothing", async () => {
    const app = new StudioApp(root, fakeApi(), { autoPoll: false });
    await app.boot();
    // a raw jsdom click carries no offset coords, which lands on (0, 0): background
    root.querySelector("#atlas-img")!.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await app.idle();
    expect(root.querySelector("#segment-notice")!.textContent).toContain("no segment");
    expect(app.state.maskPreview).toBeNull();
  });

  it("stores the returned mask and sizes the overlay to it", async () => {
    const app = new StudioApp(root, fakeApi(), { autoPoll: false });
    await app.boot();
    await app.onAtlasClick(2, 2);
    expect(app.state.matchedTokens).toEqual(["red"]);
    expect(app.state.maskPreview).not.toBeNull();
    const mask = app.state.maskPreview!;
    expect([mask.width, mask.height]).toEqual([4, 4]);
    // decoded pixels match the payload: the 2x2 inner block
    expect(Array.from(mask.data)).toEqual([0,0,0,0, 0,1,1,0, 0,1,1,0, 0,0,0,0]);
    const overlay = root.querySelector<HTMLCanvasElement>("#mask-overlay")!;
    expect([overlay.width, overlay.height]).toEqual([4, 4]);
    expect(root.querySelector("#segment-notice")!.textContent).toContain("red");
  });
});

describe("layer toggle", () => {
  it("swaps the atlas image and keeps the draft", async () => {
    const app = new StudioApp(root, fakeApi(), { autoPoll: false });
    await app.boot();
    setInput(root, "#prompt-input", "a zebra print square");
    setInput(root, "#lambda-slider", "1.2");

    const img = root.querySelector<HTMLImageElement>("#atlas-img")!;
    expect(img.src).toContain("/atlas/foreground");
    root.querySelector<HTMLElement>("#layer-background")!.click();
    expect(img.src).toContain("/atlas/background");

    expect(root.querySelector<HTMLInputElement>("#prompt-input")!.value).toBe(
      "a zebra print square",
    );
    expect(app.state.draft.targetPrompt).toBe("a zebra print square");
    expect(app.state.draft.lambda).toBeCloseTo(1.2, 12);
  });
});

describe("submit", () => {
  it("refuses to submit without a segment and says so", async () => {
    const fake = fakeApi();
    const app = new StudioApp(root, fake, { autoPoll: false });
    await app.boot();
    root.querySelector<HTMLElement>("#submit-btn")!.click();
    await app.idle();
    expect(fake.submissions).toHaveLength(0);
    expect(root.querySelector(".toast")!.textContent).toContain("select an object");
  });

  it("sends the draft as shaped by the controls and renders the card", async () => {
    const fake = fakeApi();
    const app = new StudioApp(root, fake, { autoPoll: false });
    await app.boot();
    await app.onAtlasClick(2, 2);
    setInput(root, "#prompt-input", "a blue square");
    setInput(root, "#rho-slider", "0.6");
    setInput(root, "#lambda-slider", "0.9");
    setInput(root, "#samples-input", "4");
    setInput(root, "#seed-input", "7");

    root.querySelector<HTMLElement>("#submit-btn")!.click();
    await app.idle();

    expect(fake.submissions).toHaveLength(1);
    const { request, key } = fake.submissions[0];
    expect(key).not.toBe("");
    expect(request).toEqual({
      source_tokens: ["red"],
      target_prompt: "a blue square",
      rho: 0.6,
      lambda_hed: 0.9,
      seed: 7,
      use_mask: true,
      use_hed: true,
      num_samples: 4,
    });
    const thumbs = root.querySelectorAll(".job-card .thumb");
    expect(thumbs).toHaveLength(4);
  });

  it("a resubmit with a new lambda adds a card and keeps the old one", async () => {
    const fake = fakeApi();
    const app = new StudioApp(root, fake, { autoPoll: false });
    await app.boot();
    await app.onAtlasClick(2, 2);
    setInput(root, "#prompt-input", "a blue square");
    root.querySelector<HTMLElement>("#submit-btn")!.click();
    await app.idle();
    setInput(root, "#lambda-slider", "1.5");
    root.querySelector<HTMLElement>("#submit-btn")!.click();
    await app.idle();

    const cards = root.querySelectorAll(".job-card");
    expect(cards).toHaveLength(2);
    // newest first, and the two submissions differ only in lambda
    expect(cards[0].getAttribute("data-job")).toBe("edit-0002");
    expect(fake.submissions[0].request.lambda_hed).not.toBe(fake.submissions[1].request.lambda_hed);
    expect(fake.submissions[0].key).not.toBe(fake.submissions[1].key);
  });
});

describe("sample select and accept", () => {
  async function submitted(fake: Fake): Promise<StudioApp> {
    const app = new StudioApp(root, fake, { autoPoll: false });
    await app.boot();
    await app.onAtlasClick(2, 2);
    setInput(root, "#prompt-input", "a blue square");
    setInput(root, "#samples-input", "3");
    root.querySelector<HTMLElement>("#submit-btn")!.click();
    await app.idle();
    return app;
  }

  it("selecting a sample loads the patch compare pair", async () => {
    const fake = fakeApi();
    const app = await submitted(fake);
    root.querySelectorAll<HTMLElement>(".select-sample")[2]!.click();
    expect(app.state.selectedSample).toBe(2);
    expect(root.querySelector<HTMLImageElement>("#patch-in-img")!.src).toContain("patch_in.png");
    expect(root.querySelector<HTMLImageElement>("#patch-out-img")!.src).toContain("patch_out_2.png");
    expect(root.querySelector(".sample-cell.selected")).not.toBeNull();
  });

  it("accept sends the selected sample and arms the frame compare", async () => {
    const fake = fakeApi();
    const app = await submitted(fake);
    root.querySelectorAll<HTMLElement>(".select-sample")[1]!.click();
    root.querySelector<HTMLElement>(".accept-btn")!.click();
    await app.idle();

    expect(fake.accepted).toEqual([{ id: "edit-0001", sample: 1 }]);
    const edited = root.querySelector<HTMLImageElement>("#frame-edited")!;
    expect(edited.src).toContain("variant=edited&edit=edit-0001");
    expect(root.querySelector(".job-accepted")!.textContent).toContain("accepted sample 1");

    const scrub = root.querySelector<HTMLInputElement>("#frame-scrub")!;
    scrub.value = "2";
    scrub.dispatchEvent(new Event("input", { bubbles: true }));
    expect(edited.src).toContain("/frames/2?");
    expect(root.querySelector<HTMLImageElement>("#frame-original")!.src).toContain(
      "variant=original",
    );
  });

  it("the wipe slider drives the reveal of the edited frame", async () => {
    const fake = fakeApi();
    const app = await submitted(fake);
    root.querySelector<HTMLElement>(".accept-btn")!.click();
    await app.idle();
    const wipe = root.querySelector<HTMLInputElement>("#wipe-slider")!;
    wipe.value = "25";
    wipe.dispatchEvent(new Event("input", { bubbles: true }));
    const edited = root.querySelector<HTMLImageElement>("#frame-edited")!;
    expect(edited.style.clipPath).toBe("inset(0 75% 0 0)");
  });
});

describe("API errors", () => {
  it("toast carries the failing provider's name", async () => {
    const fake = fakeApi();
    fake.segment = async () => {
      throw new ApiError(502, "segmenter: connection refused at http://127.0.0.1:9");
    };
    const app = new StudioApp(root, fake, { autoPoll: false });
    await app.boot();
    root.querySelector("#atlas-img")!.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await app.idle();
    const toast = root.querySelector(".toast")!;
    expect(toast.querySelector(".toast-provider")!.textContent).toBe("segmenter");
    expect(toast.textContent).toContain("connection refused");
  });
});
