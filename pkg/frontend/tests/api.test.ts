import { describe, expect, it } from "vitest";

import { ApiError, StudioClient, providerKindIn } from "../src/api";

type Captured = { url: string; init?: RequestInit };

function clientCapturing(status: number, body: unknown): { client: StudioClient; calls: Captured[] } {
  const calls: Captured[] = [];
  const fetchFn = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { client: new StudioClient("http://api.test", fetchFn), calls };
}

describe("StudioClient", () => {
  it("posts the request with its idempotency key in the body", async () => {
    const { client, calls } = clientCapturing(202, { job_id: "edit-0001", duplicate: false });
    const request = {
      source_tokens: ["red"],
      target_prompt: "a blue square",
      rho: 0.7,
      lambda_hed: 0.5,
      seed: 1,
      use_mask: true,
      use_hed: true,
      num_samples: 4,
    };
    const out = await client.submitEdit(request, "key-abc");
    expect(out.job_id).toBe("edit-0001");
    expect(calls).toHaveLength(1);
    expect(calls[0].url).toBe("http://api.test/edits");
    const sent = JSON.parse(String(calls[0].init?.body));
    expect(sent.request).toEqual(request);
    expect(sent.idempotency_key).toBe("key-abc");
  });

  it("turns an error payload into ApiError with the provider kind", async () => {
    const { client } = clientCapturing(502, {
      detail: "segmenter: connection refused at http://127.0.0.1:9",
    });
    const err = await client.listEdits().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(502);
    expect(err.detail).toContain("connection refused");
    expect(err.providerKind).toBe("segmenter");
  });

  it("keeps the status text when the error body is not JSON", async () => {
    const fetchFn = async () => new Response("boom", { status: 500, statusText: "Internal" });
    const client = new StudioClient("", fetchFn);
    const err = await client.projectInfo().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.detail).toBe("Internal");
    expect(err.providerKind).toBeNull();
  });

  it("builds frame and atlas urls against its base", () => {
    const client = new StudioClient("http://api.test/");
    expect(client.atlasUrl("foreground")).toBe("http://api.test/atlas/foreground");
    expect(client.frameUrl(3)).toBe("http://api.test/frames/3?variant=original");
    expect(client.frameUrl(3, "edited", "edit-0002")).toBe(
      "http://api.test/frames/3?variant=edited&edit=edit-0002",
    );
    expect(client.artifactUrl("edit-0001", "mask.png")).toBe(
      "http://api.test/edits/edit-0001/artifacts/mask.png",
    );
  });
});

describe("providerKindIn", () => {
  it("finds any of the six provider kinds", () => {
    expect(providerKindIn("noise_predictor timed out")).toBe("noise_predictor");
    expect(providerKindIn("Edge_Detector at host x")).toBe("edge_detector");
    expect(providerKindIn("plain validation message")).toBeNull();
  });
});
