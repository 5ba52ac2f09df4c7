// Array payloads come over the wire as {shape, dtype, data} with data a
// base64 of the raw buffer. The studio only ever receives bool masks.

export type WireArray = {
  shape: number[];
  dtype: string;
  data: string;
};

export type BoolMask = {
  width: number;
  height: number;
  data: Uint8Array; // row-major, 1 byte per pixel, 0 or 1
};

function base64Bytes(b64: string): Uint8Array {
  const raw = atob(b64);
  const out = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) out[i] = raw.charCodeAt(i);
  return out;
}

export function decodeBoolMask(payload: WireArray): BoolMask {
  if (payload.dtype !== "bool") {
    throw new Error(`expected a bool mask, got dtype ${payload.dtype}`);
  }
  if (payload.shape.length !== 2) {
    throw new Error(`expected a 2-d mask, got shape [${payload.shape.join(", ")}]`);
  }
  const [height, width] = payload.shape;
  const data = base64Bytes(payload.data);
  if (data.length !== width * height) {
    throw new Error(`mask payload is ${data.length} bytes for ${width}x${height}`);
  }
  return { width, height, data };
}

export function maskAt(mask: BoolMask, x: number, y: number): boolean {
  return mask.data[y * mask.width + x] !== 0;
}

export function maskArea(mask: BoolMask): number {
  let n = 0;
  for (const v of mask.data) if (v !== 0) n++;
  return n;
}
