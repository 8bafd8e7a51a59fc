import { describe, expect, it } from "vitest";

import {
  decodePayload,
  encodeBlock,
  encodePayload,
  isArray,
  parseScalar,
  WireArray,
} from "../src/wire.js";

function b64(bytes: Uint8Array): string {
  let s = "";
  for (const b of bytes) s += String.fromCharCode(b);
  return btoa(s);
}

describe("parseScalar", () => {
  it("reads the scalar types the backend emits", () => {
    expect(parseScalar("42")).toBe(42);
    expect(parseScalar("-7")).toBe(-7);
    expect(parseScalar("3.5")).toBe(3.5);
    expect(parseScalar("1e3")).toBe(1000);
    expect(parseScalar("true")).toBe(true);
    expect(parseScalar("false")).toBe(false);
    expect(parseScalar("hello")).toBe("hello");
    expect(parseScalar("inf")).toBe(Infinity);
    expect(parseScalar("-inf")).toBe(-Infinity);
    expect(Number.isNaN(parseScalar("nan"))).toBe(true);
  });

  it("unquotes strings that look like other types", () => {
    expect(parseScalar('"000001"')).toBe("000001");
    expect(parseScalar('"42"')).toBe("42");
    expect(parseScalar('"true"')).toBe("true");
    expect(parseScalar('""')).toBe("");
  });

  it("does not treat hex or partial numbers as numeric", () => {
    expect(parseScalar("0x10")).toBe("0x10");
    expect(parseScalar("1.2.3")).toBe("1.2.3");
    expect(parseScalar("")).toBe("");
  });
});

describe("decodePayload", () => {
  it("splits blocks on blank lines", () => {
    const blocks = decodePayload("kind: header\ntotal: 2\n\nkind: scene\nframe_id: \"000001\"\n");
    expect(blocks).toHaveLength(2);
    expect(blocks[0]).toEqual({ kind: "header", total: 2 });
    expect(blocks[1]).toEqual({ kind: "scene", frame_id: "000001" });
  });

  it("keeps colons inside values intact", () => {
    const blocks = decodePayload("message: frame '000001': missing\n");
    expect(blocks[0].message).toBe("frame '000001': missing");
  });

  it("rejects lines without a separator", () => {
    expect(() => decodePayload("no separator here\n")).toThrow(/separator/);
  });

  it("decodes array triplets into typed arrays", () => {
    const xyz = new Float32Array([1, 2, 3, 4, 5, 6]);
    const text = [
      "kind: points",
      "pts.dtype: <f4",
      "pts.shape: 2 3",
      `pts.b64: ${b64(new Uint8Array(xyz.buffer))}`,
      "",
    ].join("\n");
    const arr = decodePayload(text)[0].pts as WireArray;
    expect(isArray(arr)).toBe(true);
    expect(arr.shape).toEqual([2, 3]);
    expect(arr.data).toBeInstanceOf(Float32Array);
    expect(Array.from(arr.data as Float32Array)).toEqual([1, 2, 3, 4, 5, 6]);
  });

  it("covers the dtypes the scene payload uses", () => {
    const cases: [string, Uint8Array, unknown][] = [
      ["<i8", new Uint8Array(new BigInt64Array([5n, -1n]).buffer), BigInt64Array],
      ["<i4", new Uint8Array(new Int32Array([7, -2]).buffer), Int32Array],
      ["<u2", new Uint8Array(new Uint16Array([10, 300]).buffer), Uint16Array],
      ["|u1", new Uint8Array([0, 3]), Uint8Array],
      ["<f4", new Uint8Array(new Float32Array([1.5, -0.5]).buffer), Float32Array],
    ];
    for (const [dtype, bytes, ctor] of cases) {
      const text = `a.dtype: ${dtype}\na.shape: 2\na.b64: ${b64(bytes)}\n`;
      const arr = decodePayload(text)[0].a as WireArray;
      expect(arr.data).toBeInstanceOf(ctor as never);
      expect(arr.data.length).toBe(2);
    }
  });

  it("decodes empty arrays", () => {
    const arr = decodePayload("a.dtype: <f4\na.shape: 0\na.b64: \n")[0].a as WireArray;
    expect(arr.shape).toEqual([0]);
    expect(arr.data.length).toBe(0);
  });

  it("rejects incomplete triplets and size mismatches", () => {
    expect(() => decodePayload("a.dtype: <f4\na.shape: 1\n")).toThrow(/missing b64/);
    const short = `a.dtype: <f4\na.shape: 3\na.b64: ${b64(new Uint8Array(4))}\n`;
    expect(() => decodePayload(short)).toThrow(/does not fit/);
    expect(() => decodePayload("a.dtype: <q9\na.shape: 1\na.b64: AAAA\n")).toThrow(/unknown dtype/);
  });
});

describe("encodeBlock", () => {
  it("quotes strings that would mis-parse, leaves plain ones bare", () => {
    const text = encodeBlock({
      kind: "verdict",
      frame_id: "000001",
      cluster_id: 3,
      verdict: "sv_failure",
      tags: "occlusion,ghost",
    });
    expect(text).toContain('frame_id: "000001"');
    expect(text).toContain("cluster_id: 3");
    expect(text).toContain("verdict: sv_failure");
    expect(text).toContain("tags: occlusion,ghost");
  });

  it("round trips through decodePayload", () => {
    const fields = {
      frame_id: "000042",
      cluster_id: 7,
      ratio: 0.25,
      flag: true,
      note: "left edge",
    };
    expect(decodePayload(encodePayload([fields]))[0]).toEqual(fields);
  });

  it("refuses values with line breaks", () => {
    expect(() => encodeBlock({ note: "a\nb" })).toThrow(/line break/);
  });
});
