// Attribute-value text payloads, the backend's wire format. A payload is
// blocks of "key: value" lines separated by blank lines; arrays travel as
// three keys per array: <name>.dtype, <name>.shape (space separated) and
// <name>.b64 (base64 of the raw little-endian bytes).

export type WireData =
  | Float32Array
  | Float64Array
  | Int8Array
  | Int16Array
  | Int32Array
  | BigInt64Array
  | Uint8Array
  | Uint16Array
  | Uint32Array;

export interface WireArray {
  dtype: string;
  shape: number[];
  data: WireData;
}

export type WireScalar = string | number | boolean;
export type WireValue = WireScalar | WireArray;
export type WireBlock = Record<string, WireValue>;

type DataCtor = {
  new (buffer: ArrayBuffer, byteOffset: number, length: number): WireData;
  BYTES_PER_ELEMENT: number;
};

const DTYPES: Record<string, DataCtor> = {
  f4: Float32Array,
  f8: Float64Array,
  i1: Int8Array,
  i2: Int16Array,
  i4: Int32Array,
  i8: BigInt64Array,
  u1: Uint8Array,
  u2: Uint16Array,
  u4: Uint32Array,
};

const INT_RE = /^[+-]?\d+$/;
const FLOAT_RE = /^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/;
const INF_RE = /^[+-]?inf(inity)?$/i;
const NAN_RE = /^[+-]?nan$/i;

export function parseScalar(value: string): WireScalar {
  if (value.length >= 2 && value.startsWith('"') && value.endsWith('"')) {
    return value.slice(1, -1);
  }
  if (value === "true") return true;
  if (value === "false") return false;
  if (INT_RE.test(value) || FLOAT_RE.test(value)) return Number(value);
  if (INF_RE.test(value)) return value[0] === "-" ? -Infinity : Infinity;
  if (NAN_RE.test(value)) return NaN;
  return value;
}

export function isArray(value: WireValue): value is WireArray {
  return typeof value === "object";
}

function decodeArray(name: string, parts: Map<string, string>): WireArray {
  for (const p of ["dtype", "shape", "b64"]) {
    if (!parts.has(p)) throw new Error(`array '${name}' is missing ${p}`);
  }
  const dtype = parts.get("dtype")!;
  const order = dtype[0];
  if (order === ">") throw new Error(`big-endian array '${name}' unsupported`);
  const kind = "<|=".includes(order) ? dtype.slice(1) : dtype;
  const ctor = DTYPES[kind];
  if (!ctor) throw new Error(`array '${name}' has unknown dtype '${dtype}'`);

  const shapeText = parts.get("shape")!;
  const shape = shapeText === "" ? [] : shapeText.split(/\s+/).map((s) => {
    const n = Number(s);
    if (!Number.isInteger(n) || n < 0) throw new Error(`bad shape '${shapeText}'`);
    return n;
  });
  const count = shape.reduce((a, b) => a * b, 1);

  const binary = atob(parts.get("b64")!);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) bytes[i] = binary.charCodeAt(i);
  if (bytes.length !== count * ctor.BYTES_PER_ELEMENT) {
    throw new Error(
      `array '${name}': ${bytes.length} bytes does not fit shape ${shape.join("x")}`
    );
  }
  // Typed views are host-endian; every platform this runs on is little.
  return { dtype, shape, data: new ctor(bytes.buffer, 0, count) };
}

function decodeBlock(fields: Map<string, string>): WireBlock {
  const out: WireBlock = {};
  const arrays = new Map<string, Map<string, string>>();
  for (const [key, value] of fields) {
    const dot = key.lastIndexOf(".");
    const part = dot >= 0 ? key.slice(dot + 1) : "";
    if (part === "dtype" || part === "shape" || part === "b64") {
      const name = key.slice(0, dot);
      if (!arrays.has(name)) arrays.set(name, new Map());
      arrays.get(name)!.set(part, value);
    } else {
      out[key] = parseScalar(value);
    }
  }
  for (const [name, parts] of arrays) out[name] = decodeArray(name, parts);
  return out;
}

export function decodePayload(text: string): WireBlock[] {
  const blocks: WireBlock[] = [];
  let current = new Map<string, string>();
  for (const raw of [...text.split("\n"), ""]) {
    const line = raw.replace(/\r$/, "");
    if (line.trim() === "") {
      if (current.size) {
        blocks.push(decodeBlock(current));
        current = new Map();
      }
      continue;
    }
    const sep = line.indexOf(":");
    if (sep < 0) throw new Error(`line without ':' separator: ${JSON.stringify(line)}`);
    current.set(line.slice(0, sep).trim(), line.slice(sep + 1).trim());
  }
  return blocks;
}

function encodeScalar(value: WireScalar): string {
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") {
    if (Number.isNaN(value)) return "nan";
    if (value === Infinity) return "inf";
    if (value === -Infinity) return "-inf";
    return String(value);
  }
  // Quote strings a decoder would mistake for another type.
  if (parseScalar(value) !== value || value.startsWith('"')) return `"${value}"`;
  return value;
}

export function encodeBlock(fields: Record<string, WireScalar>): string {
  const lines: string[] = [];
  for (const [key, value] of Object.entries(fields)) {
    if (typeof value === "string" && /[\r\n]/.test(value)) {
      throw new Error(`value for '${key}' contains a line break`);
    }
    lines.push(`${key}: ${encodeScalar(value)}`);
  }
  return lines.join("\n") + "\n";
}

export function encodePayload(blocks: Record<string, WireScalar>[]): string {
  return blocks.map(encodeBlock).join("\n");
}
