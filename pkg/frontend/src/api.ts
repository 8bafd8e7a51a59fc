// Typed client for the review backend. All payloads are attribute-value
// blocks (see wire.ts); this module turns them into plain models and hides
// the block layout from the rest of the UI.

import { decodePayload, encodePayload, isArray, WireArray, WireBlock } from "./wire.js";

export interface SceneSummary {
  frameId: string;
  sequence: string;
  green: number;
  blue: number;
  red: number;
  yellow: number;
  contradictions: number;
  nClusters: number;
  nTotal: number;
  nBothValid: number;
  reviewed: boolean;
  image: boolean;
}

export interface SceneListing {
  total: number;
  offset: number;
  limit: number;
  sequence: string;
  scenes: SceneSummary[];
}

export interface ScenePoints {
  n: number;
  rawIndex: number[];
  xyz: Float32Array; // (n, 3) row major
  pixels: Float32Array; // (n, 2) row major
  categories: Uint8Array;
  classIds: Uint16Array;
  clusterIds: Int32Array;
  speedsMps: Float32Array;
}

export interface ClusterInfo {
  clusterId: number;
  category: string;
  pointCount: number;
  centroid: [number, number, number];
  semanticMode: number;
  semanticName: string;
  meanSpeedKmh: number;
  nVerdicts: number;
}

export interface SceneDetail {
  frameId: string;
  sequence: string;
  nTotal: number;
  nValid: number;
  green: number;
  blue: number;
  red: number;
  yellow: number;
  imageUrl: string | null;
  imageWidth: number;
  imageHeight: number;
  points: ScenePoints;
  clusters: ClusterInfo[];
}

export interface VerdictRecord {
  id: number;
  frameId: string;
  clusterId: number;
  verdict: string;
  tags: string[];
  reviewer: string;
  timestamp: number;
}

export interface ExportRow {
  frameId: string;
  verdicts: string[];
  tags: string[];
}

export const VERDICTS = [
  "sv_failure",
  "ssv_failure",
  "both_failed",
  "false_alarm",
  "unsure",
] as const;

export type Verdict = (typeof VERDICTS)[number];

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number
  ) {
    super(message);
  }
}

function str(block: WireBlock, key: string): string {
  const v = block[key];
  if (v === undefined || isArray(v)) throw new Error(`block is missing '${key}'`);
  return String(v);
}

function num(block: WireBlock, key: string): number {
  const v = block[key];
  if (typeof v !== "number") throw new Error(`block field '${key}' is not a number`);
  return v;
}

function arr(block: WireBlock, key: string, rows: number, cols: number): WireArray {
  const v = block[key];
  if (v === undefined || !isArray(v)) throw new Error(`points block is missing '${key}'`);
  const [r, c] = [v.shape[0] ?? 0, v.shape[1] ?? 1];
  if (r !== rows || c !== cols) {
    throw new Error(`array '${key}' is ${v.shape.join("x")}, expected ${rows}x${cols}`);
  }
  return v;
}

function splitCsv(text: string): string[] {
  return text.split(",").map((t) => t.trim()).filter((t) => t.length > 0);
}

export function parseListing(blocks: WireBlock[]): SceneListing {
  const header = blocks[0];
  if (!header || header.kind !== "header") throw new Error("listing has no header block");
  const scenes = blocks.slice(1).map((b) => ({
    frameId: str(b, "frame_id"),
    sequence: str(b, "sequence"),
    green: num(b, "green"),
    blue: num(b, "blue"),
    red: num(b, "red"),
    yellow: num(b, "yellow"),
    contradictions: num(b, "contradictions"),
    nClusters: num(b, "n_clusters"),
    nTotal: num(b, "n_total"),
    nBothValid: num(b, "n_both_valid"),
    reviewed: b.reviewed === true,
    image: b.image === true,
  }));
  return {
    total: num(header, "total"),
    offset: num(header, "offset"),
    limit: num(header, "limit"),
    sequence: str(header, "sequence"),
    scenes,
  };
}

export function parseScene(blocks: WireBlock[]): SceneDetail {
  const header = blocks[0];
  if (!header || header.kind !== "scene") throw new Error("scene payload has no header");
  const pointsBlock = blocks.find((b) => b.kind === "points");
  if (!pointsBlock) throw new Error("scene payload has no points block");

  const n = num(header, "n_valid");
  const rawIndex = arr(pointsBlock, "raw_index", n, 1).data as BigInt64Array;
  const points: ScenePoints = {
    n,
    rawIndex: Array.from(rawIndex, Number),
    xyz: arr(pointsBlock, "points", n, 3).data as Float32Array,
    pixels: arr(pointsBlock, "pixels", n, 2).data as Float32Array,
    categories: arr(pointsBlock, "categories", n, 1).data as Uint8Array,
    classIds: arr(pointsBlock, "class_ids", n, 1).data as Uint16Array,
    clusterIds: arr(pointsBlock, "cluster_ids", n, 1).data as Int32Array,
    speedsMps: arr(pointsBlock, "speeds_mps", n, 1).data as Float32Array,
  };

  const clusters = blocks
    .filter((b) => b.kind === "cluster")
    .map((b) => ({
      clusterId: num(b, "cluster_id"),
      category: str(b, "category"),
      pointCount: num(b, "point_count"),
      centroid: [num(b, "centroid_x"), num(b, "centroid_y"), num(b, "centroid_z")] as [
        number,
        number,
        number,
      ],
      semanticMode: num(b, "semantic_mode"),
      semanticName: str(b, "semantic_name"),
      meanSpeedKmh: num(b, "mean_speed_kmh"),
      nVerdicts: num(b, "n_verdicts"),
    }));

  return {
    frameId: str(header, "frame_id"),
    sequence: str(header, "sequence"),
    nTotal: num(header, "n_total"),
    nValid: n,
    green: num(header, "green"),
    blue: num(header, "blue"),
    red: num(header, "red"),
    yellow: num(header, "yellow"),
    imageUrl: header.image === true ? str(header, "image_url") : null,
    imageWidth: header.image === true ? num(header, "image_width") : 0,
    imageHeight: header.image === true ? num(header, "image_height") : 0,
    points,
    clusters,
  };
}

export function parseVerdict(block: WireBlock): VerdictRecord {
  return {
    id: num(block, "id"),
    frameId: str(block, "frame_id"),
    clusterId: num(block, "cluster_id"),
    verdict: str(block, "verdict"),
    tags: splitCsv(block.tags === undefined ? "" : str(block, "tags")),
    reviewer: str(block, "reviewer"),
    timestamp: num(block, "timestamp"),
  };
}

export function parseExport(blocks: WireBlock[]): ExportRow[] {
  return blocks
    .filter((b) => b.kind === "query")
    .map((b) => ({
      frameId: str(b, "frame_id"),
      verdicts: splitCsv(str(b, "verdicts")),
      tags: splitCsv(b.tags === undefined ? "" : str(b, "tags")),
    }));
}

function errorFrom(blocks: WireBlock[], status: number): ApiError {
  const block = blocks.find((b) => b.kind === "error");
  if (block) {
    return new ApiError(String(block.error ?? "Error"), String(block.message ?? ""), status);
  }
  return new ApiError("HttpError", `unexpected status ${status}`, status);
}

export interface ListFilters {
  category?: "red" | "yellow";
  reviewed?: boolean;
  sequence?: string;
  offset?: number;
  limit?: number;
}

export class Client {
  constructor(private base: string = "") {}

  imageUrl(frameId: string): string {
    return `${this.base}/scenes/${encodeURIComponent(frameId)}/image`;
  }

  private async request(path: string, init?: RequestInit): Promise<WireBlock[]> {
    const res = await fetch(this.base + path, init);
    const text = await res.text();
    let blocks: WireBlock[];
    try {
      blocks = decodePayload(text);
    } catch (e) {
      if (!res.ok) throw new ApiError("HttpError", `status ${res.status}`, res.status);
      throw e;
    }
    if (!res.ok) throw errorFrom(blocks, res.status);
    return blocks;
  }

  async listScenes(filters: ListFilters = {}): Promise<SceneListing> {
    const params = new URLSearchParams();
    if (filters.category !== undefined) params.set("category", filters.category);
    if (filters.reviewed !== undefined) params.set("reviewed", String(filters.reviewed));
    if (filters.sequence !== undefined) params.set("sequence", filters.sequence);
    if (filters.offset !== undefined) params.set("offset", String(filters.offset));
    if (filters.limit !== undefined) params.set("limit", String(filters.limit));
    const qs = params.toString();
    return parseListing(await this.request(qs ? `/scenes?${qs}` : "/scenes"));
  }

  async scene(frameId: string): Promise<SceneDetail> {
    return parseScene(await this.request(`/scenes/${encodeURIComponent(frameId)}`));
  }

  async postVerdict(input: {
    frameId: string;
    clusterId: number;
    verdict: Verdict;
    tags: string[];
    reviewer: string;
  }): Promise<VerdictRecord> {
    const body = encodePayload([
      {
        kind: "verdict",
        frame_id: input.frameId,
        cluster_id: input.clusterId,
        verdict: input.verdict,
        tags: input.tags.join(","),
        reviewer: input.reviewer,
      },
    ]);
    const blocks = await this.request("/verdicts", {
      method: "POST",
      headers: { "Content-Type": "text/plain; charset=utf-8" },
      body,
    });
    return parseVerdict(blocks[0]);
  }

  async verdicts(frameId?: string): Promise<VerdictRecord[]> {
    const path =
      frameId === undefined
        ? "/verdicts"
        : `/verdicts?frame_id=${encodeURIComponent(frameId)}`;
    const blocks = await this.request(path);
    return blocks.filter((b) => b.kind === "verdict").map(parseVerdict);
  }

  async exportQueries(): Promise<ExportRow[]> {
    return parseExport(await this.request("/export/queries"));
  }
}
