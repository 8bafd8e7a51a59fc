// Camera overlay and bird's-eye view. The draw plans are built by pure
// functions so the point bookkeeping (every valid point gets exactly one
// dot per view, hidden layers excepted) is testable without a canvas.

import { ClusterInfo, SceneDetail, ScenePoints } from "./api.js";
import { categoryColor, categoryName, CategoryName } from "./colors.js";
import { bevToScreen, fitBev, nearestPoint } from "./geom.js";

export type LayerToggles = Record<CategoryName, boolean>;

export const ALL_LAYERS_ON: LayerToggles = {
  green: true,
  blue: true,
  red: true,
  yellow: true,
};

export interface DrawDot {
  index: number;
  x: number;
  y: number;
  color: string;
}

export function buildCameraPlan(points: ScenePoints, toggles: LayerToggles): DrawDot[] {
  const dots: DrawDot[] = [];
  for (let i = 0; i < points.n; i++) {
    const name = categoryName(points.categories[i]);
    if (name === "invalid" || !toggles[name]) continue;
    const u = points.pixels[2 * i];
    const v = points.pixels[2 * i + 1];
    if (!Number.isFinite(u) || !Number.isFinite(v)) continue;
    dots.push({ index: i, x: u, y: v, color: categoryColor(points.categories[i]) });
  }
  return dots;
}

export function buildBevPlan(
  points: ScenePoints,
  toggles: LayerToggles,
  width: number,
  height: number
): DrawDot[] {
  const xs = new Float32Array(points.n);
  const ys = new Float32Array(points.n);
  for (let i = 0; i < points.n; i++) {
    xs[i] = points.xyz[3 * i];
    ys[i] = points.xyz[3 * i + 1];
  }
  const fit = fitBev(xs, ys, width, height);
  const dots: DrawDot[] = [];
  for (let i = 0; i < points.n; i++) {
    const name = categoryName(points.categories[i]);
    if (name === "invalid" || !toggles[name]) continue;
    const [x, y] = bevToScreen(fit, xs[i], ys[i]);
    dots.push({ index: i, x, y, color: categoryColor(points.categories[i]) });
  }
  return dots;
}

function hoverText(detail: SceneDetail, i: number): string {
  const p = detail.points;
  const cat = categoryName(p.categories[i]);
  const speed = p.speedsMps[i];
  const parts = [
    `point ${p.rawIndex[i]}`,
    `class ${p.classIds[i]}`,
    cat,
    Number.isFinite(speed) ? `${speed.toFixed(1)} m/s` : "no speed",
  ];
  const cid = p.clusterIds[i];
  if (cid >= 0) {
    const cluster = detail.clusters.find((c) => c.clusterId === cid);
    if (cluster) {
      parts.push(
        `cluster #${cid} '${cluster.semanticName}' ${cluster.meanSpeedKmh.toFixed(1)} km/h`
      );
    } else {
      parts.push(`cluster #${cid}`);
    }
  }
  return parts.join("  ·  ");
}

const HIT_RADIUS_PX = 8;

export class OverlayView {
  private detail: SceneDetail | null = null;
  private image: ImageBitmap | HTMLImageElement | null = null;
  private toggles: LayerToggles = { ...ALL_LAYERS_ON };
  private selectedCluster = -1;
  private camPlan: DrawDot[] = [];
  private bevPlan: DrawDot[] = [];

  onPick: ((clusterId: number) => void) | null = null;

  constructor(
    private cam: HTMLCanvasElement,
    private bev: HTMLCanvasElement,
    private tooltip: HTMLElement,
    private status: HTMLElement
  ) {
    this.wireHover(cam, () => this.camPlan);
    this.wireHover(bev, () => this.bevPlan);
  }

  setScene(detail: SceneDetail, image: ImageBitmap | HTMLImageElement | null): void {
    this.detail = detail;
    this.image = image;
    this.selectedCluster = -1;
    this.render();
  }

  setToggles(toggles: LayerToggles): void {
    this.toggles = { ...toggles };
    this.render();
  }

  setSelectedCluster(clusterId: number): void {
    this.selectedCluster = clusterId;
    this.render();
  }

  render(): void {
    if (!this.detail) return;
    const p = this.detail.points;

    if (this.detail.imageWidth > 0) {
      this.cam.width = this.detail.imageWidth;
      this.cam.height = this.detail.imageHeight;
    } else if (this.image) {
      this.cam.width = this.image.width;
      this.cam.height = this.image.height;
    }
    const cctx = this.cam.getContext("2d")!;
    cctx.fillStyle = "#09090b";
    cctx.fillRect(0, 0, this.cam.width, this.cam.height);
    if (this.image) cctx.drawImage(this.image, 0, 0);

    this.camPlan = buildCameraPlan(p, this.toggles);
    this.drawDots(cctx, this.camPlan, 2);

    const bctx = this.bev.getContext("2d")!;
    bctx.fillStyle = "#09090b";
    bctx.fillRect(0, 0, this.bev.width, this.bev.height);
    this.bevPlan = buildBevPlan(p, this.toggles, this.bev.width, this.bev.height);
    this.drawDots(bctx, this.bevPlan, 2);
    this.drawClusterMarks(bctx);

    const visible = this.bevPlan.length;
    this.status.textContent =
      visible === p.n
        ? `${p.n} points rendered (all layers)`
        : `${visible} of ${p.n} points rendered`;
  }

  private drawDots(ctx: CanvasRenderingContext2D, plan: DrawDot[], r: number): void {
    const p = this.detail!.points;
    for (const dot of plan) {
      ctx.fillStyle = dot.color;
      ctx.beginPath();
      ctx.arc(dot.x, dot.y, r, 0, 2 * Math.PI);
      ctx.fill();
      if (this.selectedCluster >= 0 && p.clusterIds[dot.index] === this.selectedCluster) {
        ctx.strokeStyle = "#fafafa";
        ctx.lineWidth = 1;
        ctx.stroke();
      }
    }
  }

  private drawClusterMarks(ctx: CanvasRenderingContext2D): void {
    const detail = this.detail!;
    const p = detail.points;
    const xs = new Float32Array(p.n);
    const ys = new Float32Array(p.n);
    for (let i = 0; i < p.n; i++) {
      xs[i] = p.xyz[3 * i];
      ys[i] = p.xyz[3 * i + 1];
    }
    const fit = fitBev(xs, ys, this.bev.width, this.bev.height);

    // Sensor origin cross.
    const [ox, oy] = bevToScreen(fit, 0, 0);
    ctx.strokeStyle = "#52525b";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(ox - 6, oy);
    ctx.lineTo(ox + 6, oy);
    ctx.moveTo(ox, oy - 6);
    ctx.lineTo(ox, oy + 6);
    ctx.stroke();

    ctx.font = "11px ui-monospace, monospace";
    for (const c of detail.clusters) {
      const [x, y] = bevToScreen(fit, c.centroid[0], c.centroid[1]);
      const color = c.category === "red" ? "#f87171" : "#facc15";
      ctx.strokeStyle = c.clusterId === this.selectedCluster ? "#fafafa" : color;
      ctx.lineWidth = c.clusterId === this.selectedCluster ? 2 : 1;
      ctx.beginPath();
      ctx.arc(x, y, 10, 0, 2 * Math.PI);
      ctx.stroke();
      ctx.fillStyle = ctx.strokeStyle;
      ctx.fillText(`#${c.clusterId}`, x + 12, y - 6);
    }
  }

  private wireHover(canvas: HTMLCanvasElement, plan: () => DrawDot[]): void {
    const toCanvas = (ev: MouseEvent): [number, number] => {
      const rect = canvas.getBoundingClientRect();
      return [
        ((ev.clientX - rect.left) * canvas.width) / rect.width,
        ((ev.clientY - rect.top) * canvas.height) / rect.height,
      ];
    };
    const hit = (ev: MouseEvent): number => {
      const dots = plan();
      const [mx, my] = toCanvas(ev);
      const scale = canvas.width / canvas.getBoundingClientRect().width;
      const k = nearestPoint(
        mx,
        my,
        dots.map((d) => d.x),
        dots.map((d) => d.y),
        HIT_RADIUS_PX * scale
      );
      return k < 0 ? -1 : dots[k].index;
    };
    canvas.addEventListener("mousemove", (ev) => {
      if (!this.detail) return;
      const i = hit(ev);
      if (i < 0) {
        this.tooltip.textContent = "";
        canvas.style.cursor = "default";
        return;
      }
      this.tooltip.textContent = hoverText(this.detail, i);
      canvas.style.cursor = "pointer";
    });
    canvas.addEventListener("click", (ev) => {
      if (!this.detail || !this.onPick) return;
      const i = hit(ev);
      if (i < 0) return;
      const cid = this.detail.points.clusterIds[i];
      if (cid >= 0) this.onPick(cid);
    });
  }
}

export function clusterLabel(c: ClusterInfo): string {
  return `#${c.clusterId} ${c.category} ${c.pointCount} pts '${c.semanticName}' ${c.meanSpeedKmh.toFixed(1)} km/h`;
}
