// Bird's-eye mapping and screen-space hit testing. Sensor x is forward and
// drawn upward, y is left and drawn leftward, so the view matches looking
// down at the car from above.

export interface BevFit {
  scale: number;
  cx: number;
  cy: number;
}

export function fitBev(
  xs: ArrayLike<number>,
  ys: ArrayLike<number>,
  width: number,
  height: number,
  margin = 16
): BevFit {
  let xmin = 0;
  let xmax = 0;
  let ymin = 0;
  let ymax = 0;
  for (let i = 0; i < xs.length; i++) {
    const x = xs[i];
    const y = ys[i];
    if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
    if (x < xmin) xmin = x;
    if (x > xmax) xmax = x;
    if (y < ymin) ymin = y;
    if (y > ymax) ymax = y;
  }
  const spanX = Math.max(xmax - xmin, 1e-6);
  const spanY = Math.max(ymax - ymin, 1e-6);
  const scale = Math.min((width - 2 * margin) / spanY, (height - 2 * margin) / spanX);
  return { scale, cx: margin + ymax * scale, cy: margin + xmax * scale };
}

export function bevToScreen(fit: BevFit, x: number, y: number): [number, number] {
  return [fit.cx - y * fit.scale, fit.cy - x * fit.scale];
}

/** Index of the closest point within maxDist of (px, py), or -1. */
export function nearestPoint(
  px: number,
  py: number,
  sx: ArrayLike<number>,
  sy: ArrayLike<number>,
  maxDist: number
): number {
  let best = -1;
  let bestSq = maxDist * maxDist;
  for (let i = 0; i < sx.length; i++) {
    const dx = sx[i] - px;
    const dy = sy[i] - py;
    if (Number.isNaN(dx) || Number.isNaN(dy)) continue;
    const d = dx * dx + dy * dy;
    if (d <= bestSq) {
      bestSq = d;
      best = i;
    }
  }
  return best;
}
