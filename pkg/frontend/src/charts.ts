/** Pure SVG-path builders for the timeline and density views. */

export interface ChartBox {
  width: number;
  height: number;
  padLeft: number;
  padRight: number;
  padTop: number;
  padBottom: number;
}

export const DEFAULT_BOX: ChartBox = {
  width: 560,
  height: 240,
  padLeft: 36,
  padRight: 12,
  padTop: 10,
  padBottom: 22,
};

export function xScale(ticks: number[], box: ChartBox): (t: number) => number {
  const lo = Math.min(...ticks);
  const hi = Math.max(...ticks);
  const span = hi - lo || 1;
  return (t) =>
    box.padLeft + ((t - lo) / span) * (box.width - box.padLeft - box.padRight);
}

export function yScale(box: ChartBox, lo = 0, hi = 1): (v: number) => number {
  const span = hi - lo || 1;
  return (v) =>
    box.height - box.padBottom -
    ((v - lo) / span) * (box.height - box.padTop - box.padBottom);
}

function fmtCoord(v: number): string {
  return Number(v.toFixed(2)).toString();
}

/** "M x y L x y ..." polyline through the series, skipping nothing. */
export function seriesPath(
  ticks: number[],
  values: number[],
  box: ChartBox = DEFAULT_BOX,
): string {
  if (ticks.length === 0 || ticks.length !== values.length) return "";
  const sx = xScale(ticks, box);
  const sy = yScale(box);
  return ticks
    .map((t, i) => `${i === 0 ? "M" : "L"} ${fmtCoord(sx(t))} ${fmtCoord(sy(values[i]))}`)
    .join(" ");
}

/** Horizontal threshold line across the plotting area. */
export function thresholdPath(threshold: number, box: ChartBox = DEFAULT_BOX): string {
  const sy = yScale(box);
  const y = fmtCoord(sy(threshold));
  return `M ${fmtCoord(box.padLeft)} ${y} L ${fmtCoord(box.width - box.padRight)} ${y}`;
}

/** Ticks at which the series first reaches or re-crosses the threshold from below. */
export function thresholdCrossings(
  ticks: number[],
  values: number[],
  threshold: number,
): number[] {
  const crossings: number[] = [];
  for (let i = 0; i < values.length; i++) {
    const prev = i === 0 ? -Infinity : values[i - 1];
    if (values[i] >= threshold && prev < threshold) {
      crossings.push(ticks[i]);
    }
  }
  return crossings;
}

/** Closed area path for a density curve (x in data units, y unnormalized). */
export function densityPath(
  x: number[],
  y: number[],
  box: ChartBox = DEFAULT_BOX,
): string {
  if (x.length < 2 || x.length !== y.length) return "";
  const sx = xScale(x, box);
  const top = Math.max(...y) || 1;
  const sy = yScale(box, 0, top);
  const line = x
    .map((v, i) => `${i === 0 ? "M" : "L"} ${fmtCoord(sx(v))} ${fmtCoord(sy(y[i]))}`)
    .join(" ");
  const baseY = fmtCoord(sy(0));
  return `${line} L ${fmtCoord(sx(x[x.length - 1]))} ${baseY} L ${fmtCoord(sx(x[0]))} ${baseY} Z`;
}
