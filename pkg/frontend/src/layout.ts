/** Deterministic force-directed layout (Fruchterman-Reingold style).
 *
 * No randomness: nodes start on a circle in sorted-id order and the
 * simulation runs a fixed cooling schedule, so the same graph always lands
 * in the same picture.
 */

export interface Point {
  x: number;
  y: number;
}

export function computeLayout(
  ids: string[],
  edges: Array<[string, string]>,
  width: number,
  height: number,
  iterations = 250,
): Map<string, Point> {
  const order = [...ids].sort();
  const n = order.length;
  const positions = new Map<string, Point>();
  if (n === 0) return positions;

  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(width, height) * 0.35;
  order.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / n - Math.PI / 2;
    positions.set(id, {
      x: cx + radius * Math.cos(angle),
      y: cy + radius * Math.sin(angle),
    });
  });
  if (n === 1) {
    positions.set(order[0], { x: cx, y: cy });
    return positions;
  }

  const index = new Map(order.map((id, i) => [id, i]));
  const xs = order.map((id) => positions.get(id)!.x);
  const ys = order.map((id) => positions.get(id)!.y);
  const links = edges
    .filter(([a, b]) => index.has(a) && index.has(b) && a !== b)
    .map(([a, b]) => [index.get(a)!, index.get(b)!] as [number, number]);

  const area = width * height;
  const k = Math.sqrt(area / n) * 0.6;
  let temperature = Math.min(width, height) / 8;
  const cool = temperature / (iterations + 1);

  for (let step = 0; step < iterations; step++) {
    const dx = new Array<number>(n).fill(0);
    const dy = new Array<number>(n).fill(0);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let vx = xs[i] - xs[j];
        let vy = ys[i] - ys[j];
        let dist = Math.hypot(vx, vy);
        if (dist < 1e-9) {
          // deterministic tie-break for coincident nodes
          vx = 0.01 * (i - j);
          vy = 0.01;
          dist = Math.hypot(vx, vy);
        }
        const repulse = (k * k) / dist;
        dx[i] += (vx / dist) * repulse;
        dy[i] += (vy / dist) * repulse;
        dx[j] -= (vx / dist) * repulse;
        dy[j] -= (vy / dist) * repulse;
      }
    }
    for (const [i, j] of links) {
      const vx = xs[i] - xs[j];
      const vy = ys[i] - ys[j];
      const dist = Math.max(Math.hypot(vx, vy), 1e-9);
      const attract = (dist * dist) / k;
      dx[i] -= (vx / dist) * attract;
      dy[i] -= (vy / dist) * attract;
      dx[j] += (vx / dist) * attract;
      dy[j] += (vy / dist) * attract;
    }
    for (let i = 0; i < n; i++) {
      const disp = Math.hypot(dx[i], dy[i]);
      if (disp > 1e-9) {
        const limited = Math.min(disp, temperature);
        xs[i] += (dx[i] / disp) * limited;
        ys[i] += (dy[i] / disp) * limited;
      }
      const margin = 24;
      xs[i] = Math.min(width - margin, Math.max(margin, xs[i]));
      ys[i] = Math.min(height - margin, Math.max(margin, ys[i]));
    }
    temperature -= cool;
  }

  order.forEach((id, i) => positions.set(id, { x: xs[i], y: ys[i] }));
  return positions;
}

/** Mean pairwise distance between the given node pairs; layout diagnostics. */
export function meanDistance(
  positions: Map<string, Point>,
  pairs: Array<[string, string]>,
): number {
  if (pairs.length === 0) return 0;
  let total = 0;
  for (const [a, b] of pairs) {
    const pa = positions.get(a)!;
    const pb = positions.get(b)!;
    total += Math.hypot(pa.x - pb.x, pa.y - pb.y);
  }
  return total / pairs.length;
}
