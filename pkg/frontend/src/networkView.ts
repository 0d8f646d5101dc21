/** Live network picture: entities colored by their most likely threat state,
 * ties weighted by posterior mean rate, hover showing the rate density. */

import { ApiClient } from "./api.js";
import { densityPath, DEFAULT_BOX } from "./charts.js";
import { edgeWidth, fmt, fmtPair, stateColor } from "./format.js";
import { computeLayout } from "./layout.js";
import type { GraphPayload, Meta } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const VIEW_W = 520;
const VIEW_H = 380;

function el<K extends keyof SVGElementTagNameMap>(
  name: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

export class NetworkView {
  private hover: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.hover = document.createElement("div");
    this.hover.className = "hovercard hidden";
    this.root.appendChild(this.hover);
  }

  render(graph: GraphPayload, meta: Meta): void {
    const old = this.root.querySelector("svg");
    if (old) old.remove();
    const svg = el("svg", {
      viewBox: `0 0 ${VIEW_W} ${VIEW_H}`,
      width: "100%",
      role: "img",
    });

    const ids = graph.entities.map((e) => e.id);
    const pairs = graph.edges.map((e) => e.pair);
    const layout = computeLayout(ids, pairs, VIEW_W, VIEW_H);

    for (const edge of graph.edges) {
      const a = layout.get(edge.pair[0]);
      const b = layout.get(edge.pair[1]);
      if (!a || !b) continue;
      const line = el("line", {
        x1: String(a.x),
        y1: String(a.y),
        x2: String(b.x),
        y2: String(b.y),
        stroke: "#8aa0b4",
        "stroke-width": String(edgeWidth(edge.mean)),
        "stroke-linecap": "round",
        class: "edge",
      });
      line.addEventListener("mouseenter", (event) =>
        this.showEdgeCard(edge.pair[0], edge.pair[1], event as MouseEvent),
      );
      line.addEventListener("mouseleave", () => this.hideCard());
      svg.appendChild(line);
    }

    for (const entity of graph.entities) {
      const pos = layout.get(entity.id);
      if (!pos) continue;
      const stateIndex = meta.states.indexOf(entity.top_state);
      const group = el("g", { class: "entity" });
      group.appendChild(
        el("circle", {
          cx: String(pos.x),
          cy: String(pos.y),
          r: "14",
          fill: stateColor(stateIndex < 0 ? 0 : stateIndex),
          stroke: "#1d2733",
          "stroke-width": "2",
        }),
      );
      const label = el("text", {
        x: String(pos.x),
        y: String(pos.y + 28),
        "text-anchor": "middle",
        class: "node-label",
      });
      label.textContent = entity.id;
      group.appendChild(label);
      const title = el("title", {});
      title.textContent = `${entity.id}: ${entity.top_state} (${entity.pi
        .map((v) => fmt(v))
        .join(", ")})`;
      group.appendChild(title);
      svg.appendChild(group);
    }

    this.root.insertBefore(svg, this.hover);

    const legend = this.root.querySelector(".legend") ?? document.createElement("div");
    legend.className = "legend";
    legend.innerHTML = meta.states
      .map(
        (name, i) =>
          `<span><i style="background:${stateColor(i)}"></i>${name}</span>`,
      )
      .join("");
    this.root.appendChild(legend);
  }

  private async showEdgeCard(a: string, b: string, event: MouseEvent): Promise<void> {
    try {
      const belief = await this.api.edgeBelief(a, b);
      const lines = [
        `<strong>${a} - ${b}</strong> (${belief.origin})`,
        `rate belief ${fmtPair(belief.alpha, belief.beta)}, mean ${fmt(belief.mean)}`,
      ];
      let curve = "";
      if (belief.density) {
        const box = { ...DEFAULT_BOX, width: 220, height: 80, padLeft: 6, padRight: 6, padTop: 6, padBottom: 6 };
        curve = `<svg viewBox="0 0 220 80" width="220" height="80"><path d="${densityPath(
          belief.density.x,
          belief.density.y,
          box,
        )}" fill="#5b84a833" stroke="#5b84a8"/></svg>`;
      }
      this.hover.innerHTML = lines.join("<br>") + curve;
      this.hover.style.left = `${event.offsetX + 18}px`;
      this.hover.style.top = `${event.offsetY + 8}px`;
      this.hover.classList.remove("hidden");
    } catch {
      this.hideCard();
    }
  }

  private hideCard(): void {
    this.hover.classList.add("hidden");
  }
}
