/** Per-cell indicator timeline with a configurable warning threshold. */

import { ApiClient } from "./api.js";
import {
  DEFAULT_BOX,
  seriesPath,
  thresholdCrossings,
  thresholdPath,
  xScale,
  yScale,
} from "./charts.js";
import { fmt, INDICATOR_LABELS, MEASURE_LABELS } from "./format.js";
import type { IndicatorSeriesPayload } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const SERIES_COLORS = ["#e4572e", "#e09f3e", "#4f9d69", "#4c86a8", "#7d5ba6"];

export class TimelineView {
  threshold = 0.15;
  private mode: "phi" | "m" = "phi";
  private last: IndicatorSeriesPayload | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly cellId: string,
  ) {
    const controls = document.createElement("div");
    controls.className = "controls";
    controls.innerHTML = `
      <label>threshold <input type="number" step="0.01" min="0" max="1"
             value="${this.threshold}" id="threshold-input"></label>
      <label><input type="radio" name="series-mode" value="phi" checked> indicators</label>
      <label><input type="radio" name="series-mode" value="m"> measures</label>`;
    this.root.appendChild(controls);
    controls.querySelector<HTMLInputElement>("#threshold-input")!.addEventListener(
      "change",
      (event) => {
        this.threshold = Number((event.target as HTMLInputElement).value);
        this.redraw();
      },
    );
    for (const radio of controls.querySelectorAll<HTMLInputElement>("input[type=radio]")) {
      radio.addEventListener("change", () => {
        this.mode = radio.value as "phi" | "m";
        this.redraw();
      });
    }
  }

  async refresh(): Promise<void> {
    this.last = await this.api.cellIndicators(this.cellId);
    this.redraw();
  }

  private redraw(): void {
    if (!this.last) return;
    const old = this.root.querySelector("svg");
    if (old) old.remove();
    const oldNote = this.root.querySelector(".crossings");
    if (oldNote) oldNote.remove();

    const box = DEFAULT_BOX;
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${box.width} ${box.height}`);
    svg.setAttribute("width", "100%");

    const ticks = this.last.series.map((p) => p.tick);
    if (ticks.length === 0) {
      this.root.appendChild(svg);
      return;
    }
    const labels = this.mode === "phi" ? INDICATOR_LABELS : MEASURE_LABELS;
    const pick = (i: number) =>
      this.last!.series.map((p) => (this.mode === "phi" ? p.phi[i] : p.m[i]));

    for (const grid of [0, 0.25, 0.5, 0.75, 1]) {
      const y = yScale(box)(grid);
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(box.padLeft));
      line.setAttribute("x2", String(box.width - box.padRight));
      line.setAttribute("y1", String(y));
      line.setAttribute("y2", String(y));
      line.setAttribute("class", "gridline");
      svg.appendChild(line);
      const tag = document.createElementNS(SVG_NS, "text");
      tag.setAttribute("x", "4");
      tag.setAttribute("y", String(y + 4));
      tag.setAttribute("class", "axis-label");
      tag.textContent = fmt(grid, 2);
      svg.appendChild(tag);
    }

    labels.forEach((label, i) => {
      const path = document.createElementNS(SVG_NS, "path");
      path.setAttribute("d", seriesPath(ticks, pick(i), box));
      path.setAttribute("fill", "none");
      path.setAttribute("stroke", SERIES_COLORS[i]);
      path.setAttribute("stroke-width", "2");
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = label;
      path.appendChild(title);
      svg.appendChild(path);
    });

    const tpath = document.createElementNS(SVG_NS, "path");
    tpath.setAttribute("d", thresholdPath(this.threshold, box));
    tpath.setAttribute("class", "threshold");
    svg.appendChild(tpath);

    const sx = xScale(ticks, box);
    const sy = yScale(box);
    const notes: string[] = [];
    labels.forEach((label, i) => {
      for (const tick of thresholdCrossings(ticks, pick(i), this.threshold)) {
        const idx = ticks.indexOf(tick);
        const dot = document.createElementNS(SVG_NS, "circle");
        dot.setAttribute("cx", String(sx(tick)));
        dot.setAttribute("cy", String(sy(pick(i)[idx])));
        dot.setAttribute("r", "4");
        dot.setAttribute("fill", SERIES_COLORS[i]);
        dot.setAttribute("stroke", "#fff");
        svg.appendChild(dot);
        notes.push(`${label} reaches ${fmt(this.threshold)} at t${tick}`);
      }
    });

    const xAxis = document.createElementNS(SVG_NS, "text");
    xAxis.setAttribute("x", String(box.width / 2));
    xAxis.setAttribute("y", String(box.height - 4));
    xAxis.setAttribute("class", "axis-label");
    xAxis.setAttribute("text-anchor", "middle");
    xAxis.textContent = `tick (${ticks[0]} .. ${ticks[ticks.length - 1]})`;
    svg.appendChild(xAxis);

    this.root.appendChild(svg);
    const note = document.createElement("div");
    note.className = "crossings";
    note.innerHTML =
      notes.length === 0
        ? "no threshold crossings yet"
        : notes.map((n) => `<span>${n}</span>`).join(" ");
    this.root.appendChild(note);

    const legend = this.root.querySelector(".series-legend") ?? document.createElement("div");
    legend.className = "series-legend";
    legend.innerHTML = labels
      .map((l, i) => `<span><i style="background:${SERIES_COLORS[i]}"></i>${l}</span>`)
      .join("");
    this.root.appendChild(legend);
  }
}
