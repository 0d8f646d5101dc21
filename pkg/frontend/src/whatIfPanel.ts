/** What-if probes: pick an intervention, see the before/after indicator
 * table. Strictly read-only against the server state. */

import { ApiClient } from "./api.js";
import { changedRows, fmt, indicatorDiff } from "./format.js";
import type { Meta, WhatIfRequest, WhatIfResponse } from "./types.js";

export class WhatIfPanel {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly meta: Meta,
  ) {
    this.renderForm();
  }

  private renderForm(): void {
    const cellOptions = this.meta.cells
      .map((c) => `<option value="${c}">${c}</option>`)
      .join("");
    this.root.innerHTML = `
      <div class="row">
        <select id="wi-kind">
          <option value="remove_member">remove member from cell</option>
          <option value="sever_edge">sever edge</option>
          <option value="set_edge_belief">set edge belief</option>
          <option value="set_threshold">set cohesion threshold</option>
          <option value="set_ideal_size">set ideal size</option>
        </select>
        <select id="wi-cell">${cellOptions}</select>
        <input id="wi-member" placeholder="member">
        <input id="wi-a" placeholder="entity a"><input id="wi-b" placeholder="entity b">
        <input id="wi-alpha" placeholder="alpha"><input id="wi-beta" placeholder="beta">
        <input id="wi-value" placeholder="value">
        <button type="button" id="wi-run">probe</button>
      </div>
      <div id="wi-result"></div>`;
    this.root.querySelector("#wi-run")!.addEventListener("click", () => {
      void this.run();
    });
  }

  private read(id: string): string {
    return this.root.querySelector<HTMLInputElement>(`#${id}`)!.value.trim();
  }

  buildRequest(): WhatIfRequest {
    const kind = this.root.querySelector<HTMLSelectElement>("#wi-kind")!.value;
    const request: WhatIfRequest = { kind };
    const cell = this.root.querySelector<HTMLSelectElement>("#wi-cell")!.value;
    if (kind === "remove_member") {
      request.cell_id = cell;
      request.member = this.read("wi-member");
    } else if (kind === "sever_edge") {
      const a = this.read("wi-a");
      const b = this.read("wi-b");
      if (a && b) request.pair = [a, b];
    } else if (kind === "set_edge_belief") {
      request.pair = [this.read("wi-a"), this.read("wi-b")];
      request.alpha = Number(this.read("wi-alpha"));
      request.beta = Number(this.read("wi-beta"));
    } else {
      request.cell_id = cell;
      request.value = Number(this.read("wi-value"));
    }
    return request;
  }

  private async run(): Promise<void> {
    const result = this.root.querySelector<HTMLElement>("#wi-result")!;
    try {
      const response = await this.api.whatIf(this.buildRequest());
      result.innerHTML = renderDiffTable(response);
    } catch (error) {
      result.innerHTML = `<p class="status">rejected: ${(error as Error).message}</p>`;
    }
  }
}

/** Before/after table at displayed precision; changed rows are highlighted. */
export function renderDiffTable(response: WhatIfResponse): string {
  const sections = response.before.map((before, k) => {
    const after = response.after[k];
    const rows = indicatorDiff(before, after);
    const changed = changedRows(rows);
    const body = rows
      .map(
        (row) => `
        <tr class="${changed.has(row.label) ? "changed" : ""}">
          <td>${row.label}</td><td>${fmt(row.before)}</td><td>${fmt(row.after)}</td>
        </tr>`,
      )
      .join("");
    const note = after.inputs["connectivity_broken"]
      ? `<p class="warn">connectivity broken under this intervention</p>`
      : "";
    return `
      <h4>cell ${before.cell_id} @ t${before.tick}</h4>
      <table><thead><tr><th></th><th>before</th><th>after</th></tr></thead>
      <tbody>${body}</tbody></table>${note}`;
  });
  return sections.join("");
}
