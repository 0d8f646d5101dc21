/** Tick entry: build stream records in the browser and commit them.
 *
 * The submit button locks while a commit is in flight and the payload always
 * names the tick it expects, so racing or repeated submissions cannot commit
 * twice: the service answers 409 and the console just refreshes its tick.
 */

import { ApiClient, ApiError } from "./api.js";
import type { Meta, StreamRecord } from "./types.js";

export interface PairEntryInput {
  entityA: string;
  entityB: string;
  channel: string;
  rawValue: string; // free text from the form
}

export interface SignalEntryInput {
  entity: string;
  task: string;
  value: string;
}

export function buildRecords(
  pairs: PairEntryInput[],
  signals: SignalEntryInput[],
): StreamRecord[] {
  const records: StreamRecord[] = [];
  for (const entry of pairs) {
    if (!entry.entityA || !entry.entityB) continue;
    const raw = Number(entry.rawValue);
    if (!Number.isFinite(raw) || raw < 0) {
      throw new Error(`bad raw value for ${entry.entityA}-${entry.entityB}: ${entry.rawValue}`);
    }
    records.push({
      type: "pair",
      entity_a: entry.entityA,
      entity_b: entry.entityB,
      channel_id: entry.channel,
      raw_value: raw,
      monitored: true,
    });
  }
  const byEntity = new Map<string, Record<string, number>>();
  for (const entry of signals) {
    if (!entry.entity || !entry.task) continue;
    const value = Number(entry.value);
    if (!Number.isFinite(value) || value < 0 || value > 1) {
      throw new Error(`signal for ${entry.entity}/${entry.task} must lie in [0, 1]`);
    }
    const slot = byEntity.get(entry.entity) ?? {};
    slot[entry.task] = value;
    byEntity.set(entry.entity, slot);
  }
  for (const [entity, values] of byEntity) {
    records.push({ type: "signals", entity, signals: values });
  }
  return records;
}

export class TickConsole {
  private busy = false;
  private nextTick: number;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly meta: Meta,
    private readonly onCommitted: () => Promise<void>,
  ) {
    this.nextTick = meta.tick + 1;
    this.renderForm();
  }

  private renderForm(): void {
    const channelOptions = this.meta.channels
      .map((c) => `<option value="${c}">${c}</option>`)
      .join("");
    const taskOptions = this.meta.tasks
      .map((t) => `<option value="${t}">${t}</option>`)
      .join("");
    this.root.innerHTML = `
      <div class="tick-head">next tick: <strong id="next-tick">${this.nextTick}</strong></div>
      <fieldset><legend>pair observations</legend><div id="pair-rows"></div>
        <button type="button" id="add-pair">+ pair</button></fieldset>
      <fieldset><legend>activity signals</legend><div id="signal-rows"></div>
        <button type="button" id="add-signal">+ signal</button></fieldset>
      <button type="button" id="commit">commit tick</button>
      <span id="tick-status" class="status"></span>
      <template id="pair-row">
        <div class="row">
          <input placeholder="entity a" class="pa"><input placeholder="entity b" class="pb">
          <select class="pc">${channelOptions}</select>
          <input placeholder="raw value" class="pv" value="0">
        </div>
      </template>
      <template id="signal-row">
        <div class="row">
          <input placeholder="entity" class="se">
          <select class="st">${taskOptions}</select>
          <input placeholder="signal 0..1" class="sv" value="0.5">
        </div>
      </template>`;
    this.root.querySelector("#add-pair")!.addEventListener("click", () =>
      this.addRow("pair-row", "pair-rows"),
    );
    this.root.querySelector("#add-signal")!.addEventListener("click", () =>
      this.addRow("signal-row", "signal-rows"),
    );
    this.root.querySelector("#commit")!.addEventListener("click", () => {
      void this.submit();
    });
    this.addRow("pair-row", "pair-rows");
  }

  private addRow(templateId: string, containerId: string): void {
    const template = this.root.querySelector<HTMLTemplateElement>(`#${templateId}`)!;
    this.root
      .querySelector(`#${containerId}`)!
      .appendChild(template.content.cloneNode(true));
  }

  setNextTick(tick: number): void {
    this.nextTick = tick;
    const label = this.root.querySelector("#next-tick");
    if (label) label.textContent = String(tick);
  }

  private collect(): StreamRecord[] {
    const pairs: PairEntryInput[] = [];
    for (const row of this.root.querySelectorAll("#pair-rows .row")) {
      pairs.push({
        entityA: row.querySelector<HTMLInputElement>(".pa")!.value.trim(),
        entityB: row.querySelector<HTMLInputElement>(".pb")!.value.trim(),
        channel: row.querySelector<HTMLSelectElement>(".pc")!.value,
        rawValue: row.querySelector<HTMLInputElement>(".pv")!.value,
      });
    }
    const signals: SignalEntryInput[] = [];
    for (const row of this.root.querySelectorAll("#signal-rows .row")) {
      signals.push({
        entity: row.querySelector<HTMLInputElement>(".se")!.value.trim(),
        task: row.querySelector<HTMLSelectElement>(".st")!.value,
        value: row.querySelector<HTMLInputElement>(".sv")!.value,
      });
    }
    return buildRecords(pairs, signals);
  }

  private async submit(): Promise<void> {
    if (this.busy) return;
    const status = this.root.querySelector<HTMLElement>("#tick-status")!;
    const button = this.root.querySelector<HTMLButtonElement>("#commit")!;
    this.busy = true;
    button.disabled = true;
    status.textContent = "committing...";
    try {
      const records = this.collect();
      const response = await this.api.postTick(this.nextTick, records);
      status.textContent = `committed tick ${response.committed.tick}`;
      this.setNextTick(response.committed.tick + 1);
      await this.onCommitted();
    } catch (error) {
      if (error instanceof ApiError && error.isConflict) {
        status.textContent = `conflict: ${error.message}; refreshing`;
        const meta = await this.api.meta();
        this.setNextTick(meta.tick + 1);
      } else {
        status.textContent = `rejected: ${(error as Error).message}`;
      }
    } finally {
      this.busy = false;
      button.disabled = false;
    }
  }
}
