/** Console bootstrap: wire the four views against the service API. */

import { ApiClient } from "./api.js";
import { fmt } from "./format.js";
import { NetworkView } from "./networkView.js";
import { TickConsole } from "./tickConsole.js";
import { TimelineView } from "./timeline.js";
import { WhatIfPanel } from "./whatIfPanel.js";

async function bootstrap(): Promise<void> {
  const api = new ApiClient("");
  const meta = await api.meta();

  document.getElementById("scenario-name")!.textContent = meta.name;
  const network = new NetworkView(document.getElementById("network")!, api);
  const timelines = meta.cells.map(
    (cellId) =>
      new TimelineView(document.getElementById("timeline")!, api, cellId),
  );
  new WhatIfPanel(document.getElementById("what-if")!, api, meta);

  const refresh = async (): Promise<void> => {
    const [current, graph] = await Promise.all([api.meta(), api.graph()]);
    network.render(graph, current);
    for (const timeline of timelines) await timeline.refresh();
    document.getElementById("tick-label")!.textContent = String(current.tick);
    document.getElementById("loglik-label")!.textContent = fmt(
      current.cum_log_marginal,
      4,
    );
  };

  new TickConsole(document.getElementById("tick-console")!, api, meta, refresh);
  await refresh();
}

bootstrap().catch((error) => {
  const banner = document.getElementById("status-banner");
  if (banner) banner.textContent = `console failed to start: ${error}`;
});
