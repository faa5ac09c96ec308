/**
 * Session wiring: evidence selection, view switching, request lifecycles.
 *
 * Two rules hold everywhere. First, no probability arithmetic happens here;
 * every number on screen is read out of an API response (or echoed user
 * input). Second, requests follow latest-wins: each refresh bumps a sequence
 * number, aborts the previous in-flight call, and a response is dropped
 * unless its sequence still matches when it lands, so a slow stale answer
 * can never overwrite a newer one.
 */

import {
  ApiClient,
  ApiError,
  mpePayload,
  queryPayload,
  type Evidence,
  type MpePayload as MpeResponse,
  type NetworkPayload,
  type Posterior,
  type SensitivityPayload,
  type TemporalPosterior,
  type TornadoPayload,
} from "./api.js";
import { layoutNetwork, type Point } from "./layout.js";
import {
  displayOrder,
  el,
  nodeByName,
  renderDistribution,
  renderGraph,
  renderMpeTable,
  renderSensitivityTable,
  renderTornado,
  type MpeColumn,
} from "./render.js";
import { formatPercent } from "./format.js";

export type ViewName = "graph" | "sweep" | "mpe" | "tornado";

const VIEW_LABELS: Array<[ViewName, string]> = [
  ["graph", "Network"],
  ["sweep", "Evidence sweep"],
  ["mpe", "Most probable states"],
  ["tornado", "Sensitivity"],
];

const GRAPH_W = 640;
const GRAPH_H = 420;
const TORNADO_TOP_K = 20;

// cached marker for a payload the service answered 422 for
const IMPOSSIBLE = Symbol("impossible");

function evidenceObject(map: Map<string, string>): Evidence {
  const out: Evidence = {};
  for (const k of [...map.keys()].sort()) out[k] = map.get(k)!;
  return out;
}

function errorText(err: unknown): string {
  if (err instanceof ApiError) {
    return err.status > 0 ? `service error (${err.status}): ${err.message}` : err.message;
  }
  return err instanceof Error ? err.message : String(err);
}

export class App {
  readonly client: ApiClient;

  private root: HTMLElement;
  private network: NetworkPayload | null = null;
  private positions = new Map<string, Point>();
  private evidence = new Map<string, string>();
  private view: ViewName = "graph";
  private tornadoTargetState = "";

  // responses keyed by the exact request payload
  private cache = new Map<string, unknown>();

  private querySeq = 0;
  private queryAbort: AbortController | null = null;
  private mpeSeq = 0;
  private tornadoSeq = 0;
  private viewToken = 0;

  private pending = new Set<Promise<unknown>>();

  private banner!: HTMLElement;
  private targetLabel!: HTMLElement;
  private tabs!: HTMLElement;
  private viewHost!: HTMLElement;

  constructor(root: HTMLElement, client: ApiClient) {
    this.root = root;
    this.client = client;
  }

  start(): Promise<void> {
    return this.track(this.init());
  }

  /** Resolves once no tracked request or render is outstanding. */
  async idle(): Promise<void> {
    while (this.pending.size > 0) {
      await Promise.allSettled([...this.pending]);
    }
  }

  private track<T>(p: Promise<T>): Promise<T> {
    this.pending.add(p);
    const drop = () => this.pending.delete(p);
    p.then(drop, drop);
    return p;
  }

  private async init(): Promise<void> {
    this.renderShell();
    let net: NetworkPayload;
    try {
      net = await this.client.network();
    } catch (err) {
      this.showBanner(errorText(err));
      this.viewHost.replaceChildren(el("div", "empty-view", "no model loaded"));
      return;
    }
    this.network = net;
    this.positions = layoutNetwork(
      net.nodes.map((n) => n.name),
      net.edges.map((e) => [e.parent, e.child] as [string, string]),
      GRAPH_W,
      GRAPH_H,
    );
    const target = nodeByName(net, net.target);
    this.tornadoTargetState = target ? displayOrder(target.states)[0] : "";
    this.targetLabel.textContent = "target: " + net.target;
    await this.renderView();
  }

  // ---- evidence -------------------------------------------------------

  /** unset -> High -> Neutral -> Low -> unset (declared order for non-ternary nodes). */
  cycleEvidence(name: string): Promise<void> {
    if (!this.network || name === this.network.target) return Promise.resolve();
    const node = nodeByName(this.network, name);
    if (!node) return Promise.resolve();
    const order = displayOrder(node.states);
    const current = this.evidence.get(name);
    const idx = current === undefined ? -1 : order.indexOf(current);
    const next = idx + 1 >= order.length ? undefined : order[idx + 1];
    if (next === undefined) {
      this.evidence.delete(name);
    } else {
      this.evidence.set(name, next);
    }
    return this.onEvidenceChanged();
  }

  setEvidence(name: string, state: string | null): Promise<void> {
    if (!this.network || name === this.network.target) return Promise.resolve();
    if (state === null) {
      if (!this.evidence.delete(name)) return Promise.resolve();
    } else {
      this.evidence.set(name, state);
    }
    return this.onEvidenceChanged();
  }

  clearEvidence(): Promise<void> {
    if (this.evidence.size === 0) return Promise.resolve();
    this.evidence.clear();
    return this.onEvidenceChanged();
  }

  private onEvidenceChanged(): Promise<void> {
    this.updateGraphPane();
    if (this.view === "graph") return this.track(this.refreshQuery());
    if (this.view === "mpe") return this.track(this.refreshMpe());
    return Promise.resolve();
  }

  // ---- shell ----------------------------------------------------------

  private renderShell(): void {
    const header = el("header", "topbar");
    header.appendChild(el("h1", "", "What-if explorer"));
    this.targetLabel = el("span", "target-label", "");
    header.appendChild(this.targetLabel);
    this.banner = el("div", "banner hidden");
    header.appendChild(this.banner);

    this.tabs = el("nav", "tabs");
    for (const [name, label] of VIEW_LABELS) {
      const button = el("button", "tab", label);
      button.setAttribute("data-view", name);
      button.addEventListener("click", () => {
        void this.switchView(name);
      });
      this.tabs.appendChild(button);
    }

    this.viewHost = el("main", "view-host");
    this.viewHost.id = "view";
    this.root.replaceChildren(header, this.tabs, this.viewHost);
  }

  switchView(view: ViewName): Promise<void> {
    this.view = view;
    return this.track(this.renderView());
  }

  private renderView(): Promise<void> {
    this.viewToken += 1;
    for (const button of this.tabs.querySelectorAll(".tab")) {
      button.classList.toggle("active", button.getAttribute("data-view") === this.view);
    }
    if (!this.network) {
      this.viewHost.replaceChildren(el("div", "empty-view", "no model loaded"));
      return Promise.resolve();
    }
    switch (this.view) {
      case "graph":
        return this.renderGraphView();
      case "sweep":
        return this.refreshSweep();
      case "mpe":
        this.viewHost.replaceChildren(el("div", "mpe-view loading", "loading"));
        return this.refreshMpe();
      case "tornado":
        return this.refreshTornado();
    }
  }

  private showBanner(text: string): void {
    this.banner.textContent = text;
    this.banner.classList.remove("hidden");
  }

  private hideBanner(): void {
    this.banner.textContent = "";
    this.banner.classList.add("hidden");
  }

  // ---- graph view -----------------------------------------------------

  private renderGraphView(): Promise<void> {
    const container = el("div", "graph-view");
    const graphPane = el("div", "graph-pane");
    graphPane.id = "graph-pane";
    const posteriorPane = el("div", "posterior-pane");
    const notice = el("div", "notice hidden");
    notice.id = "query-notice";
    const posterior = el("div", "posterior");
    posterior.id = "posterior";
    posteriorPane.appendChild(notice);
    posteriorPane.appendChild(posterior);
    container.appendChild(graphPane);
    container.appendChild(posteriorPane);
    this.viewHost.replaceChildren(container);
    this.updateGraphPane();
    return this.track(this.refreshQuery());
  }

  /** Rebuilds the SVG and evidence chips; the posterior pane is left alone. */
  private updateGraphPane(): void {
    const pane = this.root.querySelector("#graph-pane");
    if (!pane || !this.network) return;
    const svg = renderGraph(this.network, this.positions, this.evidence, GRAPH_W, GRAPH_H, (name) => {
      void this.cycleEvidence(name);
    });
    const controls = el("div", "graph-controls");
    const hint = el("span", "hint", "click a node to cycle evidence");
    controls.appendChild(hint);
    const clear = el("button", "clear-evidence", "Clear evidence");
    clear.addEventListener("click", () => {
      void this.clearEvidence();
    });
    controls.appendChild(clear);
    const chips = el("div", "evidence-chips");
    for (const [name, state] of [...this.evidence.entries()].sort()) {
      const chip = el("span", "chip", `${name}=${state}`);
      const remove = el("button", "chip-x", "×");
      remove.addEventListener("click", () => {
        void this.setEvidence(name, null);
      });
      chip.appendChild(remove);
      chips.appendChild(chip);
    }
    pane.replaceChildren(svg, controls, chips);
  }

  private showNotice(text: string): void {
    const notice = this.root.querySelector("#query-notice");
    if (notice) {
      notice.textContent = text;
      notice.classList.remove("hidden");
    }
  }

  private hideNotice(): void {
    const notice = this.root.querySelector("#query-notice");
    if (notice) {
      notice.textContent = "";
      notice.classList.add("hidden");
    }
  }

  private baselineResponse(): Posterior | TemporalPosterior | undefined {
    const net = this.network!;
    const slice = net.has_two_slice ? "temporal" : "static";
    const key = "query " + JSON.stringify(queryPayload(net.target, {}, slice));
    return this.cache.get(key) as Posterior | TemporalPosterior | undefined;
  }

  private async refreshQuery(): Promise<void> {
    const net = this.network;
    if (!net) return;
    const panel = this.root.querySelector("#posterior");
    if (!panel) return;
    const ev = evidenceObject(this.evidence);
    const slice = net.has_two_slice ? ("temporal" as const) : ("static" as const);
    const key = "query " + JSON.stringify(queryPayload(net.target, ev, slice));

    const seq = ++this.querySeq;
    if (this.queryAbort) this.queryAbort.abort();

    const cached = this.cache.get(key);
    if (cached !== undefined) {
      this.renderPosterior(cached as Posterior | TemporalPosterior);
      return;
    }

    const ctrl = new AbortController();
    this.queryAbort = ctrl;
    let resp: Posterior | TemporalPosterior;
    try {
      resp =
        slice === "temporal"
          ? await this.client.queryTemporal(net.target, ev, ctrl.signal)
          : await this.client.queryStatic(net.target, ev, ctrl.signal);
    } catch (err) {
      if (seq !== this.querySeq) return; // superseded while failing
      if ((err as Error).name === "AbortError") return;
      if (err instanceof ApiError && err.status === 422) {
        // keep the previous result on screen, just flag the combination
        this.showNotice("impossible evidence: " + err.message);
        return;
      }
      this.showBanner(errorText(err));
      panel.replaceChildren(el("div", "empty-view", "no result"));
      return;
    }
    if (seq !== this.querySeq) return; // stale response, a newer request owns the panel
    this.cache.set(key, resp);
    this.renderPosterior(resp);
  }

  private renderPosterior(resp: Posterior | TemporalPosterior): void {
    const panel = this.root.querySelector("#posterior");
    if (!panel) return;
    this.hideNotice();
    this.hideBanner();
    const base = this.baselineResponse();
    const blocks: HTMLElement[] = [];
    if ("at_T" in resp) {
      const baseT = base && "at_T" in base ? base.at_T : undefined;
      const baseT1 = base && "at_T" in base ? base["at_T+1"] : undefined;
      blocks.push(renderDistribution("today", resp.at_T, this.alignBaseline(resp.at_T, baseT)));
      blocks.push(renderDistribution("next day", resp["at_T+1"], this.alignBaseline(resp["at_T+1"], baseT1)));
    } else {
      const baseT = base && !("at_T" in base) ? base : undefined;
      blocks.push(renderDistribution("today", resp, this.alignBaseline(resp, baseT)));
    }
    panel.replaceChildren(...blocks);
  }

  /** Baseline values reordered to the report's state order; indexes only, no math. */
  private alignBaseline(report: Posterior, base: Posterior | undefined): number[] | undefined {
    if (!base) return undefined;
    return report.states.map((s) => base.distribution[base.states.indexOf(s)]);
  }

  // ---- sweep view -----------------------------------------------------

  private async refreshSweep(): Promise<void> {
    const net = this.network!;
    const token = this.viewToken;
    const container = el("div", "sweep-view loading", "loading");
    this.viewHost.replaceChildren(container);

    const target = nodeByName(net, net.target)!;
    const probes: Array<{ node: string; state: string }> = [];
    for (const node of net.nodes) {
      if (node.name === net.target) continue;
      const order = displayOrder(node.states);
      const wanted = order.length === 3 ? [order[0], order[2]] : order;
      for (const state of wanted) probes.push({ node: node.name, state });
    }

    let rows: Array<{ probe: { node: string; state: string }; result: Posterior | "impossible" }>;
    try {
      rows = await Promise.all(
        probes.map(async (probe) => {
          const ev: Evidence = { [probe.node]: probe.state };
          const key = "query " + JSON.stringify(queryPayload(net.target, ev, "static"));
          const cached = this.cache.get(key);
          if (cached !== undefined) {
            return { probe, result: cached === IMPOSSIBLE ? ("impossible" as const) : (cached as Posterior) };
          }
          try {
            const resp = await this.client.queryStatic(net.target, ev);
            this.cache.set(key, resp);
            return { probe, result: resp };
          } catch (err) {
            if (err instanceof ApiError && err.status === 422) {
              this.cache.set(key, IMPOSSIBLE);
              return { probe, result: "impossible" as const };
            }
            throw err;
          }
        }),
      );
    } catch (err) {
      if (token !== this.viewToken) return;
      this.showBanner(errorText(err));
      container.replaceChildren(el("div", "empty-view", "no result"));
      container.classList.remove("loading");
      return;
    }
    if (token !== this.viewToken) return;
    this.hideBanner();

    const states = displayOrder(target.states);
    const table = el("table", "sweep-table") as HTMLTableElement;
    const thead = el("thead");
    const head = el("tr");
    head.appendChild(el("th", "", "evidence"));
    for (const s of states) head.appendChild(el("th", "", net.target + " " + s));
    thead.appendChild(head);
    table.appendChild(thead);
    const tbody = el("tbody");
    for (const { probe, result } of rows) {
      const row = el("tr");
      row.setAttribute("data-probe", `${probe.node}=${probe.state}`);
      row.appendChild(el("td", "sweep-evidence", `${probe.node}=${probe.state}`));
      if (result === "impossible") {
        row.classList.add("impossible");
        for (const _s of states) row.appendChild(el("td", "sweep-impossible", "-"));
      } else {
        for (const s of states) {
          const i = result.states.indexOf(s);
          row.appendChild(el("td", "prob-value", formatPercent(result.distribution[i])));
        }
      }
      tbody.appendChild(row);
    }
    table.appendChild(tbody);

    const intro = el("p", "view-note", "distribution of " + net.target + " under each single-evidence probe");
    container.classList.remove("loading");
    container.replaceChildren(intro, table);
  }

  // ---- mpe view -------------------------------------------------------

  private async refreshMpe(): Promise<void> {
    const net = this.network!;
    const token = this.viewToken;
    const seq = ++this.mpeSeq;
    const target = nodeByName(net, net.target)!;
    const ev = evidenceObject(this.evidence);
    const states = displayOrder(target.states);

    let columns: MpeColumn[];
    try {
      columns = await Promise.all(
        states.map(async (state) => {
          const clamped: Evidence = { ...ev, [net.target]: state };
          const key = "mpe " + JSON.stringify(mpePayload(clamped));
          const cached = this.cache.get(key);
          if (cached !== undefined) {
            return { state, result: cached === IMPOSSIBLE ? ("impossible" as const) : (cached as MpeResponse) };
          }
          try {
            const resp = await this.client.mpe(clamped);
            this.cache.set(key, resp);
            return { state, result: resp };
          } catch (err) {
            if (err instanceof ApiError && err.status === 422) {
              this.cache.set(key, IMPOSSIBLE);
              return { state, result: "impossible" as const };
            }
            throw err;
          }
        }),
      );
    } catch (err) {
      if (token !== this.viewToken || seq !== this.mpeSeq) return;
      this.showBanner(errorText(err));
      this.viewHost.replaceChildren(el("div", "empty-view", "no result"));
      return;
    }
    if (token !== this.viewToken || seq !== this.mpeSeq) return;
    this.hideBanner();

    const container = el("div", "mpe-view");
    container.appendChild(
      el("p", "view-note", "most probable joint assignment with " + net.target + " clamped to each state"),
    );
    container.appendChild(renderMpeTable(net, this.evidence, columns));
    this.viewHost.replaceChildren(container);
  }

  // ---- tornado view ---------------------------------------------------

  setTornadoState(state: string): Promise<void> {
    this.tornadoTargetState = state;
    if (this.view !== "tornado") return Promise.resolve();
    return this.track(this.refreshTornado());
  }

  private async refreshTornado(): Promise<void> {
    const net = this.network!;
    const token = this.viewToken;
    const seq = ++this.tornadoSeq;
    const state = this.tornadoTargetState;
    const container = el("div", "tornado-view loading", "loading");
    this.viewHost.replaceChildren(container);

    const sensKey = "sensitivity " + net.target;
    const tornKey = `tornado ${net.target} ${state} ${TORNADO_TOP_K}`;
    let sens: SensitivityPayload;
    let torn: TornadoPayload;
    try {
      [sens, torn] = await Promise.all([
        (async () => {
          const cached = this.cache.get(sensKey);
          if (cached !== undefined) return cached as SensitivityPayload;
          const resp = await this.client.sensitivity(net.target);
          this.cache.set(sensKey, resp);
          return resp;
        })(),
        (async () => {
          const cached = this.cache.get(tornKey);
          if (cached !== undefined) return cached as TornadoPayload;
          const resp = await this.client.tornado(net.target, state, TORNADO_TOP_K);
          this.cache.set(tornKey, resp);
          return resp;
        })(),
      ]);
    } catch (err) {
      if (token !== this.viewToken || seq !== this.tornadoSeq) return;
      this.showBanner(errorText(err));
      container.replaceChildren(el("div", "empty-view", "no result"));
      container.classList.remove("loading");
      return;
    }
    if (token !== this.viewToken || seq !== this.tornadoSeq) return;
    this.hideBanner();

    const targetNode = nodeByName(net, net.target)!;
    const picker = el("div", "state-picker");
    picker.appendChild(el("span", "hint", net.target + " state:"));
    for (const s of displayOrder(targetNode.states)) {
      const button = el("button", "state-button" + (s === state ? " active" : ""), s);
      button.setAttribute("data-state", s);
      button.addEventListener("click", () => {
        void this.setTornadoState(s);
      });
      picker.appendChild(button);
    }

    container.classList.remove("loading");
    container.replaceChildren(
      picker,
      el("h3", "section-title", "table entries moving P(" + net.target + "=" + state + ")"),
      renderTornado(torn),
      el("h3", "section-title", "per-node influence"),
      renderSensitivityTable(sens),
    );
  }
}
