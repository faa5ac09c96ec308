/** DOM builders. Pure functions of the data they are given, so re-rendering
 * the same payload reproduces the same markup. */

import type {
  MpePayload,
  NetworkEdge,
  NetworkNode,
  NetworkPayload,
  Posterior,
  SensitivityPayload,
  TornadoPayload,
} from "./api.js";
import { formatLogProb, formatMeasure, formatPercent, formatSigned } from "./format.js";
import { edgeWidth, type Point } from "./layout.js";

export const SVG_NS = "http://www.w3.org/2000/svg";

export function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Ternary panels read top-down as High, Neutral, Low; anything else keeps declared order. */
export function displayOrder(states: string[]): string[] {
  const tri = ["Low", "Neutral", "High"];
  if (states.length === 3 && tri.every((s) => states.includes(s))) {
    return ["High", "Neutral", "Low"];
  }
  return states.slice();
}

/**
 * Three-bar distribution block. `baseline` is aligned to `report.states`
 * and comes from the cached empty-evidence response, never from arithmetic.
 */
export function renderDistribution(title: string, report: Posterior, baseline?: number[]): HTMLElement {
  const block = el("div", "dist-block");
  block.appendChild(el("h3", "dist-title", title));
  displayOrder(report.states).forEach((state) => {
    const i = report.states.indexOf(state);
    const p = report.distribution[i];
    const row = el("div", "dist-row");
    row.setAttribute("data-state", state);
    row.appendChild(el("span", "state-name", state));
    const track = el("div", "bar-track");
    const fill = el("div", "bar-fill bar-" + state.toLowerCase());
    fill.style.width = (100 * p).toFixed(2) + "%";
    track.appendChild(fill);
    if (baseline) {
      const tick = el("div", "baseline-tick");
      tick.style.left = (100 * baseline[i]).toFixed(2) + "%";
      tick.title = "baseline " + formatPercent(baseline[i]);
      track.appendChild(tick);
    }
    row.appendChild(track);
    row.appendChild(el("span", "prob-value", formatPercent(p)));
    block.appendChild(row);
  });
  return block;
}

function svgEl(tag: string): SVGElement {
  return document.createElementNS(SVG_NS, tag) as SVGElement;
}

function edgeTitle(edge: NetworkEdge): string {
  const kind = edge.undirected_in_cpdag ? "direction not identifiable" : "directed";
  return `${edge.parent} → ${edge.child}  diameter ${formatMeasure(edge.diameter)}  (${kind})`;
}

const NODE_R = 20;

/**
 * The network as SVG. Edge stroke widths scale with arc diameter, arcs whose
 * direction is not identifiable in the equivalence class are dashed, and the
 * target node carries an outer ring. Clicking a node fires `onNodeClick`.
 */
export function renderGraph(
  network: NetworkPayload,
  positions: Map<string, Point>,
  evidence: Map<string, string>,
  width: number,
  height: number,
  onNodeClick: (name: string) => void,
): SVGElement {
  const svg = svgEl("svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "net-svg");

  const defs = svgEl("defs");
  const marker = svgEl("marker");
  marker.setAttribute("id", "arrow");
  marker.setAttribute("viewBox", "0 0 10 10");
  marker.setAttribute("refX", "9");
  marker.setAttribute("refY", "5");
  marker.setAttribute("markerWidth", "7");
  marker.setAttribute("markerHeight", "7");
  marker.setAttribute("orient", "auto-start-reverse");
  const tip = svgEl("path");
  tip.setAttribute("d", "M 0 0 L 10 5 L 0 10 z");
  tip.setAttribute("class", "arrow-tip");
  marker.appendChild(tip);
  defs.appendChild(marker);
  svg.appendChild(defs);

  for (const edge of network.edges) {
    const a = positions.get(edge.parent);
    const b = positions.get(edge.child);
    if (!a || !b) continue;
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const dist = Math.max(Math.hypot(dx, dy), 1e-6);
    const ux = dx / dist;
    const uy = dy / dist;
    const line = svgEl("line");
    line.setAttribute("x1", String(a.x + ux * NODE_R));
    line.setAttribute("y1", String(a.y + uy * NODE_R));
    line.setAttribute("x2", String(b.x - ux * (NODE_R + 4)));
    line.setAttribute("y2", String(b.y - uy * (NODE_R + 4)));
    line.setAttribute("stroke-width", String(edgeWidth(edge.diameter)));
    line.setAttribute("data-edge", `${edge.parent}->${edge.child}`);
    if (edge.undirected_in_cpdag) {
      line.setAttribute("class", "edge undirected");
    } else {
      line.setAttribute("class", "edge");
      line.setAttribute("marker-end", "url(#arrow)");
    }
    const title = svgEl("title");
    title.textContent = edgeTitle(edge);
    line.appendChild(title);
    svg.appendChild(line);
  }

  for (const node of network.nodes) {
    const p = positions.get(node.name);
    if (!p) continue;
    const g = svgEl("g");
    const state = evidence.get(node.name);
    const isTarget = node.name === network.target;
    g.setAttribute("data-node", node.name);
    g.setAttribute(
      "class",
      "node" + (isTarget ? " target" : "") + (state ? " ev-" + state.toLowerCase() : " unset"),
    );
    if (isTarget) {
      const ring = svgEl("circle");
      ring.setAttribute("cx", String(p.x));
      ring.setAttribute("cy", String(p.y));
      ring.setAttribute("r", String(NODE_R + 5));
      ring.setAttribute("class", "target-ring");
      g.appendChild(ring);
    }
    const circle = svgEl("circle");
    circle.setAttribute("cx", String(p.x));
    circle.setAttribute("cy", String(p.y));
    circle.setAttribute("r", String(NODE_R));
    circle.setAttribute("class", "node-dot");
    g.appendChild(circle);
    const label = svgEl("text");
    label.setAttribute("x", String(p.x));
    label.setAttribute("y", String(p.y + NODE_R + 14));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "node-label");
    label.textContent = state ? `${node.name}=${state}` : node.name;
    g.appendChild(label);
    const title = svgEl("title");
    title.textContent = isTarget
      ? `${node.name} (target)`
      : `${node.name}: click to cycle evidence`;
    g.appendChild(title);
    g.addEventListener("click", () => onNodeClick(node.name));
    svg.appendChild(g);
  }

  return svg;
}

export interface MpeColumn {
  state: string;
  result: MpePayload | "impossible";
}

/** One column per clamped target state; evidence cells are echoed, free cells come from the response. */
export function renderMpeTable(
  network: NetworkPayload,
  evidence: Map<string, string>,
  columns: MpeColumn[],
): HTMLElement {
  const table = el("table", "mpe-table") as HTMLTableElement;
  const thead = el("thead");
  const head = el("tr");
  head.appendChild(el("th", "", "node"));
  for (const col of columns) head.appendChild(el("th", "", network.target + "=" + col.state));
  thead.appendChild(head);
  table.appendChild(thead);

  const tbody = el("tbody");
  for (const node of network.nodes) {
    const row = el("tr");
    row.setAttribute("data-node", node.name);
    row.appendChild(el("td", "mpe-node", node.name));
    for (const col of columns) {
      if (col.result === "impossible") {
        row.appendChild(el("td", "mpe-impossible", "-"));
      } else if (node.name === network.target) {
        row.appendChild(el("td", "mpe-clamped", col.state));
      } else if (evidence.has(node.name)) {
        row.appendChild(el("td", "mpe-evidence", evidence.get(node.name)!));
      } else {
        row.appendChild(el("td", "mpe-state", col.result.assignment[node.name] ?? "-"));
      }
    }
    tbody.appendChild(row);
  }
  const foot = el("tr", "mpe-logp-row");
  foot.appendChild(el("td", "mpe-node", "log probability"));
  for (const col of columns) {
    foot.appendChild(
      el("td", "mpe-logp", col.result === "impossible" ? "impossible" : formatLogProb(col.result.log_probability)),
    );
  }
  tbody.appendChild(foot);
  table.appendChild(tbody);
  return table;
}

/** Horizontal bars in the order the API ranked them; widths scale against the top entry. */
export function renderTornado(payload: TornadoPayload): HTMLElement {
  const box = el("div", "tornado-bars");
  const maxAbs = payload.entries.reduce((m, e) => Math.max(m, Math.abs(e.sensitivity_value)), 0);
  for (const entry of payload.entries) {
    const row = el("div", "tornado-row");
    row.setAttribute("data-entry", entry.node);
    const config = entry.parent_config.length > 0 ? " | " + entry.parent_config.join(", ") : "";
    row.appendChild(el("span", "t-label", `${entry.node}${config} [${entry.state}]`));
    const track = el("div", "t-track");
    const bar = el("div", "t-bar " + (entry.direction >= 0 ? "t-up" : "t-down"));
    const frac = maxAbs > 0 ? Math.abs(entry.sensitivity_value) / maxAbs : 0;
    bar.style.width = (100 * frac).toFixed(2) + "%";
    track.appendChild(bar);
    row.appendChild(track);
    const value = el("span", "t-value", formatSigned(entry.sensitivity_value));
    if (entry.one_sided) {
      value.textContent += " (one-sided)";
    }
    row.appendChild(value);
    box.appendChild(row);
  }
  if (payload.entries.length === 0) {
    box.appendChild(el("div", "empty-view", "no sensitivity entries"));
  }
  return box;
}

/** Influence table ordered by the API's variance-share ranks. */
export function renderSensitivityTable(payload: SensitivityPayload): HTMLElement {
  const table = el("table", "sens-table") as HTMLTableElement;
  const thead = el("thead");
  const head = el("tr");
  for (const h of ["node", "mutual information", "rank", "variance share", "rank"]) {
    head.appendChild(el("th", "", h));
  }
  thead.appendChild(head);
  table.appendChild(thead);

  const tbody = el("tbody");
  const nodes = Object.keys(payload.sobol).sort((a, b) => {
    const ra = payload.ranks.sobol[a];
    const rb = payload.ranks.sobol[b];
    return ra === rb ? (a < b ? -1 : 1) : ra - rb;
  });
  for (const node of nodes) {
    const row = el("tr");
    row.setAttribute("data-node", node);
    row.appendChild(el("td", "sens-node", node));
    row.appendChild(el("td", "sens-mi", formatMeasure(payload.mutual_information[node])));
    row.appendChild(el("td", "sens-rank", String(payload.ranks.mutual_information[node])));
    row.appendChild(el("td", "sens-sobol", formatMeasure(payload.sobol[node])));
    row.appendChild(el("td", "sens-rank", String(payload.ranks.sobol[node])));
    tbody.appendChild(row);
  }
  table.appendChild(tbody);
  return table;
}

export function nodeByName(network: NetworkPayload, name: string): NetworkNode | undefined {
  return network.nodes.find((n) => n.name === name);
}
