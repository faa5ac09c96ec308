import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient, mpePayload, queryPayload } from "../src/api.js";
import { App } from "../src/app.js";
import {
  buildNetwork,
  errorFixture,
  MockApi,
  posterior,
  temporal,
  waitFor,
} from "./helpers.js";

const BASE = "http://api.test";

function queryKey(evidence: Record<string, string>, slice: "static" | "temporal"): string {
  return JSON.stringify(queryPayload("B", evidence, slice));
}

/** Standard fixture set: temporal queries for the evidence combinations the tests walk through. */
function standardApi(): MockApi {
  const api = new MockApi(buildNetwork());
  api.queries.set(
    queryKey({}, "temporal"),
    temporal(posterior("B", [0.300123, 0.399877, 0.3], {}), posterior("B", [0.298, 0.4021, 0.2999], {})),
  );
  api.queries.set(
    queryKey({ A: "High" }, "temporal"),
    temporal(
      posterior("B", [0.1, 0.123, 0.777], { A: "High" }),
      posterior("B", [0.2, 0.3, 0.5], { A: "High" }),
    ),
  );
  api.queries.set(
    queryKey({ A: "Neutral" }, "temporal"),
    temporal(
      posterior("B", [0.25, 0.5, 0.25], { A: "Neutral" }),
      posterior("B", [0.3, 0.35, 0.35], { A: "Neutral" }),
    ),
  );
  return api;
}

async function mount(api: MockApi): Promise<{ app: App; root: HTMLElement; client: ApiClient }> {
  api.install();
  const root = document.createElement("div");
  document.body.appendChild(root);
  const client = new ApiClient(BASE);
  const app = new App(root, client);
  await app.start();
  await app.idle();
  return { app, root, client };
}

function probValues(root: HTMLElement): string[] {
  return [...root.querySelectorAll("#posterior .prob-value")].map((n) => n.textContent ?? "");
}

beforeEach(() => {
  document.body.innerHTML = "";
});

afterEach(() => {
  vi.restoreAllMocks();
});

describe("rendered probabilities equal the API payload at displayed precision", () => {
  it("renders the baseline temporal response value for value", async () => {
    const api = standardApi();
    const { root } = await mount(api);
    // blocks read High, Neutral, Low; fixture distributions are (Low, Neutral, High)
    const expected = [
      [0.3, 0.399877, 0.300123], // at_T reordered to display order
      [0.2999, 0.4021, 0.298], // at_T+1
    ].flatMap((d) => d.map((p) => (100 * p).toFixed(1) + "%"));
    expect(probValues(root)).toEqual(expected);
  });

  it("updates to the exact response for new evidence, one request per change", async () => {
    const api = standardApi();
    const { app, root } = await mount(api);
    expect(api.queryCalls()).toHaveLength(1);

    await app.cycleEvidence("A"); // unset -> High
    await app.idle();
    expect(api.queryCalls()).toHaveLength(2);
    expect(api.queryCalls()[1].body).toEqual(queryPayload("B", { A: "High" }, "temporal"));
    const expected = [
      [0.777, 0.123, 0.1],
      [0.5, 0.3, 0.2],
    ].flatMap((d) => d.map((p) => (100 * p).toFixed(1) + "%"));
    expect(probValues(root)).toEqual(expected);
  });

  it("cycles evidence from a node click", async () => {
    const api = standardApi();
    const { root } = await mount(api);
    const nodeA = root.querySelector('[data-node="A"]')!;
    nodeA.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await waitFor(() => probValues(root)[0] === "77.7%");
    expect(root.querySelector(".chip")?.textContent).toContain("A=High");
    expect(root.querySelector('[data-node="A"]')!.getAttribute("class")).toContain("ev-high");
  });
});

describe("evidence round trip", () => {
  it("set then clear restores the baseline view exactly", async () => {
    const api = standardApi();
    const { app, root } = await mount(api);
    const view = root.querySelector("#view")!;
    const baselineHtml = view.innerHTML;

    await app.cycleEvidence("A");
    await app.idle();
    expect(view.innerHTML).not.toBe(baselineHtml);

    await app.clearEvidence();
    await app.idle();
    expect(view.innerHTML).toBe(baselineHtml);
    // the baseline came back from the payload-keyed cache, not a new request
    expect(api.queryCalls()).toHaveLength(2);
  });

  it("unsetting via the chip remove button also restores baseline", async () => {
    const api = standardApi();
    const { app, root } = await mount(api);
    const view = root.querySelector("#view")!;
    const baselineHtml = view.innerHTML;
    await app.cycleEvidence("A");
    await app.idle();
    root.querySelector<HTMLButtonElement>(".chip-x")!.click();
    await app.idle();
    expect(view.innerHTML).toBe(baselineHtml);
  });
});

describe("latest-wins cancellation", () => {
  it("a slow superseded response never overwrites the newer render", async () => {
    const api = standardApi();
    const { app, root } = await mount(api);

    api.holdQueries = true;
    const first = app.cycleEvidence("A"); // -> High (will resolve last)
    await waitFor(() => api.held.length === 1);
    const second = app.cycleEvidence("A"); // -> Neutral (resolves first)
    await waitFor(() => api.held.length === 2);

    api.held[1].release();
    await waitFor(() => probValues(root)[1] === "50.0%"); // Neutral of the A=Neutral fixture
    api.held[0].release();
    await Promise.all([first, second]);
    await app.idle();

    const values = probValues(root);
    expect(values).toEqual(
      [
        [0.25, 0.5, 0.25],
        [0.35, 0.35, 0.3],
      ].flatMap((d) => d.map((p) => (100 * p).toFixed(1) + "%")),
    );
    // nothing from the stale A=High response (distinctive 77.7%) is on screen
    expect(root.querySelector("#view")!.textContent).not.toContain("77.7%");
  });
});

describe("error handling", () => {
  it("impossible evidence keeps the previous result and shows a notice", async () => {
    const api = standardApi();
    api.queries.set(
      queryKey({ A: "High", C: "High" }, "temporal"),
      errorFixture(422, "evidence {'A': 'High', 'C': 'High'} has probability zero"),
    );
    const { app, root } = await mount(api);
    await app.cycleEvidence("A");
    await app.idle();
    expect(probValues(root)[0]).toBe("77.7%");

    await app.cycleEvidence("C"); // C=High conflicts
    await app.idle();
    const notice = root.querySelector("#query-notice")!;
    expect(notice.classList.contains("hidden")).toBe(false);
    expect(notice.textContent).toContain("impossible evidence");
    expect(probValues(root)[0]).toBe("77.7%"); // previous panel retained
    expect(root.querySelector(".banner")!.classList.contains("hidden")).toBe(true);
  });

  it("the notice clears once evidence becomes possible again", async () => {
    const api = standardApi();
    api.queries.set(queryKey({ A: "High", C: "High" }, "temporal"), errorFixture(422, "zero"));
    api.queries.set(
      queryKey({ A: "High", C: "Neutral" }, "temporal"),
      temporal(posterior("B", [0.2, 0.2, 0.6], {}), posterior("B", [0.3, 0.3, 0.4], {})),
    );
    const { app, root } = await mount(api);
    await app.cycleEvidence("A");
    await app.cycleEvidence("C");
    await app.idle();
    expect(root.querySelector("#query-notice")!.classList.contains("hidden")).toBe(false);

    await app.cycleEvidence("C"); // High -> Neutral, possible again
    await app.idle();
    expect(root.querySelector("#query-notice")!.classList.contains("hidden")).toBe(true);
    expect(probValues(root)[0]).toBe("60.0%");
  });

  it("a hard query failure shows the banner and leaves no stale values", async () => {
    const api = standardApi();
    api.queries.set(queryKey({ A: "Low" }, "temporal"), errorFixture(500, "boom"));
    const { app, root } = await mount(api);
    await app.setEvidence("A", "Low");
    await app.idle();
    const banner = root.querySelector(".banner")!;
    expect(banner.classList.contains("hidden")).toBe(false);
    expect(banner.textContent).toContain("service error (500)");
    expect(probValues(root)).toEqual([]);
    expect(root.querySelector("#posterior")!.textContent).toBe("no result");
  });

  it("an unreachable service at startup shows the banner and no graph", async () => {
    globalThis.fetch = vi.fn(async () => {
      throw new TypeError("fetch failed");
    });
    const root = document.createElement("div");
    document.body.appendChild(root);
    const app = new App(root, new ApiClient(BASE));
    await app.start();
    await app.idle();
    const banner = root.querySelector(".banner")!;
    expect(banner.classList.contains("hidden")).toBe(false);
    expect(banner.textContent).toContain("cannot reach the model service");
    expect(root.querySelector("svg")).toBeNull();
    expect(root.querySelector("#view")!.textContent).toBe("no model loaded");
  });
});

describe("most probable states view", () => {
  function withMpeFixtures(api: MockApi): MockApi {
    api.mpe.set(JSON.stringify(mpePayload({ B: "High" })), {
      assignment: { A: "High", C: "Neutral" },
      log_probability: -2.345678,
    });
    api.mpe.set(JSON.stringify(mpePayload({ B: "Neutral" })), errorFixture(422, "zero"));
    api.mpe.set(JSON.stringify(mpePayload({ B: "Low" })), {
      assignment: { A: "Low", C: "Neutral" },
      log_probability: -3.2,
    });
    return api;
  }

  it("shows one column per clamped target state with response assignments", async () => {
    const api = withMpeFixtures(standardApi());
    const { app, root } = await mount(api);
    await app.switchView("mpe");
    await app.idle();

    const heads = [...root.querySelectorAll(".mpe-table th")].map((n) => n.textContent);
    expect(heads).toEqual(["node", "B=High", "B=Neutral", "B=Low"]);
    const rowA = root.querySelector('.mpe-table tr[data-node="A"]')!;
    expect([...rowA.querySelectorAll("td")].map((n) => n.textContent)).toEqual(["A", "High", "-", "Low"]);
    const rowB = root.querySelector('.mpe-table tr[data-node="B"]')!;
    expect([...rowB.querySelectorAll("td")].map((n) => n.textContent)).toEqual(["B", "High", "-", "Low"]);
    const logp = [...root.querySelectorAll(".mpe-logp")].map((n) => n.textContent);
    expect(logp).toEqual(["-2.3457", "impossible", "-3.2000"]);
  });

  it("echoes user evidence cells and refetches when evidence changes", async () => {
    const api = withMpeFixtures(standardApi());
    for (const s of ["High", "Neutral", "Low"]) {
      api.mpe.set(JSON.stringify(mpePayload({ A: "High", B: s })), {
        assignment: { C: "High" },
        log_probability: -1.5,
      });
    }
    const { app, root } = await mount(api);
    await app.switchView("mpe");
    await app.idle();
    expect(api.calls.filter((c) => c.url.endsWith("/v1/mpe"))).toHaveLength(3);

    await app.setEvidence("A", "High");
    await app.idle();
    expect(api.calls.filter((c) => c.url.endsWith("/v1/mpe"))).toHaveLength(6);
    const rowA = root.querySelector('.mpe-table tr[data-node="A"]')!;
    const cells = [...rowA.querySelectorAll("td")];
    expect(cells[1].textContent).toBe("High");
    expect(cells[1].className).toBe("mpe-evidence");
    const rowC = root.querySelector('.mpe-table tr[data-node="C"]')!;
    expect([...rowC.querySelectorAll("td")].map((n) => n.textContent)).toEqual(["C", "High", "High", "High"]);
  });
});

describe("sensitivity view", () => {
  function withTornadoFixtures(api: MockApi): MockApi {
    api.sensitivity.set("B", {
      target: "B",
      mutual_information: { A: 0.123456, C: 0.0 },
      sobol: { A: 0.470001, C: 0.002 },
      diameter: { "A->B": 0.62, "B->C": 0.0 },
      ranks: {
        mutual_information: { A: 1, C: 2 },
        sobol: { A: 1, C: 2 },
        diameter: { "A->B": 1, "B->C": 2 },
      },
    });
    api.tornado.set("B|High", {
      target: "B",
      state: "High",
      entries: [
        {
          node: "A",
          parent_config: [],
          state: "High",
          baseline_output: 0.3,
          sensitivity_value: 0.52,
          direction: 1,
          one_sided: false,
        },
      ],
    });
    api.tornado.set("B|Low", {
      target: "B",
      state: "Low",
      entries: [
        {
          node: "A",
          parent_config: ["Neutral"],
          state: "Low",
          baseline_output: 0.3,
          sensitivity_value: -0.31,
          direction: -1,
          one_sided: false,
        },
      ],
    });
    return api;
  }

  it("renders ranked bars and the influence table from the payloads", async () => {
    const api = withTornadoFixtures(standardApi());
    const { app, root } = await mount(api);
    await app.switchView("tornado");
    await app.idle();

    expect(root.querySelector(".t-value")!.textContent).toBe("+0.5200");
    const rowA = root.querySelector('.sens-table tr[data-node="A"]')!;
    const cells = [...rowA.querySelectorAll("td")].map((n) => n.textContent);
    expect(cells).toEqual(["A", "0.1235", "1", "0.4700", "1"]);
    const rows = [...root.querySelectorAll(".sens-table tbody tr")].map((r) => r.getAttribute("data-node"));
    expect(rows).toEqual(["A", "C"]); // ordered by the API's variance-share rank
  });

  it("switches target state on click and reuses the cached influence table", async () => {
    const api = withTornadoFixtures(standardApi());
    const { app, root } = await mount(api);
    await app.switchView("tornado");
    await app.idle();
    root.querySelector<HTMLButtonElement>('.state-button[data-state="Low"]')!.click();
    await app.idle();
    expect(root.querySelector(".t-value")!.textContent).toBe("-0.3100");
    expect(root.querySelector(".t-label")!.textContent).toBe("A | Neutral [Low]");
    expect(api.calls.filter((c) => c.url.includes("/v1/sensitivity"))).toHaveLength(1);
    expect(api.calls.filter((c) => c.url.includes("/v1/tornado"))).toHaveLength(2);
  });
});

describe("evidence sweep view", () => {
  it("probes each node and state once and renders the responses verbatim", async () => {
    const api = standardApi();
    api.queries.set(queryKey({ A: "High" }, "static"), posterior("B", [0.1, 0.2, 0.7], { A: "High" }));
    api.queries.set(queryKey({ A: "Low" }, "static"), posterior("B", [0.6, 0.3, 0.1], { A: "Low" }));
    api.queries.set(queryKey({ C: "High" }, "static"), posterior("B", [0.3, 0.4, 0.3], { C: "High" }));
    api.queries.set(queryKey({ C: "Low" }, "static"), errorFixture(422, "zero"));
    const { app, root } = await mount(api);
    await app.switchView("sweep");
    await app.idle();

    const rows = [...root.querySelectorAll(".sweep-table tbody tr")];
    expect(rows.map((r) => r.getAttribute("data-probe"))).toEqual(["A=High", "A=Low", "C=High", "C=Low"]);
    expect([...rows[0].querySelectorAll(".prob-value")].map((n) => n.textContent)).toEqual([
      "70.0%",
      "20.0%",
      "10.0%",
    ]);
    expect(rows[3].classList.contains("impossible")).toBe(true);

    const staticCalls = api.queryCalls().filter((c) => (c.body as { slice: string }).slice === "static");
    expect(staticCalls).toHaveLength(4);

    // probes are cached by payload: revisiting the view sends nothing new
    await app.switchView("graph");
    await app.idle();
    await app.switchView("sweep");
    await app.idle();
    expect(api.queryCalls().filter((c) => (c.body as { slice: string }).slice === "static")).toHaveLength(4);
  });
});

describe("static-only models", () => {
  it("issues static queries and renders a single block", async () => {
    const api = new MockApi(buildNetwork({ has_two_slice: false }));
    api.queries.set(queryKey({}, "static"), posterior("B", [0.3, 0.4, 0.3], {}));
    const { root } = await mount(api);
    expect(api.queryCalls()).toHaveLength(1);
    expect((api.queryCalls()[0].body as { slice: string }).slice).toBe("static");
    expect(root.querySelectorAll("#posterior .dist-block")).toHaveLength(1);
    expect(probValues(root)).toEqual(["30.0%", "40.0%", "30.0%"]);
  });
});
