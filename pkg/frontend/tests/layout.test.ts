import { describe, expect, it } from "vitest";
import {
  edgeWidth,
  hashString,
  layoutNetwork,
  MAX_EDGE_WIDTH,
  MIN_EDGE_WIDTH,
  mulberry32,
} from "../src/layout.js";

const NAMES = ["ENE", "EQT", "FXR", "RTY", "VOL"];
const EDGES: Array<[string, string]> = [
  ["ENE", "EQT"],
  ["EQT", "FXR"],
  ["ENE", "VOL"],
  ["RTY", "EQT"],
];

describe("seeded generator", () => {
  it("repeats for the same seed and differs across seeds", () => {
    const a = mulberry32(123);
    const b = mulberry32(123);
    const c = mulberry32(124);
    const seqA = [a(), a(), a(), a(), a()];
    const seqB = [b(), b(), b(), b(), b()];
    const seqC = [c(), c(), c(), c(), c()];
    expect(seqA).toEqual(seqB);
    expect(seqA).not.toEqual(seqC);
    for (const v of seqA) {
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThan(1);
    }
  });

  it("hashString is stable", () => {
    expect(hashString("ENE")).toBe(hashString("ENE"));
    expect(hashString("ENE")).not.toBe(hashString("EQT"));
  });
});

describe("layoutNetwork", () => {
  it("is deterministic for identical input", () => {
    const first = layoutNetwork(NAMES, EDGES, 640, 420);
    const second = layoutNetwork(NAMES, EDGES, 640, 420);
    expect([...first.entries()]).toEqual([...second.entries()]);
  });

  it("keeps every node inside the frame", () => {
    const pos = layoutNetwork(NAMES, EDGES, 640, 420);
    expect(pos.size).toBe(NAMES.length);
    for (const { x, y } of pos.values()) {
      expect(x).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThanOrEqual(640);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(y).toBeLessThanOrEqual(420);
    }
  });

  it("separates all nodes", () => {
    const pos = layoutNetwork(NAMES, EDGES, 640, 420);
    const points = [...pos.values()];
    for (let i = 0; i < points.length; i++) {
      for (let j = i + 1; j < points.length; j++) {
        const d = Math.hypot(points[i].x - points[j].x, points[i].y - points[j].y);
        expect(d).toBeGreaterThan(5);
      }
    }
  });

  it("handles empty and single-node graphs", () => {
    expect(layoutNetwork([], [], 640, 420).size).toBe(0);
    const one = layoutNetwork(["A"], [], 640, 420);
    expect(one.size).toBe(1);
  });
});

describe("edgeWidth", () => {
  it("gives a zero-diameter arc the minimum visible width", () => {
    expect(edgeWidth(0)).toBe(MIN_EDGE_WIDTH);
  });

  it("caps at the maximum and clamps out-of-range diameters", () => {
    expect(edgeWidth(1)).toBe(MAX_EDGE_WIDTH);
    expect(edgeWidth(-0.5)).toBe(MIN_EDGE_WIDTH);
    expect(edgeWidth(2.5)).toBe(MAX_EDGE_WIDTH);
  });

  it("orders widths by diameter", () => {
    const diameters = [0, 0.1, 0.33, 0.6, 0.95, 1];
    const widths = diameters.map(edgeWidth);
    const sorted = widths.slice().sort((a, b) => a - b);
    expect(widths).toEqual(sorted);
    expect(new Set(widths).size).toBe(diameters.length);
  });
});
