import { describe, expect, it } from "vitest";

import { layoutGraph } from "../src/graph.js";
import { sepsisScenario } from "./fixtures.js";

describe("graph layout", () => {
  it("layers states left to right by deterioration depth", () => {
    const layout = layoutGraph(sepsisScenario());
    const x = new Map(layout.nodes.map((n) => [n.id, n.x]));
    expect(x.get("s1")!).toBeLessThan(x.get("w1")!);
    expect(x.get("s1")!).toBeLessThan(x.get("s2")!);
    expect(x.get("s2")!).toBeLessThan(x.get("w2")!);
    expect(layout.width).toBeGreaterThan(0);
    expect(layout.height).toBeGreaterThan(0);
  });

  it("distinguishes timeout, goal, and effect edges", () => {
    const doc = sepsisScenario();
    doc.states.s1!.effects = { "check-pulse": { transition: "w1" } };
    const layout = layoutGraph(doc);
    const kinds = new Set(layout.edges.map((e) => e.kind));
    expect(kinds).toEqual(new Set(["timeout", "goal", "effect"]));
    const fromS1 = layout.edges.filter((e) => e.from === "s1");
    expect(fromS1.map((e) => e.kind).sort()).toEqual(["effect", "goal", "timeout"]);
  });

  it("parks unreachable states in a trailing column", () => {
    const doc = sepsisScenario();
    doc.states.annex = {
      vitals: { hr: 75 },
      representation: { kind: "text", content: "side room" },
      duration_ms: 30000,
      on_timeout: "dead",
    };
    const layout = layoutGraph(doc);
    const annex = layout.nodes.find((n) => n.id === "annex")!;
    for (const node of layout.nodes) {
      expect(annex.x).toBeGreaterThanOrEqual(node.x);
    }
  });
});
