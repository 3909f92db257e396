/** Automatic layered layout for the editor's state graph: columns by
 * deterioration depth from the initial state (left to right), unreachable
 * states parked in a trailing column. Pure geometry; rendering happens in
 * the view layer. */

import type { ScenarioDoc } from "./types.js";

export type EdgeKind = "timeout" | "goal" | "effect";

export interface GraphNode {
  id: string;
  x: number;
  y: number;
  terminal: boolean;
  hasGoal: boolean;
}

export interface GraphEdge {
  from: string;
  to: string;
  kind: EdgeKind;
}

export interface GraphLayout {
  nodes: GraphNode[];
  edges: GraphEdge[];
  width: number;
  height: number;
}

export const COLUMN_W = 170;
export const ROW_H = 90;

export function layoutGraph(doc: ScenarioDoc): GraphLayout {
  const edges: GraphEdge[] = [];
  for (const [stateId, node] of Object.entries(doc.states)) {
    if (node.on_timeout !== undefined && node.on_timeout in doc.states) {
      edges.push({ from: stateId, to: node.on_timeout, kind: "timeout" });
    }
    if (node.on_goal !== undefined && node.on_goal in doc.states) {
      edges.push({ from: stateId, to: node.on_goal, kind: "goal" });
    }
    for (const effect of Object.values(node.effects ?? {})) {
      if (effect.transition !== undefined && effect.transition in doc.states) {
        edges.push({ from: stateId, to: effect.transition, kind: "effect" });
      }
    }
  }

  // BFS depth from the initial state across all edges
  const depth = new Map<string, number>();
  if (doc.initial_state in doc.states) {
    depth.set(doc.initial_state, 0);
    const queue = [doc.initial_state];
    while (queue.length) {
      const current = queue.shift()!;
      const d = depth.get(current)!;
      for (const edge of edges) {
        if (edge.from === current && !depth.has(edge.to)) {
          depth.set(edge.to, d + 1);
          queue.push(edge.to);
        }
      }
    }
  }
  const maxDepth = Math.max(0, ...depth.values());
  const orphanColumn = maxDepth + 1;

  const columns = new Map<number, string[]>();
  for (const stateId of Object.keys(doc.states).sort()) {
    const column = depth.get(stateId) ?? orphanColumn;
    const bucket = columns.get(column) ?? [];
    bucket.push(stateId);
    columns.set(column, bucket);
  }

  const nodes: GraphNode[] = [];
  let maxRows = 1;
  for (const [column, ids] of columns) {
    maxRows = Math.max(maxRows, ids.length);
    ids.forEach((stateId, row) => {
      const node = doc.states[stateId]!;
      nodes.push({
        id: stateId,
        x: 40 + column * COLUMN_W,
        y: 40 + row * ROW_H,
        terminal: node.terminal !== undefined,
        hasGoal: node.goal !== undefined,
      });
    });
  }
  nodes.sort((a, b) => (a.id < b.id ? -1 : 1));

  const usedColumns = columns.size ? Math.max(...columns.keys()) + 1 : 1;
  return {
    nodes,
    edges,
    width: 80 + usedColumns * COLUMN_W,
    height: 80 + maxRows * ROW_H,
  };
}
