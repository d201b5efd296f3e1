/** Interpolated n-gram language model with absolute discounting.
 *
 * Discounted mass at each order is redistributed through the next-lower
 * order, bottoming out at a uniform floor over the vocabulary, so every
 * token has positive probability and each distribution sums to one.
 * Deterministic by construction: no sampling anywhere.
 */

import { tokenize } from "./tokenize.js";

export const EOS = "</s>";
export const UNK = "<unk>";
const PAD = "<s>";

export class NGramModel {
  readonly order: number;
  readonly discount: number;
  readonly vocab: string[];
  private readonly index = new Map<string, number>();
  private readonly counts = new Map<string, Map<number, number>>();
  private readonly totals = new Map<string, number>();

  constructor(sequences: string[][], order = 3, discount = 0.4) {
    if (order < 1) throw new Error(`order must be >= 1, got ${order}`);
    if (discount <= 0 || discount >= 1) {
      throw new Error(`discount must be in (0, 1), got ${discount}`);
    }
    if (!sequences.some((s) => s.length > 0)) {
      throw new Error("no training sequences with tokens");
    }
    this.order = order;
    this.discount = discount;
    const seen = new Set<string>();
    for (const seq of sequences) for (const tok of seq) seen.add(tok);
    this.vocab = [...seen].sort();
    this.vocab.push(EOS, UNK);
    this.vocab.forEach((tok, i) => this.index.set(tok, i));

    for (const seq of sequences) {
      const padded = [...Array(order - 1).fill(PAD), ...seq, EOS];
      for (let pos = order - 1; pos < padded.length; pos++) {
        const tokenId = this.index.get(padded[pos])!;
        for (let ctxLen = 0; ctxLen < order; ctxLen++) {
          const key = padded.slice(pos - ctxLen, pos).join("");
          let bucket = this.counts.get(key);
          if (!bucket) {
            bucket = new Map();
            this.counts.set(key, bucket);
          }
          bucket.set(tokenId, (bucket.get(tokenId) ?? 0) + 1);
          this.totals.set(key, (this.totals.get(key) ?? 0) + 1);
        }
      }
    }
  }

  get eosIndex(): number {
    return this.index.get(EOS)!;
  }

  private probVector(context: string[]): Float64Array {
    const size = this.vocab.length;
    let lower: Float64Array;
    if (context.length === 0) {
      lower = new Float64Array(size).fill(1 / size);
    } else {
      lower = this.probVector(context.slice(1));
    }
    const key = context.join("");
    const total = this.totals.get(key) ?? 0;
    if (total === 0) return lower;
    const bucket = this.counts.get(key)!;
    const probs = new Float64Array(size);
    const backoff = (this.discount * bucket.size) / total;
    for (let i = 0; i < size; i++) probs[i] = backoff * lower[i];
    for (const [tokenId, count] of bucket) {
      probs[tokenId] += (count - this.discount) / total;
    }
    return probs;
  }

  logprobs(prefix: string[]): number[] {
    const mapped = prefix.map((tok) => (this.index.has(tok) ? tok : UNK));
    const padded = [...Array(this.order - 1).fill(PAD), ...mapped];
    const context =
      this.order > 1 ? padded.slice(padded.length - (this.order - 1)) : [];
    const probs = this.probVector(context);
    return [...probs].map((p) => Math.log(p));
  }
}

// Seed corpus for the served generation model: a deterministic desk-scale
// stand-in with mechanism-flavoured sentence structure, marker tokens
// included so constrained decoding clients can satisfy phrase constraints.
const SEED_CORPUS = [
  "the compound accelerated the export of the metabolite from treated cells",
  "treatment with the inhibitor lowered the membrane gradient in all samples",
  "<re> glucose <er> increases the uptake of <el> uracil <le> in yeast cells",
  "<re> uracil <er> exit tracks the <el> proton <le> gradient in this assay",
  "<el> atp <le> content fell while the <re> proton <er> gradient recovered",
  "the kinase activates the receptor and the receptor binds the ligand",
  "the hormone induces expression of the target gene within minutes",
  "blocking the pump suppressed the response to the hormone",
  "an increase in intracellular ph precedes the expression of the marker gene",
  "the weak acid decreased intracellular ph and repressed the reporter",
  "levels of the second messenger rose after stimulation with the agonist",
  "the mutant strain showed no detectable transport of the nucleotide",
];

export function defaultModel(): NGramModel {
  return new NGramModel(SEED_CORPUS.map(tokenize), 3, 0.4);
}
