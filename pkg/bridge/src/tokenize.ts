/** Tokenization mirroring the pipeline client: lowercase, whitespace and
 * punctuation split, entity marker tags kept as single tokens. */

const TOKEN_RE = /<(?:re|er|el|le)>|\w+|[^\w\s]/g;

export function tokenize(text: string): string[] {
  const matches = text.match(TOKEN_RE);
  if (!matches) return [];
  return matches.map((t) => t.toLowerCase());
}
