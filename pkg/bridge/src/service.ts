/** Request handling behind the HTTP layer: every endpoint is a pure
 * function from a JSON payload to a response envelope, so the routing is
 * trivially testable without sockets. Responses are deterministic given
 * the payload; no endpoint samples. */

import { EOS, NGramModel, defaultModel } from "./lm.js";
import {
  RELATION_LABELS,
  TYPE_LABELS,
  entityType,
  predictRelation,
  similarity,
} from "./scorers.js";
import { tokenize } from "./tokenize.js";

export const SCHEMA_VERSION = "v1";

export interface Envelope {
  ok: boolean;
  payload?: unknown;
  error?: { code: string; message: string };
}

function success(payload: unknown): Envelope {
  return { ok: true, payload };
}

function failure(code: string, message: string): Envelope {
  return { ok: false, error: { code, message } };
}

export class BridgeService {
  private readonly model: NGramModel;
  private readonly vocabId: string;

  constructor(model: NGramModel = defaultModel()) {
    this.model = model;
    this.vocabId = `ngram-${model.order}-v${model.vocab.length}`;
  }

  health(): Envelope {
    return success({ status: "healthy" });
  }

  meta(): Envelope {
    return success({
      schema_version: SCHEMA_VERSION,
      model_ids: {
        generator: this.vocabId,
        similarity: "token-cosine-v1",
        relation: "keyword-v1",
        entity_type: "lexicon-v1",
      },
      relation_labels: [...RELATION_LABELS],
      entity_type_labels: TYPE_LABELS,
      vocab_size: this.model.vocab.length,
      sampling: "disabled",
    });
  }

  vocab(): Envelope {
    return success({
      vocab_id: this.vocabId,
      tokens: this.model.vocab,
      eos: EOS,
      eos_index: this.model.eosIndex,
    });
  }

  logprobs(payload: unknown): Envelope {
    const body = payload as { prefix?: unknown; conditioning?: unknown };
    if (!Array.isArray(body?.prefix) || !body.prefix.every((t) => typeof t === "string")) {
      return failure("TokenizationMismatch", "prefix must be a list of string tokens");
    }
    const conditioning =
      typeof body.conditioning === "string" ? tokenize(body.conditioning) : [];
    const row = this.model.logprobs([...conditioning, ...body.prefix]);
    if (!row.every(Number.isFinite)) {
      return failure("ModelUnavailable", "non-finite log-probabilities");
    }
    return success({ vocab_id: this.vocabId, logprobs: row, eos: EOS });
  }

  similarity(payload: unknown): Envelope {
    const body = payload as { a?: unknown; b?: unknown };
    if (typeof body?.a !== "string" || typeof body?.b !== "string") {
      return failure("TokenizationMismatch", "a and b must be strings");
    }
    return success({ score: similarity(body.a, body.b) });
  }

  relation(payload: unknown): Envelope {
    const body = payload as { premise?: unknown; e1?: unknown; e2?: unknown };
    if (
      typeof body?.premise !== "string" ||
      typeof body?.e1 !== "string" ||
      typeof body?.e2 !== "string"
    ) {
      return failure("TokenizationMismatch", "premise, e1, e2 must be strings");
    }
    return success({ label: predictRelation(body.premise, body.e1, body.e2) });
  }

  entityType(payload: unknown): Envelope {
    const body = payload as { surface?: unknown; context?: unknown };
    if (typeof body?.surface !== "string") {
      return failure("TokenizationMismatch", "surface must be a string");
    }
    const context = typeof body.context === "string" ? body.context : "";
    return success({ label: entityType(body.surface, context) });
  }

  /** Dispatch one request; unknown endpoints get a NotFound envelope. */
  handle(method: string, path: string, payload: unknown): Envelope {
    switch (`${method} ${path}`) {
      case "GET /v1/health":
        return this.health();
      case "GET /v1/meta":
        return this.meta();
      case "GET /v1/vocab":
        return this.vocab();
      case "POST /v1/logprobs":
        return this.logprobs(payload);
      case "POST /v1/similarity":
        return this.similarity(payload);
      case "POST /v1/relation":
        return this.relation(payload);
      case "POST /v1/entity-type":
        return this.entityType(payload);
      default:
        return failure("NotFound", `no endpoint ${method} ${path}`);
    }
  }
}
