"""Client for the optional model-serving sidecar.

The sidecar exposes neural scoring over a local HTTP endpoint with JSON
bodies: /v1/health, /v1/meta, /v1/vocab, /v1/logprobs, /v1/similarity,
/v1/relation, /v1/entity-type. Every served capability mirrors a bundled
fallback and must satisfy the same interface contract, so the adapters
here simply project wire payloads onto the scorer protocols.

The endpoint address comes from the MECHNLI_BRIDGE_URL environment
variable; when it is unset the toolkit stays on the bundled components.
"""

from __future__ import annotations

import json
import os
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import MechNliError

BRIDGE_URL_ENV = "MECHNLI_BRIDGE_URL"
_TIMEOUT_SECONDS = 30.0


class BridgeUnavailable(MechNliError):
    """The bridge endpoint is absent, unhealthy, or returned an error."""


class BridgeClient:
    def __init__(self, base_url: str, timeout: float = _TIMEOUT_SECONDS):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def _request(self, path: str, payload: dict | None = None) -> Any:
        url = f"{self.base_url}{path}"
        data = None
        headers = {"Accept": "application/json"}
        if payload is not None:
            data = json.dumps(payload).encode("utf-8")
            headers["Content-Type"] = "application/json"
        request = urllib.request.Request(url, data=data, headers=headers)
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                body = json.loads(response.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
            raise BridgeUnavailable(f"bridge request {path} failed: {exc}") from exc
        if not isinstance(body, dict) or not body.get("ok", False):
            error = body.get("error") if isinstance(body, dict) else None
            raise BridgeUnavailable(f"bridge error on {path}: {error}")
        return body.get("payload")

    def health(self) -> bool:
        try:
            self._request("/v1/health")
            return True
        except BridgeUnavailable:
            return False

    def meta(self) -> dict:
        return self._request("/v1/meta")

    def vocab(self) -> tuple[tuple[str, ...], str]:
        payload = self._request("/v1/vocab")
        return tuple(payload["tokens"]), payload["eos"]

    def logprobs(self, prefix: Sequence[str], conditioning: str = "") -> np.ndarray:
        payload = self._request(
            "/v1/logprobs", {"prefix": list(prefix), "conditioning": conditioning}
        )
        return np.asarray(payload["logprobs"], dtype=float)

    def similarity(self, a: str, b: str) -> float:
        return float(self._request("/v1/similarity", {"a": a, "b": b})["score"])

    def relation(self, premise: str, regulator: str, regulated: str) -> str:
        payload = self._request(
            "/v1/relation",
            {"premise": premise, "e1": regulator, "e2": regulated},
        )
        return payload["label"]

    def entity_type(self, surface: str, context: str) -> str | None:
        payload = self._request(
            "/v1/entity-type", {"surface": surface, "context": context}
        )
        return payload.get("label")


class BridgeScorer:
    """SequenceScorer served by the bridge; vocabulary fetched once."""

    def __init__(self, client: BridgeClient, conditioning: str = ""):
        self._client = client
        self._conditioning = conditioning
        tokens, eos = client.vocab()
        self._vocab = tokens
        self.eos = eos

    def vocab(self) -> tuple[str, ...]:
        return self._vocab

    def logprobs(self, prefix: Sequence[str]) -> np.ndarray:
        return self._client.logprobs(prefix, self._conditioning)


@dataclass(frozen=True)
class BridgeSimilarity:
    client: BridgeClient

    def score(self, a: str, b: str) -> float:
        return self.client.similarity(a, b)


@dataclass(frozen=True)
class BridgeRelationPredictor:
    client: BridgeClient

    def predict(self, premise: str, regulator: str, regulated: str) -> str:
        return self.client.relation(premise, regulator, regulated)


@dataclass(frozen=True)
class BridgeEntityTyper:
    client: BridgeClient

    def type_of(self, surface: str, context: str) -> str | None:
        return self.client.entity_type(surface, context)


def bridge_from_env() -> BridgeClient | None:
    """A client for the configured endpoint, or None when unconfigured."""
    url = os.environ.get(BRIDGE_URL_ENV, "").strip()
    if not url:
        return None
    return BridgeClient(url)
