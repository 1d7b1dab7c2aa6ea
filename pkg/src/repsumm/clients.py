"""HTTP clients for the sidecar inference service (/v1 JSON protocol).

Connection failures and 5xx responses surface as ServiceUnavailable;
responses that do not match the protocol shape raise ProtocolError.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import requests

from .errors import ProtocolError, ServiceUnavailable
from .textproc import TermVector

SERVICE_URL_ENV = "REPSUMM_SERVICE_URL"
DEFAULT_SERVICE_URL = "http://localhost:8000"


def default_service_url() -> str:
    return os.environ.get(SERVICE_URL_ENV, DEFAULT_SERVICE_URL)


@dataclass(frozen=True)
class GenerateResult:
    model: str
    output: str
    output_tokens: int


class ServiceClient:
    def __init__(self, base_url: str | None = None, timeout: float = 60.0):
        self.base_url = (base_url or default_service_url()).rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()

    def _url(self, path: str) -> str:
        return f"{self.base_url}{path}"

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        url = self._url(path)
        try:
            resp = self._session.request(method, url, json=payload, timeout=self.timeout)
        except requests.RequestException as e:
            raise ServiceUnavailable(url, str(e)) from None
        if resp.status_code >= 500:
            raise ServiceUnavailable(url, f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code != 200:
            raise ProtocolError(url, f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError:
            raise ProtocolError(url, "response is not JSON") from None

    def health(self) -> dict:
        return self._request("GET", "/v1/health")

    def check_health(self) -> None:
        """Preflight; raises ServiceUnavailable when the service is unreachable."""
        self.health()


class EmbeddingClient(ServiceClient):
    def embed(self, texts: list[str]) -> list[TermVector]:
        body = self._request("POST", "/v1/embed", {"texts": list(texts)})
        try:
            dim = int(body["dim"])
            vectors = body["vectors"]
        except (KeyError, TypeError, ValueError) as e:
            raise ProtocolError(self._url("/v1/embed"), f"bad embed response: {e}") from None
        if len(vectors) != len(texts):
            raise ProtocolError(self._url("/v1/embed"), f"{len(vectors)} vectors for {len(texts)} texts")
        out = []
        for vec in vectors:
            if len(vec) != dim:
                raise ProtocolError(self._url("/v1/embed"), f"vector length {len(vec)} != dim {dim}")
            out.append(TermVector.from_dense(vec, dim=dim))
        return out


class RemoteScorerClient(ServiceClient):
    def score(self, texts: list[str]) -> list[float]:
        body = self._request("POST", "/v1/score", {"texts": list(texts)})
        scores = body.get("scores")
        if not isinstance(scores, list) or len(scores) != len(texts):
            raise ProtocolError(self._url("/v1/score"), "scores missing or wrong length")
        return [float(s) for s in scores]


class GenerationClient(ServiceClient):
    def generate(self, input_text: str, max_input_tokens: int = 1024, max_new_tokens: int = 256) -> GenerateResult:
        body = self._request(
            "POST",
            "/v1/generate",
            {"input": input_text, "max_input_tokens": max_input_tokens, "max_new_tokens": max_new_tokens},
        )
        try:
            return GenerateResult(
                model=str(body.get("model", "")),
                output=body["output"],
                output_tokens=int(body["output_tokens"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ProtocolError(self._url("/v1/generate"), f"bad generate response: {e}") from None
