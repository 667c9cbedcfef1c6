"""External parser adapter: text in, CoNLL-U out over HTTP.

Parsing stays out of process; when the adapter is disabled, example-kind
queries must arrive with their parse attached.
"""

from __future__ import annotations

from dataclasses import dataclass

import httpx

from ..corpus import SentenceGraph, load_conllu
from ..errors import ParserUnavailable


@dataclass
class ParserAdapter:
    endpoint: str = ""
    timeout: float = 10.0
    enabled: bool = False

    def parse(self, text: str) -> SentenceGraph:
        """Parse one sentence; returns the first sentence of the response."""
        if not self.enabled:
            raise ParserUnavailable(
                "parser adapter disabled and no parse attached")
        try:
            response = httpx.post(self.endpoint, content=text.encode("utf-8"),
                                  timeout=self.timeout)
            response.raise_for_status()
        except httpx.HTTPError as e:
            raise ParserUnavailable(f"parser endpoint failed: {e}") from e
        doc = load_conllu(response.text, doc_id="_parsed")
        if not doc.sentences:
            raise ParserUnavailable("parser returned no sentences")
        return doc.sentences[0]
