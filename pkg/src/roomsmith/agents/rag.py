"""Local design-guideline store with lexical retrieval.

Documents are plain-text files whose first line is `tags: a, b, c`; the rest
is the snippet body. Retrieval scores a document by summing, over every query
token occurrence, how often that token appears in the document (tags
included). No embeddings, no network; same store + same query always ranks
identically, with document id breaking ties.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class RagDocument:
    doc_id: str
    tags: tuple[str, ...]
    text: str

    def token_counts(self) -> Counter:
        return Counter(tokenize(" ".join(self.tags) + " " + self.text))


@dataclass
class RagStore:
    documents: list[RagDocument]

    def __post_init__(self) -> None:
        self.documents = sorted(self.documents, key=lambda d: d.doc_id)
        self._counts = {d.doc_id: d.token_counts() for d in self.documents}

    def score(self, doc: RagDocument, query_tokens: list[str]) -> int:
        counts = self._counts[doc.doc_id]
        return sum(counts[t] for t in query_tokens)


def load_rag_store(path: str | Path) -> RagStore:
    docs = []
    root = Path(path)
    if root.is_dir():
        for f in sorted(root.glob("*.txt")):
            raw = f.read_text("utf-8")
            first, _, rest = raw.partition("\n")
            tags: tuple[str, ...] = ()
            body = raw
            if first.lower().startswith("tags:"):
                tags = tuple(t.strip() for t in first[5:].split(",") if t.strip())
                body = rest
            docs.append(RagDocument(doc_id=f.stem, tags=tags, text=body.strip()))
    return RagStore(docs)


def default_rag_store() -> RagStore:
    from importlib import resources

    with resources.as_file(resources.files("roomsmith.data").joinpath("design_rules")) as p:
        return load_rag_store(p)


def retrieve_context(store: RagStore, query: str, k: int = 3) -> list[str]:
    """Top-k snippet texts by lexical overlap; empty store yields []."""
    query_tokens = tokenize(query)
    if not query_tokens or not store.documents:
        return []
    scored = [(store.score(d, query_tokens), d) for d in store.documents]
    scored = [(s, d) for s, d in scored if s > 0]
    scored.sort(key=lambda pair: (-pair[0], pair[1].doc_id))
    return [d.text for _s, d in scored[:k]]
