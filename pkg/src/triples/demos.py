"""Demonstration library: deterministic embeddings, top-k retrieval, updates.

The default embedder is a hashed bag of tokens: lowercase, split on
non-alphanumerics, FNV-1a 64-bit hash of each token modulo the dimension,
then L2 normalization. It is fully deterministic, so retrieval results are
reproducible without any model weights.
"""

from __future__ import annotations

import json
import hashlib
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .lang import ParseError, parse
from .transport import GatewayError, post_json

EMBED_DIM = 256

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")

UPDATE_MODES = ("append", "append_delete")
DEMO_SOURCES = ("seed", "learned")


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


class HashedBagEmbedder:
    """Deterministic token-count embedding on the unit sphere."""

    def __init__(self, dim: int = EMBED_DIM):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in tokenize(text):
            vec[fnv1a_64(token.encode("utf-8")) % self.dim] += 1.0
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            vec[0] = 1.0  # token-free text maps to e_0
            return vec
        return vec / norm


class RemoteEmbedder:
    """OpenAI-compatible /v1/embeddings client; failures raise GatewayError."""

    def __init__(self, endpoint: str, model: str, key: str | None = None,
                 timeout: float = 30.0, max_retries: int = 3):
        self.url = _embeddings_url(endpoint)
        self.model = model
        self.key = key
        self.timeout = timeout
        self.max_retries = max_retries

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        headers = {"Content-Type": "application/json"}
        if self.key:
            headers["Authorization"] = f"Bearer {self.key}"
        data = post_json(
            self.url,
            {"model": self.model, "input": [text]},
            headers,
            self.timeout,
            self.max_retries,
        )
        try:
            raw = data["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError) as err:
            raise GatewayError(f"malformed embeddings response: {err}") from err
        vec = np.asarray(raw, dtype=np.float64)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise GatewayError("embedding endpoint returned a zero vector")
        return vec / norm


def _embeddings_url(endpoint: str) -> str:
    base = endpoint.rstrip("/")
    if base.endswith("/embeddings"):
        return base
    if base.endswith("/v1"):
        return base + "/embeddings"
    return base + "/v1/embeddings"


def cosine_sim(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two already-normalized vectors."""
    return float(np.dot(a, b))


@dataclass
class Demonstration:
    """One retrieval unit; examples must parse under the policy language."""

    id: int
    task_description: str
    thought: str
    examples: str
    source: str = "seed"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "task_description": self.task_description,
            "thought": self.thought,
            "examples": self.examples,
            "source": self.source,
        }


def _validate_demo(task_description: str, thought: str, examples: str,
                   source: str) -> None:
    if not task_description.strip():
        raise ValueError("demonstration task_description is empty")
    if not thought.strip():
        raise ValueError("demonstration thought is empty")
    if not examples.strip():
        raise ValueError("demonstration examples is empty")
    if source not in DEMO_SOURCES:
        raise ValueError(f"demonstration source must be one of {DEMO_SOURCES}")
    try:
        parse(examples)
    except ParseError as err:
        raise ValueError(
            f"demonstration examples do not parse: {err.diagnostic.render()}"
        ) from err


class LibraryFormatError(ValueError):
    pass


class DemoLibrary:
    """Ordered demonstrations plus their cached embedding keys."""

    def __init__(self, provider):
        self.provider = provider
        self.demos: list[Demonstration] = []
        self.cache: dict[int, np.ndarray] = {}
        self._next_id = 1

    def __len__(self) -> int:
        return len(self.demos)

    def upsert(self, task_description: str, thought: str, examples: str,
               source: str = "seed", theta_dup: float = 0.9,
               mode: str = "append") -> Demonstration:
        """Insert a new demonstration; in append_delete mode, first remove
        every demo whose task-description similarity reaches theta_dup."""
        if mode not in UPDATE_MODES:
            raise ValueError(f"mode must be one of {UPDATE_MODES}, got {mode!r}")
        _validate_demo(task_description, thought, examples, source)
        key = self.provider.embed(task_description)
        if mode == "append_delete":
            keep = []
            for demo in self.demos:
                if cosine_sim(key, self.cache[demo.id]) >= theta_dup:
                    del self.cache[demo.id]
                else:
                    keep.append(demo)
            self.demos = keep
        demo = Demonstration(self._next_id, task_description, thought, examples,
                             source)
        self._next_id += 1
        self.demos.append(demo)
        self.cache[demo.id] = key
        return demo

    def retrieve(self, query_text: str, k: int) -> list[Demonstration]:
        """Top-k by cosine similarity, ties broken oldest-first."""
        if k < 1:
            raise ValueError("k must be at least 1")
        if not self.demos:
            return []
        query = self.provider.embed(query_text)
        ranked = sorted(
            self.demos,
            key=lambda d: (-cosine_sim(query, self.cache[d.id]), d.id),
        )
        return ranked[: min(k, len(self.demos))]

    def save(self, path: str | Path) -> None:
        data = {"version": 1, "demos": [d.to_dict() for d in self.demos]}
        Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, provider) -> "DemoLibrary":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise LibraryFormatError(f"library file is not valid JSON: {err}") from err
        if not isinstance(data, dict) or data.get("version") != 1:
            raise LibraryFormatError("library file must have version 1")
        records = data.get("demos")
        if not isinstance(records, list):
            raise LibraryFormatError("library file is missing the demos list")
        library = cls(provider)
        seen: set[int] = set()
        for i, record in enumerate(records):
            try:
                demo = Demonstration(
                    id=int(record["id"]),
                    task_description=record["task_description"],
                    thought=record["thought"],
                    examples=record["examples"],
                    source=record["source"],
                )
                _validate_demo(demo.task_description, demo.thought, demo.examples,
                               demo.source)
                if demo.id in seen:
                    raise ValueError(f"duplicate id {demo.id}")
            except (KeyError, TypeError, ValueError) as err:
                raise LibraryFormatError(f"bad demo record at index {i}: {err}") from err
            seen.add(demo.id)
            library.demos.append(demo)
            library.cache[demo.id] = provider.embed(demo.task_description)
        library._next_id = max(seen, default=0) + 1
        return library

    def clone(self) -> "DemoLibrary":
        other = DemoLibrary(self.provider)
        other.demos = [replace(d) for d in self.demos]
        other.cache = {i: v for i, v in self.cache.items()}
        other._next_id = self._next_id
        return other

    def digest(self) -> str:
        blob = json.dumps([d.to_dict() for d in self.demos],
                          sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()
