"""Build renaming prompts, call a language-model client, validate candidates.

The prompt is a fixed two-message protocol: a system message framing the
renaming task and a user message carrying one class's original name(s) and
its mined context names with frequencies. Clients are pluggable; the
recorded-fixture client makes the whole stage replayable offline.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .errors import ClientError, ConfigurationError, DataError, FixtureMissError, ValidationError
from .mining import ContextNames
from .store.types import ClassEntry

log = logging.getLogger(__name__)

MIN_CANDIDATES = 5
MAX_CANDIDATES = 10

SYSTEM_MESSAGE = (
    "You are a helpful assistant aiding in renaming dataset classes. Each class "
    "has an inadequate original name and a set of context names derived from "
    "related captions (with their frequencies sorted and listed in brackets). "
    "These context names provide insights into the category's essence. When "
    "renaming, you may: 1. Use synonyms or subcategories of the original class "
    "name (e.g., 'grass' can be renamed as 'lawn, turf'). 2. Provide a short "
    "context to address polysemy (e.g., 'fan' can be renamed as 'ceiling fan, "
    "floor fan'). Please generate new names for each class in lower case, listed "
    "in a row. Ensure the new names logically connect to the original class, "
    "using it as the head noun. Avoid arbitrary noun concatenations and "
    "nonsensical names. For instance, the class 'sky' should not yield names "
    "like 'person under sky'. Ready to proceed with naming? Kindly provide the "
    "original class names and context names."
)

# Ablation variant: all mentions of context names removed.
SYSTEM_MESSAGE_NO_CONTEXT = (
    "You are a helpful assistant aiding in renaming dataset classes. Each class "
    "has an inadequate original name. When renaming, you may: 1. Use synonyms "
    "or subcategories of the original class name (e.g., 'grass' can be renamed "
    "as 'lawn, turf'). 2. Provide a short context to address polysemy (e.g., "
    "'fan' can be renamed as 'ceiling fan, floor fan'). Please generate new "
    "names for each class in lower case, listed in a row. Ensure the new names "
    "logically connect to the original class, using it as the head noun. Avoid "
    "arbitrary noun concatenations and nonsensical names. For instance, the "
    "class 'sky' should not yield names like 'person under sky'. Ready to "
    "proceed with naming? Kindly provide the original class names."
)

USER_MESSAGE = (
    "Original name: {name}, context names (with frequencies) are {context}. "
    "What are the new names? Only provide 5-10 names. And make sure you "
    "generate at least 3 reasonable synonyms or subcategories."
)

USER_MESSAGE_NO_CONTEXT = (
    "Original name: {name}. What are the new names? Only provide 5-10 names. "
    "And make sure you generate at least 3 reasonable synonyms or subcategories."
)


@dataclass(frozen=True)
class PromptPair:
    system_message: str
    user_message: str

    def digest(self) -> str:
        payload = self.system_message + "\n---\n" + self.user_message
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class CandidatePool:
    class_id: int
    candidates: list[str]
    provenance: str = "llm"  # llm | fixture | manual

    def validate(self, allow_manual_override: bool = True) -> None:
        if any(not c or c != c.lower() for c in self.candidates):
            raise ValidationError(
                f"class {self.class_id}: candidates must be non-empty and lowercase"
            )
        if len(set(self.candidates)) != len(self.candidates):
            raise ValidationError(f"class {self.class_id}: duplicate candidates")
        in_bounds = MIN_CANDIDATES <= len(self.candidates) <= MAX_CANDIDATES
        if not in_bounds and not (allow_manual_override and self.provenance == "manual"):
            raise ValidationError(
                f"class {self.class_id}: {len(self.candidates)} candidates outside "
                f"[{MIN_CANDIDATES}, {MAX_CANDIDATES}]"
            )


def format_context(context: ContextNames) -> str:
    return ", ".join(f"{noun} ({count})" for noun, count in context.entries)


def build_prompt(
    entry: ClassEntry, context: ContextNames | None, use_context: bool = True
) -> PromptPair:
    """Compose the two-message prompt for one class. Byte-stable."""
    name = entry.name_string()
    if use_context:
        if context is None:
            raise ConfigurationError(
                f"class {entry.class_id}: context names required when use_context=True"
            )
        return PromptPair(
            system_message=SYSTEM_MESSAGE,
            user_message=USER_MESSAGE.format(name=name, context=format_context(context)),
        )
    return PromptPair(
        system_message=SYSTEM_MESSAGE_NO_CONTEXT,
        user_message=USER_MESSAGE_NO_CONTEXT.format(name=name),
    )


class LanguageModelClient(Protocol):
    def complete(self, prompt: PromptPair) -> str: ...


_LIST_ITEM_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)])?\s*(.*?)\s*$")


def parse_candidate_response(raw: str) -> list[str]:
    """Split a free-form response into a clean, deduplicated name list.

    Accepts comma- or newline-separated lists and strips numbering, bullets,
    and surrounding quotes.
    """
    names: list[str] = []
    for line in raw.splitlines():
        item = _LIST_ITEM_RE.match(line).group(1)
        for piece in item.split(","):
            name = piece.strip().strip("\"'`").strip().lower()
            if name and name not in names:
                names.append(name)
    return names


def generate_candidates(
    prompt: PromptPair,
    client: LanguageModelClient,
    class_id: int,
    provenance: str = "llm",
    retries: int = 1,
) -> CandidatePool:
    """Run one prompt through a client and validate the parsed name list."""
    last_error: ClientError | None = None
    raw = None
    for attempt in range(retries + 1):
        try:
            raw = client.complete(prompt)
            break
        except ClientError as exc:
            last_error = exc
            log.warning("client call failed (attempt %d): %s", attempt + 1, exc)
    if raw is None:
        raise last_error if last_error is not None else ClientError("client returned nothing")
    names = parse_candidate_response(raw)
    if not MIN_CANDIDATES <= len(names) <= MAX_CANDIDATES:
        err = ValidationError(
            f"class {class_id}: parsed {len(names)} candidate names, expected "
            f"[{MIN_CANDIDATES}, {MAX_CANDIDATES}]"
        )
        err.raw_response = raw  # keep for manual repair
        raise err
    pool = CandidatePool(class_id=class_id, candidates=names, provenance=provenance)
    pool.validate()
    return pool


class StaticClient:
    """Returns canned responses keyed by prompt digest; handy in tests."""

    def __init__(self, responses: dict[str, str]):
        self.responses = responses

    def complete(self, prompt: PromptPair) -> str:
        digest = prompt.digest()
        if digest not in self.responses:
            raise FixtureMissError(f"no response for prompt digest {digest[:12]}...")
        return self.responses[digest]


class FixtureClient:
    """Deterministic replay of recorded prompt/response pairs.

    The recordings file is a JSON array of
    ``{"digest", "system_message", "user_message", "response"}`` records; the
    message texts are stored for human inspection, lookup is by digest only.
    """

    def __init__(self, recordings: str | Path):
        path = Path(recordings)
        if not path.exists():
            raise DataError(f"recordings file not found: {path}")
        rows = json.loads(path.read_text())
        self._responses = {row["digest"]: row["response"] for row in rows}

    def complete(self, prompt: PromptPair) -> str:
        digest = prompt.digest()
        if digest not in self._responses:
            raise FixtureMissError(
                f"no recording for prompt digest {digest[:12]}... "
                "(re-record or switch to --llm live)"
            )
        return self._responses[digest]


def record_response(recordings: list[dict], prompt: PromptPair, response: str) -> None:
    """Append one replayable record (used when building fixture files)."""
    recordings.append(
        {
            "digest": prompt.digest(),
            "system_message": prompt.system_message,
            "user_message": prompt.user_message,
            "response": response,
        }
    )


def write_recordings(recordings: list[dict], path: str | Path) -> None:
    Path(path).write_text(json.dumps(recordings, indent=2))


class LiveClient:
    """Minimal chat-completions client for a hosted language model.

    Credentials come from the environment: RENAMEKIT_LLM_API_KEY (required),
    RENAMEKIT_LLM_ENDPOINT and RENAMEKIT_LLM_MODEL (optional overrides).
    """

    def __init__(
        self,
        endpoint: str | None = None,
        model: str | None = None,
        timeout: float = 60.0,
    ):
        self.api_key = os.environ.get("RENAMEKIT_LLM_API_KEY")
        if not self.api_key:
            raise ConfigurationError(
                "live client requires RENAMEKIT_LLM_API_KEY in the environment"
            )
        self.endpoint = endpoint or os.environ.get(
            "RENAMEKIT_LLM_ENDPOINT", "https://api.openai.com/v1/chat/completions"
        )
        self.model = model or os.environ.get("RENAMEKIT_LLM_MODEL", "gpt-4")
        self.timeout = timeout

    def complete(self, prompt: PromptPair) -> str:
        import httpx

        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": prompt.system_message},
                {"role": "user", "content": prompt.user_message},
            ],
        }
        try:
            resp = httpx.post(
                self.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except Exception as exc:  # httpx errors, bad JSON shape
            raise ClientError(f"live completion failed: {exc}") from exc


def write_pools(
    pools: list[CandidatePool],
    path: str | Path,
    class_table=None,
    contexts: dict[int, ContextNames] | None = None,
) -> None:
    """Persist one document per dataset: class_id -> pool plus provenance."""
    doc = {"pools": []}
    for pool in sorted(pools, key=lambda p: p.class_id):
        pool.validate()
        row = {
            "class_id": pool.class_id,
            "candidates": pool.candidates,
            "provenance": pool.provenance,
        }
        if class_table is not None and pool.class_id in class_table:
            row["original_names"] = class_table[pool.class_id].original_names
        if contexts and pool.class_id in contexts:
            row["context"] = [[n, c] for n, c in contexts[pool.class_id].entries]
        doc["pools"].append(row)
    Path(path).write_text(json.dumps(doc, indent=2))


def read_pools(path: str | Path) -> dict[int, CandidatePool]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"candidate pools file not found: {path}")
    doc = json.loads(path.read_text())
    pools = {}
    for row in doc.get("pools", []):
        pool = CandidatePool(
            class_id=int(row["class_id"]),
            candidates=[str(c) for c in row["candidates"]],
            provenance=str(row.get("provenance", "llm")),
        )
        pool.validate()
        pools[pool.class_id] = pool
    return pools
