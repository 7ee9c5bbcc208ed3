"""Mine context names from caption corpora.

Captions of all training images that contain a class are tokenized, tagged,
filtered to nouns, lemmatized to singular, and counted; the most frequent
nouns become that class's context names. The tagger is pluggable; the
shipped default is a deterministic rule-based tagger so that every run and
every test is hermetic.
"""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .errors import DataError

_TOKEN_RE = re.compile(r"[a-z]+(?:'[a-z]+)?")

# Function words and other non-content tokens dropped before tagging.
STOP_WORDS = frozenset(
    """
    a an the this that these those some any each every no
    i you he she it we they me him her us them my your his its our their
    mine yours hers ours theirs myself yourself himself herself itself
    of in on at by for from to with without under over above below behind
    beside between among through across against during before after near
    into onto upon along around past within beneath beyond inside outside
    and or but nor so yet if while because although though since as than
    is are was were be been being am do does did done doing have has had
    having will would shall should can could may might must
    not only very too also just even still again there here where when
    what which who whom whose why how all both few more most other such
    own same then once about up down out off further
    """.split()
)

# Common adjectives the tagger must recognize; suffix rules catch the rest.
ADJECTIVE_WORDS = frozenset(
    """
    lush green grassy rural urban big small large little tiny huge tall
    short long wide narrow high low old new young ancient modern early late
    red blue yellow white black brown gray grey orange purple pink golden
    dark light bright dim pale colorful shiny dull clean dirty wet dry
    hot cold warm cool sunny cloudy rainy snowy foggy windy stormy clear
    beautiful pretty ugly nice good bad great fine lovely scenic
    wooden metallic plastic glassy stony sandy rocky muddy icy leafy
    empty full busy quiet crowded open closed broken whole round square
    flat steep rough smooth soft hard heavy fresh ripe raw
    indoor outdoor inner outer front back left right upper lower central
    northern southern eastern western distant nearby local foreign
    happy sad calm wild tame fast slow deep shallow dense sparse
    residential industrial commercial historic famous typical common rare
    """.split()
)

# Common verbs (base forms); inflected forms are caught by suffix rules.
VERB_WORDS = frozenset(
    """
    go goes went gone walk walks run runs ran sit sits sat stand stands
    stood lie lies lay look looks see sees saw seen watch watches hold
    holds held wear wears wore carry carries ride rides rode drive drives
    drove fly flies flew swim swims swam jump jumps play plays eat eats
    ate drink drinks drank sleep sleeps slept rest rests stay stays
    make makes made take takes took give gives gave put puts get gets got
    come comes came leave leaves left move moves turn turns stop stops
    show shows appear appears seem seems contain contains include includes
    feature features depict depicts hang hangs hung lean leans face faces
    overlook overlooks surround surrounds fill fills cover covers grow
    grows grew graze grazes stretch stretches
    """.split()
)

# Nouns that describe the photograph rather than its contents.
DEFAULT_STOP_NOUNS = frozenset(
    "image images photo photos photograph photographs picture pictures "
    "closeup close-up shot shots snapshot view views scene scenes".split()
)

_IRREGULAR_PLURALS = {
    "people": "person",
    "men": "man",
    "women": "woman",
    "children": "child",
    "feet": "foot",
    "teeth": "tooth",
    "geese": "goose",
    "mice": "mouse",
    "leaves": "leaf",
    "shelves": "shelf",
    "knives": "knife",
    "wolves": "wolf",
    "loaves": "loaf",
    "scarves": "scarf",
    "buses": "bus",
    "sheep": "sheep",
}

# -ing/-ed words that are nouns or adjectives in caption usage, not verbs.
_NOT_VERB_FORMS = frozenset(
    """
    building buildings ceiling ceilings painting paintings clothing railing
    railings awning awnings dwelling dwellings wedding weddings evening
    evenings morning mornings lighting landing landings crossing crossings
    bedding siding carving carvings engraving opening openings
    bed beds shed sheds reed reeds seed seeds weed weeds speed
    """.split()
)


def singularize(word: str) -> str:
    """Reduce a plural noun to its singular form with small fixed rules."""
    if word in _IRREGULAR_PLURALS:
        return _IRREGULAR_PLURALS[word]
    if len(word) > 3 and word.endswith("ies"):
        return word[:-3] + "y"
    if len(word) > 3 and word.endswith(("ches", "shes", "xes", "zes", "sses")):
        return word[:-2]
    if len(word) > 2 and word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    return word


class Tagger(Protocol):
    """Maps a lowercase token to one of: "noun", "adjective", "verb", "other"."""

    def tag(self, token: str) -> str: ...


class RuleBasedTagger:
    """Deterministic lexicon + suffix tagger.

    The noun bucket is permissive: anything not recognized as an adjective,
    verb, or adverb is treated as a noun, which suits caption text where
    most content words name objects.
    """

    _ADJ_SUFFIXES = ("ful", "ous", "ive", "able", "ible", "less", "ish")
    _ADV_SUFFIX = "ly"

    def tag(self, token: str) -> str:
        if token in ADJECTIVE_WORDS:
            return "adjective"
        if token in VERB_WORDS:
            return "verb"
        if token in _NOT_VERB_FORMS:
            return "noun"
        if token.endswith(self._ADV_SUFFIX) and len(token) > 4:
            return "other"
        if token.endswith(("ing", "ed")) and len(token) > 4:
            return "verb"
        if token.endswith(self._ADJ_SUFFIXES) and len(token) > 5:
            return "adjective"
        return "noun"


def tokenize(caption: str) -> list[str]:
    return _TOKEN_RE.findall(caption.lower())


def extract_nouns(
    caption: str,
    tagger: Tagger | None = None,
    include_adjectives: bool = False,
    stop_nouns: frozenset[str] = DEFAULT_STOP_NOUNS,
) -> list[str]:
    """Lowercased, lemmatized noun tokens of one caption, duplicates kept.

    ``include_adjectives`` passes adjectives through as well; mined corpora
    often owe part of their descriptive power to them, but the default
    keeps the output strictly nominal.
    """
    tagger = tagger or RuleBasedTagger()
    out: list[str] = []
    for token in tokenize(caption):
        if token in STOP_WORDS:
            continue
        pos = tagger.tag(token)
        if pos == "noun":
            lemma = singularize(token)
        elif pos == "adjective" and include_adjectives:
            lemma = token
        else:
            continue
        if lemma in stop_nouns or len(lemma) < 2:
            continue
        out.append(lemma)
    return out


@dataclass
class CaptionCorpus:
    class_id: int
    captions: list[str]


@dataclass
class ContextNames:
    class_id: int
    entries: list[tuple[str, int]]  # (noun, count), counts non-increasing

    @property
    def nouns(self) -> list[str]:
        return [n for n, _ in self.entries]


def rank_context_names(
    corpus: CaptionCorpus,
    k: int = 10,
    tagger: Tagger | None = None,
    include_adjectives: bool = False,
    stop_nouns: frozenset[str] = DEFAULT_STOP_NOUNS,
) -> ContextNames:
    """Top-k most frequent nouns over a class's captions.

    Ties are broken lexicographically so the output is deterministic.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    counts: Counter[str] = Counter()
    for caption in corpus.captions:
        counts.update(
            extract_nouns(
                caption,
                tagger=tagger,
                include_adjectives=include_adjectives,
                stop_nouns=stop_nouns,
            )
        )
    ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ContextNames(class_id=corpus.class_id, entries=ordered[:k])


def read_corpus_dir(path: str | Path) -> list[CaptionCorpus]:
    """Read one caption file per class: <class_id>.txt, one caption per line."""
    path = Path(path)
    if not path.is_dir():
        raise DataError(f"caption directory not found: {path}")
    corpora = []
    for file in sorted(path.glob("*.txt")):
        try:
            class_id = int(file.stem)
        except ValueError as exc:
            raise DataError(f"caption file name must be a class id: {file.name}") from exc
        captions = [line for line in file.read_text().splitlines() if line.strip()]
        corpora.append(CaptionCorpus(class_id=class_id, captions=captions))
    return corpora


def write_context_names(items: list[ContextNames], path: str | Path) -> None:
    doc = {
        "context_names": [
            {"class_id": c.class_id, "entries": [[n, int(cnt)] for n, cnt in c.entries]}
            for c in sorted(items, key=lambda c: c.class_id)
        ]
    }
    Path(path).write_text(json.dumps(doc, indent=2))


def read_context_names(path: str | Path) -> dict[int, ContextNames]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"context names file not found: {path}")
    doc = json.loads(path.read_text())
    if not isinstance(doc, dict) or "context_names" not in doc:
        raise DataError(f"{path}: not a context-names document")
    out = {}
    try:
        for row in doc["context_names"]:
            cid = int(row["class_id"])
            out[cid] = ContextNames(
                class_id=cid, entries=[(str(n), int(c)) for n, c in row["entries"]]
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed context-names document") from exc
    return out
