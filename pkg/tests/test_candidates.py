import json

import numpy as np
import pytest

from renamekit.candidates import (
    SYSTEM_MESSAGE,
    SYSTEM_MESSAGE_NO_CONTEXT,
    CandidatePool,
    FixtureClient,
    StaticClient,
    build_prompt,
    generate_candidates,
    parse_candidate_response,
    read_pools,
    record_response,
    write_pools,
    write_recordings,
)
from renamekit.errors import ClientError, FixtureMissError, ValidationError
from renamekit.mining import ContextNames
from renamekit.store.types import ClassEntry

FIELD_CONTEXT = ContextNames(
    class_id=3,
    entries=[("lush", 20), ("field", 19), ("sky", 18), ("green", 17), ("grass", 16),
             ("tree", 15), ("road", 14), ("hillside", 13), ("grassy", 12), ("rural", 11)],
)

BOX_POOL = ["storage box", "packing box", "file box", "box container",
            "decorative box", "display box", "paper box", "food box"]

CRADLE_RESPONSE = ("bedroom cradle, cradle, infant bed, nursery cradle, "
                   "baby cradle, infant cradle, wooden cradle")


class TestBuildPrompt:
    def test_system_message_fixed_phrases(self):
        # Anchor phrases of the published instruction text.
        assert SYSTEM_MESSAGE.startswith(
            "You are a helpful assistant aiding in renaming dataset classes."
        )
        assert "Use synonyms or subcategories of the original class name" in SYSTEM_MESSAGE
        assert "'grass' can be renamed as 'lawn, turf'" in SYSTEM_MESSAGE
        assert "'fan' can be renamed as 'ceiling fan, floor fan'" in SYSTEM_MESSAGE
        assert "using it as the head noun" in SYSTEM_MESSAGE
        assert "'person under sky'" in SYSTEM_MESSAGE
        assert SYSTEM_MESSAGE.endswith("Kindly provide the original class names and context names.")

    def test_field_prompt(self):
        entry = ClassEntry(class_id=3, original_names=["field"], is_thing=False)
        prompt = build_prompt(entry, FIELD_CONTEXT, use_context=True)
        assert prompt.system_message == SYSTEM_MESSAGE
        assert prompt.user_message.startswith(
            "Original name: field, context names (with frequencies) are lush (20), field (19)"
        )
        assert prompt.user_message.endswith(
            "What are the new names? Only provide 5-10 names. And make sure you "
            "generate at least 3 reasonable synonyms or subcategories."
        )

    def test_byte_stable(self):
        entry = ClassEntry(class_id=3, original_names=["field"], is_thing=False)
        a = build_prompt(entry, FIELD_CONTEXT, use_context=True)
        b = build_prompt(entry, FIELD_CONTEXT, use_context=True)
        assert (a.system_message, a.user_message) == (b.system_message, b.user_message)
        assert a.digest() == b.digest()

    def test_no_context_ablation(self):
        entry = ClassEntry(class_id=3, original_names=["field"], is_thing=False)
        prompt = build_prompt(entry, None, use_context=False)
        assert prompt.system_message == SYSTEM_MESSAGE_NO_CONTEXT
        assert "context names" not in prompt.user_message
        assert "context names" not in prompt.system_message
        assert prompt.user_message.startswith("Original name: field. ")

    def test_multiple_original_names(self):
        entry = ClassEntry(class_id=7, original_names=["rock", "stone"], is_thing=False)
        context = ContextNames(class_id=7, entries=[("stone", 4), ("water", 2)])
        prompt = build_prompt(entry, context, use_context=True)
        assert "Original name: rock, stone," in prompt.user_message


class TestParseResponse:
    def test_comma_list(self):
        assert parse_candidate_response("lawn, turf, grass field") == [
            "lawn", "turf", "grass field"
        ]

    def test_newlines_numbering_quotes(self):
        raw = "1. Lawn\n2) 'turf'\n- \"grass field\"\n* meadow\n"
        assert parse_candidate_response(raw) == ["lawn", "turf", "grass field", "meadow"]

    def test_dedup_preserves_order(self):
        raw = "lawn, lawn, turf, grass field, meadow, pasture"
        assert parse_candidate_response(raw) == [
            "lawn", "turf", "grass field", "meadow", "pasture"
        ]


class TestGenerateCandidates:
    def _prompt(self):
        entry = ClassEntry(class_id=1, original_names=["box"], is_thing=True)
        context = ContextNames(class_id=1, entries=[("room", 9), ("stool", 8)])
        return build_prompt(entry, context, use_context=True)

    def test_box_fixture_pool(self):
        prompt = self._prompt()
        client = StaticClient({prompt.digest(): ", ".join(BOX_POOL)})
        pool = generate_candidates(prompt, client, class_id=1)
        assert pool.candidates == BOX_POOL

    def test_too_few_names_rejected_with_raw(self):
        prompt = self._prompt()
        client = StaticClient({prompt.digest(): "a, b"})
        with pytest.raises(ValidationError) as err:
            generate_candidates(prompt, client, class_id=1)
        assert err.value.raw_response == "a, b"

    def test_dedup_then_bounds(self):
        prompt = self._prompt()
        raw = "lawn, lawn, turf, grass field, meadow, pasture"
        client = StaticClient({prompt.digest(): raw})
        pool = generate_candidates(prompt, client, class_id=1)
        assert len(pool.candidates) == 5

    def test_retry_then_surface(self):
        prompt = self._prompt()

        class FlakyClient:
            def __init__(self):
                self.calls = 0

            def complete(self, _):
                self.calls += 1
                raise ClientError("down")

        client = FlakyClient()
        with pytest.raises(ClientError):
            generate_candidates(prompt, client, class_id=1, retries=1)
        assert client.calls == 2

    def test_validation_fuzz(self):
        rng = np.random.default_rng(9)
        prompt = self._prompt()
        tokens = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"]
        for _ in range(100):
            n = int(rng.integers(0, 13))
            raw = ", ".join(rng.choice(tokens, size=n, replace=False)) if n else ""
            client = StaticClient({prompt.digest(): raw})
            try:
                pool = generate_candidates(prompt, client, class_id=1)
            except ValidationError:
                assert not 5 <= n <= 10
            else:
                assert 5 <= len(pool.candidates) <= 10
                assert len(set(pool.candidates)) == len(pool.candidates)
                assert all(c == c.lower() and c for c in pool.candidates)


class TestFixtureClient:
    def test_replay_byte_identical(self, tmp_path):
        entry = ClassEntry(class_id=2, original_names=["cradle"], is_thing=True)
        context = ContextNames(class_id=2, entries=[("room", 5), ("nursery", 3)])
        prompt = build_prompt(entry, context, use_context=True)
        recordings = []
        record_response(recordings, prompt, CRADLE_RESPONSE)
        write_recordings(recordings, tmp_path / "rec.json")
        client = FixtureClient(tmp_path / "rec.json")
        assert client.complete(prompt) == CRADLE_RESPONSE
        assert client.complete(prompt) == CRADLE_RESPONSE  # deterministic repeat

    def test_miss_raises(self, tmp_path):
        write_recordings([], tmp_path / "rec.json")
        client = FixtureClient(tmp_path / "rec.json")
        entry = ClassEntry(class_id=2, original_names=["cradle"], is_thing=True)
        prompt = build_prompt(entry, None, use_context=False)
        with pytest.raises(FixtureMissError):
            client.complete(prompt)


class TestPoolStore:
    def test_roundtrip(self, tmp_path):
        pools = [
            CandidatePool(class_id=1, candidates=BOX_POOL, provenance="fixture"),
            CandidatePool(class_id=0, candidates=["a", "b", "c", "d", "e"]),
        ]
        write_pools(pools, tmp_path / "pools.json")
        loaded = read_pools(tmp_path / "pools.json")
        assert loaded[1].candidates == BOX_POOL
        assert loaded[0].provenance == "llm"

    def test_manual_override_size(self, tmp_path):
        pool = CandidatePool(class_id=1, candidates=["a", "b"], provenance="manual")
        pool.validate()  # manual pools may be outside [5, 10]
        write_pools([pool], tmp_path / "pools.json")
        assert read_pools(tmp_path / "pools.json")[1].candidates == ["a", "b"]

    def test_invalid_pool_rejected(self):
        with pytest.raises(ValidationError):
            CandidatePool(class_id=1, candidates=["A", "b", "c", "d", "e"]).validate()
        with pytest.raises(ValidationError):
            CandidatePool(class_id=1, candidates=["a", "a", "b", "c", "d"]).validate()
