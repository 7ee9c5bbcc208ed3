"""Candidate generation walkthrough: prompt protocol + recorded replay.

The renaming prompt is two fixed messages: a system message framing the
task and a user message carrying one class's original and context names.
Responses replay from a recordings file, so the whole stage runs offline
and deterministically; parsed name lists must hold 5-10 unique names.
"""
import tempfile
from pathlib import Path

from renamekit.candidates import (
    FixtureClient,
    build_prompt,
    generate_candidates,
    record_response,
    write_recordings,
)
from renamekit.errors import ValidationError
from renamekit.mining import ContextNames
from renamekit.store.types import ClassEntry

entry = ClassEntry(class_id=3, original_names=["field"], is_thing=False)
context = ContextNames(
    class_id=3,
    entries=[("lush", 20), ("field", 19), ("sky", 18), ("green", 17), ("grass", 16),
             ("tree", 15), ("road", 14), ("hillside", 13), ("grassy", 12), ("rural", 11)],
)
prompt = build_prompt(entry, context, use_context=True)
print("--- system message ---")
print(prompt.system_message)
print("\n--- user message ---")
print(prompt.user_message)

recordings = []
record_response(
    recordings, prompt,
    "rural field, roadside field, green field, crop field, sports field, "
    "grassland, grassy hillside",
)
path = Path(tempfile.mkdtemp()) / "recordings.json"
write_recordings(recordings, path)

client = FixtureClient(path)
pool = generate_candidates(prompt, client, class_id=3, provenance="fixture")
print(f"\nreplayed candidate pool ({len(pool.candidates)} names):")
for name in pool.candidates:
    print(f"  - {name}")

bad_prompt = build_prompt(entry, None, use_context=False)
record_response(recordings, bad_prompt, "meadow, pasture")  # only two names
write_recordings(recordings, path)
try:
    generate_candidates(bad_prompt, FixtureClient(path), class_id=3)
except ValidationError as err:
    print(f"\nvalidation rejects an undersized response: {err}")
    print(f"raw response kept for repair: {err.raw_response!r}")
