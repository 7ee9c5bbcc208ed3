"""renamekit: rename segmentation benchmark classes with model-ranked names.

The pipeline mines context nouns from captions, generates candidate names
per class through a language-model client, trains a text-query decoder that
scores candidates by how well they reconstruct each ground-truth mask,
exports the per-segment winners, evaluates predictions with standard and
similarity-weighted metrics, and serves a human verification workflow.
"""

__version__ = "0.1.0"
