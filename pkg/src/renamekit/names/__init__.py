from .embedding import embed_name_ensembled, fill_template, load_templates
from .encoders import ExternalTextEncoder, HashTextEncoder, TableTextEncoder, TextEncoder
from .vectors import (
    IndicatorSimilarity,
    SimilarityFn,
    SimilarityProvider,
    load_word_vectors,
    save_word_vectors,
)

__all__ = [
    "ExternalTextEncoder",
    "HashTextEncoder",
    "IndicatorSimilarity",
    "SimilarityFn",
    "SimilarityProvider",
    "TableTextEncoder",
    "TextEncoder",
    "embed_name_ensembled",
    "fill_template",
    "load_templates",
    "load_word_vectors",
    "save_word_vectors",
]
