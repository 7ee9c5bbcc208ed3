"""Context mining walkthrough: captions -> nouns -> ranked context names.

A vague class name like "field" says little on its own. The nouns that
recur in captions of images containing the class sketch its typical
surroundings, and the most frequent ones become its context names.
"""
from renamekit.mining import CaptionCorpus, extract_nouns, rank_context_names

caption = "A lush green field under the sky"
print(f"caption: {caption!r}")
print(f"nouns only:          {extract_nouns(caption)}")
print(f"with adjectives too: {extract_nouns(caption, include_adjectives=True)}")

corpus = CaptionCorpus(
    class_id=3,
    captions=[
        "a lush green field under the sky",
        "a field with grass and a tree",
        "a rural road along a grassy hillside",
        "a lush hillside above the field",
        "green grass in a rural field",
        "a tree beside the road",
        "the sky over a lush field",
        "a grassy field near the road",
    ],
)
context = rank_context_names(corpus, k=10, include_adjectives=True)
print(f"\ntop context names for class 'field' over {len(corpus.captions)} captions:")
for noun, count in context.entries:
    print(f"  {noun:<10} {count}")
