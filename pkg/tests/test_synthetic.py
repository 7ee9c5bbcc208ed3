import json

import numpy as np
import pytest
import torch

from renamekit import synthetic
from renamekit.candidates import read_pools
from renamekit.model.network import FrozenBackbone
from renamekit.names.encoders import TableTextEncoder
from renamekit.store.dataset import load_dataset


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    spec = synthetic.SyntheticSpec(seed=3, train_images=8, val_images=4)
    meta = synthetic.generate(out, spec)
    return out, spec, meta


class TestGenerate:
    def test_dataset_loads_and_validates(self, bundle):
        out, spec, _ = bundle
        table, train_segments = load_dataset(out / "data" / "train", "panoptic")
        _, val_segments = load_dataset(out / "data" / "val", "panoptic")
        assert len(table) == spec.num_classes
        assert train_segments and val_segments
        assert all(s.area > 0 for s in train_segments)

    def test_meta_names_planted(self, bundle):
        _, spec, meta = bundle
        assert len(meta["planted"]) == spec.num_classes
        assert meta["planted"]["0"] == synthetic.planted_name(0)

    def test_planted_embeddings_sit_on_prototypes(self, bundle):
        out, spec, meta = bundle
        encoder = TableTextEncoder.load(out / "encoder_table.json")
        backbone = FrozenBackbone(spec.channels, seed=meta["backbone_seed"])
        for class_id in range(spec.num_classes):
            color = np.array(synthetic._THEMES[class_id][1], dtype=np.float32)
            probe = np.tile(color[:, None, None], (1, 16, 16))
            with torch.no_grad():
                feats = backbone(torch.from_numpy(probe)).numpy()
            proto = feats[:, 4:12, 4:12].mean(axis=(1, 2))
            planted = encoder.encode(meta["planted"][str(class_id)])
            cos = np.dot(planted, proto) / (np.linalg.norm(planted) * np.linalg.norm(proto))
            assert cos > 0.99
            # Decoys point away from the class prototype.
            pools = read_pools(out / "pools.json") if (out / "pools.json").exists() else None
            for name in synthetic._DECOY_NAMES[class_id * 4:(class_id + 1) * 4]:
                decoy = encoder.encode(name)
                assert np.dot(decoy, proto) < 0.0

    def test_recordings_cover_every_class(self, bundle):
        out, spec, _ = bundle
        rows = json.loads((out / "recordings.json").read_text())
        assert len(rows) == spec.num_classes
        for row in rows:
            names = [n.strip() for n in row["response"].split(",")]
            assert len(names) == 5

    def test_generation_is_deterministic(self, tmp_path):
        spec = synthetic.SyntheticSpec(seed=5, train_images=4, val_images=2)
        synthetic.generate(tmp_path / "a", spec)
        synthetic.generate(tmp_path / "b", spec)
        for rel in ("encoder_table.json", "recordings.json", "vectors.vec",
                    "data/train/index.json"):
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_captions_strictly_decreasing_counts(self, bundle):
        out, spec, _ = bundle
        from renamekit.mining import CaptionCorpus, rank_context_names

        captions = (out / "captions" / "0.txt").read_text().splitlines()
        context = rank_context_names(CaptionCorpus(0, captions), k=10)
        counts = [c for _, c in context.entries]
        assert counts == sorted(counts, reverse=True)
        assert len(set(counts)) == len(counts)  # no ties, fully deterministic
        assert context.nouns == list(synthetic._THEMES[0][3])
