import json
import os

import pytest
import torch

os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")
os.environ.setdefault("TRANSFORMERS_VERBOSITY", "error")

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "construction", "worker", "engineer", "nurse", "pilot", "teacher",
    "male", "female", "he", "she", "trading", "saving", "bold", "warm",
    "leader", "helper", "##er", "##ing",
]


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """A seeded one-layer BERT with a handcrafted WordPiece vocab."""
    from transformers import BertConfig, BertModel, BertTokenizerFast

    root = tmp_path_factory.mktemp("checkpoint")
    (root / "vocab.txt").write_text("\n".join(VOCAB) + "\n")
    tokenizer = BertTokenizerFast.from_pretrained(str(root))
    torch.manual_seed(0)
    config = BertConfig(vocab_size=len(VOCAB), hidden_size=16, num_hidden_layers=1,
                        num_attention_heads=2, intermediate_size=32,
                        max_position_embeddings=32)
    model = BertModel(config)
    model.save_pretrained(str(root))
    tokenizer.save_pretrained(str(root))
    return root


@pytest.fixture(scope="session")
def tiny_lexicon(tmp_path_factory):
    """Schema-conformant three-category lexicon over the tiny vocab."""
    payload = {
        "language": "en",
        "version": "test",
        "attributes": {"male": ["male", "he"], "female": ["female", "she"]},
        "categories": [
            {"id": "careers", "group": "career_role",
             "male_stereotyped": ["engineer", "construction worker"],
             "female_stereotyped": ["nurse", "teacher"]},
            {"id": "traits", "group": "traits_performance",
             "male_stereotyped": [{"w": "bold", "provenance": "toolkit-default"},
                                  {"w": "leader", "provenance": "toolkit-default"}],
             "female_stereotyped": ["warm", "helper"]},
            {"id": "money", "group": "econ_financial",
             "male_stereotyped": ["trading", "pilot"],
             "female_stereotyped": ["saving", "worker"]},
        ],
    }
    path = tmp_path_factory.mktemp("lexicons") / "tiny.json"
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2))
    return path
