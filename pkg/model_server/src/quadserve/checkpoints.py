"""Build a slim, randomly initialized encoder-decoder checkpoint.

This exists for offline smoke runs: it creates a whitespace word-level
tokenizer over a given corpus plus a small randomly initialized T5-style
model, saved in the standard checkpoint layout, so the train/serve stack
can be exercised end to end without downloading a published checkpoint.
Real runs point ``fine_tune`` at a pretrained checkpoint id instead.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import torch
from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import PreTrainedTokenizerFast, T5Config, T5ForConditionalGeneration

PAD, EOS, UNK = "<pad>", "</s>", "<unk>"


def build_word_level_tokenizer(corpus: Iterable[str]) -> PreTrainedTokenizerFast:
    words = sorted({word for text in corpus for word in text.split()})
    vocab = {PAD: 0, EOS: 1, UNK: 2}
    for word in words:
        vocab[word] = len(vocab)
    tokenizer = Tokenizer(models.WordLevel(vocab, unk_token=UNK))
    tokenizer.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    return PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        pad_token=PAD,
        eos_token=EOS,
        unk_token=UNK,
        model_max_length=512,
    )


def init_checkpoint(
    directory: str | Path,
    corpus: Iterable[str],
    d_model: int = 64,
    num_layers: int = 2,
    num_heads: int = 4,
    d_ff: int = 128,
    seed: int = 0,
) -> Path:
    """Write a random-weight checkpoint whose vocabulary covers ``corpus``."""
    directory = Path(directory)
    tokenizer = build_word_level_tokenizer(corpus)
    config = T5Config(
        vocab_size=len(tokenizer),
        d_model=d_model,
        d_kv=d_model // num_heads,
        d_ff=d_ff,
        num_layers=num_layers,
        num_decoder_layers=num_layers,
        num_heads=num_heads,
        decoder_start_token_id=tokenizer.pad_token_id,
        pad_token_id=tokenizer.pad_token_id,
        eos_token_id=tokenizer.eos_token_id,
    )
    torch.manual_seed(seed)
    model = T5ForConditionalGeneration(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return directory
