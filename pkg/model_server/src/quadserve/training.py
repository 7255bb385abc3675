"""Fine-tune a pretrained encoder-decoder checkpoint on (input, target) pairs.

Standard teacher-forced cross-entropy training: the loss maximizes the
log-likelihood of the target sequence given the encoded input. The loop is
deliberately plain (AdamW, seeded shuffling, fixed epoch count) and writes
per-epoch losses next to the saved model.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

from .data import read_pairs


class CheckpointNotFoundError(Exception):
    """The checkpoint id or directory could not be loaded."""


@dataclass(frozen=True)
class TrainConfig:
    checkpoint: str = "t5-base"
    batch_size: int = 16
    learning_rate: float = 3e-4
    epochs: int = 20
    seed: int = 42
    max_source_length: int = 128
    max_target_length: int = 128


def load_checkpoint(checkpoint: str):
    try:
        tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        model = AutoModelForSeq2SeqLM.from_pretrained(checkpoint)
    except (OSError, ValueError, EnvironmentError) as exc:
        raise CheckpointNotFoundError(f"cannot load checkpoint {checkpoint!r}: {exc}") from None
    return tokenizer, model


def encode_batch(tokenizer, texts: list[str], max_length: int):
    """Tokenize and pad, guaranteeing a trailing end-of-sequence token.

    Some tokenizers append the end token themselves and some do not; the
    id-level check keeps both behaviors equivalent.
    """
    eos = tokenizer.eos_token_id
    features = []
    for text in texts:
        ids = tokenizer(text, truncation=True, max_length=max_length - 1)["input_ids"]
        if not ids or ids[-1] != eos:
            ids = ids + [eos]
        features.append({"input_ids": ids})
    return tokenizer.pad(features, return_tensors="pt")


def fine_tune(
    pairs_path: str | Path,
    output_dir: str | Path,
    config: TrainConfig = TrainConfig(),
) -> Path:
    """Train on a pairs file and save a servable model directory."""
    pairs = read_pairs(pairs_path)
    torch.manual_seed(config.seed)
    tokenizer, model = load_checkpoint(config.checkpoint)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    rng = random.Random(config.seed)
    order = list(range(len(pairs)))

    model.train()
    epoch_losses = []
    for _ in range(config.epochs):
        rng.shuffle(order)
        total, batches = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            chunk = [pairs[i] for i in order[start:start + config.batch_size]]
            sources = encode_batch(
                tokenizer, [s for s, _ in chunk], config.max_source_length
            )
            targets = encode_batch(
                tokenizer, [t for _, t in chunk], config.max_target_length
            )
            labels = targets["input_ids"].masked_fill(
                targets["attention_mask"] == 0, -100
            )
            loss = model(
                input_ids=sources["input_ids"],
                attention_mask=sources["attention_mask"],
                labels=labels,
            ).loss
            loss.backward()
            optimizer.step()
            optimizer.zero_grad()
            total += loss.item()
            batches += 1
        epoch_losses.append(total / batches)

    output_dir = Path(output_dir)
    model.save_pretrained(output_dir)
    tokenizer.save_pretrained(output_dir)
    log = {"config": asdict(config), "epoch_losses": epoch_losses,
           "n_pairs": len(pairs)}
    (output_dir / "training_log.json").write_text(
        json.dumps(log, indent=2), encoding="utf-8"
    )
    return output_dir
