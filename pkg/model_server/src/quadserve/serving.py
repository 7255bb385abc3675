"""Serve greedy-decoded generations over the /generate wire protocol.

Request:  POST /generate {"inputs": [str, ...], "task": str, "decoding": "greedy"}
Response: 200 {"outputs": [str, ...]}  with outputs aligned to inputs.

Malformed bodies and any decoding other than "greedy" get a 400. Greedy
decoding makes responses deterministic for a fixed model. Inference is
serialized behind a lock; the contract only promises per-request
determinism and arity, not throughput.
"""

from __future__ import annotations

import threading
from pathlib import Path

import torch
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .training import load_checkpoint


def greedy_generate(
    tokenizer,
    model,
    inputs: list[str],
    max_new_tokens: int = 128,
    batch_size: int = 16,
) -> list[str]:
    eos = tokenizer.eos_token_id
    outputs: list[str] = []
    for start in range(0, len(inputs), batch_size):
        chunk = inputs[start:start + batch_size]
        features = []
        for text in chunk:
            ids = tokenizer(text, truncation=True,
                            max_length=model.config.n_positions
                            if hasattr(model.config, "n_positions") else 512)["input_ids"]
            if not ids or ids[-1] != eos:
                ids = ids + [eos]
            features.append({"input_ids": ids})
        batch = tokenizer.pad(features, return_tensors="pt")
        with torch.no_grad():
            generated = model.generate(
                input_ids=batch["input_ids"],
                attention_mask=batch["attention_mask"],
                do_sample=False,
                num_beams=1,
                max_new_tokens=max_new_tokens,
            )
        outputs.extend(
            tokenizer.decode(ids, skip_special_tokens=True).strip()
            for ids in generated
        )
    return outputs


def create_app(model_dir: str | Path, max_new_tokens: int = 128,
               batch_size: int = 16) -> FastAPI:
    tokenizer, model = load_checkpoint(str(model_dir))
    model.eval()
    lock = threading.Lock()
    app = FastAPI(title="quadserve")

    def bad_request(message: str) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": message})

    @app.post("/generate")
    async def generate(request: Request):
        try:
            body = await request.json()
        except Exception:
            return bad_request("request body must be valid JSON")
        if not isinstance(body, dict):
            return bad_request("request body must be a JSON object")
        if body.get("decoding", "greedy") != "greedy":
            return bad_request("only greedy decoding is supported")
        inputs = body.get("inputs")
        if (
            not isinstance(inputs, list)
            or not inputs
            or not all(isinstance(text, str) for text in inputs)
        ):
            return bad_request('"inputs" must be a non-empty list of strings')
        with lock:
            outputs = greedy_generate(
                tokenizer, model, inputs,
                max_new_tokens=max_new_tokens, batch_size=batch_size,
            )
        return {"outputs": outputs}

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    return app
