"""Hosted models behind the protocol roles.

The built-in "toy" models need no downloads and are fully deterministic, so
the server can be exercised (and protocol-conformance-tested) anywhere.
Real transformers-style models load lazily and only when named in the
config; a load failure aborts startup with a not-ready handshake.
"""

from __future__ import annotations

import hashlib
import math
import random

MASK_SENTINEL = "<mask>"

# tiny control-conditioned lexicons for the toy generator: the word list for
# a control is tried in order for greedy decoding and sampled for sampling
_TOY_LEXICON = {
    "positive": ["great", "amazing", "wonderful", "lovely"],
    "negative": ["awful", "terrible", "dreadful", "poor"],
}
_TOY_DEFAULT = ["fine", "okay", "plain", "usual"]


class ModelError(RuntimeError):
    pass


def _control_name(control: str) -> str:
    # control tokens arrive as "<attr:NAME>"; plain names also accepted
    if control.startswith("<attr:") and control.endswith(">"):
        return control[len("<attr:") : -1]
    return control


class ToyGenerator:
    """Fills each "<mask>" sentinel with one control-conditioned word."""

    def __init__(self, temperature: float = 1.0, max_len: int = 64):
        self.temperature = temperature
        self.max_len = max_len

    def generate(
        self,
        text: str,
        control: str,
        n: int,
        mode: str,
        temperature: float,
        seed: int,
    ) -> list:
        if n < 1:
            raise ModelError("n must be >= 1")
        if mode not in ("greedy", "sample"):
            raise ModelError(f"unknown mode {mode!r}")
        if mode == "greedy" and n > 1:
            raise ModelError("greedy mode yields one distinct output")
        words = _TOY_LEXICON.get(_control_name(control), _TOY_DEFAULT)
        tokens = text.split()
        rng = random.Random(seed)
        outputs = []
        for _ in range(n):
            filled = []
            for tok in tokens:
                if tok == MASK_SENTINEL:
                    pick = words[0] if mode == "greedy" else rng.choice(words)
                    filled.append(pick)
                else:
                    filled.append(tok)
            outputs.append(" ".join(filled[: self.max_len]))
        return outputs


class ToyClassifier:
    """Lexicon-overlap scorer normalized into a probability distribution."""

    def __init__(self, labels):
        self.labels = tuple(labels)

    def classify(self, text: str) -> dict:
        tokens = text.split()
        scores = {}
        for label in self.labels:
            lexicon = set(_TOY_LEXICON.get(label, ()))
            scores[label] = sum(1.0 for tok in tokens if tok in lexicon)
        total = sum(math.exp(s) for s in scores.values())
        return {label: math.exp(s) / total for label, s in scores.items()}


class ToyEmbedder:
    """Deterministic hashed bag-of-words embedding (no salted hash())."""

    dim = 16

    def embed(self, text: str) -> list:
        vector = [0.0] * self.dim
        for tok in text.split():
            digest = hashlib.sha256(tok.encode("utf-8")).digest()
            index = digest[0] % self.dim
            sign = 1.0 if digest[1] % 2 == 0 else -1.0
            vector[index] += sign
        norm = math.sqrt(sum(v * v for v in vector))
        if norm > 0:
            vector = [v / norm for v in vector]
        return vector


def _load_hosted_generator(name: str, device: str):
    from transformers import pipeline  # deferred; heavy import

    pipe = pipeline("text2text-generation", model=name, device=device)

    class HostedGenerator:
        def generate(self, text, control, n, mode, temperature, seed):
            prompt = f"{control} {text}"
            do_sample = mode == "sample"
            results = pipe(
                prompt,
                num_return_sequences=n,
                do_sample=do_sample,
                temperature=temperature if do_sample else None,
            )
            return [r["generated_text"] for r in results]

    return HostedGenerator()


def _load_hosted_classifier(name: str, device: str, labels):
    from transformers import pipeline

    pipe = pipeline("text-classification", model=name, device=device, top_k=None)

    class HostedClassifier:
        def classify(self, text):
            return {r["label"]: float(r["score"]) for r in pipe(text)[0]}

    return HostedClassifier()


def _load_hosted_embedder(name: str, device: str):
    from sentence_transformers import SentenceTransformer

    model = SentenceTransformer(name, device=device)

    class HostedEmbedder:
        def embed(self, text):
            return [float(v) for v in model.encode([text])[0]]

    return HostedEmbedder()


def load_models(config) -> dict:
    """role -> model instance for every configured role.

    Raises ModelError when a hosted model cannot be loaded.
    """
    from .config import TOY_MODEL

    models = {}
    try:
        if config.generator is not None:
            if config.generator == TOY_MODEL:
                models["generator"] = ToyGenerator(config.temperature, config.max_len)
            else:
                models["generator"] = _load_hosted_generator(config.generator, config.device)
        if config.classifier is not None:
            if config.classifier == TOY_MODEL:
                models["classifier"] = ToyClassifier(config.labels)
            else:
                models["classifier"] = _load_hosted_classifier(
                    config.classifier, config.device, config.labels
                )
        if config.embedder is not None:
            if config.embedder == TOY_MODEL:
                models["embedder"] = ToyEmbedder()
            else:
                models["embedder"] = _load_hosted_embedder(config.embedder, config.device)
    except ModelError:
        raise
    except Exception as exc:  # import errors, download failures, bad names
        raise ModelError(f"model load failed: {exc}") from exc
    return models
