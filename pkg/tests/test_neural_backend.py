"""Neural backend: gradient correctness, soft-mask limits, training descent."""

import math

import numpy as np
import pytest

from restyle.backends import GenMode, GenOptions, NeuralHyper, TrainingPair
from restyle.backends.base import BackendError
from restyle.backends.neural import (
    NeuralModel,
    forward_backward,
    generate_neural,
    init_neural,
    masked_position_logits,
    train_neural,
)
from restyle.noising import MaskedVariant, MaskMode, MaskSpec, hard_mask, soft_mask
from restyle.rng import Xoshiro256StarStar, mix
from restyle.textcore import LabeledExample, build_vocab, make_label_set, tokenize


def _ex(text, label):
    return LabeledExample(text=text, seq=tokenize(text), label=label)


@pytest.fixture(scope="module")
def small_setup():
    labels = make_label_set(("pos", "neg"))
    corpus = [
        _ex("the food was great today", labels[0]),
        _ex("the food was awful today", labels[1]),
        _ex("my meal seemed great honestly", labels[0]),
        _ex("my meal seemed awful honestly", labels[1]),
    ]
    vocab = build_vocab(corpus, labels)
    return labels, corpus, vocab


def _pairs(corpus, spec, n_variants=4, base_seed=0):
    out = []
    for i, ex in enumerate(corpus):
        for j in range(n_variants):
            from restyle.noising import mask_one

            variant = mask_one(ex.seq, spec, mix(mix(base_seed, i), j))
            out.append(TrainingPair(ex.label, variant, ex.seq))
    return out


def test_init_loss_near_log_vocab(small_setup):
    labels, corpus, vocab = small_setup
    model = init_neural(vocab, NeuralHyper(dim=16), seed=3)
    pair = TrainingPair(labels[0], hard_mask(corpus[0].seq, MaskSpec(ratio=0.4), 0), corpus[0].seq)
    loss, _ = forward_backward(model, pair)
    assert abs(loss - math.log(len(vocab))) < 0.1


def test_gradients_match_finite_differences(small_setup):
    labels, corpus, vocab = small_setup
    hyper = NeuralHyper(dim=8)
    spec = MaskSpec(ratio=0.5, mode=MaskMode.SOFT, blend=0.6)
    step = 1e-5
    worst = 0.0
    for draw in range(20):
        model = init_neural(vocab, hyper, seed=1000 + draw)
        # spread parameters out so gradients are not tiny
        rng = Xoshiro256StarStar(draw)
        model.E += 0.2 * (np.array([[rng.random() for _ in range(8)] for _ in range(len(vocab))]) - 0.5)
        model.W += 0.2 * (np.array([[rng.random() for _ in range(8)] for _ in range(len(vocab))]) - 0.5)
        ex = corpus[draw % len(corpus)]
        pair = TrainingPair(ex.label, soft_mask(ex.seq, spec, draw), ex.seq)
        _, grads = forward_backward(model, pair)
        for name, param in (("E", model.E), ("W", model.W)):
            flat = param.reshape(-1)
            gflat = grads[name].reshape(-1)
            idx = rng.randbelow(flat.size)
            orig = flat[idx]
            flat[idx] = orig + step
            loss_hi, _ = forward_backward(model, pair)
            flat[idx] = orig - step
            loss_lo, _ = forward_backward(model, pair)
            flat[idx] = orig
            numeric = (loss_hi - loss_lo) / (2 * step)
            denom = max(abs(numeric), abs(gflat[idx]), 1e-8)
            worst = max(worst, abs(numeric - gflat[idx]) / denom)
    assert worst < 1e-4, f"worst relative gradient error {worst}"


def test_descent_on_fifty_pairs(small_setup):
    labels, corpus, vocab = small_setup
    spec = MaskSpec(ratio=0.4)
    pairs = _pairs(corpus, spec, n_variants=13)[:50]
    hyper = NeuralHyper(dim=16, lr=1.0, epochs=4)  # 200 SGD steps
    model0 = init_neural(vocab, hyper, seed=0)
    loss0 = sum(forward_backward(model0, p)[0] for p in pairs) / len(pairs)
    trained = train_neural(pairs, vocab, hyper, seed=0)
    loss1 = sum(forward_backward(trained, p)[0] for p in pairs) / len(pairs)
    assert loss1 < loss0


def test_soft_mask_limits(small_setup):
    labels, corpus, vocab = small_setup
    model = init_neural(vocab, NeuralHyper(dim=8), seed=5)
    seq = corpus[0].seq
    masked = frozenset({1, 3})

    def soft_with(blend_weights):
        return MaskedVariant(
            kind=MaskMode.SOFT, source=seq, masked_positions=masked, weights=blend_weights
        )

    # blend 0 everywhere == logits on the fully visible sentence
    weights0 = tuple(0.0 for _ in seq)
    visible = MaskedVariant(
        kind=MaskMode.SOFT, source=seq, masked_positions=masked, weights=weights0
    )
    _, logits0 = masked_position_logits(model, visible, labels[0])

    # blend 1 at masked positions == hard per-token MASK substitution
    weights1 = tuple(1.0 if i in masked else 0.0 for i in range(len(seq)))
    _, logits1 = masked_position_logits(model, soft_with(weights1), labels[0])
    hard = MaskedVariant(
        kind=MaskMode.HARD,
        source=seq,
        masked_positions=masked,
        hard_tokens=tuple("<mask>" if i in masked else t for i, t in enumerate(seq)),
    )
    _, logits_hard = masked_position_logits(model, hard, labels[0])
    np.testing.assert_array_equal(logits1, logits_hard)

    # and the two limits genuinely differ
    assert not np.array_equal(logits0, logits1)


def test_lambda_one_blocks_token_embedding_gradient(small_setup):
    labels, corpus, vocab = small_setup
    model = init_neural(vocab, NeuralHyper(dim=8), seed=2)
    seq = corpus[0].seq
    # every position fully replaced by MASK: token embeddings unused
    variant = MaskedVariant(
        kind=MaskMode.SOFT,
        source=seq,
        masked_positions=frozenset(range(len(seq))),
        weights=tuple(1.0 for _ in seq),
    )
    _, grads = forward_backward(model, TrainingPair(labels[0], variant, seq))
    token_ids = sorted(set(vocab.id(t) for t in seq))
    for tid in token_ids:
        if tid == vocab.mask_id:
            continue
        assert np.allclose(grads["E"][tid], 0.0)
    assert not np.allclose(grads["E"][vocab.mask_id], 0.0)


def test_generation_contract(small_setup):
    labels, corpus, vocab = small_setup
    spec = MaskSpec(ratio=0.4)
    model = train_neural(_pairs(corpus, spec), vocab, NeuralHyper(dim=16, lr=2.0, epochs=10), 0)
    source = corpus[0].seq
    variant = hard_mask(source, spec, 11)

    greedy = generate_neural(model, variant, labels[1], GenOptions(n=1, mode=GenMode.GREEDY))
    assert greedy == generate_neural(
        model, variant, labels[1], GenOptions(n=1, mode=GenMode.GREEDY, seed=999)
    )
    samples = generate_neural(model, variant, labels[1], GenOptions(n=6, seed=3))
    assert len(samples) == 6
    for out in samples + greedy:
        assert len(out) == len(source)  # length preserving
        for i, tok in enumerate(source):
            if i not in variant.masked_positions:
                assert out[i] == tok  # copy constraint
            else:
                assert vocab.id(out[i]) not in vocab.reserved_ids  # no sentinels


def test_zero_mask_returns_copies(small_setup):
    labels, corpus, vocab = small_setup
    model = init_neural(vocab, NeuralHyper(dim=8), 0)
    variant = MaskedVariant(
        kind=MaskMode.HARD,
        source=corpus[0].seq,
        masked_positions=frozenset(),
        hard_tokens=corpus[0].seq,
    )
    assert generate_neural(model, variant, labels[0], GenOptions(n=3, seed=0)) == [
        corpus[0].seq
    ] * 3


def test_no_supervised_positions_error(small_setup):
    labels, corpus, vocab = small_setup
    model = init_neural(vocab, NeuralHyper(dim=8), 0)
    variant = MaskedVariant(
        kind=MaskMode.HARD,
        source=corpus[0].seq,
        masked_positions=frozenset(),
        hard_tokens=corpus[0].seq,
    )
    with pytest.raises(BackendError, match="no supervised positions"):
        forward_backward(model, TrainingPair(labels[0], variant, corpus[0].seq))
    with pytest.raises(BackendError, match="empty pairs"):
        train_neural([], vocab)


def test_init_is_seeded_and_bounded(small_setup):
    _, _, vocab = small_setup
    hyper = NeuralHyper(dim=8)
    a = init_neural(vocab, hyper, 1)
    b = init_neural(vocab, hyper, 1)
    c = init_neural(vocab, hyper, 2)
    np.testing.assert_array_equal(a.E, b.E)
    np.testing.assert_array_equal(a.W, b.W)
    assert not np.array_equal(a.E, c.E)
    assert np.abs(a.E).max() <= hyper.init_scale
    assert np.abs(a.W).max() <= hyper.init_scale


def test_json_round_trip(small_setup):
    labels, corpus, vocab = small_setup
    model = init_neural(vocab, NeuralHyper(dim=8), 0)
    again = NeuralModel.from_json(model.to_json())
    np.testing.assert_array_equal(model.E, again.E)
    np.testing.assert_array_equal(model.W, again.W)
    variant = hard_mask(corpus[0].seq, MaskSpec(ratio=0.4), 4)
    opts = GenOptions(n=2, seed=9)
    assert generate_neural(model, variant, labels[0], opts) == generate_neural(
        again, variant, labels[0], opts
    )
