"""restyle: attribute-controlled text rewriting.

Controlled span-denoising training, K-sample classifier-guided inference
with filtering, soft masking, student distillation, and the evaluation
metric suite (Accuracy, Semantic, G, S-BLEU, Fluency) — runnable end to end
with built-in desk-scale backends and extensible to real neural models via
a newline-delimited JSON bridge protocol.
"""

from .backends import (
    BackendError,
    BridgeBackend,
    BridgeError,
    CountModel,
    GenMode,
    GenOptions,
    NeuralHyper,
    NeuralModel,
    TrainingPair,
    backend_generate,
    backend_train,
)
from .classifier import ClassifierModel, predict_label, predict_proba, train_classifier
from .embedder import EmbeddingIndex, fit_embedder, similarity
from .experiment import ExperimentConfig, run_experiment
from .metrics import (
    EvalRecord,
    EvalReport,
    GMode,
    NgramLM,
    SemanticMode,
    bleu,
    evaluate,
    g_score,
    perplexity,
    train_lm,
)
from .noising import (
    MaskedVariant,
    MaskMode,
    MaskSpec,
    hard_mask,
    make_variants,
    soft_mask,
)
from .persist import load_model, save_model
from .pipeline import (
    Fallback,
    SelectionPolicy,
    TransferRequest,
    TransferResult,
    build_denoising_data,
    build_student_data,
    select_candidate,
    student_transfer,
    transfer,
)
from .textcore import (
    AttributeLabel,
    LabeledExample,
    Vocab,
    build_vocab,
    control_token,
    detokenize,
    make_label_set,
    tokenize,
)
from .toydata import ToyCorpusSpec, default_spec, gen_toy_corpus

__version__ = "0.1.0"
