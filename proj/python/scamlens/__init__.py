"""Scam email triage: red-flag heuristics, mock-LLM fusion and evaluation metrics."""

from ._core import (
    ConfigError,
    CorpusFormatError,
    EmptyInput,
    LengthMismatch,
    MalformedMessage,
    OneClassOnly,
    ScamlensError,
    TooFewExamples,
    auc,
    classify,
    cohen_kappa,
    confusion,
    decide,
    detect_flags,
    evaluate,
    extract_urls,
    heuristic_score,
    metrics,
    parse_email,
    parse_plaintext,
    threshold_sweep,
    tokenize,
    tune_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
