"""Multiparty quantum conference protocols over Pauli-group encodings."""

from .codebook import Codebook, build_codebook, decode_p1, decode_p2, validate_orthogonality
from .errors import (
    BasisDegeneracyError,
    CodebookError,
    ConfigError,
    IntegrityError,
    InvalidOperandError,
    QConfError,
    SpanError,
)
from .pauli import PauliWord, Subgroup, derive_receiver_ops, enumerate_subgroups, mul, word
from .protocol import ConferenceConfig, Transcript, run_conference

__all__ = [
    "BasisDegeneracyError",
    "Codebook",
    "CodebookError",
    "ConferenceConfig",
    "ConfigError",
    "IntegrityError",
    "InvalidOperandError",
    "PauliWord",
    "QConfError",
    "SpanError",
    "Subgroup",
    "Transcript",
    "build_codebook",
    "decode_p1",
    "decode_p2",
    "derive_receiver_ops",
    "enumerate_subgroups",
    "mul",
    "run_conference",
    "validate_orthogonality",
    "word",
]
