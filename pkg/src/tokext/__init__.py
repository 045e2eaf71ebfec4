"""tokext: byte-fallback BPE tokenizer extension + next-token-prediction evaluation."""

from .errors import (
    BoundaryMerge,
    ConfigError,
    DuplicateSeries,
    EmptyContext,
    EmptyCorpus,
    EmptyInput,
    IncompatibleModels,
    InvalidByteSequence,
    InvalidModel,
    InvalidScore,
    InvalidTokenId,
    JoinError,
    KindConflict,
    MissingSymbol,
    ParseError,
    TokextError,
)
from .extension import ComparisonRow, average_tokens, compare, extend, unknown_token_rate
from .metrics import (
    ItemResult,
    StepRecord,
    TaskAggregate,
    aggregate,
    confidence,
    cross_entropy,
    evaluate_item,
    normalized_confidence,
    score_item,
)
from .models import (
    NGramModel,
    OfflineStepScore,
    ScoreVector,
    SuffixModel,
    UniformModel,
    load_offline_scores,
    ngram_train,
)
from .tasks import TaskItem, TestSentence, UnitClassification, build_tasks, classify_unit, target_ids
from .tokenizer import MARKER, MergeRule, TokenEntry, TokenizerModel, pretokenize
from .trainer import TrainerConfig, count_pairs, train

__version__ = "0.1.0"
