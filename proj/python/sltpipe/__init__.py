from ._sltpipe import (  # noqa: F401
    SYSTEM_PROMPT,
    AccuracyReport,
    BleuReport,
    ConfigError,
    FormatError,
    GlossSequence,
    GlossSpan,
    GlossSpotItem,
    HttpError,
    ScoreStream,
    SpottingConfig,
    TrainingWindow,
    ValidationError,
    VocabEntry,
    Vocabulary,
    accuracy,
    base_label,
    build_user_message,
    build_vocabulary,
    collapse,
    corpus_bleu,
    normalize_response,
    read_score_stream,
    read_score_stream_str,
    segment_span,
    spot,
    tokenize_13a,
)
