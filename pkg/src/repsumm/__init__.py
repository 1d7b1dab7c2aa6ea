"""repsumm: multi-document summarization of monthly fund reports."""

from .corpus import (
    AssetClass,
    DatasetSplit,
    FundMeta,
    Region,
    ReportDocument,
    ReportGroup,
    ReportKind,
    group,
    ingest,
    serialize,
    split,
)
from .extractor import (
    LinearScorer,
    ScoredSentence,
    SummaryBudget,
    TrainConfig,
    assemble_abstractive_input,
    assemble_summary,
    score_sentences,
    summarize_abstractive,
    summarize_extractive,
    train_scorer,
)
from .labeling import LabeledSentence, LabelingConfig, build_training_set, label_group
from .rouge import RougeConfig, RougeScore, rouge_all, rouge_l, rouge_n
from .textproc import (
    CharNgramTokenizer,
    Sentence,
    TermVector,
    TfidfVectorizer,
    WhitespaceTokenizer,
    cosine,
    segment,
    select_tokenizer,
)

__version__ = "0.1.0"
