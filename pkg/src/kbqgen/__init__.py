"""kbqgen: generate fluent, domain-relevant questions from a knowledge base.

Workflow: predicate-keyed templates instantiate KB triples into seed
questions, a suggestion provider iteratively expands the set, and an
n-gram language model plus word-embedding relevance score filter and
rank the candidates.
"""

from .embed import (
    DomainDocument,
    EmbeddingTable,
    build_domain_documents,
    classify,
    doc_embedding,
    load_embeddings,
    relevance,
)
from .expander import (
    ExpansionConfig,
    ProviderError,
    SuggestionProvider,
    cached_provider,
    expand,
    http_provider,
    mock_provider_from_corpus,
)
from .kb import KnowledgeBase, Triple, kb_stats, load_kb, save_kb
from .ngram import (
    FluencyScore,
    NgramModel,
    export_arpa,
    import_arpa,
    sentence_logprob,
    train_ngram,
)
from .pipeline import (
    PipelineConfig,
    ScoredQuestionSet,
    filter_and_select,
    run_pipeline,
    score_all,
)
from .templates import Question, QuestionTemplate, generate_seeds, load_templates

__version__ = "0.1.0"

__all__ = [
    "DomainDocument",
    "EmbeddingTable",
    "ExpansionConfig",
    "FluencyScore",
    "KnowledgeBase",
    "NgramModel",
    "PipelineConfig",
    "ProviderError",
    "Question",
    "QuestionTemplate",
    "ScoredQuestionSet",
    "SuggestionProvider",
    "Triple",
    "build_domain_documents",
    "cached_provider",
    "classify",
    "doc_embedding",
    "expand",
    "export_arpa",
    "filter_and_select",
    "generate_seeds",
    "http_provider",
    "import_arpa",
    "kb_stats",
    "load_embeddings",
    "load_kb",
    "load_templates",
    "mock_provider_from_corpus",
    "relevance",
    "run_pipeline",
    "save_kb",
    "score_all",
    "sentence_logprob",
    "train_ngram",
]
