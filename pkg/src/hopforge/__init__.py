"""hopforge: multi-hop evidence retrieval engine and training-data factory."""

from .corpus import CorpusStore, Document, Paragraph, ingest, split_sentences
from .evidence import EvidenceSentence, EvidenceSetState, commit, finalize, select_next
from .fusion import RankedSentence, ScoredParagraph, fuse, rank_hop
from .index import EmbeddingMatrix, ExactIndex, build_index, load_vectors, save_vectors
from .metrics import (
    BootstrapResult,
    binary_match,
    multichoice_em,
    numeracy_f1,
    paired_bootstrap,
    sentence_em_f1,
)
from .pipeline import IteratorPipeline, PipelineConfig, QueryResult
from .qa_factory import QASample, digit_tokenize
from .sampler import Schedule, TaskSpec, error_weights, next_task, reduce_dev
from .scorers import (
    EvidenceScore,
    ParagraphScore,
    StubEmbedder,
    StubEvidenceScorer,
    StubParagraphScorer,
    serialize_evidence_input,
    serialize_reranker_input,
    serialize_retriever_query,
)
from .train_builder import (
    ReasoningPath,
    RetrievalSample,
    SharedNormPair,
    expand_path,
    retrieval_loss,
)

__version__ = "0.1.0"
