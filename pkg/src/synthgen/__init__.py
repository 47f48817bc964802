"""Deterministic synthetic data generator suite.

Five generators (topic-model text, Kronecker graphs, schema tables,
resume records, product reviews) trained from small seed data, plus a
harness for volume targets, velocity caps, parallel workers, throughput
reports, scaling experiments and format conversion. Identical seeds give
identical output bytes at any worker count.
"""

from .errors import ConfigError, ParameterError, SynthgenError
from .harness import load_model, run_plan
from .kronecker import (
    EdgeList,
    GraphStats,
    InitiatorMatrix,
    estimate_initiator,
    expected_edge_count,
    generate_graph,
    graph_stats,
)
from .lda import (
    BagOfWordsCorpus,
    Dictionary,
    LdaModel,
    generate_document,
    generate_text_volume,
    preprocess_corpus,
    train_lda,
)
from .resumes import ResumeSchema, default_resume_schema, generate_resume, generate_resumes
from .reviews import ReviewModel, export_for_classification, export_for_filtering, generate_reviews
from .rng import RandomStream, derive_stream
from .runtime import GenerationPlan, ThroughputReport, rate_limit
from .scaling import ScalingResult, scaling_experiment
from .tables import TableSchema, generate_row, generate_table, load_table_schema
from .convert import convert_format

__version__ = "0.1.0"

__all__ = [
    "BagOfWordsCorpus",
    "ConfigError",
    "Dictionary",
    "EdgeList",
    "GenerationPlan",
    "GraphStats",
    "InitiatorMatrix",
    "LdaModel",
    "ParameterError",
    "RandomStream",
    "ResumeSchema",
    "ReviewModel",
    "ScalingResult",
    "SynthgenError",
    "TableSchema",
    "ThroughputReport",
    "convert_format",
    "default_resume_schema",
    "derive_stream",
    "estimate_initiator",
    "expected_edge_count",
    "export_for_classification",
    "export_for_filtering",
    "generate_document",
    "generate_graph",
    "generate_resume",
    "generate_resumes",
    "generate_reviews",
    "generate_row",
    "generate_table",
    "generate_text_volume",
    "graph_stats",
    "load_model",
    "load_table_schema",
    "preprocess_corpus",
    "rate_limit",
    "run_plan",
    "scaling_experiment",
    "train_lda",
]
