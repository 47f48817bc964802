"""Plan dispatch: resolve the model file for a kind and run its generator."""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError
from .kronecker import InitiatorMatrix, generate_graph_volume
from .lda import LdaModel, generate_text_volume
from .resumes import ResumeSchema, generate_resumes
from .reviews import ReviewModel, generate_reviews
from .runtime import GenerationPlan, ThroughputReport
from .tables import TableSchema, generate_table, load_table_schema_file

_LOADERS = {
    "text": LdaModel.load,
    "graph": InitiatorMatrix.load,
    "table": load_table_schema_file,
    "resume": ResumeSchema.load,
    "review": ReviewModel.load,
}

_GENERATORS = {
    "text": generate_text_volume,
    "graph": generate_graph_volume,
    "table": generate_table,
    "resume": generate_resumes,
    "review": generate_reviews,
}


def load_model(kind: str, path):
    """Load and validate the model/schema file for a generator kind."""
    loader = _LOADERS.get(kind)
    if loader is None:
        raise ConfigError(f"unknown generator kind {kind!r}")
    return loader(path)


def run_plan(plan: GenerationPlan) -> ThroughputReport:
    """Execute a plan; the model may be a loaded object or a file path."""
    model = plan.model
    if isinstance(model, (str, Path)):
        model = load_model(plan.kind, model)
    expected = {
        "text": LdaModel,
        "graph": InitiatorMatrix,
        "table": TableSchema,
        "resume": ResumeSchema,
        "review": ReviewModel,
    }[plan.kind]
    if not isinstance(model, expected):
        raise ConfigError(
            f"{plan.kind} plans need a {expected.__name__}, got {type(model).__name__}"
        )
    return _GENERATORS[plan.kind](model, plan)
