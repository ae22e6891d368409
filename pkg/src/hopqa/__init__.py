"""Multi-hop question answering over knowledge graph embeddings."""

from .kg import KnowledgeGraph, LoadSummary, Metapath, load_kg, split_triples, traverse_metapath
from .kge import ComplexModel, TrainConfig, init_model, score_triple, train_kge
from .qa import QAExample, QAPipeline, answer_question, evaluate_qa, score_answers, train_qa
from .ranking import MetricsReport, compute_rank, evaluate_link_prediction
from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "KnowledgeGraph",
    "LoadSummary",
    "Metapath",
    "load_kg",
    "split_triples",
    "traverse_metapath",
    "ComplexModel",
    "TrainConfig",
    "init_model",
    "score_triple",
    "train_kge",
    "QAExample",
    "QAPipeline",
    "answer_question",
    "evaluate_qa",
    "score_answers",
    "train_qa",
    "MetricsReport",
    "compute_rank",
    "evaluate_link_prediction",
    "KERNEL_BACKEND",
    "__version__",
]
