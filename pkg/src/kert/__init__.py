"""Topical keyphrase extraction and ranking for short texts.

The pipeline: load a title corpus, infer per-token topic labels with a
background-aware Gibbs sampler, mine each topic's frequent word sets, and
rank them by a blend of coverage, purity, phraseness, and completeness.
Judged-quality and mutual-information evaluations live in
:mod:`kert.evaluation`.
"""

__version__ = "0.1.0"

from .corpus import Corpus, load_corpus, tokenize
from .miner import CandidateKeyphrase, TopicTransactions, build_transactions, mine_candidates
from .ranker import RankingConfig, ScoredKeyphrase, rank_topic
from .topicmodel import LabeledCorpus, ModelConfig, run_inference

__all__ = [
    "Corpus",
    "load_corpus",
    "tokenize",
    "ModelConfig",
    "LabeledCorpus",
    "run_inference",
    "TopicTransactions",
    "CandidateKeyphrase",
    "build_transactions",
    "mine_candidates",
    "RankingConfig",
    "ScoredKeyphrase",
    "rank_topic",
    "__version__",
]
