"""Staged train -> mine -> rank pipeline with provenance hashing.

Every stage writes its outputs with a config hash covering the exact inputs
and parameters that produced them, chained through the stages.  A resumed
run reuses an intermediate only when its recorded hash matches the hash the
current configuration would produce; anything else is recomputed.  Mixing
intermediates from different configurations (say, ranking against candidate
files mined from a different labeling) is refused outright.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .corpus import load_corpus
from .miner import build_transactions, mine_candidates, read_candidates, write_candidates
from .ranker import RankingConfig, build_indexes, rank_topic, write_ranked
from .report import save_topic_score_bars
from .topicmodel import ModelConfig, read_labeled_corpus, run_inference, write_labeled_corpus


class StaleIntermediateError(RuntimeError):
    """Raised when inputs from different configurations are mixed."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a full pipeline run depends on, in one place."""

    titles: str
    stopwords: str | None = None
    lowercase: bool = True
    min_token_len: int = 1
    topics: int = 5
    alpha: float = 1.0
    beta: float = 0.07
    foreground_prior: float = 0.1
    burn_in: int = 200
    sweeps: int = 500
    seed: int = 0
    min_support: int = 5
    max_size: int = 5
    gamma: float = 0.5
    omega: float = 0.5
    variant: str = "full"
    top: int = 0

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            n_topics=self.topics,
            alpha=self.alpha,
            beta=self.beta,
            foreground_prior=self.foreground_prior,
            burn_in=self.burn_in,
            n_sweeps=self.sweeps,
            seed=self.seed,
        )

    def ranking_config(self) -> RankingConfig:
        return RankingConfig(
            completeness_cutoff=self.gamma,
            phraseness_weight=self.omega,
            variant=self.variant,
        )


_CONFIG_KEYS = {
    "titles": str,
    "stopwords": str,
    "lowercase": bool,
    "min_token_len": int,
    "topics": int,
    "alpha": float,
    "beta": float,
    "lambda": float,
    "burn_in": int,
    "sweeps": int,
    "seed": int,
    "min_support": int,
    "max_size": int,
    "gamma": float,
    "omega": float,
    "variant": str,
    "top": int,
}


def parse_config_file(path: str | Path) -> RunConfig:
    """Parse a ``key = value`` configuration file.

    Lines starting with '#' and blank lines are ignored; unknown keys are an
    error so a typo cannot silently fall back to a default.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    values: dict[str, object] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno} is not 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}: unknown config key {key!r} on line {lineno}")
            kind = _CONFIG_KEYS[key]
            if kind is bool:
                if raw.lower() not in ("true", "false"):
                    raise ValueError(f"{path}: {key} must be true or false")
                value: object = raw.lower() == "true"
            elif kind is int:
                value = int(raw)
            elif kind is float:
                value = float(raw)
            else:
                value = raw
            values[key] = value
    if "titles" not in values:
        raise ValueError(f"{path}: missing required key 'titles'")
    if "lambda" in values:
        values["foreground_prior"] = values.pop("lambda")
    return RunConfig(**values)  # type: ignore[arg-type]


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _hash_of(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def train_hash(config: RunConfig) -> str:
    return _hash_of({
        "stage": "train",
        "titles": file_digest(config.titles),
        "stopwords": file_digest(config.stopwords) if config.stopwords else None,
        "lowercase": config.lowercase,
        "min_token_len": config.min_token_len,
        "topics": config.topics,
        "alpha": config.alpha,
        "beta": config.beta,
        "foreground_prior": config.foreground_prior,
        "burn_in": config.burn_in,
        "sweeps": config.sweeps,
        "seed": config.seed,
    })


def mine_hash(upstream: str, min_support: int, max_size: int) -> str:
    return _hash_of({
        "stage": "mine",
        "upstream": upstream,
        "min_support": min_support,
        "max_size": max_size,
    })


def rank_hash(upstream: str, config: RankingConfig, top: int) -> str:
    return _hash_of({
        "stage": "rank",
        "upstream": upstream,
        "gamma": config.completeness_cutoff,
        "omega": config.phraseness_weight,
        "variant": config.variant,
        "top": top,
    })


def recorded_hash(path: Path) -> str | None:
    """Read the config_hash header of an output file, if any."""
    if not path.exists():
        return None
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if body.startswith("config_hash="):
                return body.split("=", 1)[1]
    return None


def _reusable(paths: list[Path], expected: str) -> bool:
    return all(recorded_hash(p) == expected for p in paths)


def run_pipeline(
    config: RunConfig,
    output_dir: str | Path,
    resume: bool = False,
    figures: bool = True,
) -> dict:
    """Run train, mine, and rank end to end, returning the run manifest.

    With ``resume`` set, stages whose outputs already carry the hash the
    current configuration produces are skipped; outputs with any other hash
    are treated as stale and recomputed, never reused.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    timings: dict[str, float] = {}
    stages: dict[str, str] = {}

    h_train = train_hash(config)
    h_mine = mine_hash(h_train, config.min_support, config.max_size)
    h_rank = rank_hash(h_mine, config.ranking_config(), config.top)

    labeled_path = out / "labeled_corpus.txt"
    t0 = time.perf_counter()
    if resume and _reusable([labeled_path], h_train):
        stages["train"] = "reused"
    else:
        corpus = load_corpus(
            config.titles,
            config.stopwords,
            lowercase=config.lowercase,
            min_token_len=config.min_token_len,
        )
        labeled = run_inference(corpus, config.model_config())
        write_labeled_corpus(labeled, labeled_path, config_hash=h_train)
        stages["train"] = "computed"
    timings["train"] = time.perf_counter() - t0

    candidate_paths = [
        out / f"candidates_topic{t}.tsv" for t in range(1, config.topics + 1)
    ]
    t0 = time.perf_counter()
    if resume and stages["train"] == "reused" and _reusable(candidate_paths, h_mine):
        stages["mine"] = "reused"
    else:
        labeled, header = read_labeled_corpus(labeled_path)
        txns = build_transactions(labeled)
        for t in range(1, config.topics + 1):
            cands = mine_candidates(txns[t], config.min_support, config.max_size)
            write_candidates(
                cands, labeled.corpus, candidate_paths[t - 1],
                config.min_support, config.max_size,
                config_hash=h_mine, upstream_hash=h_train,
            )
        stages["mine"] = "computed"
    timings["mine"] = time.perf_counter() - t0

    ranked_paths = []
    for t in range(1, config.topics + 1):
        ranked_paths.append(out / f"ranked_topic{t}.tsv")
        ranked_paths.append(out / f"ranked_topic{t}.jsonl")
    t0 = time.perf_counter()
    if resume and stages["mine"] == "reused" and _reusable(
        [p for p in ranked_paths if p.suffix == ".tsv"], h_rank
    ):
        stages["rank"] = "reused"
    else:
        rank_stage(
            labeled_path,
            [str(p) for p in candidate_paths],
            out,
            config.ranking_config(),
            top=config.top,
            figures=figures,
        )
        stages["rank"] = "computed"
    timings["rank"] = time.perf_counter() - t0

    manifest = {
        "config": _config_echo(config),
        "hashes": {"train": h_train, "mine": h_mine, "rank": h_rank},
        "stages": stages,
        "timings_seconds": {k: round(v, 3) for k, v in timings.items()},
        "package_version": __version__,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
    }
    with (out / "manifest.json").open("w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _config_echo(config: RunConfig) -> dict:
    echo = asdict(config)
    echo["lambda"] = echo.pop("foreground_prior")
    return echo


def rank_stage(
    labeled_path: str | Path,
    candidate_paths: list[str],
    output_dir: str | Path,
    config: RankingConfig,
    top: int = 0,
    figures: bool = True,
) -> list[Path]:
    """Rank pre-mined candidates against a labeled corpus.

    The candidates must have been mined from exactly the given labeling:
    each candidates file records the hash of the labeled corpus it came
    from, and any mismatch aborts with :class:`StaleIntermediateError`.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    labeled, header = read_labeled_corpus(labeled_path)
    labeled_hash = header.get("config_hash")
    txns = build_transactions(labeled)
    indexes = build_indexes(txns)

    written = []
    per_topic = {}
    upstream = None
    for cpath in candidate_paths:
        cands, cheader = read_candidates(cpath, labeled.corpus)
        c_upstream = cheader.get("upstream_hash")
        if labeled_hash is not None and c_upstream is not None and c_upstream != labeled_hash:
            raise StaleIntermediateError(
                f"{cpath} was mined from labeling {c_upstream}, but "
                f"{labeled_path} carries {labeled_hash}; refusing to mix runs"
            )
        upstream = cheader.get("config_hash", upstream)
        topic = int(cheader["topic"]) if "topic" in cheader else (cands[0].topic if cands else 0)
        scored = rank_topic(cands, indexes, config, labeled.corpus)
        h_rank = rank_hash(upstream, config, top) if upstream else None
        tsv = out / f"ranked_topic{topic}.tsv"
        jsonl = out / f"ranked_topic{topic}.jsonl"
        write_ranked(
            scored, topic, tsv, jsonl, config,
            config_hash=h_rank, upstream_hash=upstream, top=top,
        )
        written.extend([tsv, jsonl])
        per_topic[topic] = scored
    if figures and per_topic:
        written.append(save_topic_score_bars(per_topic, out / "ranked_scores.png"))
    return written
