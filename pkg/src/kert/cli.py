"""Command-line pipeline: train, mine, rank, evaluate, export.

Stages are file-coupled so any one can be rerun or swapped in isolation;
``kert run`` drives them end to end from a config file.  Delimited outputs
that benefit from a picture (ranked lists, metric curves) get a rendered
figure written next to them unless --no-figure is passed.
"""

from __future__ import annotations

import functools
import re
from pathlib import Path

import click

from . import __version__
from .corpus import load_corpus, write_vocabulary
from .evaluation import (
    MetricReport,
    mi_at_k,
    nkqm_at_k,
    read_category_labels,
    read_judge_scores,
)
from .miner import build_transactions, mine_candidates, write_candidates
from .pipeline import (
    RunConfig,
    StaleIntermediateError,
    file_digest,
    mine_hash,
    parse_config_file,
    rank_stage,
    run_pipeline,
    train_hash,
)
from .ranker import VARIANTS, RankingConfig, read_ranked_phrases
from .report import save_metric_curves
from .topicmodel import ModelConfig, read_labeled_corpus, run_inference, write_labeled_corpus


def friendly_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, FileNotFoundError, StaleIntermediateError) as exc:
            raise click.ClickException(str(exc))
    return wrapper


def corpus_options(fn):
    fn = click.option("--min-token-len", default=1, show_default=True,
                      help="Drop tokens shorter than this.")(fn)
    fn = click.option("--lowercase/--no-lowercase", default=True, show_default=True)(fn)
    fn = click.option("--stopwords", type=click.Path(), default=None,
                      help="One stopword per line.")(fn)
    fn = click.option("--titles", type=click.Path(), required=True,
                      help="Input corpus, one title per line.")(fn)
    return fn


def output_option(fn):
    return click.option(
        "--output", type=click.Path(), default=".", show_default=True,
        envvar="KERT_OUTPUT_DIR",
        help="Output directory (env: KERT_OUTPUT_DIR).",
    )(fn)


def parse_k_list(text: str) -> list[int]:
    try:
        ks = sorted({int(part) for part in text.split(",") if part.strip()})
    except ValueError:
        raise click.ClickException(f"--k expects comma-separated integers, got {text!r}")
    if not ks or any(k < 1 for k in ks):
        raise click.ClickException("--k values must be positive integers")
    return ks


def load_rankings(rankings_dir: str) -> dict[int, list]:
    directory = Path(rankings_dir)
    files = sorted(
        directory.glob("ranked_topic*.jsonl"),
        key=lambda p: int(re.search(r"(\d+)", p.stem).group(1)),
    )
    if not files:
        raise click.ClickException(f"no ranked_topic*.jsonl files in {directory}")
    rankings = {}
    for path in files:
        topic, phrases = read_ranked_phrases(path)
        rankings[topic] = phrases
    return rankings


@click.group()
@click.version_option(version=__version__, prog_name="kert")
def main() -> None:
    """Topical keyphrase extraction and ranking for title corpora."""


@main.command()
@corpus_options
@click.option("--topics", type=int, required=True, help="Number of foreground topics.")
@click.option("--alpha", default=1.0, show_default=True)
@click.option("--beta", default=0.07, show_default=True)
@click.option("--lambda", "foreground_prior", default=0.1, show_default=True,
              help="Prior probability that a token is topical, not background.")
@click.option("--burn-in", default=200, show_default=True)
@click.option("--sweeps", default=500, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--write-distributions", is_flag=True,
              help="Also write smoothed topic-word and title-topic distributions.")
@output_option
@friendly_errors
def train(titles, stopwords, lowercase, min_token_len, topics, alpha, beta,
          foreground_prior, burn_in, sweeps, seed, write_distributions, output):
    """Infer per-token topic labels and write the labeled corpus."""
    corpus = load_corpus(titles, stopwords, lowercase=lowercase, min_token_len=min_token_len)
    config = ModelConfig(
        n_topics=topics, alpha=alpha, beta=beta, foreground_prior=foreground_prior,
        burn_in=burn_in, n_sweeps=sweeps, seed=seed,
    )
    labeled = run_inference(corpus, config)
    run_config = RunConfig(
        titles=titles, stopwords=stopwords, lowercase=lowercase,
        min_token_len=min_token_len, topics=topics, alpha=alpha, beta=beta,
        foreground_prior=foreground_prior, burn_in=burn_in, sweeps=sweeps, seed=seed,
    )
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "labeled_corpus.txt"
    write_labeled_corpus(labeled, path, config_hash=train_hash(run_config))
    click.echo(f"labeled corpus: {path} ({corpus.n_titles} titles, {corpus.n_words} words)")
    if write_distributions:
        import numpy as np
        np.savetxt(out / "phi.tsv", labeled.phi_hat, delimiter="\t", fmt="%.10g")
        np.savetxt(out / "theta.tsv", labeled.theta_hat, delimiter="\t", fmt="%.10g")
        click.echo(f"distributions: {out / 'phi.tsv'}, {out / 'theta.tsv'}")


@main.command()
@click.option("--labeled", type=click.Path(), required=True,
              help="Labeled corpus from the train stage.")
@click.option("--min-support", default=5, show_default=True)
@click.option("--max-size", default=5, show_default=True)
@output_option
@friendly_errors
def mine(labeled, min_support, max_size, output):
    """Mine each topic's frequent word sets into candidate files."""
    labeled_corpus, header = read_labeled_corpus(labeled)
    upstream = header.get("config_hash") or file_digest(labeled)
    h_mine = mine_hash(upstream, min_support, max_size)
    txns = build_transactions(labeled_corpus)
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    for t in range(1, labeled_corpus.n_topics + 1):
        cands = mine_candidates(txns[t], min_support, max_size)
        path = out / f"candidates_topic{t}.tsv"
        write_candidates(
            cands, labeled_corpus.corpus, path, min_support, max_size,
            config_hash=h_mine, upstream_hash=upstream,
        )
        click.echo(f"topic {t}: {len(cands)} candidates -> {path}")


@main.command()
@click.option("--labeled", type=click.Path(), required=True,
              help="Labeled corpus from the train stage.")
@click.option("--candidates-dir", type=click.Path(), required=True,
              help="Directory holding candidates_topic*.tsv from the mine stage.")
@click.option("--gamma", default=0.5, show_default=True,
              help="Completeness cutoff; phrases at or below it score 0.")
@click.option("--omega", default=0.5, show_default=True,
              help="Blend weight on phraseness versus purity.")
@click.option("--variant", default="full", show_default=True,
              type=click.Choice(VARIANTS))
@click.option("--top", default=0, show_default=True,
              help="Keep only the top K rows per topic (0 = all).")
@click.option("--figure/--no-figure", default=True, show_default=True)
@output_option
@friendly_errors
def rank(labeled, candidates_dir, gamma, omega, variant, top, figure, output):
    """Score and rank mined candidates, one ranked list per topic."""
    directory = Path(candidates_dir)
    paths = sorted(
        directory.glob("candidates_topic*.tsv"),
        key=lambda p: int(re.search(r"(\d+)", p.stem).group(1)),
    )
    if not paths:
        raise click.ClickException(f"no candidates_topic*.tsv files in {directory}")
    config = RankingConfig(
        completeness_cutoff=gamma, phraseness_weight=omega, variant=variant,
    )
    written = rank_stage(
        labeled, [str(p) for p in paths], output, config, top=top, figures=figure,
    )
    for path in written:
        click.echo(f"wrote {path}")


@main.command("eval-nkqm")
@click.option("--rankings-dir", type=click.Path(), required=True,
              help="Directory holding ranked_topic*.jsonl from the rank stage.")
@click.option("--judges", type=click.Path(), required=True,
              help="TSV of topic, phrase, judge, score rows.")
@click.option("--k", default="5,10,20", show_default=True,
              help="Comma-separated list of cutoffs.")
@click.option("--figure/--no-figure", default=True, show_default=True)
@output_option
@friendly_errors
def eval_nkqm(rankings_dir, judges, k, figure, output):
    """Judged ranking quality at each cutoff K."""
    rankings = load_rankings(rankings_dir)
    judged = read_judge_scores(judges)
    ks = parse_k_list(k)
    values = {kk: nkqm_at_k(rankings, judged, kk) for kk in ks}
    report = MetricReport(
        metric="nkqm",
        values=values,
        metadata={"rankings": str(rankings_dir), "judges": str(judges)},
    )
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    tsv = out / "nkqm.tsv"
    report.write_tsv(tsv)
    for kk in ks:
        click.echo(f"nKQM@{kk}\t{values[kk]:.6f}")
    click.echo(f"wrote {tsv}")
    if figure:
        png = save_metric_curves(
            {"nKQM": list(values.items())}, "nKQM@K", out / "nkqm.png",
        )
        click.echo(f"wrote {png}")


@main.command("eval-mi")
@corpus_options
@click.option("--rankings-dir", type=click.Path(), required=True,
              help="Directory holding ranked_topic*.jsonl from the rank stage.")
@click.option("--labels", type=click.Path(), required=True,
              help="TSV of doc_id, category rows covering every title.")
@click.option("--k", default="20,50,100", show_default=True,
              help="Comma-separated list of cutoffs.")
@click.option("--figure/--no-figure", default=True, show_default=True)
@output_option
@friendly_errors
def eval_mi(titles, stopwords, lowercase, min_token_len, rankings_dir, labels, k,
            figure, output):
    """Mutual information between phrase votes and title categories."""
    corpus = load_corpus(titles, stopwords, lowercase=lowercase, min_token_len=min_token_len)
    rankings = load_rankings(rankings_dir)
    cat_labels = read_category_labels(labels)
    ks = parse_k_list(k)
    values = {kk: mi_at_k(rankings, corpus, cat_labels, kk) for kk in ks}
    report = MetricReport(
        metric="mi",
        values=values,
        metadata={"rankings": str(rankings_dir), "labels": str(labels)},
    )
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    tsv = out / "mi.tsv"
    report.write_tsv(tsv)
    for kk in ks:
        click.echo(f"MI@{kk}\t{values[kk]:.6f}")
    click.echo(f"wrote {tsv}")
    if figure:
        png = save_metric_curves(
            {"MI": list(values.items())}, "mutual information (bits)", out / "mi.png",
        )
        click.echo(f"wrote {png}")


@main.command()
@corpus_options
@output_option
@friendly_errors
def export(titles, stopwords, lowercase, min_token_len, output):
    """Write the corpus vocabulary as TSV: word id, surface, frequency."""
    corpus = load_corpus(titles, stopwords, lowercase=lowercase, min_token_len=min_token_len)
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "vocabulary.tsv"
    write_vocabulary(corpus, path)
    click.echo(f"wrote {path} ({corpus.n_words} words)")


@main.command()
@click.option("--config", "config_path", type=click.Path(), required=True,
              help="key = value configuration file.")
@click.option("--resume", is_flag=True,
              help="Reuse intermediates whose recorded config hash still matches.")
@click.option("--figure/--no-figure", default=True, show_default=True)
@output_option
@friendly_errors
def run(config_path, resume, figure, output):
    """Run train, mine, and rank end to end from a config file."""
    config = parse_config_file(config_path)
    manifest = run_pipeline(config, output, resume=resume, figures=figure)
    for stage, status in manifest["stages"].items():
        click.echo(f"{stage}: {status} ({manifest['timings_seconds'][stage]}s)")
    click.echo(f"manifest: {Path(output) / 'manifest.json'}")


if __name__ == "__main__":
    main(prog_name="kert")
