"""Command-line entry points for the pipeline stages and utilities."""

import dataclasses
import json
from pathlib import Path

import click

from .circle import CircleLossParams, SimilarityBatch, circle_loss
from .pipeline import STAGES, PipelineConfig, run_pipeline
from .toy import build_toy_corpus
from .vectors import read_vectors


@click.group()
def main():
    """Financial 10-K topic-modeling pipeline."""


_FIELD_TYPES = {int: click.INT, float: click.FLOAT, bool: click.BOOL}


def _config_flags(command):
    """Mirror every PipelineConfig field as a CLI flag overriding the file."""
    for field in reversed(dataclasses.fields(PipelineConfig)):
        flag = "--" + field.name.replace("_", "-")
        ftype = _FIELD_TYPES.get(field.type, click.STRING)
        command = click.option(
            flag, field.name, type=ftype, default=None,
            help=f"Override config field {field.name}.",
        )(command)
    return command


def _build_config(config_path: str | None, overrides: dict) -> PipelineConfig:
    cfg = PipelineConfig.from_yaml(config_path) if config_path else PipelineConfig()
    for name, value in overrides.items():
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def _stage_command(stage: str):
    @main.command(name=stage, help=f"Run the {stage} stage only.")
    @click.option("--config", "config_path", type=click.Path(exists=True))
    @_config_flags
    def command(config_path, **overrides):
        cfg = _build_config(config_path, overrides)
        manifest = run_pipeline(cfg, stages=(stage,))
        click.echo(f"{stage}: done ({len(manifest.digests)} artifacts)")

    return command


for _stage in STAGES:
    _stage_command(_stage)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option(
    "--stages",
    "stages_csv",
    default=None,
    help="Comma-separated subset of stages (default: all).",
)
@_config_flags
def run(config_path, stages_csv, **overrides):
    """Run the full pipeline (or a subset of stages) from a config file."""
    selected = tuple(s.strip() for s in stages_csv.split(",")) if stages_csv else None
    cfg = _build_config(config_path, overrides)
    manifest = run_pipeline(cfg, stages=selected)
    click.echo(json.dumps({"config_hash": manifest.config_hash}, indent=2))


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@_config_flags
def split(config_path, **overrides):
    """Build the labeled dataset and its topic-wise train/test split."""
    cfg = _build_config(config_path, overrides)
    manifest = run_pipeline(cfg, stages=("label",))
    click.echo(f"split: done ({len(manifest.digests)} artifacts)")


@main.group()
def vectors():
    """Vector-file utilities."""


@vectors.command()
@click.argument("path", type=click.Path(exists=True))
def inspect(path):
    """Print dim, rows, and the first key of an FTSVEC01 file."""
    matrix = read_vectors(path)
    first = matrix.keys[0] if matrix.keys else ""
    click.echo(f"dim={matrix.dim} rows={matrix.rows} first_key={first!r}")


@main.command("circle-eval")
@click.option("--batch", "batch_path", required=True, type=click.Path(exists=True),
              help="JSON file with 'positives' and 'negatives' score lists.")
@click.option("--scale", default=5.0, show_default=True)
@click.option("--margin", default=0.25, show_default=True)
def circle_eval(batch_path, scale, margin):
    """Evaluate the pair-similarity loss on a JSON batch (debug helper)."""
    payload = json.loads(Path(batch_path).read_text())
    batch = SimilarityBatch(
        positives=payload.get("positives", []),
        negatives=payload.get("negatives", []),
    )
    loss = circle_loss(batch, CircleLossParams(scale=scale, margin=margin))
    click.echo(f"{loss:.10f}")


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--filings", default=50, show_default=True)
@click.option("--seed", default=7, show_default=True)
def toy(out_dir, filings, seed):
    """Generate the bundled toy corpus, vectors, and a ready config."""
    cfg = build_toy_corpus(out_dir, n_filings=filings, seed=seed)
    click.echo(f"toy corpus at {out_dir}; config: {Path(out_dir) / 'toy_config.yaml'}")
    click.echo(f"run it with: fintopics run --config {Path(out_dir) / 'toy_config.yaml'}")


if __name__ == "__main__":
    main()
