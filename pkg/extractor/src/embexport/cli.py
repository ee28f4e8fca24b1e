"""embexport command line: extract vectors, or fetch a checkpoint first."""

from __future__ import annotations

import sys

import click

from . import __version__
from .extract import ExtractionError, ExtractionSpec, extract
from .fetch import FetchError, fetch_checkpoint


@click.group()
@click.version_option(__version__)
def cli():
    """Static token-embedding export for transformer checkpoints."""


@cli.command("extract")
@click.option("--model", required=True,
              help="checkpoint: hub model id or a local directory")
@click.option("--lexicon", required=True, help="lexicon JSON file")
@click.option("--output", required=True, help="word2vec-text file to write")
@click.option("--manifest", default=None,
              help="manifest sidecar path (default: <output>.manifest.json)")
@click.option("--lowercase", is_flag=True, default=False,
              help="lowercase phrases before tokenizing and emitting")
@click.option("--revision", default=None, help="checkpoint revision to pin")
def extract_cmd(model, lexicon, output, manifest, lowercase, revision):
    """Extract one vector per lexicon phrase from the input embeddings."""
    result = extract(ExtractionSpec(
        model=model, lexicon=lexicon, output=output, manifest=manifest,
        lowercase=lowercase, revision=revision))
    click.echo(f"wrote {result.n_phrases} vectors (dim {result.dimension}) "
               f"to {result.output}")
    if result.skipped:
        click.echo(f"skipped {len(result.skipped)} phrase(s) with zero tokens: "
                   f"{', '.join(result.skipped)}", err=True)
    click.echo(f"manifest: {result.manifest}")


@cli.command("fetch")
@click.option("--endpoint", required=True,
              help="mirror base URL exposing <model>/resolve/<rev>/<file>")
@click.option("--model", required=True)
@click.option("--dest", required=True, help="directory to populate")
@click.option("--revision", default="main", show_default=True)
@click.option("--extra-file", "extra_files", multiple=True,
              help="additional file to require (repeatable)")
def fetch_cmd(endpoint, model, dest, revision, extra_files):
    """Download a checkpoint's minimal file set over plain HTTP."""
    path = fetch_checkpoint(endpoint, model, dest, revision,
                            extra_files=tuple(extra_files))
    click.echo(f"checkpoint files in {path}")


def _quiet_transformers():
    try:
        from transformers.utils import logging as hf_logging

        hf_logging.set_verbosity_error()
        hf_logging.disable_progress_bar()
    except ImportError:
        pass


def main():
    _quiet_transformers()
    try:
        cli(standalone_mode=False)
    except click.ClickException as e:
        e.show()
        sys.exit(2)
    except click.Abort:
        sys.exit(1)
    except (FileNotFoundError, PermissionError, IsADirectoryError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    except (ExtractionError, FetchError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    except Exception as e:
        click.echo(f"internal error: {e}", err=True)
        sys.exit(3)


if __name__ == "__main__":
    main()
