"""CLI wrapper around the exporter."""

from __future__ import annotations

import logging
import sys

import click

from .corpus import CorpusSchemaError
from .encoders import EncoderLoadError
from .export import export_embeddings


@click.command()
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False), required=True,
              help="TSV with columns group_id, context, response, label.")
@click.option("--encoder", default="hash", show_default=True,
              help="'hash' or a transformers model name.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--pooling", type=click.Choice(["cls", "mean"]), default="cls",
              show_default=True)
@click.option("--hash-dim", type=int, default=768, show_default=True,
              help="Vector width for the hash encoder.")
def main(corpus, encoder, out, batch_size, pooling, hash_dim):
    """Export dialog pairs as embedding JSONL."""
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        n = export_embeddings(corpus, encoder, out, batch_size=batch_size,
                              pooling=pooling, hash_dim=hash_dim)
    except (CorpusSchemaError, EncoderLoadError) as e:
        click.echo(f"error: {e}", err=True)
        raise click.exceptions.Exit(1)
    click.echo(f"wrote {n} records to {out}", err=True)


if __name__ == "__main__":
    main()
