"""Command-line surface: synth, train, eval, selftest.

Every command is deterministic given its flags and config file; seeds are
explicit inputs (no wall-clock defaults).  Results go to stdout as JSON,
progress notes to stderr.  Exit codes: 0 success, 1 runtime/data failure,
2 usage error.
"""

from __future__ import annotations

import json
import sys

import click

from . import __version__
from .data import (
    SynthSpec,
    generate_synthetic,
    load_dataset,
    load_model,
    save_dataset,
    save_model,
)
from .errors import PggpError, SchemaError
from .kernels import KernelSpec
from .metrics import (
    ScoredItem,
    binary_calibration_items,
    ece,
    group_items,
    mean_average_precision,
    recall_at_k,
    reliability_export,
    top_ranked_per_group,
)
from .predict import predict_batch
from .rng import derive_seed
from .selftest import run_selftest
from .training import TrainConfig, fit


def _fail(message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return click.exceptions.Exit(1)


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _merged(config: dict, section: str, overrides: dict) -> dict:
    """Section from the config file with non-None flag overrides applied."""
    out = dict(config.get(section, {}))
    out.update({k: v for k, v in overrides.items() if v is not None})
    return out


@click.group()
@click.version_option(version=__version__, prog_name="pggp")
def main():
    """Polya-Gamma Gaussian-process response classification."""


@main.command("synth")
@click.option("--generator", type=click.Choice(["blobs", "two_moons", "ranking_groups"]),
              required=True)
@click.option("--n", type=int, required=True,
              help="Points (blobs/two_moons) or groups of 10 (ranking_groups).")
@click.option("--dim", type=int, default=2, show_default=True)
@click.option("--noise", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def cmd_synth(generator, n, dim, noise, seed, out):
    """Generate a synthetic embedding dataset (JSONL)."""
    try:
        ds = generate_synthetic(SynthSpec(generator=generator, n=n, d=dim,
                                          noise=noise, seed=seed))
        save_dataset(ds, out)
    except (PggpError, OSError) as e:
        raise _fail(str(e))
    click.echo(f"wrote {ds.n} records to {out}", err=True)


@main.command("train")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config; flags override its values.")
@click.option("--data", "data_path", type=click.Path(dir_okay=False), default=None)
@click.option("--out", "model_path", type=click.Path(dir_okay=False), default=None)
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None,
              help="Per-batch conditional log marginal as JSONL.")
@click.option("--seed", type=int, default=None)
@click.option("--family", type=click.Choice(["rbf", "linear", "matern52"]), default=None)
@click.option("--length-scale", type=float, default=None)
@click.option("--output-scale", type=float, default=None)
@click.option("--jitter", type=float, default=None)
@click.option("--chains", type=int, default=None)
@click.option("--steps", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--trainable", type=click.Choice(["kernel_params", "none"]), default=None)
def cmd_train(config_path, data_path, model_path, log_path, seed, family,
              length_scale, output_scale, jitter, chains, steps, lr, epochs,
              batch_size, trainable):
    """Fit a model and write it as JSON."""
    config = _load_config(config_path)
    seed = seed if seed is not None else config.get("seed")
    if seed is None:
        raise click.UsageError("a seed is required (flag --seed or config key 'seed')")
    data_path = data_path or config.get("data")
    model_path = model_path or config.get("out")
    if not data_path or not model_path:
        raise click.UsageError("--data and --out are required (flags or config)")

    kernel_d = _merged(config, "kernel", {
        "family": family, "length_scale": length_scale,
        "output_scale": output_scale, "jitter": jitter,
    })
    gibbs_d = _merged(config, "gibbs", {"n_chains": chains, "n_steps": steps})
    gibbs_d["seed"] = derive_seed(seed, "train")
    train_d = _merged(config, "train", {
        "learning_rate": lr, "epochs": epochs,
        "batch_size": batch_size, "trainable": trainable,
    })
    train_d["gibbs"] = gibbs_d

    try:
        spec = KernelSpec.from_dict(kernel_d)
        cfg = TrainConfig.from_dict(train_d)
        dataset = load_dataset(data_path)
        log_fh = open(log_path, "w", encoding="utf-8") if log_path else None
        try:
            def log_fn(rec):
                if log_fh:
                    log_fh.write(json.dumps(rec) + "\n")
                click.echo(
                    f"epoch {rec['epoch']} batch {rec['batch']} "
                    f"log_marginal {rec['log_marginal']:.4f}", err=True)
            model = fit(dataset, spec, cfg, log_fn=log_fn)
        finally:
            if log_fh:
                log_fh.close()
        save_model(model, model_path)
    except (PggpError, OSError) as e:
        raise _fail(str(e))
    click.echo(f"wrote model to {model_path}", err=True)


@main.command("eval")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--data", "data_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--out-metrics", type=click.Path(dir_okay=False), default=None)
@click.option("--out-reliability", type=click.Path(dir_okay=False), default=None)
@click.option("--out-predictions", type=click.Path(dir_okay=False), default=None)
@click.option("--bins", type=int, default=10, show_default=True)
@click.option("--restrict-rank1", is_flag=True,
              help="Compute ECE over the top-ranked item of each group only.")
def cmd_eval(model_path, data_path, out_metrics, out_reliability,
             out_predictions, bins, restrict_rank1):
    """Score a dataset with a model and report ranking + calibration metrics."""
    try:
        model = load_model(model_path)
        dataset = load_dataset(data_path)
        if dataset.dim != model.dim:
            raise SchemaError(
                f"dataset dimension {dataset.dim} != model dimension {model.dim}"
            )
        results = predict_batch(model, dataset.embeddings)

        if out_predictions:
            with open(out_predictions, "w", encoding="utf-8") as fh:
                for i, r in enumerate(results):
                    fh.write(json.dumps({
                        "id": dataset.ids[i], "group_id": dataset.group_ids[i],
                        "label": int(dataset.labels[i]), "mu_star": r.mu_star,
                        "sigma_star": r.sigma_star, "probability": r.probability,
                    }) + "\n")

        items = [
            ScoredItem(group_id=dataset.group_ids[i], score=r.probability,
                       label=int(dataset.labels[i]))
            for i, r in enumerate(results)
        ]
        groups = group_items(items)
        cal_pool = top_ranked_per_group(groups) if restrict_rank1 else items
        report = ece(
            binary_calibration_items([it.score for it in cal_pool],
                                     [it.label for it in cal_pool]),
            n_bins=bins,
        )
        summary = {
            "r_at_1": recall_at_k(groups, 1),
            "map": mean_average_precision(groups),
            "ece": report.ece,
            "n_groups": len(groups),
            "n_items": len(items),
        }
        if out_reliability:
            reliability_export(report, out_reliability)
        payload = json.dumps(summary)
        if out_metrics:
            with open(out_metrics, "w", encoding="utf-8") as fh:
                fh.write(payload + "\n")
    except (PggpError, OSError) as e:
        raise _fail(str(e))
    click.echo(payload)


@main.command("selftest")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--quick", is_flag=True, help="Skip the long-run Gibbs oracle.")
def cmd_selftest(seed, quick):
    """Run sampler, identity, gradient, and Gibbs diagnostics."""
    report = run_selftest(seed=seed, quick=quick)
    click.echo(json.dumps(report))
    if not report["pass"]:
        raise click.exceptions.Exit(1)


def pg_selftest_main():
    """Entry point for the standalone `pg-selftest` moment/identity report."""
    seed = 0
    args = sys.argv[1:]
    if args and args[0] == "--seed" and len(args) > 1:
        seed = int(args[1])
    report = run_selftest(seed=seed, sampler_only=True)
    print(json.dumps(report))
    sys.exit(0 if report["pass"] else 1)


if __name__ == "__main__":
    main()
