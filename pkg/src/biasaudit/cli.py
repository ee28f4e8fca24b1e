"""Command-line surface.

    biasaudit weat run        batch Monte-Carlo WEAT audit -> JSON/CSV report
    biasaudit weat exact      same but with exact permutation enumeration
    biasaudit lexicon check   validate a lexicon, optionally against a table
    biasaudit sim train       one planted-bias training run
    biasaudit sim sweep       seeds x rate-pairs sweep -> CSV
    biasaudit employer compare  trained model vs Bayesian-employer decisions
    biasaudit report render   re-render a saved JSON report

All flags are long-form. A JSON --config file supplies defaults for any
flag (explicit flags win). WEAT_AUDIT_SEED is a seed default of last
resort: flag beats config beats the environment variable.

Exit codes: 0 success, 1 fatal input error, 2 validation/configuration
error, 3 internal invariant violation.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np
from click.core import ParameterSource

from . import __version__
from .errors import ConfigError, ParseError, SchemaError, ValidationError
from .lexicon import builtin_lexicon_path, coverage_check, load_lexicon
from .report import (
    CSV_COLUMNS,
    AuditOptions,
    audit_paths,
    canonical_json,
    format_float,
    render,
)
from .simulate import (
    SimConfig,
    TrainConfig,
    closed_form_optimum,
    decision_agreement,
    employer_decide,
    generate,
    predict,
    train,
)
from .weat import DEFAULT_PERMUTATIONS, PermutationPlan


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"--config file is not valid JSON: {e}") from None
    if not isinstance(obj, dict):
        raise ConfigError("--config file must hold a JSON object")
    return obj


def _resolve(ctx: click.Context, name: str, config: dict):
    """flag > config file > WEAT_AUDIT_SEED (seed only) > declared default."""
    if ctx.get_parameter_source(name) == ParameterSource.COMMANDLINE:
        return ctx.params[name]
    if name in config:
        return config[name]
    if name == "seed":
        env = os.environ.get("WEAT_AUDIT_SEED")
        if env is not None:
            try:
                return int(env)
            except ValueError:
                raise ConfigError(f"WEAT_AUDIT_SEED must be an integer, got {env!r}")
    return ctx.params[name]


def _emit(data: bytes, output: str | None) -> None:
    if output:
        Path(output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()


def _lexicon_path(spec: str) -> Path:
    # bare language tags resolve to the shipped lexicons
    if spec in ("en", "zh"):
        return builtin_lexicon_path(spec)
    return Path(spec)


@click.group()
@click.version_option(__version__)
def cli():
    """Gender-stereotype audits for word embeddings, and bias-emergence
    simulations."""


@cli.group("weat")
def weat_group():
    """Association-test audits over embedding tables."""


def _weat_options(fn):
    fn = click.option("--table", "tables", multiple=True, required=True,
                      help="word2vec-text embedding file (repeatable)")(fn)
    fn = click.option("--lexicon", "lexicon", default="en", show_default=True,
                      help="lexicon JSON path, or a built-in language tag (en, zh)")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True,
                      help="permutation sampling seed")(fn)
    fn = click.option("--lowercase", is_flag=True, default=False,
                      help="lowercase lexicon phrases before lookup")(fn)
    fn = click.option("--policy", type=click.Choice(["underscore-then-average", "strict"]),
                      default="underscore-then-average", show_default=True)(fn)
    fn = click.option("--workers", type=int, default=1, show_default=True,
                      help="parallel category runs (does not affect results)")(fn)
    fn = click.option("--allow-partial", is_flag=True, default=False,
                      help="accept lexicons without full category/group coverage")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
                      default="json", show_default=True)(fn)
    fn = click.option("--output", default=None, help="write report here instead of stdout")(fn)
    fn = click.option("--config", "config_path", default=None,
                      help="JSON file with default values for any flag")(fn)
    return fn


@weat_group.command("run")
@_weat_options
@click.option("--permutations", type=int, default=DEFAULT_PERMUTATIONS, show_default=True,
              help="Monte-Carlo permutation count")
@click.pass_context
def weat_run(ctx, tables, lexicon, seed, lowercase, policy, workers,
             allow_partial, fmt, output, config_path, permutations):
    """Audit tables against a lexicon with Monte-Carlo permutations."""
    config = _load_config(_resolve(ctx, "config_path", {}))
    plan = PermutationPlan("monte-carlo",
                           count=_resolve(ctx, "permutations", config),
                           seed=_resolve(ctx, "seed", config))
    _run_audit(ctx, config, plan)


@weat_group.command("exact")
@_weat_options
@click.pass_context
def weat_exact(ctx, tables, lexicon, seed, lowercase, policy, workers,
               allow_partial, fmt, output, config_path):
    """Audit with exact permutation enumeration (small target sets only)."""
    config = _load_config(_resolve(ctx, "config_path", {}))
    plan = PermutationPlan("exact", seed=_resolve(ctx, "seed", config))
    _run_audit(ctx, config, plan)


def _run_audit(ctx, config, plan):
    tables = _resolve(ctx, "tables", config)
    opts = AuditOptions(
        permutations=plan,
        lowercase=_resolve(ctx, "lowercase", config),
        policy=_resolve(ctx, "policy", config),
        workers=_resolve(ctx, "workers", config),
    )
    report = audit_paths(
        [Path(t) for t in tables],
        _lexicon_path(_resolve(ctx, "lexicon", config)),
        opts,
        allow_partial=_resolve(ctx, "allow_partial", config),
    )
    _emit(render(report, _resolve(ctx, "fmt", config)),
          _resolve(ctx, "output", config))


@cli.group("lexicon")
def lexicon_group():
    """Lexicon validation and coverage checks."""


@lexicon_group.command("check")
@click.option("--lexicon", default="en", show_default=True)
@click.option("--table", "table_path", default=None,
              help="also report per-category coverage against this table")
@click.option("--policy", type=click.Choice(["underscore-then-average", "strict"]),
              default="underscore-then-average", show_default=True)
@click.option("--lowercase", is_flag=True, default=False)
@click.option("--allow-partial", is_flag=True, default=False)
@click.option("--output", default=None)
def lexicon_check(lexicon, table_path, policy, lowercase, allow_partial, output):
    """Validate a lexicon file; nonzero exit on schema/content violations."""
    lex = load_lexicon(_lexicon_path(lexicon), allow_partial)
    payload = {
        "valid": True,
        "language": lex.language,
        "version": lex.version,
        "version_hash": lex.version_hash(),
        "categories": len(lex.categories),
        "words": sum(len(c.male_stereotyped) + len(c.female_stereotyped)
                     for c in lex.categories),
    }
    if table_path:
        from .embeddings import load_table

        cov = coverage_check(lex, load_table(table_path), policy, lowercase)
        payload["coverage"] = {
            "table": cov.table_label,
            "oov_rate": cov.oov_rate,
            "attributes_unresolvable": list(cov.attributes_unresolvable),
            "runnable_categories": list(cov.runnable_ids),
            "categories": [
                {"id": c.id, "runnable": c.runnable,
                 "unresolvable": list(c.unresolvable)}
                for c in cov.categories
            ],
        }
    _emit((canonical_json(payload) + "\n").encode(), output)


@cli.group("sim")
def sim_group():
    """Planted-bias training simulations."""


def _sim_options(fn):
    fn = click.option("--n-features", type=int, default=5, show_default=True)(fn)
    fn = click.option("--male-fraction", type=float, default=0.5, show_default=True)(fn)
    fn = click.option("--n-samples", type=int, default=100_000, show_default=True)(fn)
    fn = click.option("--lr", type=float, default=1.0, show_default=True)(fn)
    fn = click.option("--epochs", type=int, default=150, show_default=True)(fn)
    fn = click.option("--batch", default="full", show_default=True,
                      help="'full' or a mini-batch size")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--output", default=None)(fn)
    fn = click.option("--config", "config_path", default=None)(fn)
    return fn


def _parse_batch(value) -> int | str:
    if value == "full":
        return "full"
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"--batch must be 'full' or an integer, got {value!r}")


def _train_run(p_male, p_female, n_features, male_fraction, n_samples,
               lr, epochs, batch, seed):
    data = generate(SimConfig(
        n_features=n_features, p_pos_given_male=p_male, p_pos_given_female=p_female,
        male_fraction=male_fraction, n_samples=n_samples, seed=seed))
    res = train(data, TrainConfig(lr=lr, epochs=epochs, batch=_parse_batch(batch),
                                  seed=seed))
    return data, res


@sim_group.command("train")
@_sim_options
@click.option("--p-male", type=float, required=True,
              help="P(y=1 | male) planted in the generator")
@click.option("--p-female", type=float, required=True,
              help="P(y=1 | female) planted in the generator")
@click.pass_context
def sim_train(ctx, n_features, male_fraction, n_samples, lr, epochs, batch,
              seed, output, config_path, p_male, p_female):
    """Train the logistic unit on planted-bias data; emit learned params."""
    config = _load_config(_resolve(ctx, "config_path", {}))
    args = {name: _resolve(ctx, name, config)
            for name in ("p_male", "p_female", "n_features", "male_fraction",
                         "n_samples", "lr", "epochs", "batch", "seed")}
    _, res = _train_run(**args)
    gamma_star, b_star = closed_form_optimum(args["p_male"], args["p_female"])
    payload = {
        "gamma": res.params.gamma,
        "b": res.params.b,
        "w_norm": float(np.linalg.norm(res.params.W)),
        "final_loss": res.final_loss,
        "epochs": res.epochs,
        "loss_trace_tail": list(res.loss_trace[-5:]),
        "closed_form": {"gamma": gamma_star, "b": b_star},
        "config_echo": args,
    }
    _emit((canonical_json(payload) + "\n").encode(),
          _resolve(ctx, "output", config))


@sim_group.command("sweep")
@_sim_options
@click.option("--rates", multiple=True, required=True,
              help="planted rate pair 'p_male:p_female' (repeatable)")
@click.option("--seeds", type=int, default=20, show_default=True,
              help="run seeds 0..N-1 per rate pair")
@click.pass_context
def sim_sweep(ctx, n_features, male_fraction, n_samples, lr, epochs, batch,
              seed, output, config_path, rates, seeds):
    """Seed sweep; one CSV row per (seed, rate pair)."""
    config = _load_config(_resolve(ctx, "config_path", {}))
    pairs = []
    for spec in _resolve(ctx, "rates", config):
        try:
            pm, pf = (float(v) for v in str(spec).split(":"))
        except ValueError:
            raise ConfigError(f"--rates must look like '0.8:0.4', got {spec!r}")
        pairs.append((pm, pf))
    n_seeds = _resolve(ctx, "seeds", config)
    fixed = {name: _resolve(ctx, name, config)
             for name in ("n_features", "male_fraction", "n_samples",
                          "lr", "epochs", "batch")}

    lines = ["seed,p_pos_given_male,p_pos_given_female,w_norm,gamma,b,final_loss,epochs"]
    for pm, pf in pairs:
        for run_seed in range(n_seeds):
            _, res = _train_run(p_male=pm, p_female=pf, seed=run_seed, **fixed)
            lines.append(",".join([
                str(run_seed), format_float(pm), format_float(pf),
                format_float(float(np.linalg.norm(res.params.W))),
                format_float(res.params.gamma), format_float(res.params.b),
                format_float(res.final_loss), str(res.epochs),
            ]))
    _emit(("\n".join(lines) + "\n").encode(), _resolve(ctx, "output", config))


@cli.group("employer")
def employer_group():
    """Bayesian-employer decision rule comparisons."""


@employer_group.command("compare")
@_sim_options
@click.option("--p-male", type=float, required=True)
@click.option("--p-female", type=float, required=True)
@click.option("--threshold", type=float, required=True,
              help="hire when expected productivity >= threshold")
@click.option("--alpha", type=float, default=1.0, show_default=True,
              help="Laplace smoothing pseudo-count")
@click.option("--n-candidates", type=int, default=2000, show_default=True)
@click.pass_context
def employer_compare(ctx, n_features, male_fraction, n_samples, lr, epochs, batch,
                     seed, output, config_path, p_male, p_female, threshold,
                     alpha, n_candidates):
    """Agreement between the trained model and the employer rule."""
    config = _load_config(_resolve(ctx, "config_path", {}))
    args = {name: _resolve(ctx, name, config)
            for name in ("p_male", "p_female", "n_features", "male_fraction",
                         "n_samples", "lr", "epochs", "batch", "seed")}
    threshold = _resolve(ctx, "threshold", config)
    alpha = _resolve(ctx, "alpha", config)
    n_candidates = _resolve(ctx, "n_candidates", config)

    history, res = _train_run(**args)
    held_out = generate(SimConfig(
        n_features=args["n_features"], p_pos_given_male=args["p_male"],
        p_pos_given_female=args["p_female"], male_fraction=args["male_fraction"],
        n_samples=n_candidates, seed=args["seed"] + 1))
    agreement = decision_agreement(res.params, history, held_out, threshold, alpha)

    x0 = np.zeros(args["n_features"])
    payload = {
        "agreement": agreement,
        "threshold": threshold,
        "n_candidates": n_candidates,
        "employer": {
            "male": employer_decide(history, (x0, 1), threshold, alpha).expected_productivity,
            "female": employer_decide(history, (x0, -1), threshold, alpha).expected_productivity,
        },
        "model": {
            "gamma": res.params.gamma,
            "b": res.params.b,
            "male_at_mean_x": float(predict(res.params, x0, 1)),
            "female_at_mean_x": float(predict(res.params, x0, -1)),
        },
        "config_echo": {**args, "threshold": threshold, "alpha": alpha,
                        "n_candidates": n_candidates},
    }
    _emit((canonical_json(payload) + "\n").encode(),
          _resolve(ctx, "output", config))


@cli.group("report")
def report_group():
    """Re-render saved reports."""


@report_group.command("render")
@click.option("--input", "input_path", required=True, help="JSON report file")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="csv", show_default=True)
@click.option("--output", default=None)
def report_render(input_path, fmt, output):
    """Convert a saved JSON report to canonical JSON or CSV."""
    try:
        obj = json.loads(Path(input_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"report is not valid JSON: {e}")
    if fmt == "json":
        _emit((canonical_json(obj) + "\n").encode(), output)
        return
    seed = obj.get("config_echo", {}).get("permutations", {}).get("seed", "")
    lines = [",".join(CSV_COLUMNS)]
    for r in obj.get("runs", []):
        lines.append(",".join([
            r["table"], r["language"], r["category"], r["group"],
            format_float(r["statistic"]), format_float(r["effect_size"]),
            format_float(r["p_value"]), r["permutation_mode"],
            str(r["permutation_count"]), str(seed),
        ]))
    _emit(("\n".join(lines) + "\n").encode(), output)


def main():
    try:
        cli(standalone_mode=False)
    except click.ClickException as e:
        e.show()
        sys.exit(2)
    except click.Abort:
        sys.exit(1)
    except (ParseError, FileNotFoundError, IsADirectoryError, PermissionError,
            UnicodeDecodeError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    except (SchemaError, ValidationError, ConfigError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    except Exception as e:
        click.echo(f"internal error: {e}", err=True)
        sys.exit(3)


if __name__ == "__main__":
    main()
