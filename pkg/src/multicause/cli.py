"""Command line pipeline around the library stages.

Subcommands:
  synth               draw a synthetic benchmark dataset with known truth
  impute              fill missing cause entries by chained equations
  fit-ppca            fit the factor model on holdout-masked causes
  check               score a saved model against held-out entries
  effects             full pipeline: impute -> standardize -> screen ->
                      fit -> predictive check gate -> effect estimates
  mediate             total/direct decomposition through a mediator column
  robustness          cause-addition sweep with sign-flip detection
  compare-predictive  held-out MSE/MAE of causal vs non-causal regression

Every run writes manifest.json recording the resolved parameters and a
sha256 hash; reports embed the hash so tables are traceable to exact
configs. Outputs are deterministic given the manifest (no timestamps).

Exit codes: 0 success; 1 I/O or validation failure; 2 predictive-check
gate failure; 3 numeric failure (rank deficiency, non-convergence).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .dataset import (
    CauseMatrix,
    HoldoutMask,
    check_overlap,
    correlation_screen,
    load_csv,
    make_holdout,
    standardize,
    write_csv,
)
from .effects import (
    estimate_effects_causal,
    estimate_effects_noncausal,
    predictive_comparison,
)
from .errors import (
    MulticauseError,
    NumericError,
    ParseError,
    PredictiveCheckFailed,
    RankDeficiencyError,
    ValidationError,
)
from .imputation import MiceConfig, impute_mice
from .mediation import mediate
from .ppca import (
    DEFAULT_K,
    PpcaConfig,
    PpcaModel,
    fit_ppca,
    posterior_mean_partial,
    predictive_check,
)
from .robustness import sweep
from .synthetic import SCENARIOS, generate
from .tables import (
    canonical_json,
    render_comparison_table,
    render_mediation_table,
    render_regression_table,
    render_sweep_table,
)

OUTPUT_DIR_ENV = "MULTICAUSE_OUTPUT_DIR"

# stage label used to attribute errors to the module that raised them
_stage = ["cli"]


def _set_stage(name: str) -> None:
    _stage[0] = name


def _out_dir(args) -> str:
    out = args.out or os.environ.get(OUTPUT_DIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_text(directory: str, name: str, text: str) -> None:
    with open(os.path.join(directory, name), "w") as fh:
        fh.write(text)


def _write_json(directory: str, name: str, payload) -> None:
    _write_text(directory, name, canonical_json(payload))


def _manifest(command: str, parameters: dict) -> dict:
    body = {
        "command": command,
        "package_version": __version__,
        "parameters": parameters,
    }
    digest = hashlib.sha256(canonical_json(body).encode()).hexdigest()
    body["hash"] = digest
    return body


def _read_header(path: str) -> list[str]:
    _set_stage("dataset")
    try:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh), None)
    except OSError as exc:
        raise ValidationError(f"cannot read '{path}': {exc.strerror}") from None
    if not header:
        raise ParseError("empty file", line=1)
    return header


def _build_schema(args, header: list[str], outcome: str | None) -> dict[str, str]:
    """Map every CSV column to a role from the subcommand flags."""
    covariates = [c for c in (args.covariates or "").split(",") if c]
    ignore = [c for c in (getattr(args, "ignore", "") or "").split(",") if c]
    mediator = getattr(args, "mediator", None)
    schema: dict[str, str] = {}
    for col in header:
        if outcome is not None and col == outcome:
            schema[col] = "outcome"
        elif col == args.id_column:
            schema[col] = "id"
        elif col in covariates:
            schema[col] = "covariate"
        elif col in ignore or col == mediator or col == getattr(args, "outcome", None):
            schema[col] = "ignore"
        else:
            schema[col] = "cause"
    for col in [outcome] + covariates + ignore:
        if col and col not in header:
            raise ValidationError(f"column '{col}' not present in the input header")
    return schema


def _outcome_kind(args, outcome: str | None) -> str:
    if args.outcome_kind:
        return args.outcome_kind
    if outcome in DEFAULT_K:
        return outcome
    return "custom"


def _prepare(args, outcome_col: str | None):
    """Shared ingestion: load -> impute -> standardize -> screen."""
    header = _read_header(args.input)
    schema = _build_schema(args, header, outcome_col)
    kind = _outcome_kind(args, outcome_col)
    _set_stage("dataset")
    m, y, x = load_csv(args.input, schema, outcome_kind=kind)
    overlap = check_overlap(m)

    _set_stage("imputation")
    imputation = {"ran": False}
    if m.has_missing:
        res = impute_mice(m, MiceConfig(iterations=args.mice_iterations, seed=args.seed))
        m = res.matrix
        imputation = {
            "ran": True,
            "sweeps": res.sweeps,
            "converged": res.converged,
            "max_change": res.max_change,
            "mean_fallback_columns": res.mean_fallback_columns,
        }

    _set_stage("dataset")
    m, transform = standardize(m)
    m, dropped = correlation_screen(m, threshold=args.corr_threshold)
    prep = {
        "overlap": {"passed": overlap.passed, "failing_rows": overlap.failing_rows},
        "imputation": imputation,
        "screen": {"kept": list(m.column_names), "dropped": dropped},
        "standardization": {
            "mean": [float(v) for v in transform.mean],
            "scale": [float(v) for v in transform.scale],
        },
    }
    return m, y, x, prep


def _resolve_k(args, m: CauseMatrix, kind: str) -> int:
    if args.k is not None:
        return args.k
    # default per outcome kind, clamped below the cause count
    return min(DEFAULT_K[kind], m.n_causes - 1)


def _fit_surrogates(args, m: CauseMatrix, k: int):
    _set_stage("dataset")
    mask = make_holdout(m, rate=args.holdout_rate, seed=args.seed)
    _set_stage("ppca")
    model = fit_ppca(m, k, PpcaConfig(seed=args.seed), mask=mask)
    z = posterior_mean_partial(model, m, mask)
    return mask, model, z


def _mask_payload(mask: HoldoutMask, rate: float, seed: int) -> dict:
    return {
        "rate": rate,
        "seed": seed,
        "held": [[int(j) for j in np.flatnonzero(row)] for row in mask.held],
    }


def _load_mask(path: str, m: CauseMatrix) -> HoldoutMask:
    _set_stage("dataset")
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read '{path}': {exc.strerror}") from None
    except ValueError as exc:
        raise ValidationError(f"bad mask file: {exc}") from None
    held = np.zeros((m.n_units, m.n_causes), dtype=bool)
    rows = payload.get("held")
    if not isinstance(rows, list) or len(rows) != m.n_units:
        raise ValidationError("mask row count disagrees with the input data")
    for i, cols in enumerate(rows):
        for j in cols:
            if not 0 <= int(j) < m.n_causes:
                raise ValidationError(f"mask row {i} names column {j} out of range")
            held[i, int(j)] = True
    return HoldoutMask(held)


def _load_model(path: str, m: CauseMatrix) -> PpcaModel:
    _set_stage("ppca")
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read '{path}': {exc.strerror}") from None
    except ValueError as exc:
        raise ValidationError(f"bad model file: {exc}") from None
    model = PpcaModel.from_dict(payload)
    columns = payload.get("columns")
    if columns is not None and list(columns) != list(m.column_names):
        raise ValidationError(
            "model was fitted on different columns; rerun fit-ppca on this input"
        )
    if model.n_causes != m.n_causes:
        raise ValidationError("model dimension disagrees with the cause columns")
    return model


def _estimate_to_dict(est) -> dict:
    return {
        "beta": [float(v) for v in est.beta],
        "gamma": [float(v) for v in est.gamma],
        "cause_names": list(est.cause_names),
        "regression": est.report.to_dict(),
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    out = _out_dir(args)
    _set_stage("synthetic")
    factory = SCENARIOS[args.scenario]
    kwargs = {"n_units": args.n, "seed": args.seed}
    if args.missing_rate:
        if args.scenario != "confounded":
            raise ValidationError("--missing-rate is only supported for 'confounded'")
        kwargs["missing_rate"] = args.missing_rate
    cfg = factory(**kwargs)
    m, rating, popularity, truth = generate(cfg)
    outcomes = {}
    if rating is not None:
        outcomes["rating"] = rating
    outcomes["popularity"] = popularity
    _set_stage("dataset")
    write_csv(os.path.join(out, "data.csv"), m, outcomes=outcomes)
    truth_doc = {
        "scenario": args.scenario,
        "seed": args.seed,
        "n_units": args.n,
        "column_names": list(m.column_names),
        "true_beta": [float(v) for v in truth.true_beta],
        "outcome_gamma": [float(v) for v in truth.outcome_gamma],
        "confounder_loadings": [[float(v) for v in row] for row in cfg.confounder_loadings],
        "overlap_shift": truth.overlap_shift,
        "missing_cells": int(truth.missing_mask.sum()),
        "mediator": None
        if truth.mediator_theta is None
        else {
            "theta": [float(v) for v in truth.mediator_theta],
            "lambda": truth.mediator_lambda,
        },
    }
    _write_json(out, "truth.json", truth_doc)
    manifest = _manifest(
        "synth",
        {
            "scenario": args.scenario,
            "n": args.n,
            "seed": args.seed,
            "missing_rate": args.missing_rate,
        },
    )
    _write_json(out, "manifest.json", manifest)
    print(f"wrote {m.n_units} units x {m.n_causes} causes to {out}/data.csv")
    return 0


def cmd_impute(args) -> int:
    out = _out_dir(args)
    header = _read_header(args.input)
    schema = _build_schema(args, header, args.outcome or None)
    _set_stage("dataset")
    m, y, x = load_csv(args.input, schema, outcome_kind=_outcome_kind(args, args.outcome))
    _set_stage("imputation")
    diagnostics = {"ran": False}
    if m.has_missing:
        res = impute_mice(m, MiceConfig(iterations=args.mice_iterations, seed=args.seed))
        m = res.matrix
        diagnostics = {
            "ran": True,
            "sweeps": res.sweeps,
            "converged": res.converged,
            "max_change": res.max_change,
            "mean_fallback_columns": res.mean_fallback_columns,
        }
    outcomes = {args.outcome: y} if args.outcome else {}
    _set_stage("dataset")
    write_csv(os.path.join(out, "imputed.csv"), m, outcomes=outcomes, covariates=x)
    manifest = _manifest(
        "impute",
        {
            "input": args.input,
            "outcome": args.outcome,
            "id_column": args.id_column,
            "covariates": args.covariates,
            "mice_iterations": args.mice_iterations,
            "seed": args.seed,
        },
    )
    _write_json(out, "manifest.json", manifest)
    _write_json(out, "report.json", {"manifest_hash": manifest["hash"], "imputation": diagnostics})
    note = "imputed" if diagnostics["ran"] else "already complete"
    print(f"{note}; wrote {out}/imputed.csv")
    return 0


def cmd_fit_ppca(args) -> int:
    out = _out_dir(args)
    m, y, x, prep = _prepare(args, args.outcome or None)
    kind = _outcome_kind(args, args.outcome or None)
    k = _resolve_k(args, m, kind)
    mask, model, z = _fit_surrogates(args, m, k)

    model_doc = model.to_dict()
    model_doc["columns"] = list(m.column_names)
    _write_json(out, "model.json", model_doc)
    _write_json(out, "holdout.json", _mask_payload(mask, args.holdout_rate, args.seed))
    manifest = _manifest(
        "fit-ppca",
        {
            "input": args.input,
            "outcome": args.outcome,
            "outcome_kind": kind,
            "id_column": args.id_column,
            "covariates": args.covariates,
            "k_requested": args.k,
            "k": k,
            "holdout_rate": args.holdout_rate,
            "mice_iterations": args.mice_iterations,
            "corr_threshold": args.corr_threshold,
            "seed": args.seed,
        },
    )
    _write_json(out, "manifest.json", manifest)
    report = {
        "manifest_hash": manifest["hash"],
        "log_likelihood": model.log_likelihood,
        "converged": model.converged,
        "iterations": len(model.fit_trace),
        "noise_variance": model.noise_variance,
        **prep,
    }
    _write_json(out, "report.json", report)
    print(
        f"fitted K={k} on {m.n_units}x{m.n_causes} (holdout {args.holdout_rate:g});"
        f" log-likelihood {model.log_likelihood:.2f}"
    )
    return 0


def cmd_check(args) -> int:
    out = _out_dir(args)
    m, y, x, prep = _prepare(args, args.outcome or None)
    model = _load_model(args.model, m)
    mask = _load_mask(args.mask, m)
    _set_stage("ppca")
    result = predictive_check(
        model,
        m,
        mask,
        replications=args.replications,
        mc_samples=args.mc_samples,
        seed=args.seed,
        threshold=args.check_threshold,
        method=args.check_method,
    )
    manifest = _manifest(
        "check",
        {
            "input": args.input,
            "model": args.model,
            "mask": args.mask,
            "outcome": args.outcome,
            "id_column": args.id_column,
            "covariates": args.covariates,
            "replications": args.replications,
            "mc_samples": args.mc_samples,
            "check_threshold": args.check_threshold,
            "check_method": args.check_method,
            "mice_iterations": args.mice_iterations,
            "corr_threshold": args.corr_threshold,
            "seed": args.seed,
        },
    )
    _write_json(out, "manifest.json", manifest)
    doc = result.to_dict()
    doc["manifest_hash"] = manifest["hash"]
    _write_json(out, "report.json", doc)
    verdict = "PASSED" if result.passed else "FAILED"
    print(
        f"predictive check score {result.score:.4f}"
        f" (threshold {result.threshold:g}): {verdict}"
    )
    if not result.passed:
        raise PredictiveCheckFailed(result.score, result.threshold)
    return 0


def cmd_effects(args) -> int:
    out = _out_dir(args)
    m, y, x, prep = _prepare(args, args.outcome)
    if y is None:
        raise ValidationError("effects needs an --outcome column")
    kind = _outcome_kind(args, args.outcome)
    k = _resolve_k(args, m, kind)
    mask, model, z = _fit_surrogates(args, m, k)

    _set_stage("ppca")
    result = predictive_check(
        model,
        m,
        mask,
        replications=args.replications,
        mc_samples=args.mc_samples,
        seed=args.seed,
        threshold=args.check_threshold,
        method=args.check_method,
    )
    if not result.passed and not args.force:
        raise PredictiveCheckFailed(result.score, result.threshold)
    if not result.passed:
        print(
            f"WARNING: predictive check failed (score {result.score:.4f}"
            f" <= {result.threshold:g}); continuing under --force",
            file=sys.stderr,
        )

    _set_stage("effects")
    causal = estimate_effects_causal(m, z, y, x)
    noncausal = estimate_effects_noncausal(m, y, x)

    manifest = _manifest(
        "effects",
        {
            "input": args.input,
            "outcome": args.outcome,
            "outcome_kind": kind,
            "id_column": args.id_column,
            "covariates": args.covariates,
            "k_requested": args.k,
            "k": k,
            "holdout_rate": args.holdout_rate,
            "replications": args.replications,
            "mc_samples": args.mc_samples,
            "check_threshold": args.check_threshold,
            "check_method": args.check_method,
            "mice_iterations": args.mice_iterations,
            "corr_threshold": args.corr_threshold,
            "force": bool(args.force),
            "seed": args.seed,
        },
    )
    model_doc = model.to_dict()
    model_doc["columns"] = list(m.column_names)
    _write_json(out, "model.json", model_doc)
    _write_json(out, "holdout.json", _mask_payload(mask, args.holdout_rate, args.seed))
    _write_json(out, "manifest.json", manifest)

    check_doc = result.to_dict()
    report = {
        "manifest_hash": manifest["hash"],
        "predictive_check": check_doc,
        "causal": _estimate_to_dict(causal),
        "noncausal": _estimate_to_dict(noncausal),
        **prep,
    }
    _write_json(out, "report.json", report)

    shown = ["Intercept"] + list(m.column_names)
    verdict = "passed" if result.passed else "FAILED (forced)"
    text = "\n".join(
        [
            f"causal effect estimates on '{args.outcome}'",
            f"manifest {manifest['hash']}",
            "",
            f"predictive check: score {result.score:.4f}"
            f" (threshold {result.threshold:g}) {verdict}",
            "",
            render_regression_table(causal.report, include=shown).rstrip("\n"),
            "",
            "non-causal comparison",
            "",
            render_regression_table(noncausal.report, include=shown).rstrip("\n"),
            "",
        ]
    )
    _write_text(out, "report.txt", text)
    print(text, end="")
    return 0


def cmd_mediate(args) -> int:
    out = _out_dir(args)
    if args.mediator == args.outcome:
        raise ValidationError("mediator and outcome must be different columns")
    m, y, x, prep = _prepare(args, args.outcome)
    if y is None:
        raise ValidationError("mediate needs an --outcome column")
    # second pass picks up the mediator column under the same prep
    header = _read_header(args.input)
    med_schema = _build_schema(args, header, args.mediator)
    _set_stage("dataset")
    _, r, _ = load_csv(args.input, med_schema, outcome_kind="rating")
    if r is None:
        raise ValidationError("mediate needs a --mediator column")
    kind = _outcome_kind(args, args.outcome)
    k = _resolve_k(args, m, kind)
    mask, model, z = _fit_surrogates(args, m, k)
    _set_stage("mediation")
    report = mediate(m, z, r, y, x, alpha=args.alpha)

    manifest = _manifest(
        "mediate",
        {
            "input": args.input,
            "outcome": args.outcome,
            "mediator": args.mediator,
            "outcome_kind": kind,
            "id_column": args.id_column,
            "covariates": args.covariates,
            "k_requested": args.k,
            "k": k,
            "alpha": args.alpha,
            "holdout_rate": args.holdout_rate,
            "mice_iterations": args.mice_iterations,
            "corr_threshold": args.corr_threshold,
            "seed": args.seed,
        },
    )
    _write_json(out, "manifest.json", manifest)
    doc = report.to_dict()
    doc["manifest_hash"] = manifest["hash"]
    doc.update(prep)
    _write_json(out, "report.json", doc)
    text = "\n".join(
        [
            f"mediation of '{args.outcome}' through '{args.mediator}'",
            f"manifest {manifest['hash']}",
            "",
            render_mediation_table(report, alpha=args.alpha).rstrip("\n"),
            "",
        ]
    )
    _write_text(out, "report.txt", text)
    print(text, end="")
    return 0


def cmd_robustness(args) -> int:
    out = _out_dir(args)
    m, y, x, prep = _prepare(args, args.outcome)
    if y is None:
        raise ValidationError("robustness needs an --outcome column")
    order = [c for c in (args.order or "").split(",") if c] or None

    tables = {}
    if args.mode in ("noncausal", "both"):
        _set_stage("robustness")
        tables["noncausal"] = sweep(m, y, order=order, alpha=args.alpha)
    if args.mode in ("causal", "both"):
        kind = _outcome_kind(args, args.outcome)
        k = _resolve_k(args, m, kind)
        mask, model, z = _fit_surrogates(args, m, k)
        _set_stage("robustness")
        tables["causal"] = sweep(m, y, z=z, order=order, alpha=args.alpha)

    manifest = _manifest(
        "robustness",
        {
            "input": args.input,
            "outcome": args.outcome,
            "id_column": args.id_column,
            "covariates": args.covariates,
            "mode": args.mode,
            "order": args.order,
            "alpha": args.alpha,
            "k_requested": args.k,
            "holdout_rate": args.holdout_rate,
            "mice_iterations": args.mice_iterations,
            "corr_threshold": args.corr_threshold,
            "seed": args.seed,
        },
    )
    _write_json(out, "manifest.json", manifest)
    doc = {"manifest_hash": manifest["hash"], **prep}
    blocks = [f"cause-addition sweep on '{args.outcome}'", f"manifest {manifest['hash']}"]
    for label in ("noncausal", "causal"):
        if label in tables:
            doc[label] = tables[label].to_dict()
            blocks += ["", f"{label} sweep", "", render_sweep_table(tables[label]).rstrip("\n")]
    _write_json(out, "report.json", doc)
    text = "\n".join(blocks) + "\n"
    _write_text(out, "report.txt", text)
    print(text, end="")
    return 0


def cmd_compare_predictive(args) -> int:
    out = _out_dir(args)
    m, y, x, prep = _prepare(args, args.outcome)
    if y is None:
        raise ValidationError("compare-predictive needs an --outcome column")
    kind = _outcome_kind(args, args.outcome)
    k = _resolve_k(args, m, kind)
    mask, model, z = _fit_surrogates(args, m, k)
    _set_stage("effects")
    comparison = predictive_comparison(m, z, y, x, split=args.split, seed=args.seed)

    manifest = _manifest(
        "compare-predictive",
        {
            "input": args.input,
            "outcome": args.outcome,
            "outcome_kind": kind,
            "id_column": args.id_column,
            "covariates": args.covariates,
            "k_requested": args.k,
            "k": k,
            "split": args.split,
            "holdout_rate": args.holdout_rate,
            "mice_iterations": args.mice_iterations,
            "corr_threshold": args.corr_threshold,
            "seed": args.seed,
        },
    )
    _write_json(out, "manifest.json", manifest)
    doc = {"manifest_hash": manifest["hash"], "comparison": comparison, **prep}
    _write_json(out, "report.json", doc)
    text = "\n".join(
        [
            f"held-out prediction of '{args.outcome}' (test fraction {args.split:g})",
            f"manifest {manifest['hash']}",
            "",
            render_comparison_table(comparison).rstrip("\n"),
            "",
        ]
    )
    _write_text(out, "report.txt", text)
    print(text, end="")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_io_flags(p, outcome_required=False, seed_required=True):
    p.add_argument("--input", required=True, help="input CSV path")
    p.add_argument(
        "--outcome",
        required=outcome_required,
        default=None,
        help="outcome column name" + ("" if outcome_required else " (optional)"),
    )
    p.add_argument("--outcome-kind", choices=sorted(DEFAULT_K), default=None)
    p.add_argument("--id-column", default="id", help="unit id column (default: id)")
    p.add_argument("--covariates", default="", help="comma-separated covariate columns")
    p.add_argument("--ignore", default="", help="comma-separated columns to drop")
    p.add_argument("--mice-iterations", type=int, default=10)
    p.add_argument("--corr-threshold", type=float, default=0.7)
    p.add_argument("--seed", type=int, required=seed_required, default=None if seed_required else 0)
    p.add_argument("--out", default=None, help=f"output directory (or ${OUTPUT_DIR_ENV})")


def _add_fit_flags(p):
    p.add_argument("-k", "--latent-dim", dest="k", type=int, default=None)
    p.add_argument("--holdout-rate", type=float, default=0.2)


def _add_check_flags(p):
    p.add_argument("--replications", type=int, default=100)
    p.add_argument("--mc-samples", type=int, default=100)
    p.add_argument("--check-threshold", type=float, default=0.1)
    p.add_argument("--check-method", choices=("mean", "pooled"), default="mean")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multicause",
        description="causal effect estimation for multiple correlated causes",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    p.add_argument("--scenario", choices=sorted(SCENARIOS), required=True)
    p.add_argument("--n", type=int, default=5000, help="number of units")
    p.add_argument("--missing-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help=f"output directory (or ${OUTPUT_DIR_ENV})")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("impute", help="fill missing cause entries")
    _add_io_flags(p, seed_required=False)
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("fit-ppca", help="fit the factor model over the causes")
    _add_io_flags(p)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_fit_ppca)

    p = sub.add_parser("check", help="score a saved model on held-out entries")
    _add_io_flags(p)
    p.add_argument("--model", required=True, help="model.json from fit-ppca")
    p.add_argument("--mask", required=True, help="holdout.json from fit-ppca")
    _add_check_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("effects", help="full causal effect pipeline")
    _add_io_flags(p, outcome_required=True)
    _add_fit_flags(p)
    _add_check_flags(p)
    p.add_argument("--force", action="store_true", help="proceed past a failed check")
    p.set_defaults(func=cmd_effects)

    p = sub.add_parser("mediate", help="total/direct effects through a mediator")
    _add_io_flags(p, outcome_required=True)
    _add_fit_flags(p)
    p.add_argument("--mediator", required=True, help="mediator column name")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_mediate)

    p = sub.add_parser("robustness", help="cause-addition sign-flip sweep")
    _add_io_flags(p, outcome_required=True)
    _add_fit_flags(p)
    p.add_argument("--mode", choices=("causal", "noncausal", "both"), default="both")
    p.add_argument("--order", default="", help="comma-separated cause addition order")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("compare-predictive", help="held-out MSE/MAE comparison")
    _add_io_flags(p, outcome_required=True)
    _add_fit_flags(p)
    p.add_argument("--split", type=float, default=0.2)
    p.set_defaults(func=cmd_compare_predictive)

    return parser


_HINTS = {
    ParseError: "fix the malformed row or pass the correct schema flags",
    ValidationError: "check the input schema and flag values",
    PredictiveCheckFailed: "the factor model cannot reproduce held-out causes;"
    " inspect the data, try another K, or rerun with --force",
    RankDeficiencyError: "drop or screen collinear cause columns before fitting",
    NumericError: "inspect the diagnostics; a different seed or smaller K may help",
}


def _hint(exc: MulticauseError) -> str:
    for klass in type(exc).__mro__:
        if klass in _HINTS:
            return _HINTS[klass]
    return "see the documentation for this subcommand"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PredictiveCheckFailed as exc:
        print(f"error [ppca] {exc}", file=sys.stderr)
        print(f"hint: {_hint(exc)}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error [{_stage[0]}] {exc}", file=sys.stderr)
        print(f"hint: {_hint(exc)}", file=sys.stderr)
        return 3
    except MulticauseError as exc:
        print(f"error [{_stage[0]}] {exc}", file=sys.stderr)
        print(f"hint: {_hint(exc)}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error [cli] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
