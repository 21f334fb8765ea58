"""Command-line entry point: ``durmlab {train,sweep,theory,flatness}``.

Exit codes: 0 success, 1 a verification reported FAIL, 2 configuration or
input error, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .data import DataError, Dataset, gen_blobs, load_csv, make_longtail, train_test_split
from .head import HeadConfig
from .manifest import RunManifest, digest_of, write_csv, write_json
from .model import load_checkpoint, save_checkpoint
from .training import TrainConfig, TrainingDiverged, evaluate, flatness_report, probe_params, train

SEED_ENV = "DURMLAB_SEED"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"environment variable {SEED_ENV}={raw!r} is not an integer") from None


# key -> (type, default). Keys double as config-file keys and argparse dests.
TRAIN_KEYS: dict[str, tuple[type, object]] = {
    "dataset": (str, "blobs"),
    "label_column": (str, "label"),
    "classes": (int, 3),
    "per_class": (int, 300),
    "dim": (int, 2),
    "separation": (float, 5.0),
    "spread": (float, 1.0),
    "data_seed": (int, None),
    "test_fraction": (float, 1.0 / 3.0),
    "longtail_ratio": (float, None),
    "dummy": (int, 2),
    "epochs": (int, 200),
    "batch_size": (int, 8),
    "learning_rate": (float, 0.01),
    "momentum": (float, 0.9),
    "weight_decay": (float, 5e-4),
    "hidden": (str, "32"),
    "seed": (int, None),
    "early_stop_patience": (int, None),
    "ema_decay": (float, None),
    "swa_start_epoch": (int, None),
    "mixup_alpha": (float, None),
}


def _coerce(key: str, value):
    typ = TRAIN_KEYS[key][0]
    if value is None:
        return None
    if key == "hidden" and isinstance(value, list):
        value = ",".join(str(v) for v in value)
    if typ is int and isinstance(value, bool) or typ is int and isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"config key {key!r}: expected an integer, got {value!r}")
    try:
        return typ(value)
    except (TypeError, ValueError):
        raise ConfigError(f"config key {key!r}: expected {typ.__name__}, got {value!r}") from None


def resolve_options(args: argparse.Namespace) -> dict:
    opts = {k: d for k, (_, d) in TRAIN_KEYS.items()}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file {path} not found")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"config file {path}: top level must be an object")
        for key, value in doc.items():
            if key not in TRAIN_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            opts[key] = _coerce(key, value)
    for key in TRAIN_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = _coerce(key, value)
    if opts["seed"] is None:
        opts["seed"] = default_seed()
    if opts["data_seed"] is None:
        opts["data_seed"] = opts["seed"]
    return opts


def _parse_hidden(raw: str) -> tuple[int, ...]:
    if raw.strip() in ("", "0", "none"):
        return ()
    try:
        widths = tuple(int(x) for x in raw.split(","))
    except ValueError:
        raise ConfigError(f"config key 'hidden': expected comma-separated integers, got {raw!r}") from None
    return widths


def load_dataset(opts: dict) -> tuple[Dataset, Dataset]:
    """Build the (train, test) pair described by ``opts``."""
    try:
        if opts["dataset"] == "blobs":
            full = gen_blobs(opts["data_seed"], opts["classes"], opts["per_class"], opts["dim"],
                             opts["separation"], opts["spread"])
        else:
            full = load_csv(opts["dataset"], opts["label_column"])
        train_ds, test_ds = train_test_split(full, opts["test_fraction"], opts["data_seed"], stratified=True)
        if opts["longtail_ratio"] is not None:
            train_ds = make_longtail(train_ds, opts["longtail_ratio"], opts["data_seed"])
    except DataError as exc:
        raise ConfigError(str(exc)) from None
    return train_ds, test_ds


def build_config(opts: dict, num_classes: int, dummy: int | None = None, seed: int | None = None) -> TrainConfig:
    field_keys = ("learning_rate", "momentum", "weight_decay", "epochs", "batch_size", "early_stop_patience",
                  "ema_decay", "swa_start_epoch", "mixup_alpha")
    try:
        head = HeadConfig(num_classes, opts["dummy"] if dummy is None else dummy)
    except ValueError as exc:
        raise ConfigError(f"config key 'dummy': {exc}") from None
    try:
        return TrainConfig(
            head=head,
            seed=opts["seed"] if seed is None else seed,
            hidden=_parse_hidden(opts["hidden"]),
            **{k: opts[k] for k in field_keys},
        )
    except ValueError as exc:
        raise ConfigError(f"config key {str(exc).split()[0]!r}: {exc}") from None


def _epoch_rows(result) -> list[list]:
    rows = []
    for e in range(result.epochs_completed):
        rows.append([
            e + 1,
            result.train_loss[e],
            result.train_acc[e],
            result.val_loss[e],
            result.val_acc[e],
            result.model_distance[e + 1],
            result.cumulative_grad_norm[e + 1],
        ])
    return rows


def _trace_rows(trace) -> tuple[list[str], list[list]]:
    K = trace.width
    header = ["epoch"]
    header += [f"grad_sum_{k}" for k in range(K)]
    header += [f"grad_var_{k}" for k in range(K)]
    header += [f"push_{k}" for k in range(K)]
    header += [f"pull_{k}" for k in range(K)]
    header += [f"dummy_fraction_{d}" for d in range(trace.num_dummy)]
    n_layers = len(trace.layer_grad_var[0]) if trace.layer_grad_var else 0
    header += [f"layer_grad_var_{i}" for i in range(n_layers)]
    rows = []
    for i, e in enumerate(trace.epochs):
        row = [e, *trace.grad_sum[i], *trace.grad_var[i], *trace.push[i], *trace.pull[i]]
        if trace.num_dummy:
            row += list(trace.dummy_fraction[i])
        if n_layers:
            row += trace.layer_grad_var[i]
        rows.append(row)
    return header, rows


def run_training(opts: dict, out_root: Path, probe: bool = True, delta: float = 0.05, trials: int = 20) -> dict:
    train_ds, test_ds = load_dataset(opts)
    config = build_config(opts, train_ds.num_classes)
    manifest = RunManifest(
        config={**config.as_dict(), "options": opts},
        dataset={"train": train_ds.provenance, "test": test_ds.provenance},
    )
    digest = manifest.digest
    run_dir = out_root / digest[:12]
    run_dir.mkdir(parents=True, exist_ok=True)

    result = train(train_ds, config, test_ds)
    head = config.head
    ev_train = evaluate(result.final_params, train_ds, head)
    ev_test = evaluate(result.final_params, test_ds, head)
    ev_best = evaluate(result.best_params, test_ds, head)
    summary = {
        "mode": result.mode,
        "num_classes": head.num_classes,
        "num_dummy": head.num_dummy,
        "momentum": config.momentum,
        "weight_decay": config.weight_decay,
        "epochs_completed": result.epochs_completed,
        "best_epoch": result.best_epoch,
        "final_train_accuracy": ev_train["accuracy"],
        "final_test_accuracy": ev_test["accuracy"],
        "best_test_accuracy": ev_best["accuracy"],
        "dummy_predictions_train": ev_train["dummy_predictions"],
        "dummy_predictions_test": ev_test["dummy_predictions"],
        "series": result.series_as_dict(),
    }
    write_json(run_dir / "manifest.json", manifest.as_dict())
    write_json(run_dir / "result.json", summary, digest)
    write_json(run_dir / "trace.json", result.trace.as_dict(), digest)
    if probe:
        report = flatness_report(result, train_ds, delta=delta, trials=trials, seed=config.seed)
        write_json(run_dir / "flatness.json", report.as_dict(), digest)
    write_csv(run_dir / "epochs.csv",
              ["epoch", "train_loss", "train_acc", "val_loss", "val_acc", "model_distance", "cumulative_grad_norm"],
              _epoch_rows(result), digest)
    header, rows = _trace_rows(result.trace)
    write_csv(run_dir / "trace.csv", header, rows, digest)
    meta = {"num_classes": head.num_classes, "num_dummy": head.num_dummy, "manifest_digest": digest}
    save_checkpoint(run_dir / "checkpoint_final.json", result.final_params, **meta)
    save_checkpoint(run_dir / "checkpoint_best.json", result.best_params, best_epoch=result.best_epoch, **meta)
    summary["run_dir"] = str(run_dir)
    summary["digest"] = digest
    return summary


def cmd_train(args) -> int:
    opts = resolve_options(args)
    summary = run_training(opts, Path(args.out), probe=not args.no_flatness, delta=args.delta, trials=args.trials)
    print(f"mode={summary['mode']} num_dummy={summary['num_dummy']} epochs={summary['epochs_completed']}")
    print(f"final_test_accuracy={summary['final_test_accuracy']:.4f} "
          f"best_test_accuracy={summary['best_test_accuracy']:.4f} (epoch {summary['best_epoch']})")
    print(f"dummy_predictions train={summary['dummy_predictions_train']} test={summary['dummy_predictions_test']}")
    print(f"artifacts={summary['run_dir']}")
    return EXIT_OK


def parse_range(raw: str) -> list[int]:
    """``"1..5"``, ``"0,2,4"`` or a mix such as ``"0,3..5"``."""
    values: set[int] = set()
    try:
        for part in raw.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                values.update(range(int(lo), int(hi) + 1))
            elif part:
                values.add(int(part))
    except ValueError:
        raise ConfigError(f"invalid dummy range {raw!r}") from None
    if not values:
        raise ConfigError(f"empty dummy range {raw!r}")
    if min(values) < 0 or max(values) > 64:
        raise ConfigError("dummy range must lie within [0, 64]")
    return sorted(values)


def _sweep_cell(opts: dict, dummy: int, seed: int) -> dict:
    cell_opts = {**opts, "dummy": dummy, "seed": seed, "data_seed": seed}
    train_ds, test_ds = load_dataset(cell_opts)
    config = build_config(cell_opts, train_ds.num_classes)
    try:
        result = train(train_ds, config, test_ds)
    except TrainingDiverged as exc:
        return {"dummy": dummy, "seed": seed, "status": "diverged", "detail": str(exc)}
    ev = evaluate(result.final_params, test_ds, config.head)
    return {
        "dummy": dummy,
        "seed": seed,
        "status": "ok",
        "test_accuracy": ev["accuracy"],
        "dummy_predictions": ev["dummy_predictions"],
        "best_epoch": result.best_epoch,
    }


def summarize_sweep(cells: list[dict], dummies: list[int]) -> tuple[list[str], list[list], int | None]:
    """Per-C_d mean/std accuracy and, when C_d > 0 values exist, win counts vs C_d = 0."""
    baseline = {c["seed"]: c["test_accuracy"] for c in cells if c["dummy"] == 0 and c["status"] == "ok"}
    with_wins = any(d > 0 for d in dummies)
    header = ["dummy", "cells", "ok", "mean_accuracy", "std_accuracy"] + (["wins"] if with_wins else [])
    rows, total = [], 0
    for d in sorted({0, *dummies}):
        accs = [c["test_accuracy"] for c in cells if c["dummy"] == d and c["status"] == "ok"]
        n_cells = sum(1 for c in cells if c["dummy"] == d)
        mean = statistics.fmean(accs) if accs else float("nan")
        std = statistics.stdev(accs) if len(accs) > 1 else 0.0
        row = [d, n_cells, len(accs), mean, std]
        if with_wins:
            if d == 0:
                row.append("")
            else:
                wins = sum(
                    1 for c in cells
                    if c["dummy"] == d and c["status"] == "ok" and c["seed"] in baseline
                    and c["test_accuracy"] > baseline[c["seed"]]
                )
                total += wins
                row.append(wins)
        rows.append(row)
    return header, rows, (total if with_wins else None)


def cmd_sweep(args) -> int:
    opts = resolve_options(args)
    dummies = parse_range(args.dummy_range)
    if args.repeats < 1:
        raise ConfigError("repeats must be >= 1")
    # validate once up front so config errors surface before any job runs
    train_ds, _ = load_dataset(opts)
    build_config(opts, train_ds.num_classes)

    seeds = [opts["seed"] + r for r in range(args.repeats)]
    grid = [(d, s) for d in sorted({0, *dummies}) for s in seeds]
    manifest = RunManifest(
        config={"options": opts, "dummy_range": dummies, "repeats": args.repeats},
        dataset={"base": train_ds.provenance},
        kind="sweep",
    )
    digest = manifest.digest
    out = Path(args.out) / f"sweep-{digest[:12]}"
    out.mkdir(parents=True, exist_ok=True)

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            cells = list(pool.map(_sweep_cell, [opts] * len(grid), *zip(*grid)))
    else:
        cells = [_sweep_cell(opts, d, s) for d, s in grid]

    cell_header = ["dummy", "seed", "status", "test_accuracy", "dummy_predictions", "best_epoch"]
    write_csv(out / "cells.csv", cell_header, [[c.get(k, "") for k in cell_header] for c in cells], digest)
    header, rows, total = summarize_sweep(cells, dummies)
    write_csv(out / "summary.csv", header, rows, digest)
    write_json(out / "manifest.json", manifest.as_dict())
    write_json(out / "summary.json", {"total_wins": total, "cells": cells}, digest)
    for row in rows:
        print("  ".join(str(v) if not isinstance(v, float) else f"{v:.4f}" for v in row))
    if total is not None:
        n_durm = sum(1 for c in cells if c["dummy"] > 0)
        print(f"DuRM beats ERM in {total} of {n_durm} cells")
    print(f"artifacts={out}")
    return EXIT_OK


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def cmd_theory(args) -> int:
    from .theory import (
        GradientMixture,
        OrderStatsSpec,
        durm_variance,
        gaussian_product_params,
        min_order_monte_carlo,
        min_order_quadrature,
        mixture_mean,
        normal_pdf,
        zero_mean_cross_moment,
    )

    try:
        if args.which == "variance":
            m = GradientMixture(args.alpha, args.mn, args.sn, args.mp, args.sp, args.sd)
            var_erm, var_durm = durm_variance(m)
            ok = abs((var_durm - var_erm) - args.sd**2) <= 1e-15 * max(1.0, var_durm) and var_durm >= var_erm
            cross = zero_mean_cross_moment(args.sn, args.sd) if args.sd > 0 else 0.0
            ok = ok and abs(cross) <= 1e-10
            print(f"var_erm {var_erm:.12g}")
            print(f"var_durm {var_durm:.12g}")
            print(f"difference {var_durm - var_erm:.12g} (sigma_d^2 = {args.sd**2:.12g})")
            print(f"mean {mixture_mean(m):.12g} (unchanged by sigma_d)")
            print(f"zero-mean cross moment {cross:.3e} (bound 1e-10)")
        elif args.which == "order-stats":
            a = OrderStatsSpec(args.mu, args.s1, args.T)
            b = OrderStatsSpec(args.mu, args.s2, args.T)
            q = min_order_quadrature(a, b)
            print(f"quadrature P(g1 >= g1_hat) = {q.value:.10f} (residual {q.residual:.2e})")
            if args.s1 == args.s2:
                ok = abs(q.value - 0.5) <= 1e-8
                print(f"symmetric case: |P - 0.5| = {abs(q.value - 0.5):.2e} (bound 1e-8)")
            elif args.s1 < args.s2:
                ok = q.value >= 0.5 - 1e-6
                print(f"excess over 0.5 = {q.value - 0.5:.10f} (must be >= -1e-6)")
            else:
                ok = True
                print("s1 > s2: no ordering claim, reported only")
            if args.mc:
                mc = min_order_monte_carlo(a, b, args.mc, args.seed, args.jobs)
                agree = abs(mc.value - q.value) <= 0.005
                print(f"monte_carlo P = {mc.value:.6f} (stderr {mc.stderr:.2e}, {mc.replicas} replicas)")
                print(f"|quadrature - monte_carlo| = {abs(mc.value - q.value):.2e} (bound 5e-3)")
                ok = ok and agree
        else:
            mean, var, scale = gaussian_product_params(args.mu1, args.s1, args.mu2, args.s2)
            xs = np.random.default_rng(args.seed).uniform(
                min(args.mu1, args.mu2) - 3 * max(args.s1, args.s2),
                max(args.mu1, args.mu2) + 3 * max(args.s1, args.s2),
                100,
            )
            direct = normal_pdf(xs, args.mu1, args.s1) * normal_pdf(xs, args.mu2, args.s2)
            rebuilt = scale * normal_pdf(xs, mean, math.sqrt(var))
            err = float(np.max(np.abs(direct - rebuilt)))
            ok = err <= 1e-10
            print(f"combined_mean {mean:.12g}")
            print(f"combined_var {var:.12g}")
            print(f"scale {scale:.12g}")
            print(f"max pointwise error over 100 points {err:.2e} (bound 1e-10)")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(_verdict(ok))
    return EXIT_OK if ok else EXIT_FAIL


def _parse_floats(raw: str, what: str) -> list[float]:
    try:
        vals = [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"invalid {what} list {raw!r}") from None
    if not vals:
        raise ConfigError(f"empty {what} list")
    return vals


def cmd_flatness(args) -> int:
    path = Path(args.checkpoint)
    if not path.is_file():
        raise ConfigError(f"checkpoint {path} not found")
    try:
        params, meta = load_checkpoint(path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"checkpoint {path}: {exc}") from None
    opts = resolve_options(args)
    train_ds, _ = load_dataset(opts)
    head = HeadConfig(int(meta.get("num_classes", train_ds.num_classes)), int(meta.get("num_dummy", 0)))
    if head.num_classes != train_ds.num_classes or head.width != params.output_width:
        raise ConfigError("checkpoint head does not match the dataset")
    if params.input_width != train_ds.dim:
        raise ConfigError(f"checkpoint expects {params.input_width} features, dataset has {train_ds.dim}")
    deltas = _parse_floats(args.deltas, "delta")
    if any(d <= 0 for d in deltas) or args.trials < 1 or args.iterations < 10:
        raise ConfigError("deltas must be positive, trials >= 1, iterations >= 10")
    rows, rho = [], None
    for delta in deltas:
        r, conv, eps, tau = probe_params(params, train_ds, head, delta, args.trials, args.probe_seed, args.iterations)
        rho = r
        rows.append([delta, eps, tau, r, r * delta**2 / 2.0, conv])
    digest = digest_of({
        "checkpoint_sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
        "dataset": train_ds.provenance,
        "deltas": deltas, "trials": args.trials, "probe_seed": args.probe_seed, "iterations": args.iterations,
    })
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = ["delta", "epsilon_hat", "tau", "rho", "quadratic_bound", "rho_converged"]
    write_csv(out / "flatness.csv", header, rows, digest)
    write_json(out / "flatness.json", {
        "checkpoint": str(path),
        "checkpoint_manifest_digest": meta.get("manifest_digest"),
        "rho": rho,
        "rows": [dict(zip(header, r)) for r in rows],
    }, digest)
    for r in rows:
        print(f"delta={r[0]:g} epsilon_hat={r[1]:.6e} tau={r[2]:.6e} rho={r[3]:.6e} bound={r[4]:.6e}")
    print(f"artifacts={out}")
    return EXIT_OK


def _add_train_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data")
    g.add_argument("--config", help="JSON file with option keys (flags override it)")
    g.add_argument("--dataset", help="'blobs' or a CSV path (default blobs)")
    g.add_argument("--label-column", dest="label_column")
    g.add_argument("--classes", type=int)
    g.add_argument("--per-class", dest="per_class", type=int)
    g.add_argument("--dim", type=int)
    g.add_argument("--separation", type=float)
    g.add_argument("--spread", type=float)
    g.add_argument("--data-seed", dest="data_seed", type=int)
    g.add_argument("--test-fraction", dest="test_fraction", type=float)
    g.add_argument("--longtail-ratio", dest="longtail_ratio", type=float)
    t = p.add_argument_group("training")
    t.add_argument("--dummy", type=int, help="number of dummy classes (0 = ERM)")
    t.add_argument("--epochs", type=int)
    t.add_argument("--batch-size", dest="batch_size", type=int)
    t.add_argument("--lr", dest="learning_rate", type=float)
    t.add_argument("--momentum", type=float)
    t.add_argument("--weight-decay", dest="weight_decay", type=float)
    t.add_argument("--hidden", help="comma-separated hidden widths, e.g. 32,32")
    t.add_argument("--seed", type=int, help=f"training seed (default ${SEED_ENV} or 0)")
    t.add_argument("--early-stop", dest="early_stop_patience", type=int, metavar="PATIENCE")
    t.add_argument("--ema", dest="ema_decay", type=float, metavar="DECAY")
    t.add_argument("--swa", dest="swa_start_epoch", type=int, metavar="START_EPOCH")
    t.add_argument("--mixup", dest="mixup_alpha", type=float, metavar="ALPHA")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="durmlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one ERM/DuRM model and write artifacts")
    _add_train_options(p)
    p.add_argument("--out", default="runs")
    p.add_argument("--delta", type=float, default=0.05, help="flatness probe radius")
    p.add_argument("--trials", type=int, default=20, help="flatness probe directions")
    p.add_argument("--no-flatness", action="store_true", help="skip the sharpness/flatness probes")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="accuracy across dummy-class counts and seeds")
    _add_train_options(p)
    p.add_argument("--dummy-range", default="1..40", help="e.g. 1..5 or 0,2,4 (default 1..40)")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="runs")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("theory", help="numerical checks of the variance and order-statistic results")
    tsub = p.add_subparsers(dest="which", required=True)
    v = tsub.add_parser("variance")
    v.add_argument("--alpha", type=float, default=0.5)
    v.add_argument("--sn", type=float, default=1.0)
    v.add_argument("--sp", type=float, default=1.0)
    v.add_argument("--sd", type=float, default=0.0)
    v.add_argument("--mn", type=float, default=0.0)
    v.add_argument("--mp", type=float, default=1.0)
    o = tsub.add_parser("order-stats")
    o.add_argument("--s1", type=float, required=True, help="ERM gradient std")
    o.add_argument("--s2", type=float, required=True, help="DuRM gradient std")
    o.add_argument("--mu", type=float, default=0.0)
    o.add_argument("--T", type=int, default=100)
    o.add_argument("--mc", type=int, default=0, help="Monte Carlo replicas (0 = skip)")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--jobs", type=int, default=1)
    g = tsub.add_parser("product")
    g.add_argument("--mu1", type=float, default=0.0)
    g.add_argument("--s1", type=float, default=1.0)
    g.add_argument("--mu2", type=float, default=1.0)
    g.add_argument("--s2", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("flatness", help="sharpness and flatness probes of a checkpoint")
    p.add_argument("--checkpoint", required=True)
    _add_train_options(p)
    p.add_argument("--deltas", default="0.01,0.05,0.1")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--probe-seed", dest="probe_seed", type=int, default=0)
    p.add_argument("--out", default="flatness")
    p.set_defaults(func=cmd_flatness)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDiverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
