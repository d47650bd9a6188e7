"""Residual ablation on random trees, driven through the CLI.

Trains the full and the residual-ablated denoiser at each depth, samples
``--n-graphs`` trees per seed, and collects validity, final-layer mu_v, the
bound report and the depth-sweep ranks into ``<out>/summary.json``. Every
stage is resumable: rerunning skips finished runs and sample folders.

    python benchmarks/desk_ablation.py --out results/desk
"""
from __future__ import annotations

import argparse
import csv
import json
import time
from pathlib import Path

import numpy as np
import yaml

from gengnn import diagnostics as dg
from gengnn.cli import main as cli, read_step_csv
from gengnn.config import denoiser_config, load_config
from gengnn.denoiser import collate
from gengnn.diffusion import load_model
from gengnn.graph import read_jsonl

MAIN_DEPTH = 8


def _config(args, depth: int, residual: bool) -> dict:
    return {
        "dataset": "tree",
        "model": {"n_layers": depth, "dropout": 0.0, "disable": [] if residual else ["residual"]},
        "diffusion": {"steps": args.steps},
        "train": {"epochs": args.epochs, "batch_size": args.batch, "lr": args.lr, "clip_norm": args.clip, "seed": 0},
        "sample": {"n_graphs": args.n_graphs, "batch_size": args.n_graphs, "snapshot_chains": 0},
    }


def _call(argv: list[str]) -> None:
    code = cli(argv)
    if code != 0:
        raise SystemExit(f"command failed ({code}): gengnn {' '.join(argv)}")


def _summary_rows(path: Path) -> dict:
    with path.open() as fh:
        rows = {r["fold"]: r for r in csv.DictReader(fh)}
    return rows


def _last_layer_ranks(steps: list[dg.StepDiagnostics]) -> tuple[float, float]:
    last = max(s.step for s in steps)
    final = [s for s in steps if s.step == last]
    return float(np.nanmean([s.erank[-1] for s in final])), float(np.nanmean([s.numrank[-1] for s in final]))


def _feature_mu(run: Path, seed: int) -> float:
    """Mean final-layer mu_v with v the top left singular vector of X_out.

    A network with per-node normalization collapses to identical rows, which
    the structural v = sqrt(deg + 1) direction does not register.
    """
    cfg = load_config(run / "config.yaml")
    model, _ = load_model(run / "checkpoints" / "last.json", denoiser_config(cfg, 1, 2))
    model.eval()
    vals = []
    for g in read_jsonl(run / "samples" / f"seed{seed}" / "fold_0.jsonl"):
        X = model(collate([g]), np.zeros(1), trace=True)[2]["X_out"][0]
        vals.append(dg.mu_v(X, dg.dominant_vector(g, feature=X)))
    return float(np.mean(vals))


def run_config(args, out: Path, data: Path, depth: int, residual: bool, seeds: list[int]) -> dict:
    name = f"L{depth}_{'full' if residual else 'noresid'}"
    run = out / name
    cfg_path = out / f"{name}.yaml"
    cfg_path.write_text(yaml.safe_dump(_config(args, depth, residual), sort_keys=True))
    record = run / "run.json"
    if not record.exists() or json.loads(record.read_text())["status"] != "complete":
        t0 = time.time()
        _call(["train", "--config", str(cfg_path), "--data", str(data), "--out", str(run)])
        print(f"{name}: trained in {time.time() - t0:.0f}s", flush=True)
    result = {"depth": depth, "residual": residual, "seeds": {}}
    for seed in seeds:
        summary = run / "samples" / f"seed{seed}" / "summary.csv"
        snap = seed == seeds[0] and args.snapshots > 0
        if not summary.exists():
            t0 = time.time()
            argv = ["sample", str(run), "--seed", str(seed), "--n-graphs", str(args.n_graphs), "--checkpoint", "last"]
            if snap:
                argv += ["--snapshots", str(args.snapshots)]
            _call(argv)
            print(f"{name}: sampled seed {seed} in {time.time() - t0:.0f}s", flush=True)
        row = _summary_rows(summary)["0"]
        result["seeds"][seed] = {
            "validity": float(row["validity"]),
            "final_mu_v": float(row["final_mu_v"]),
            "final_mu_v_feature": _feature_mu(run, seed),
        }
    result["validity"] = float(np.mean([s["validity"] for s in result["seeds"].values()]))
    result["final_mu_v"] = float(np.mean([s["final_mu_v"] for s in result["seeds"].values()]))
    result["final_mu_v_feature"] = float(np.mean([s["final_mu_v_feature"] for s in result["seeds"].values()]))
    diag = run / "diagnostics" / f"seed{seeds[0]}" / "fold_0_steps.csv"
    if diag.exists():
        steps = read_step_csv(diag)
        rep = dg.check_theorem(steps, residual=residual)
        result["bound"] = rep.summary()
        result["erank"], result["numrank"] = _last_layer_ranks(steps)
        result["diagnostics_csv"] = str(diag.relative_to(out))
    losses = [float(r["loss"]) for r in csv.DictReader((run / "loss.csv").open())]
    result["final_loss"] = float(np.mean(losses[-10:]))
    return result


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/desk")
    ap.add_argument("--epochs", type=int, default=300)
    ap.add_argument("--lr", type=float, default=1e-3)
    ap.add_argument("--batch", type=int, default=32)
    ap.add_argument("--clip", type=float, default=5.0)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--n-graphs", type=int, default=100)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--depths", type=int, nargs="+", default=[1, 4, MAIN_DEPTH])
    ap.add_argument("--sweep-seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--snapshots", type=int, default=4)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = out / "trees.jsonl"
    if not data.exists():
        _call(["gen", "--kind", "tree", "--count", "256", "--nodes", "16", "--seed", "0", "--out", str(data)])

    results = {}
    # the main comparison first, so a partial run still answers the headline question
    depths = [MAIN_DEPTH] + [d for d in args.depths if d != MAIN_DEPTH]
    for depth in depths:
        for residual in (True, False):
            seeds = args.seeds if depth == MAIN_DEPTH else args.sweep_seeds
            res = run_config(args, out, data, depth, residual, seeds)
            results[f"L{depth}_{'full' if residual else 'noresid'}"] = res
            (out / "summary.json").write_text(json.dumps(_collect(args, results), indent=2, sort_keys=True) + "\n")
    print(json.dumps(_collect(args, results)["headline"], indent=2))


def _collect(args, results: dict) -> dict:
    doc = {"settings": vars(args), "configs": results, "headline": {}}
    full, abl = results.get(f"L{MAIN_DEPTH}_full"), results.get(f"L{MAIN_DEPTH}_noresid")
    if full and abl:
        doc["headline"] = {
            "validity_full": full["validity"],
            "validity_ablated": abl["validity"],
            "final_mu_v_full": full["final_mu_v"],
            "final_mu_v_ablated": abl["final_mu_v"],
            "final_mu_v_feature_full": full["final_mu_v_feature"],
            "final_mu_v_feature_ablated": abl["final_mu_v_feature"],
        }
    sweep = {}
    for label in ("full", "noresid"):
        runs = [results.get(f"L{d}_{label}") for d in args.depths]
        if all(runs):
            cs = dg.correlation_study(
                [r["depth"] for r in runs],
                [r["validity"] for r in runs],
                [r.get("erank", float("nan")) for r in runs],
                [r.get("numrank", float("nan")) for r in runs],
            )
            sweep[label] = cs.__dict__
    doc["depth_sweep"] = sweep
    return doc


if __name__ == "__main__":
    main()
