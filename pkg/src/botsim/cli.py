"""``botsim`` command line: ingest, stats, simulate, export, detect, perturb, llm-eval, validate.

Every command takes ``--config`` (JSON), ``--seed`` and ``--out``; flags win
over file values. Exit codes: 0 ok, 2 configuration, 3 integrity, 4 backend.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from botsim.agent.backend import RemoteBackend, StubBackend
from botsim.agent.planner import GoalTask
from botsim.agent.runner import SimConfig, run_simulation
from botsim.camouflage import compute_corpus_stats
from botsim.dataset import DEFAULT_DIM, ExportConfig, export_dataset, validate_dataset
from botsim.detect.data import GraphDataset, TrainConfig
from botsim.detect.experiments import DEFAULT_PS, perturbation_sweep, run_seeds
from botsim.detect.llm_eval import llm_text_eval
from botsim.env import IngestConfig, ingest_human_corpus, load_snapshot, parse_time
from botsim.errors import BotSimError, ConfigError, IntegrityError
from botsim.synth import toy_corpus_dir

log = logging.getLogger("botsim")

COMMANDS = ("ingest", "stats", "simulate", "export", "detect", "perturb", "llm-eval", "validate")
RUN_MANIFEST = "run_manifest.json"


def _digest(obj: Any) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()


def _file_digests(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file() and p.name != RUN_MANIFEST
    }


def _write_json(path: Path, obj: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_config(args: argparse.Namespace) -> dict[str, Any]:
    cfg: dict[str, Any] = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        try:
            cfg = json.loads(path.read_text())
        except ValueError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(cfg, dict):
            raise ConfigError(f"{path}: top level must be an object")
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["output_dir"] = args.out
    if getattr(args, "backend_url", None):
        cfg.setdefault("backend", {})
        cfg["backend"] = {**cfg["backend"], "kind": "remote", "url": args.backend_url}
    if "seed" not in cfg:
        raise ConfigError("a seed is required (--seed or \"seed\" in the config)")
    if not isinstance(cfg["seed"], int):
        raise ConfigError("seed must be an integer")
    if "output_dir" not in cfg:
        raise ConfigError("an output directory is required (--out or \"output_dir\")")
    return cfg


def _existing(path: str | None, what: str) -> Path:
    if not path:
        raise ConfigError(f"missing {what} path")
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{what} {p} does not exist")
    return p


def make_backend(cfg: dict[str, Any]):
    b = cfg.get("backend", {"kind": "stub"})
    kind = b.get("kind", "stub")
    if kind == "stub":
        return StubBackend(continue_prob=float(b.get("continue_prob", 0.1)))
    if kind == "remote":
        if not b.get("url"):
            raise ConfigError("remote backend needs a url")
        return RemoteBackend(b["url"], timeout=float(b.get("timeout", 30.0)), retries=int(b.get("retries", 3)))
    raise ConfigError(f"unknown backend kind {kind!r}")


def _ingest_config(cfg: dict[str, Any]) -> IngestConfig:
    ic = IngestConfig()
    if "subreddits" in cfg:
        ic.subreddits = tuple(cfg["subreddits"])
    if "time_window" in cfg:
        lo, hi = cfg["time_window"]
        ic.time_window = (parse_time(lo) if isinstance(lo, str) else int(lo),
                          parse_time(hi) if isinstance(hi, str) else int(hi))
    return ic


def _train_config(cfg: dict[str, Any], model: str) -> TrainConfig:
    d = cfg.get("detect", {})
    per_model = d.get(model, {})
    shared = {k: v for k, v in d.items() if not isinstance(v, dict)}
    return TrainConfig.tuned(model, **{**shared, **per_model})


# commands --------------------------------------------------------------------


def cmd_ingest(cfg: dict[str, Any], args: argparse.Namespace, out: Path) -> dict[str, Any]:
    corpus = args.corpus or cfg.get("corpus_dir")
    src = toy_corpus_dir() if corpus == "toy" else _existing(corpus, "corpus directory")
    env = ingest_human_corpus(src, _ingest_config(cfg))
    env.save(out, cfg["seed"])
    return {"corpus": str(corpus), "events": len(env), "accounts": len(env.accounts)}


def cmd_stats(cfg: dict[str, Any], args: argparse.Namespace, out: Path) -> dict[str, Any]:
    env = load_snapshot(_existing(args.snapshot or cfg.get("snapshot_dir"), "snapshot"))
    stats = compute_corpus_stats(env)
    _write_json(out / "stats.json", stats.to_dict())
    return {"humans": stats.n_humans}


def cmd_simulate(cfg: dict[str, Any], args: argparse.Namespace, out: Path) -> dict[str, Any]:
    env = load_snapshot(_existing(args.snapshot or cfg.get("snapshot_dir"), "snapshot"))
    if "goal" not in cfg:
        raise ConfigError("simulate needs a \"goal\" in the config")
    try:
        goal = GoalTask.from_dict(cfg["goal"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad goal: {exc}") from None
    sim = SimConfig.from_dict({**cfg.get("sim", {}), **{f"feed_{k}": v for k, v in cfg.get("feed", {}).items()}})
    result = run_simulation(env, goal, make_backend(cfg), cfg["seed"], sim)
    result.env.save(out, cfg["seed"])
    result.write_log(out / "run_log.jsonl")
    applied = sum(1 for r in result.log if r["verdict"] == "action")
    return {"bots": len(result.bots), "plan_items": len(result.plan), "applied": applied}


def cmd_export(cfg: dict[str, Any], args: argparse.Namespace, out: Path) -> dict[str, Any]:
    env = load_snapshot(_existing(args.snapshot or cfg.get("snapshot_dir"), "snapshot"))
    emb = cfg.get("embedder", {"kind": "hashing", "dim": DEFAULT_DIM})
    if emb.get("kind", "hashing") != "hashing":
        raise ConfigError(f"unknown embedder {emb.get('kind')!r}")
    export_dataset(env, ExportConfig(out, cfg["seed"], int(emb.get("dim", DEFAULT_DIM))))
    return {"nodes": len(env.accounts)}


def cmd_detect(cfg: dict[str, Any], args: argparse.Namespace, out: Path) -> dict[str, Any]:
    ds = GraphDataset.from_directory(_existing(args.dataset or cfg.get("dataset_dir"), "dataset"))
    models = ["logreg", "rgcn"] if args.model == "both" else [args.model]
    reports = {}
    for m in models:
        tc = _train_config(cfg, m)
        reports[m] = {"config": tc.to_dict(), "report": run_seeds(ds, tc, m).to_dict()}
    _write_json(out / "reports.json", reports)
    return {m: round(r["report"]["accuracy"], 4) for m, r in reports.items()}


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --p-grid {text!r}") from None


def _parse_seeds(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --seeds {text!r}") from None


def cmd_perturb(cfg: dict[str, Any], args: argparse.Namespace, out: Path) -> dict[str, Any]:
    ds = GraphDataset.from_directory(_existing(args.dataset or cfg.get("dataset_dir"), "dataset"))
    ps = _parse_grid(args.p_grid) if args.p_grid else list(cfg.get("p_grid", DEFAULT_PS))
    tc = _train_config(cfg, "rgcn")
    if args.seeds:
        tc.seeds = tuple(_parse_seeds(args.seeds))
    if any(not 0 <= p <= 1 for p in ps) or not ps:
        raise ConfigError("p grid must be non-empty with values in [0, 1]")
    res = perturbation_sweep(ds, ps, tc)
    res.write(out)
    return {"rows": len(res.rows)}


def cmd_llm_eval(cfg: dict[str, Any], args: argparse.Namespace, out: Path) -> dict[str, Any]:
    from botsim.dataset import user_texts

    env = load_snapshot(_existing(args.snapshot or cfg.get("snapshot_dir"), "snapshot"))
    shots = args.shots if args.shots is not None else int(cfg.get("shots", 0))
    users = cfg.get("eval_users")
    if users is None:
        # every bot plus an equal number of humans, both with text
        bots = [u.id for u in env.bots() if user_texts(env, u.id)]
        humans = [u.id for u in env.humans() if user_texts(env, u.id)]
        need_h = {0: 0, 2: 1, 5: 3}.get(shots, 0)
        need_b = {0: 0, 2: 1, 5: 2}.get(shots, 0)
        k = min(len(bots) - need_b, len(humans) - need_h)
        if k < 1:
            raise ConfigError("not enough labelled users with text for the requested shots")
        users = sorted(bots)[:k] + sorted(humans)[:k]
    res = llm_text_eval(make_backend(cfg), env, users, shots, cfg["seed"])
    _write_json(out / "llm_eval.json", {
        "shots": shots, "report": res.report.to_dict(), "predictions": res.predictions, "abstained": res.abstained,
    })
    return {"accuracy": res.report.accuracy, "f1": res.report.f1}


def cmd_validate(cfg: dict[str, Any], args: argparse.Namespace, out: Path) -> dict[str, Any]:
    target = _existing(args.target, "dataset")
    checks = validate_dataset(target)
    _write_json(out / "validation.json", checks)
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        raise IntegrityError(f"{target}: failed checks: {', '.join(failed)}")
    return {"checks": len(checks)}


HANDLERS = {
    "ingest": cmd_ingest, "stats": cmd_stats, "simulate": cmd_simulate, "export": cmd_export,
    "detect": cmd_detect, "perturb": cmd_perturb, "llm-eval": cmd_llm_eval, "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed (required here or in the config)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--error-json", action="store_true", help="print failures as JSON on stderr")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="botsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("ingest", parents=[common], help="load a human corpus into a snapshot")
    p.add_argument("--corpus", help="corpus directory, or 'toy' for the bundled corpus")
    for name, helptext in (("stats", "corpus statistics"), ("simulate", "run the bots"),
                           ("export", "write the detection dataset")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--snapshot", help="snapshot directory")
        if name == "simulate":
            p.add_argument("--backend-url", help="use the remote decision backend at this URL")
    p = sub.add_parser("detect", parents=[common], help="train and evaluate detectors")
    p.add_argument("--dataset")
    p.add_argument("--model", choices=("logreg", "rgcn", "both"), default="both")
    p = sub.add_parser("perturb", parents=[common], help="edge-perturbation sweep")
    p.add_argument("--dataset")
    p.add_argument("--p-grid", help="comma-separated fractions, e.g. 0,0.5,1.0")
    p.add_argument("--seeds", help="'0..4' or '0,1,2'")
    p = sub.add_parser("llm-eval", parents=[common], help="few-shot text-only detection")
    p.add_argument("--snapshot")
    p.add_argument("--shots", type=int, choices=(0, 2, 5))
    p.add_argument("--backend-url", help="remote decision backend URL")
    p = sub.add_parser("validate", parents=[common], help="check a dataset directory")
    p.add_argument("target", help="dataset directory")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "validate" and args.seed is None and not args.config:
            # dataset directories are self-describing; no seed needed to check one
            args.seed = 0
        if args.command == "validate" and args.out is None:
            # never write into the directory being checked
            args.out = str(Path(args.target).with_name(Path(args.target).name + ".validate"))
        cfg = load_config(args)
        out = Path(cfg["output_dir"])
        summary = HANDLERS[args.command](cfg, args, out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / RUN_MANIFEST, {
            "command": args.command,
            "seed": cfg["seed"],
            "config_digest": _digest({k: v for k, v in cfg.items() if k != "output_dir"}),
            "summary": summary,
            "files": _file_digests(out),
        })
    except BotSimError as exc:
        _report(args, exc, exc.exit_code)
        return exc.exit_code
    except OSError as exc:
        _report(args, exc, 3)
        return 3
    print(json.dumps(summary, sort_keys=True))
    return 0


def _report(args: argparse.Namespace, exc: Exception, code: int) -> None:
    if args.error_json:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    else:
        print(f"botsim {args.command}: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
