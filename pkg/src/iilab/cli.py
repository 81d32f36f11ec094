"""Command-line interface: train, eval, toy, dump-landscape, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig
from .errors import TrainingDiverged
from .spaces import CircularSpec, PolytopeSpec
from .training import dump_landscape, evaluate, run_iil, run_toy_trials, toy_metrics


def _load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
    overrides = {
        "method": args.method,
        "env": args.env,
        "seed": args.seed,
        "episodes": getattr(args, "episodes", None),
        "batch_size": getattr(args, "batch_size", None),
        "n_training": getattr(args, "n_training", None),
        "learning_rate": getattr(args, "learning_rate", None),
        "early_stop_success": getattr(args, "early_stop", None),
    }
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if getattr(args, "feedback", None) is not None:
        data.setdefault("teacher", {})
        if isinstance(data["teacher"], dict):
            data["teacher"]["feedback"] = args.feedback
    return ExperimentConfig.from_dict(data)


def cmd_train(args) -> int:
    config = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(config.to_json())
    from .agents import make_agent

    agent = make_agent(config)
    try:
        logbook = run_iil(config, out_dir=out, agent=agent)
    except TrainingDiverged as exc:
        print(f"training diverged; diagnostic checkpoint at {exc.checkpoint_path}", file=sys.stderr)
        return 2
    save_checkpoint(agent, out / "checkpoint.json", config=config)
    print(f"final success rate: {logbook.final_success:.3f} "
          f"({logbook.episodes_run} episodes, {logbook.total_steps} steps)")
    print(f"metrics written to {out}")
    return 0


def cmd_eval(args) -> int:
    agent = load_checkpoint(args.checkpoint)
    env = args.env
    if env is None:
        doc = json.loads(Path(args.checkpoint).read_text())
        env = doc.get("config", {}).get("env")
        if env is None:
            print("no environment recorded in the checkpoint; pass --env", file=sys.stderr)
            return 2
    sr = evaluate(agent, env, args.rollouts, np.random.default_rng(args.seed or 0))
    print(f"success rate: {sr:.3f} over {args.rollouts} rollouts")
    return 0


def cmd_toy(args) -> int:
    space = None
    if args.method == "circular":
        space = CircularSpec(eps=args.eps, temperature=args.temperature)
    elif args.method in ("polytope", "hinge"):
        space = PolytopeSpec(eps=args.eps, temperature=args.temperature)
    config = ExperimentConfig.from_dict(
        {
            "method": args.method,
            "env": "ToyConstant2D",
            "space": None,
            "hidden_widths": [64, 64, 32],
            "langevin": {"n_samples": 48, "n_steps": 12},
            "batch_size": 8,
            "penalty_max_samples": 8,
            "seed": args.seed or 0,
        }
    )
    if space is not None:
        config.space = space
    agents, datasets = run_toy_trials(
        config, n_trials=args.trials, n_steps=args.steps, seed=args.seed or 0
    )
    models = [a.model_ for a in agents if hasattr(a, "model_")]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if models:
        metrics = toy_metrics(models, datasets)
        (out / "toy_metrics.json").write_text(json.dumps(metrics, indent=2))
        for i, model in enumerate(models):
            dump_landscape(model, np.zeros(1), out / f"landscape_trial{i}.csv")
        print(json.dumps({k: metrics[k] for k in
                          ("mse_to_optimal", "mse_to_human", "cross_trial_variance")}, indent=2))
    else:
        print("explicit-policy methods have no energy landscape; trained only")
    for i, agent in enumerate(agents):
        save_checkpoint(agent, out / f"trial{i}.ckpt.json")
    print(f"artifacts written to {out}")
    return 0


def cmd_dump_landscape(args) -> int:
    agent = load_checkpoint(args.checkpoint)
    if not hasattr(agent, "model_"):
        print("checkpoint holds an explicit policy; no energy landscape", file=sys.stderr)
        return 2
    state = np.asarray(json.loads(args.state), dtype=np.float64)
    dump_landscape(agent.model_, state, args.out, resolution=args.resolution)
    print(f"landscape written to {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .server import run_teach_server

    config = _load_config(args)
    run_teach_server(config, port=args.port, tick_hz=args.tick_hz)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iilab",
        description="Interactive imitation learning from corrective feedback",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_training=True):
        p.add_argument("--config", help="JSON config file (flags override)")
        p.add_argument("--method", help="training method")
        p.add_argument("--env", help="environment name")
        p.add_argument("--seed", type=int, help="master seed")
        if with_training:
            p.add_argument("--episodes", type=int)
            p.add_argument("--batch-size", dest="batch_size", type=int)
            p.add_argument("--n-training", dest="n_training", type=int)
            p.add_argument("--learning-rate", dest="learning_rate", type=float)
            p.add_argument("--feedback", help="simulated teacher feedback kind")
            p.add_argument("--early-stop", dest="early_stop", type=float)

    p_train = sub.add_parser("train", help="run the interactive training loop")
    common(p_train)
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--env", help="environment (defaults to the checkpoint's)")
    p_eval.add_argument("--rollouts", type=int, default=10)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.set_defaults(func=cmd_eval)

    p_toy = sub.add_parser("toy", help="offline single-state overfitting study")
    p_toy.add_argument("--method", default="circular")
    p_toy.add_argument("--trials", type=int, default=10)
    p_toy.add_argument("--steps", type=int, default=1000)
    p_toy.add_argument("--eps", type=float, default=0.5)
    p_toy.add_argument("--temperature", type=float, default=0.1)
    p_toy.add_argument("--seed", type=int, default=0)
    p_toy.add_argument("--out", required=True)
    p_toy.set_defaults(func=cmd_toy)

    p_dump = sub.add_parser("dump-landscape", help="export an energy grid as CSV")
    p_dump.add_argument("--checkpoint", required=True)
    p_dump.add_argument("--state", default="[0.0]", help="JSON state vector")
    p_dump.add_argument("--resolution", type=int, default=101)
    p_dump.add_argument("--out", required=True)
    p_dump.set_defaults(func=cmd_dump_landscape)

    p_serve = sub.add_parser("serve", help="run the live teaching service")
    common(p_serve)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--tick-hz", dest="tick_hz", type=float, default=10.0)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
