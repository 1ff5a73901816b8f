"""Command-line entry point: ``decopt {run,sweep,spectrum,solve-ref,plot}``.

Relative output directories are resolved under ``$DECOPT_OUTPUT_ROOT`` when
it is set. Failures print one ``error: kind=... message=...`` line to
stderr and exit with status 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import load_config
from .errors import DecoptError
from .graph import build_mixing_matrix, parse_graph_spec
from .harness import SWEEP_AXES, build_problem, manifest_text, run_experiment, sweep
from .objective import solve_reference
from .plot import PLOT_AXES, plot_directory

OUTPUT_ROOT_ENV = "DECOPT_OUTPUT_ROOT"


def resolve_output(path) -> Path:
    path = Path(path)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not path.is_absolute():
        return Path(root) / path
    return path


def _parse_values(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(int(tok))
        except ValueError:
            out.append(float(tok))
    return out


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = resolve_output(args.output or cfg["output"])
    res = run_experiment(cfg, out)
    for name, info in res.manifest["methods"].items():
        print(f"{name}: status={info['status']} iterations_to_eps={info['iterations_to_eps']} final_gap={info['final_gap']}")
    print(f"wrote {out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out = resolve_output(args.output or cfg["output"])
    values = _parse_values(args.values)
    rows = sweep(cfg, args.axis, values, out)
    for r in rows:
        print(f"{r['axis']}={r['value']} {r['method']}: gap={r['gap']:.4f} status={r['status']} iterations_to_eps={r['iterations_to_eps']} comm_to_eps={r['comm_to_eps']}")
    print(f"wrote {out / 'summary.csv'}")
    return 0


def cmd_spectrum(args) -> int:
    g = parse_graph_spec(args.graph)
    w = build_mixing_matrix(g)
    info = {"m": g.m, "edges": g.num_edges, "lambda2": w.lambda2, "spectral_gap": w.gap}
    if args.json:
        print(json.dumps(info, sort_keys=True))
    else:
        for k, v in info.items():
            print(f"{k}: {v}")
    return 0


def cmd_solve_ref(args) -> int:
    cfg = load_config(args.config)
    problem = build_problem(cfg)
    ref = solve_reference(problem, cfg["reference.tol"], cfg["reference.max_iter"])
    info = {
        "constants": problem.constants.as_dict(),
        "f_star": ref.f_star,
        "grad_norm": ref.grad_norm,
        "iterations": ref.iterations,
    }
    print(manifest_text(info), end="")
    return 0


def cmd_plot(args) -> int:
    directory = resolve_output(args.directory)
    axes = PLOT_AXES if args.axis == "both" else (args.axis,)
    for axis in axes:
        path = plot_directory(directory, axis)
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decopt", description="Decentralized optimization experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every configured method and write traces")
    p.add_argument("config")
    p.add_argument("--output", help="output directory (default: the config's 'output' key)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="repeat an experiment along one axis")
    p.add_argument("config")
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma-separated values, e.g. 1,2,4,8")
    p.add_argument("--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", help="spectral gap of a graph")
    p.add_argument("graph", help="er:m=100,p=0.5,seed=0 | ring:m=20 | edge-list file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("solve-ref", help="solve the centralized problem of a config")
    p.add_argument("config")
    p.set_defaults(func=cmd_solve_ref)

    p = sub.add_parser("plot", help="plot the traces in a run directory")
    p.add_argument("directory")
    p.add_argument("--axis", choices=PLOT_AXES + ("both",), default="both")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DecoptError, ValueError, OSError) as exc:
        message = str(exc).replace('"', "'")
        print(f'error: kind={type(exc).__name__} command={args.command} message="{message}"', file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
