"""Experiment orchestration: build network and problem, run methods, write traces.

Every method starts from the zero vector. Each run writes ``<method>.csv``
(the partial trace when a method diverges) and a ``manifest.json`` with
seeds, spectral data, problem constants, tuned hyperparameters and the
outcome of every method.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines
from .config import ExperimentConfig
from .data import load_libsvm, partition, synthetic_logistic
from .errors import ConfigError, DecoptError, DivergenceError
from .graph import TOPOLOGIES, Graph, build_mixing_matrix, generate_erdos_renyi, generate_named
from .mudag import MudagConfig, run_mudag, theoretical_K
from .objective import logistic_problem, nonconvex_sigmas, random_quadratic, solve_reference, uniform_sigmas
from .trace import first_reaching, write_trace_csv

SWEEP_AXES = ("K", "p", "sigma")
SUMMARY_COLUMNS = ("axis", "value", "method", "gap", "status", "iterations_to_eps", "comm_to_eps", "final_gap")
DEGRADED_FACTOR = 10.0


def build_graph(cfg: ExperimentConfig) -> Graph:
    topo, m = cfg["network.topology"], cfg["network.m"]
    if topo in ("er", "erdos_renyi"):
        return generate_erdos_renyi(m, cfg["network.p"], cfg["network.seed"])
    if topo in TOPOLOGIES:
        return generate_named(topo, m)
    path = Path(topo)
    if not path.exists():
        raise ConfigError(f"network.topology {topo!r} is neither a known topology nor an edge-list file")
    g = Graph.load(path)
    if g.m != m:
        raise ConfigError(f"edge list has {g.m} agents but network.m = {m}")
    return g


def sigma_schedule(cfg: ExperimentConfig) -> np.ndarray:
    m = cfg["network.m"]
    if cfg["problem.sigma.mode"] == "uniform":
        return uniform_sigmas(m, cfg["problem.sigma.value"])
    return nonconvex_sigmas(m, cfg["problem.sigma.a"], cfg["problem.sigma.b"])


def build_problem(cfg: ExperimentConfig):
    m, d, seed = cfg["network.m"], cfg["problem.d"], cfg["problem.seed"]
    if cfg["problem.family"] == "quadratic":
        return random_quadratic(m, d, cfg["problem.kappa"], seed, heterogeneity=cfg["problem.heterogeneity"])
    source = cfg["problem.data"]
    if source == "synthetic":
        shards = synthetic_logistic(m, cfg["problem.n_per_agent"], d, seed, label_noise=cfg["problem.label_noise"])
    else:
        data = load_libsvm(source, d_hint=d)
        shards = partition(data, m, cfg["problem.n_per_agent"], seed)
    return logistic_problem(shards, sigma_schedule(cfg))


@dataclass
class MethodOutcome:
    method: str
    status: str
    trace: list = field(default_factory=list)
    hyperparameters: dict = field(default_factory=dict)
    message: str = ""
    diverged_at: int | None = None

    def summary(self, eps_abs: float) -> dict:
        hit = first_reaching(self.trace, eps_abs) if self.trace else None
        return {
            "status": self.status,
            "hyperparameters": self.hyperparameters,
            "message": self.message,
            "diverged_at": self.diverged_at,
            "final_gap": self.trace[-1].f_gap if self.trace else None,
            "iterations_to_eps": hit.t if hit else None,
            "grad_to_eps": hit.grad_evals if hit else None,
            "comm_to_eps": hit.comm_rounds if hit else None,
        }


@dataclass
class ExperimentResult:
    manifest: dict
    outcomes: dict
    output_dir: Path | None


def _reach_key(trace, eps_abs, cost):
    hit = first_reaching(trace, eps_abs)
    if hit is not None:
        return (0, getattr(hit, cost), 0.0)
    return (1, 0, trace[-1].f_gap)


def _run_mudag(cfg, problem, w, x0, reference, eps_abs):
    K_spec = cfg["method.mudag.K"]
    form = cfg["method.mudag.form"]
    base = MudagConfig.from_problem(
        problem, K=0, T=cfg["T"], eta=cfg["method.mudag.eta"], alpha=cfg["method.mudag.alpha"]
    )
    hyper = {"eta": base.eta, "alpha": base.alpha, "form": form}
    if K_spec == "theoretical":
        sel = theoretical_K(problem, w, x0, reference, eta=base.eta, alpha=base.alpha)
        hyper.update(K_mode="theoretical", rho=sel.rho, theta=sel.theta, K_closed_form=sel.K_closed_form)
        K = sel.K
    elif K_spec == "auto":
        best, best_key = None, None
        for K in range(1, cfg["method.mudag.K_max"] + 1):
            trial = MudagConfig(base.eta, base.alpha, K, base.T, "auto-tuned")
            try:
                res = run_mudag(problem, w, trial, x0, reference, form)
            except DivergenceError:
                continue
            key = _reach_key(res.trace, eps_abs, "comm_rounds")
            if best_key is None or key < best_key:
                best, best_key = K, key
        if best is None:
            raise DivergenceError("mudag diverged for every K tried", t=0, method="mudag")
        K = best
        hyper["K_mode"] = "auto-tuned"
    else:
        K = K_spec
        hyper["K_mode"] = "manual"
    hyper["K"] = K
    run_cfg = MudagConfig(base.eta, base.alpha, K, base.T, hyper["K_mode"])
    return run_mudag(problem, w, run_cfg, x0, reference, form).trace, hyper


def _run_baseline(name, cfg, problem, w, x0, reference, eps):
    T = cfg["T"]
    if name == "agd":
        bc = baselines.BaselineConfig("agd", T, cfg["method.agd.step_size"], cfg["method.agd.momentum"])
        res = baselines.run_agd(problem, bc, x0, reference)
        return res.trace, {"step_size": res.step_size, "momentum": bc.momentum if bc.momentum is not None else baselines.agd_momentum(problem.constants.L, problem.constants.mu)}
    K_mix = cfg["method.dgd.K_mix"] if name == "dgd" else 1
    step = cfg[f"method.{name}.step_size"]
    hyper = {"K_mix": K_mix}
    if step == "tuned":
        grid = baselines.step_size_grid(problem.constants.M, cfg["tuning.k_max"])
        tuned = baselines.tune_step_size(problem, w, baselines.BaselineConfig(name, T, K_mix=K_mix), x0, reference, eps, grid)
        if tuned.result is None:
            raise DivergenceError(f"{name} diverged for every step size on the grid", t=0, method=name)
        hyper.update(step_size=tuned.step_size, tuned=True)
        return tuned.result.trace, hyper
    bc = baselines.BaselineConfig(name, T, step, K_mix=K_mix)
    res = baselines.run_baseline(problem, w, bc, x0, reference)
    hyper.update(step_size=step, tuned=False)
    return res.trace, hyper


def run_method(name, cfg, problem, w, x0, reference) -> MethodOutcome:
    """Run one method, converting module errors into a recorded outcome."""
    eps = cfg["eps"]
    gap0 = problem.value(x0) - reference.f_star
    try:
        if name == "mudag":
            trace, hyper = _run_mudag(cfg, problem, w, x0, reference, eps * gap0)
        else:
            trace, hyper = _run_baseline(name, cfg, problem, w, x0, reference, eps)
    except DivergenceError as exc:
        return MethodOutcome(name, "diverged", list(exc.trace or []), {}, f"{name}: {exc}", exc.t)
    except DecoptError as exc:
        return MethodOutcome(name, "error", [], {}, f"{name}: {exc}")
    return MethodOutcome(name, "ok", trace, hyper)


def _flag_degraded(outcomes: dict, eps_abs: float) -> None:
    ref = outcomes.get("mudag")
    if ref is None or ref.status != "ok":
        return
    floor = abs(ref.trace[-1].f_gap)
    for name, out in outcomes.items():
        if name == "mudag" or out.status != "ok":
            continue
        final = out.trace[-1].f_gap
        if first_reaching(out.trace, eps_abs) is None and final >= DEGRADED_FACTOR * floor:
            out.status = "degraded"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def manifest_text(manifest: dict) -> str:
    return json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n"


def run_experiment(cfg: ExperimentConfig, output_dir=None) -> ExperimentResult:
    """Solve the reference, run every configured method and write the outputs.

    A method that diverges or fails is recorded in the manifest and the
    remaining methods still run.
    """
    g = build_graph(cfg)
    w = build_mixing_matrix(g)
    problem = build_problem(cfg)
    reference = solve_reference(problem, cfg["reference.tol"], cfg["reference.max_iter"])
    x0 = np.zeros(problem.d)
    gap0 = problem.value(x0) - reference.f_star
    eps_abs = cfg["eps"] * gap0

    outcomes = {name: run_method(name, cfg, problem, w, x0, reference) for name in cfg["methods"]}
    _flag_degraded(outcomes, eps_abs)

    manifest = {
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(cfg.values.items())},
        "seeds": {"network": cfg["network.seed"], "problem": cfg["problem.seed"]},
        "network": {
            "topology": cfg["network.topology"],
            "m": g.m,
            "p": cfg["network.p"],
            "edges": g.num_edges,
            "lambda2": w.lambda2,
            "spectral_gap": w.gap,
        },
        "constants": problem.constants.as_dict(),
        "reference": {"f_star": reference.f_star, "grad_norm": reference.grad_norm, "iterations": reference.iterations},
        "eps": cfg["eps"],
        "initial_gap": gap0,
        "methods": {name: out.summary(eps_abs) for name, out in outcomes.items()},
    }
    out_dir = None
    if output_dir is not None:
        out_dir = Path(output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, out in outcomes.items():
            if out.trace:
                write_trace_csv(out.trace, out_dir / f"{name}.csv")
        (out_dir / "manifest.json").write_text(manifest_text(manifest))
    return ExperimentResult(manifest, outcomes, out_dir)


def _apply_axis(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    if axis == "K":
        return cfg.with_values(method__mudag__K=int(value))
    if axis == "p":
        return cfg.with_values(network__p=float(value))
    if cfg["problem.sigma.mode"] == "uniform":
        return cfg.with_values(problem__sigma__value=float(value))
    return cfg.with_values(problem__sigma__a=float(value))


def sweep(cfg: ExperimentConfig, axis: str, values, output_dir=None) -> list[dict]:
    """Repeat :func:`run_experiment` along one axis and tabulate cost to ``eps``.

    ``axis`` is ``K`` (Mudag's mixing rounds), ``p`` (edge probability) or
    ``sigma`` (the uniform regularizer, or the non-convex agents' value).
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    rows = []
    base = Path(output_dir) if output_dir is not None else None
    for value in values:
        sub = _apply_axis(cfg, axis, value)
        sub_dir = base / f"{axis}={value}" if base is not None else None
        res = run_experiment(sub, sub_dir)
        gap = res.manifest["network"]["spectral_gap"]
        for name, info in res.manifest["methods"].items():
            rows.append(
                {
                    "axis": axis,
                    "value": value,
                    "method": name,
                    "gap": gap,
                    "status": info["status"],
                    "iterations_to_eps": info["iterations_to_eps"],
                    "comm_to_eps": info["comm_to_eps"],
                    "final_gap": info["final_gap"],
                }
            )
    if base is not None:
        base.mkdir(parents=True, exist_ok=True)
        with open(base / "summary.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: ("" if row[k] is None else row[k]) for k in SUMMARY_COLUMNS})
    return rows
