"""JSON-configured experiment runs writing trajectory CSVs and a summary."""
from __future__ import annotations

import csv
import json
import math
import os
import re
from dataclasses import asdict, dataclass
from pathlib import Path

from ..core import SolveReport
from ..dro import dro_continuous_greedy, dro_mirror_prox
from ..greedy import GreedyConfig, continuous_greedy
from ..mirror_prox import Fixed, MirrorProxConfig, Theory, mirror_prox
from .movielens import load_ratings
from .problems import build_movierec_dro, gen_summarization, summarization_objective, synthetic_ratings

PROBLEMS = ("summarization", "movierec")
SOLVERS = ("greedy", "mirror_prox", "both")
SCHEDULES = ("fixed", "theory")


class ConfigError(ValueError):
    pass


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


# field -> (required, check, description)
_FIELDS = {
    "problem": (True, lambda v: v in PROBLEMS, f"one of {', '.join(PROBLEMS)}"),
    "solver": (True, lambda v: v in SOLVERS, f"one of {', '.join(SOLVERS)}"),
    "T": (True, lambda v: _is_int(v) and v >= 3, "an integer >= 3"),
    "schedule": (False, lambda v: v in SCHEDULES, f"one of {', '.join(SCHEDULES)}"),
    "theta": (False, lambda v: _is_num(v) and v > 0, "a positive number"),
    "eps": (False, lambda v: _is_num(v) and v > 0, "a positive number"),
    "delta": (False, lambda v: _is_num(v) and v > 0, "a positive number"),
    "seed": (True, lambda v: _is_int(v) and v >= 0, "a nonnegative integer"),
    "output_dir": (True, lambda v: isinstance(v, str) and v != "", "a nonempty string"),
    "k": (False, lambda v: _is_int(v) and v >= 1, "a positive integer"),
    "ratings": (False, lambda v: isinstance(v, str) and v != "", "a path string"),
    "n_samples": (False, lambda v: _is_int(v) and v >= 1, "a positive integer"),
    "m_cap": (False, lambda v: _is_int(v) and v >= 1, "a positive integer"),
    "budget": (False, lambda v: _is_int(v) and v >= 1, "a positive integer"),
    "gamma": (False, lambda v: _is_num(v) and v > 0, "a positive number"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    solver: str
    T: int
    seed: int
    output_dir: str
    schedule: str = "fixed"
    theta: float = 0.2
    eps: float = 0.01
    delta: float = 1e-5
    k: int = 50
    ratings: str | None = None
    n_samples: int = 10
    m_cap: int = 50
    budget: int = 5
    gamma: float | None = None


def _line_of(text: str, key: str) -> int:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}:{e.lineno}: invalid JSON ({e.msg})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}:1: top level must be a JSON object")
    for key, value in raw.items():
        line = _line_of(text, key)
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{line}: unknown field '{key}'")
        _, check, desc = _FIELDS[key]
        if not check(value):
            raise ConfigError(f"{source}:{line}: field '{key}' must be {desc}, got {value!r}")
    for key, (required, _, _) in _FIELDS.items():
        if required and key not in raw:
            raise ConfigError(f"{source}:1: missing required field '{key}'")
    return ExperimentConfig(**raw)


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    return parse_config(p.read_text(encoding="utf-8"), str(p))


def write_trajectory(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "value", "seconds"])
        for it, val, sec in rows:
            w.writerow([it, f"{val:.17g}", f"{sec:.17g}"])


def _solvers(cfg: ExperimentConfig):
    return ("greedy", "mirror_prox") if cfg.solver == "both" else (cfg.solver,)


def _summarization_runs(cfg: ExperimentConfig):
    inst = gen_summarization(cfg.k, cfg.seed)
    obj = summarization_objective(inst, estimate=cfg.schedule == "theory")
    for name in _solvers(cfg):
        if name == "greedy":
            yield name, continuous_greedy(obj, inst.region, GreedyConfig(cfg.T))
        else:
            sched = Theory(obj.modulus) if cfg.schedule == "theory" else Fixed(cfg.gamma or 1.0 / (2.0 * math.sqrt(cfg.T)))
            yield name, mirror_prox(obj, inst.region, MirrorProxConfig(cfg.T, sched))


def _movierec_runs(cfg: ExperimentConfig):
    if cfg.ratings:
        ratings = load_ratings(cfg.ratings)
    else:
        ratings = synthetic_ratings(max(200, cfg.n_samples), max(cfg.m_cap, 2 * cfg.budget), cfg.seed)
    mr = build_movierec_dro(ratings, cfg.n_samples, cfg.theta, cfg.eps, cfg.seed, cfg.m_cap, cfg.budget)
    for name in _solvers(cfg):
        if name == "greedy":
            yield name, dro_continuous_greedy(mr.dro, mr.region, cfg.T, cfg.delta)
        else:
            sched = None if cfg.schedule == "theory" else Fixed(cfg.gamma or 1.0 / (2.0 * math.sqrt(cfg.T)))
            yield name, dro_mirror_prox(mr.dro, mr.region, cfg.T, cfg.delta, schedule=sched)


def _report_summary(rep: SolveReport) -> dict:
    out = {
        "solver": rep.solver_name,
        "final_value": rep.value,
        "config": rep.config,
        "rows": len(rep.values),
    }
    if "max_certified_gap" in rep.extras:
        out["max_certified_gap"] = rep.extras["max_certified_gap"]
        out["inner_solves"] = len(rep.extras["certificates"])
    if "argmax_t" in rep.extras:
        out["argmax_t"] = rep.extras["argmax_t"]
    return out


def run_experiment(config_path, dry_run: bool = False) -> int:
    """Run the configured solvers; returns a process exit code."""
    cfg = load_config(config_path)
    if dry_run:
        return 0
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs = _summarization_runs(cfg) if cfg.problem == "summarization" else _movierec_runs(cfg)
    summary = {"config": asdict(cfg), "runs": {}}
    for name, rep in runs:
        csv_path = out / f"{cfg.problem}_{name}.csv"
        write_trajectory(csv_path, rep.values)
        summary["runs"][name] = _report_summary(rep) | {"csv": os.fspath(csv_path.name)}
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return 0
