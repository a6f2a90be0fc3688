"""Experiment configuration files.

The format is INI (``configparser``) with fixed sections and keys; anything
not listed below is rejected.

    [model]     p, x0, c1_plus, c1_minus
    [smoother]  epsilon, k, a
    [grid]      n          comma-separated integers (may be empty)
                N_factors  comma-separated reals K fed to N_rule
                N_rule     expression in n, K  (default: K * n * log(n)**3)
                g_rule     expression in N, n  (default: N**2)
                far_mode   exact | budgeted
                out_of_range_factors  comma-separated reals f, giving N = f * n
                range_ratio  threshold r of the range flag n log(N)^2 < r N
    [mc]        estimator (bigjump | naive | none), trials, seed, workers
    [run]       workers (cells evaluated concurrently), out_dir

Rule expressions use numbers, the named variables, + - * / ** and
parentheses, and the functions log, sqrt, exp.
"""

import ast
import configparser
from dataclasses import dataclass
import math
import operator

from .model import DomainError, TailModel
from .smoother import SmootherSpec


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


_SCHEMA = {
    "model": {"p": float, "x0": float, "c1_plus": float, "c1_minus": float},
    "smoother": {"epsilon": float, "k": int, "a": float},
    "grid": {"n": "ints", "N_factors": "floats", "N_rule": str, "g_rule": str,
             "far_mode": str, "out_of_range_factors": "floats", "range_ratio": float},
    "mc": {"estimator": str, "trials": int, "seed": int, "workers": int},
    "run": {"workers": int, "out_dir": str},
}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"log": math.log, "sqrt": math.sqrt, "exp": math.exp}


def _check_expr(text, names):
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse rule {text!r}: {exc.msg}") from None

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return
        if isinstance(node, ast.Name) and node.id in names:
            return
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            walk(node.left)
            walk(node.right)
            return
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            walk(node.operand)
            return
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            walk(node.args[0])
            return
        raise ConfigError(f"rule {text!r} uses something outside the grammar")

    walk(tree)
    return tree


def evaluate_rule(text, **env):
    tree = _check_expr(text, set(env))

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            return node.value
        if isinstance(node, ast.Name):
            return env[node.id]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp):
            return -ev(node.operand)
        return _FUNCS[node.func.id](ev(node.args[0]))

    return float(ev(tree))


@dataclass(frozen=True)
class ExperimentConfig:
    model: TailModel = TailModel(0.7)
    smoother: SmootherSpec = SmootherSpec()
    n_values: tuple = (16, 32, 64, 128, 256)
    N_factors: tuple = (20.0, 40.0, 80.0, 160.0)
    N_rule: str = "K * n * log(n)**3"
    g_rule: str = "N**2"
    far_mode: str = "budgeted"
    out_of_range_factors: tuple = (5.0,)
    range_ratio: float = 0.2
    estimator: str = "bigjump"
    trials: int = 100_000
    seed: int = 20240601
    mc_workers: int = 1
    workers: int = 1
    out_dir: str = "results"

    def __post_init__(self):
        _check_expr(self.N_rule, {"n", "K"})
        _check_expr(self.g_rule, {"N", "n"})
        if self.far_mode not in ("exact", "budgeted"):
            raise ConfigError(f"far_mode must be exact or budgeted, got {self.far_mode!r}")
        if self.estimator not in ("bigjump", "naive", "none"):
            raise ConfigError(f"unknown estimator {self.estimator!r}")
        if self.trials < 2:
            raise ConfigError("trials must be at least 2")
        if self.workers < 1 or self.mc_workers < 1:
            raise ConfigError("workers must be positive")
        if any(int(n) != n or n < 1 for n in self.n_values):
            raise ConfigError("grid n values must be positive integers")

    def cells(self):
        """(n, N, g, arm) for every grid point, in a fixed order."""
        out = []
        for n in self.n_values:
            for K in self.N_factors:
                N = evaluate_rule(self.N_rule, n=n, K=K)
                out.append((n, N, evaluate_rule(self.g_rule, N=N, n=n), "main"))
        for n in self.n_values:
            for f in self.out_of_range_factors:
                N = f * n
                out.append((n, N, evaluate_rule(self.g_rule, N=N, n=n), "out_of_range"))
        for n, N, g, _ in out:
            if g < N * N * (1.0 - 1e-12):
                raise ConfigError(f"g={g} below N^2 at n={n}, N={N}")
        return out

    def as_dict(self):
        return {
            "model": {"p": self.model.p, "x0": self.model.x0,
                      "c1_plus": self.model.c1_plus, "c1_minus": self.model.c1_minus},
            "smoother": {"epsilon": self.smoother.epsilon, "k": self.smoother.k,
                         "a": self.smoother.a},
            "grid": {"n": list(self.n_values), "N_factors": list(self.N_factors),
                     "N_rule": self.N_rule, "g_rule": self.g_rule, "far_mode": self.far_mode,
                     "out_of_range_factors": list(self.out_of_range_factors),
                     "range_ratio": self.range_ratio},
            "mc": {"estimator": self.estimator, "trials": self.trials, "seed": self.seed,
                   "workers": self.mc_workers},
            "run": {"workers": self.workers, "out_dir": self.out_dir},
        }


def _convert(kind, raw, where):
    try:
        if kind == "ints":
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if kind == "floats":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r}") from None


def parse_config(text):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (N_rule vs n)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            values[(section, key)] = _convert(_SCHEMA[section][key], raw, f"[{section}] {key}")

    def get(section, key, default):
        return values.get((section, key), default)

    base = ExperimentConfig.__dataclass_fields__
    try:
        model = TailModel(get("model", "p", 0.7), get("model", "x0", 1.0),
                          get("model", "c1_plus", 0.0), get("model", "c1_minus", 0.0))
        smoother = SmootherSpec(get("smoother", "epsilon", 0.5), get("smoother", "k", 4),
                                get("smoother", "a", 3.5))
        return ExperimentConfig(
            model=model, smoother=smoother,
            n_values=get("grid", "n", base["n_values"].default),
            N_factors=get("grid", "N_factors", base["N_factors"].default),
            N_rule=get("grid", "N_rule", base["N_rule"].default),
            g_rule=get("grid", "g_rule", base["g_rule"].default),
            far_mode=get("grid", "far_mode", base["far_mode"].default),
            out_of_range_factors=get("grid", "out_of_range_factors",
                                     base["out_of_range_factors"].default),
            range_ratio=get("grid", "range_ratio", base["range_ratio"].default),
            estimator=get("mc", "estimator", base["estimator"].default),
            trials=get("mc", "trials", base["trials"].default),
            seed=get("mc", "seed", base["seed"].default),
            mc_workers=get("mc", "workers", 1),
            workers=get("run", "workers", 1),
            out_dir=get("run", "out_dir", base["out_dir"].default),
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)
