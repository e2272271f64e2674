"""Run configuration, seeded instance generation, batch experiments and reports."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from interpkit import janson, nuclear, qcfun, rearrange, representations, retract
from interpkit.couples import (
    CoupleOperator,
    WeightedCouple,
    couple_opnorm,
    exact_cap,
    j_functional,
    k_exact,
    opnorm_inf_to_1,
)
from interpkit.errors import ConfigError, InterpKitError

EXPERIMENTS = (
    "verify-ovch",
    "jk-gap",
    "nuclear-check",
    "sparse-seq",
    "diag-sums",
    "rearrange-norms",
    "fundlemma",
    "retract-check",
)
DISTRIBUTIONS = ("uniform", "gaussian", "unit")
DEFAULT_TOL = 1e-9


@dataclass
class RunConfig:
    experiment: str
    seed: int = 0
    trials: int = 10
    source: dict | None = None
    target: dict | None = None
    rho: dict = field(default_factory=lambda: {"kind": "power", "theta": 0.5})
    generator: dict = field(default_factory=dict)
    lam: float = 2.0
    cap: int | None = None
    method: str = "lp"
    tolerance: float = DEFAULT_TOL
    params: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"field 'experiment': unknown value {self.experiment!r}; expected one of {EXPERIMENTS}")
        for name, kind in (("seed", int), ("trials", int)):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, kind) or val < 0:
                raise ConfigError(f"field '{name}': expected a nonnegative integer, got {val!r}")
        if self.cap is not None and (not isinstance(self.cap, int) or self.cap < 1):
            raise ConfigError(f"field 'cap': must be an integer >= 1, got {self.cap!r}")
        if not isinstance(self.lam, (int, float)) or not self.lam > 1:
            raise ConfigError(f"field 'lam': must exceed 1, got {self.lam!r}")
        if self.method not in ("lp", "greedy"):
            raise ConfigError(f"field 'method': expected 'lp' or 'greedy', got {self.method!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"field 'format': expected 'csv' or 'json', got {self.format!r}")
        dist = self.generator.get("distribution", "uniform")
        if dist not in DISTRIBUTIONS:
            raise ConfigError(f"field 'generator.distribution': unknown value {dist!r}")
        for name in ("source", "target"):
            spec = getattr(self, name)
            if spec is not None:
                try:
                    WeightedCouple.from_spec(spec)
                except (KeyError, TypeError, ValueError) as exc:
                    raise ConfigError(f"field '{name}': {exc}") from exc
        try:
            qcfun.from_spec(self.rho)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"field 'rho': {exc}") from exc

    @property
    def effective_cap(self) -> int:
        return self.cap if self.cap is not None else exact_cap()

    def canonical(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out")
        d.pop("format")
        return d


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}
_ALIASES = {"lambda": "lam"}


def config_from_dict(raw: dict, **overrides) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    data = {}
    for key, val in raw.items():
        name = _ALIASES.get(key, key)
        if name not in _FIELDS:
            raise ConfigError(f"field '{key}': unknown configuration key")
        data[name] = val
    for key, val in overrides.items():
        if val is not None:
            data[key] = val
    if "experiment" not in data:
        raise ConfigError("field 'experiment': missing")
    return RunConfig(**data)


def load_config(path: str | Path, **overrides) -> RunConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(raw, **overrides)


# ------------------------------------------------------------------- instances


def trial_rng(seed: int, trial: int, redraw: int = 0) -> np.random.Generator:
    """One independent stream per (seed, trial, redraw)."""
    return np.random.default_rng([seed, trial, redraw])


def _draw(rng: np.random.Generator, shape: tuple[int, int], distribution: str, unit_at=(0, 0)) -> np.ndarray:
    if distribution == "uniform":
        return rng.uniform(-1.0, 1.0, size=shape)
    if distribution == "gaussian":
        return rng.standard_normal(shape)
    m = np.zeros(shape)
    m[tuple(unit_at)] = 1.0
    return m


def inputs_hash(*arrays: np.ndarray, extra: Any = None) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a, dtype=np.float64)
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    if extra is not None:
        h.update(json.dumps(extra, sort_keys=True, default=str).encode())
    return h.hexdigest()


@dataclass(frozen=True, eq=False)
class GeneratedOperator:
    operator: CoupleOperator
    redraws: int
    digest: str


def generate_operator(
    seed: int,
    dims: tuple[int, int] | None,
    source: WeightedCouple,
    target: WeightedCouple,
    distribution: str = "uniform",
    trial: int = 0,
    cap: int | None = None,
    unit_at=(0, 0),
    max_redraws: int = 100,
) -> GeneratedOperator:
    """Random matrix scaled so that its couple norm is 1; all-zero draws are redrawn."""
    shape = (target.size, source.size)
    if dims is not None and tuple(dims) != shape:
        raise ConfigError(f"field 'generator.dims': {tuple(dims)} does not match couples {shape}")
    if distribution not in DISTRIBUTIONS:
        raise ConfigError(f"field 'generator.distribution': unknown value {distribution!r}")
    for redraw in range(max_redraws):
        m = _draw(trial_rng(seed, trial, redraw), shape, distribution, unit_at)
        norm = couple_opnorm(CoupleOperator(m, source, target), cap).value
        if norm > 0:
            op = CoupleOperator(m / norm, source, target)
            return GeneratedOperator(op, redraw, inputs_hash(op.matrix, extra=[source.to_spec(), target.to_spec()]))
    raise ConfigError("generator produced only zero matrices")


def random_couple(rng: np.random.Generator, n: int, p, spread: float = 3.0) -> WeightedCouple:
    w0 = np.exp(rng.uniform(-spread, spread, n))
    w1 = np.exp(rng.uniform(-spread, spread, n))
    return WeightedCouple(tuple(range(n)), w0, w1, p)


def random_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.uniform(-1.0, 1.0, n)
    if not np.any(x):
        x[0] = 1.0
    return x


# ---------------------------------------------------------------------- report


@dataclass
class Report:
    experiment: str
    columns: list[str]
    rows: list[dict]
    tolerance: float
    notes: list[str] = field(default_factory=list)

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if not r.get("pass", True))

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def summary(self) -> dict:
        ratios = [r["ratio"] for r in self.rows if isinstance(r.get("ratio"), float) and math.isfinite(r["ratio"])]
        return {
            "experiment": self.experiment,
            "rows": len(self.rows),
            "failures": self.failures,
            "max_ratio": max(ratios) if ratios else None,
            "tolerance": self.tolerance,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        body = {
            "summary": _jsonable(self.summary()),
            "notes": self.notes,
            "rows": [{c: _jsonable(r.get(c)) for c in self.columns} for r in self.rows],
        }
        return json.dumps(body, indent=2, sort_keys=False) + "\n"

    def render(self, fmt: str = "csv") -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, Fraction):
        return str(v)
    return "" if v is None else str(v)


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


# ----------------------------------------------------------------- experiments


def _couples(cfg: RunConfig, default_source: dict, default_target: dict) -> tuple[WeightedCouple, WeightedCouple]:
    s = WeightedCouple.from_spec(cfg.source or default_source)
    t = WeightedCouple.from_spec(cfg.target or default_target)
    return s, t


_ADIC_SRC = {"lambda_adic": {"lambda": 2, "k_min": -6, "k_max": 6}, "p": "inf"}
_ADIC_TGT = {"lambda_adic": {"lambda": 2, "k_min": -6, "k_max": 6}, "p": 1}


def _verify_ovch(cfg: RunConfig) -> Report:
    source, target = _couples(cfg, _ADIC_SRC, _ADIC_TGT)
    rho = qcfun.from_spec(cfg.rho)
    dist = cfg.generator.get("distribution", "uniform")
    dims = cfg.generator.get("dims")
    cap = cfg.effective_cap
    rows = []
    for trial in range(cfg.trials):
        gen = generate_operator(cfg.seed, dims, source, target, dist, trial, cap, cfg.generator.get("unit_at", (0, 0)))
        rep = janson.verify_ovchinnikov(gen.operator, rho, cap, cfg.tolerance)
        rows.append({"trial": trial, **rep.row(), "redraws": gen.redraws, "inputs_hash": gen.digest})
    cols = ["trial", "C_base", "C_rho", "ratio", "bound", "pass", "certified", "exact", "tolerance", "redraws", "inputs_hash"]
    return Report(cfg.experiment, cols, rows, cfg.tolerance)


def _gap_instance(cfg: RunConfig, trial: int):
    rng = trial_rng(cfg.seed, trial)
    n = int(cfg.params.get("n", 3))
    source = WeightedCouple.from_spec(cfg.source) if cfg.source else random_couple(rng, n, "inf")
    target = WeightedCouple.from_spec(cfg.target) if cfg.target else random_couple(rng, n, 1)
    return source, target, random_vector(rng, source.size), random_vector(rng, target.size)


def _jk_gap(cfg: RunConfig) -> Report:
    rows = []
    for trial in range(cfg.trials):
        source, target, x, y = _gap_instance(cfg, trial)
        greedy = representations.jk_gap(source, x, target, y, cfg.lam, "greedy")
        lp = representations.jk_gap(source, x, target, y, cfg.lam, "lp")
        ok = lp.value <= greedy.value + cfg.tolerance * max(1.0, greedy.value)
        rows.append({
            "trial": trial,
            "greedy": greedy.value,
            "lp": lp.value,
            "ratio": lp.value / greedy.value if greedy.value else 0.0,
            "method": lp.method,
            "pass": ok,
            "tolerance": cfg.tolerance,
            "inputs_hash": inputs_hash(source.w0, source.w1, target.w0, target.w1, x, y),
        })
    cols = ["trial", "greedy", "lp", "ratio", "method", "pass", "tolerance", "inputs_hash"]
    return Report(cfg.experiment, cols, rows, cfg.tolerance)


def _nuclear_check(cfg: RunConfig) -> Report:
    rows = []
    for trial in range(cfg.trials):
        source, target, x, y = _gap_instance(cfg, trial)
        rep = nuclear.nuclearity_equivalence_test(source, target, x, y, cfg.lam)
        rows.append({
            "trial": trial,
            **rep.to_dict(),
            "ratio": rep.factor_nu_over_gap,
            "pass": rep.gap_ok and rep.nu_ok,
            "tolerance": 1e-6,
            "inputs_hash": inputs_hash(source.w0, source.w1, target.w0, target.w1, x, y),
        })
    cols = ["trial", "gap", "nu", "factor_gap_over_nu", "factor_nu_over_gap", "pass", "tolerance", "inputs_hash"]
    return Report(cfg.experiment, cols, rows, 1e-6, ["relative tolerance 1e-6 on both factor bounds"])


def _sparse_seq(cfg: RunConfig) -> Report:
    rho = qcfun.from_spec(cfg.rho)
    k_min = int(cfg.params.get("k_min", -10))
    k_max = int(cfg.params.get("k_max", 10))
    seq = qcfun.sparse_tau(rho, k_min, k_max, truncate=bool(cfg.params.get("truncate", False)))
    steps = np.concatenate([[np.nan], seq.step_ratios()])
    r = seq.rho_tau()
    rows = []
    for i, (k, t) in enumerate(zip(seq.k, seq.tau)):
        # worst pair excess involving this index
        val = np.minimum(1.0, seq.tau[i] / seq.tau) * r / r[i]
        gap = np.abs(seq.k - k).astype(float)
        excess = float(np.max(val - np.power(2.0, -gap)))
        rows.append({
            "k": int(k),
            "tau_k": float(t),
            "rho_tau_k": float(r[i]),
            "step_ratio": float(steps[i]),
            "pass": excess <= 1e-12,
            "tolerance": 1e-12,
        })
    notes = []
    if seq.truncated:
        notes.append(f"truncated_low={seq.truncated_low} truncated_high={seq.truncated_high}")
    return Report(cfg.experiment, ["k", "tau_k", "rho_tau_k", "step_ratio", "pass", "tolerance"], rows, 1e-12, notes)


def _diag_sums(cfg: RunConfig) -> Report:
    max_dim = int(cfg.params.get("max_dim", 12))
    rows = []
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        r, c = (int(v) for v in rng.integers(1, max_dim + 1, size=2))
        a = _draw(rng, (r, c), cfg.generator.get("distribution", "uniform"))
        norm = opnorm_inf_to_1(a, np.ones(c), np.ones(r), cfg.effective_cap)
        diag = janson.diagonal_sums(a)
        worst = max(diag.values())
        rows.append({
            "trial": trial,
            "rows": r,
            "cols": c,
            "max_diagonal": worst,
            "opnorm": norm.value,
            "ratio": worst / norm.value if norm.value else 0.0,
            "exact": norm.exact,
            "pass": worst <= norm.value + cfg.tolerance,
            "tolerance": cfg.tolerance,
            "inputs_hash": inputs_hash(a),
        })
    cols = ["trial", "rows", "cols", "max_diagonal", "opnorm", "ratio", "exact", "pass", "tolerance", "inputs_hash"]
    return Report(cfg.experiment, cols, rows, cfg.tolerance)


def random_step(rng: np.random.Generator, pieces: int) -> rearrange.StepFunction:
    widths = rng.uniform(0.1, 2.0, pieces)
    values = rng.uniform(0.0, 3.0, pieces)
    return rearrange.StepFunction.from_pieces(list(zip(widths.tolist(), values.tolist())))


def _rearrange_norms(cfg: RunConfig) -> Report:
    psi = qcfun.from_spec(cfg.params.get("psi", cfg.rho))
    phi = qcfun.from_spec(cfg.params.get("phi", cfg.rho))
    grid = qcfun.log_grid(1e-3, 1e3, 13)
    c1 = rearrange.check_psi(psi, grid)
    c2 = rearrange.check_phi(phi, grid)
    if not (c1.ok and c2.ok):
        raise ConfigError(f"weights not admissible: {c1.diagnostic or c2.diagnostic}")
    tol = cfg.tolerance
    rows = []
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        f = random_step(rng, int(cfg.params.get("pieces", 6)))
        mn = rearrange.m_norm(psi, f)
        ma = rearrange.m_norm_average(psi, f)
        ln = rearrange.lambda_norm(phi, f)
        la = rearrange.lambda_norm_average(phi, f)
        ok = mn <= ma * (1 + tol) and ma <= c1.constant * mn * (1 + tol) and ln <= la * (1 + tol) and la <= c2.constant * ln * (1 + tol)
        rows.append({
            "trial": trial,
            "m_norm": mn,
            "m_average": ma,
            "lambda_norm": ln,
            "lambda_average": la,
            "C1": c1.constant,
            "C2": c2.constant,
            "pass": ok,
            "tolerance": tol,
            "inputs_hash": inputs_hash(np.array(f.breakpoints, float), np.array(f.values, float)),
        })
    cols = ["trial", "m_norm", "m_average", "lambda_norm", "lambda_average", "C1", "C2", "pass", "tolerance", "inputs_hash"]
    return Report(cfg.experiment, cols, rows, tol, ["relative tolerance on the equivalence sandwiches"])


def _fundlemma(cfg: RunConfig) -> Report:
    rows = []
    n = int(cfg.params.get("n", 6))
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        c = WeightedCouple.from_spec(cfg.target) if cfg.target else random_couple(rng, n, 1)
        a = random_vector(rng, c.size)
        rep = representations.fundamental_representation(c, a, cfg.lam)
        worst = 0.0
        for k, part in rep.parts.items():
            t = cfg.lam**k
            kv = k_exact(c, t, a)
            jv = j_functional(c, t, part)
            if jv:
                worst = max(worst, jv / kv)
        cp = representations.strong_form_check(rep, a)
        rows.append({
            "trial": trial,
            "max_j_over_k": worst,
            "c_prime": cp,
            "lambda": cfg.lam,
            "pass": worst <= cfg.lam * (1 + 1e-12) and cp <= cfg.lam + cfg.tolerance,
            "tolerance": cfg.tolerance,
            "inputs_hash": inputs_hash(c.w0, c.w1, a),
        })
    cols = ["trial", "max_j_over_k", "c_prime", "lambda", "pass", "tolerance", "inputs_hash"]
    return Report(cfg.experiment, cols, rows, cfg.tolerance)


def _retract_check(cfg: RunConfig) -> Report:
    rows = []
    n = int(cfg.params.get("n", 6))
    p = cfg.params.get("p", "inf")
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        c = WeightedCouple.from_spec(cfg.source) if cfg.source else random_couple(rng, n, p)
        x = random_vector(rng, c.size)
        part = retract.partition(c, cfg.lam)
        res = retract.iota(c, part, x)
        back = retract.pi(c, part, x, res.s)
        err = float(np.max(np.abs(back - x)) / max(1e-300, float(np.max(np.abs(x)))))
        adic = retract.lambda_adic_for(part, c.p)
        (i0, i1), _ = retract.side_norms(res.functionals, c, adic)
        (p0, p1), _ = retract.side_norms(retract.pi_matrix(c, part, x), adic, c)
        ok = err <= 1e-12 and max(i0, i1) <= 1 + cfg.tolerance and max(p0, p1) <= cfg.lam + cfg.tolerance
        rows.append({
            "trial": trial,
            "roundtrip_error": err,
            "iota_norm": max(i0, i1),
            "pi_norm": max(p0, p1),
            "lambda": cfg.lam,
            "pass": ok,
            "tolerance": cfg.tolerance,
            "inputs_hash": inputs_hash(c.w0, c.w1, x),
        })
    cols = ["trial", "roundtrip_error", "iota_norm", "pi_norm", "lambda", "pass", "tolerance", "inputs_hash"]
    return Report(cfg.experiment, cols, rows, cfg.tolerance)


_RUNNERS: dict[str, Callable[[RunConfig], Report]] = {
    "verify-ovch": _verify_ovch,
    "jk-gap": _jk_gap,
    "nuclear-check": _nuclear_check,
    "sparse-seq": _sparse_seq,
    "diag-sums": _diag_sums,
    "rearrange-norms": _rearrange_norms,
    "fundlemma": _fundlemma,
    "retract-check": _retract_check,
}


def run(config: RunConfig) -> Report:
    """Run one experiment; the report depends only on the config."""
    try:
        return _RUNNERS[config.experiment](config)
    except InterpKitError:
        raise
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed config for {config.experiment}: {exc}") from exc
