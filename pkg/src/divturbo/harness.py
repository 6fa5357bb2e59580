"""Experiment orchestration: cell enumeration, seeded execution, resumable
result files, summary tables and 2-D scatter data.

A *cell* is one ``(algorithm, function, D, tau, repeat)`` combination and is
identified by the key ``"algorithm/function/D/tau/repeat"``.

Config file format (INI; unknown keys are errors)::

    [experiment]
    functions = sphere, rastrigin
    dims = 2, 3
    taus = 0.1, 1.0
    m = 10
    repeats = 30
    budget_rule = paper          ; paper | paper-x10 | <integer>
    algorithms = seq, int, robot
    max_phases = 5
    base_seed = 0
    shift = zero                 ; zero | random

    [optimizer]                  ; optional, DivTurboConfig fields
    n_batch = 4
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import meta, robot, stats
from .divturbo1 import DivTurboConfig
from .exceptions import ConfigError, UnsupportedDim
from .objectives import ObjectiveFunction, catalogue

logger = logging.getLogger(__name__)

ALGORITHMS = ("seq", "int", "robot")
RESULT_COLUMNS = ["cell_key", "mean_value", "stdev_within_run", "feasible", "evals_used", "elites"]
SCATTER_GRID = 201


@dataclass
class ExperimentConfig:
    functions: list
    dims: list
    taus: list
    m: int = 10
    repeats: int = 30
    budget_rule: str = "paper"
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    max_phases: int = 5
    base_seed: int = 0
    shift: str = "zero"
    optimizer: dict = field(default_factory=dict)

    def __post_init__(self):
        unknown = [f for f in self.functions if f not in catalogue()]
        if unknown:
            raise ConfigError(f"unknown functions: {unknown}")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithms: {bad}")
        if self.shift not in ("zero", "random"):
            raise ConfigError("shift must be 'zero' or 'random'")
        total_budget(self.budget_rule, 1, 1)  # validates the rule
        valid = {f.name for f in fields(DivTurboConfig)} - {"seed"}
        extra = set(self.optimizer) - valid
        if extra:
            raise ConfigError(f"unknown optimizer keys: {sorted(extra)}")

    def cells(self) -> list:
        return [
            Cell(a, f, d, t, r)
            for a in self.algorithms
            for f in self.functions
            for d in self.dims
            for t in self.taus
            for r in range(self.repeats)
        ]

    def turbo_config(self) -> DivTurboConfig:
        return DivTurboConfig(**self.optimizer)


_LIST_KEYS = {"functions": str, "dims": int, "taus": float, "algorithms": str}
_SCALAR_KEYS = {"m": int, "repeats": int, "budget_rule": str, "max_phases": int,
                "base_seed": int, "shift": str}


def _parse_scalar(text: str):
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.read_string(text)
    sections = set(parser.sections())
    if "experiment" not in sections:
        raise ConfigError("missing [experiment] section")
    if sections - {"experiment", "optimizer"}:
        raise ConfigError(f"unknown sections: {sorted(sections - {'experiment', 'optimizer'})}")
    kwargs = {}
    for key, raw in parser["experiment"].items():
        if key in _LIST_KEYS:
            kwargs[key] = [_LIST_KEYS[key](v.strip()) for v in raw.split(",") if v.strip()]
        elif key in _SCALAR_KEYS:
            kwargs[key] = _SCALAR_KEYS[key](raw.strip())
        else:
            raise ConfigError(f"unknown key {key!r} in [experiment]")
    for required in ("functions", "dims", "taus"):
        if required not in kwargs:
            raise ConfigError(f"[experiment] needs {required!r}")
    if "optimizer" in sections:
        kwargs["optimizer"] = {k: _parse_scalar(v) for k, v in parser["optimizer"].items()}
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def total_budget(rule, dim: int, m: int) -> int:
    """``paper``: (100 + 10 D) m; ``paper-x10``: (1000 + 100 D) m; or an integer."""
    if rule == "paper":
        return meta.budget_rule(dim, m)
    if rule == "paper-x10":
        return meta.budget_rule(dim, m, scale=10)
    try:
        value = int(rule)
    except (TypeError, ValueError):
        raise ConfigError(f"unknown budget rule {rule!r}") from None
    if value < 1:
        raise ConfigError("explicit budget must be positive")
    return value


@dataclass(frozen=True)
class Cell:
    algorithm: str
    function: str
    dim: int
    tau: float
    repeat: int

    @property
    def key(self) -> str:
        return f"{self.algorithm}/{self.function}/{self.dim}/{self.tau!r}/{self.repeat}"

    @classmethod
    def from_key(cls, key: str) -> "Cell":
        a, f, d, t, r = key.split("/")
        return cls(a, f, int(d), float(t), int(r))


def derive_seed(base_seed: int, *coords) -> int:
    """Stable 63-bit seed from the base seed and arbitrary coordinates."""
    text = "|".join([str(base_seed)] + [repr(c) for c in coords])
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def cell_seed(base_seed: int, cell: Cell) -> int:
    return derive_seed(base_seed, cell.key)


def check_seed_collisions(config: ExperimentConfig) -> None:
    seeds = {}
    for cell in config.cells():
        s = cell_seed(config.base_seed, cell)
        if s in seeds:
            raise ConfigError(f"seed collision between {seeds[s]} and {cell.key}")
        seeds[s] = cell.key


def make_objective(function: str, dim: int, shift_mode: str = "zero", base_seed: int = 0) -> ObjectiveFunction:
    obj = ObjectiveFunction.create(function, dim)
    if shift_mode == "random" and not obj.boundary_optimum:
        rng = np.random.default_rng(derive_seed(base_seed, "shift", function, dim))
        shift = rng.uniform(-4.0, 4.0, size=dim)
        if function == "rosenbrock":
            shift = np.clip(shift, -4.0, 3.0)
        obj = ObjectiveFunction.create(function, dim, shift=shift)
    return obj


@dataclass
class RunRecord:
    algorithm: str
    function: str
    dim: int
    tau: float
    repeat: int
    seed: int
    points: list
    values: list
    flags: list
    feasible: bool
    evals_used: int
    wall_time: float = 0.0
    shift: list = field(default_factory=list)
    error: str = ""
    mean_value: float = field(init=False)

    def __post_init__(self):
        self.mean_value = float(np.mean(self.values)) if self.values else math.nan

    @property
    def cell(self) -> Cell:
        return Cell(self.algorithm, self.function, self.dim, self.tau, self.repeat)

    @property
    def key(self) -> str:
        return self.cell.key

    @property
    def stdev_within_run(self) -> float:
        return float(np.std(self.values)) if self.values else math.nan

    def to_row(self) -> list:
        blob = {
            "points": self.points, "values": self.values, "flags": self.flags,
            "seed": self.seed, "shift": self.shift, "wall_time": self.wall_time, "error": self.error,
        }
        return [self.key, repr(self.mean_value), repr(self.stdev_within_run), str(self.feasible).lower(),
                str(self.evals_used), json.dumps(blob)]

    @classmethod
    def from_row(cls, row: dict) -> "RunRecord":
        cell = Cell.from_key(row["cell_key"])
        blob = json.loads(row["elites"])
        return cls(
            cell.algorithm, cell.function, cell.dim, cell.tau, cell.repeat, blob["seed"],
            blob["points"], blob["values"], blob["flags"], row["feasible"] == "true",
            int(row["evals_used"]), blob.get("wall_time", 0.0), blob.get("shift", []), blob.get("error", ""),
        )


def run_cell(config: ExperimentConfig, cell: Cell) -> RunRecord:
    """Execute one cell; failures are captured in ``RunRecord.error``."""
    seed = cell_seed(config.base_seed, cell)
    objective = make_objective(cell.function, cell.dim, config.shift, config.base_seed)
    budget = total_budget(config.budget_rule, cell.dim, config.m)
    turbo = config.turbo_config()
    start = time.perf_counter()
    try:
        result = run_algorithm(cell.algorithm, objective, cell.tau, budget, config.m, seed,
                               config.max_phases, turbo)
    except Exception as exc:  # recorded, the experiment carries on
        logger.exception("cell %s failed", cell.key)
        return RunRecord(cell.algorithm, cell.function, cell.dim, cell.tau, cell.repeat, seed,
                         [], [], [], False, 0, time.perf_counter() - start,
                         objective.shift.tolist(), f"{type(exc).__name__}: {exc}")
    elites = result.elites
    return RunRecord(
        cell.algorithm, cell.function, cell.dim, cell.tau, cell.repeat, seed,
        [p.tolist() for p in elites.points], list(elites.values), list(elites.flags),
        elites.is_feasible, result.evals_used, time.perf_counter() - start, objective.shift.tolist(),
    )


def run_algorithm(algorithm: str, objective: ObjectiveFunction, tau: float, budget: int, m: int,
                  seed: int, max_phases: int = 5, turbo: DivTurboConfig | None = None):
    """Dispatch to ``run_seq`` / ``run_int`` / ``run_robot``."""
    turbo = turbo or DivTurboConfig()
    if algorithm == "robot":
        return robot.run_robot(objective, m, budget, tau, turbo, base_seed=seed)
    cfg = meta.MetaConfig(total_budget=budget, tau=tau, m=m, max_phases=max_phases,
                          base_seed=seed, turbo=turbo)
    if algorithm == "seq":
        return meta.run_seq(objective, cfg)
    if algorithm == "int":
        return meta.run_int(objective, cfg)
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def read_results(path) -> list:
    path = Path(path)
    if not path.exists():
        return []
    with path.open(newline="") as fh:
        return [RunRecord.from_row(row) for row in csv.DictReader(fh)]


class _Appender:
    """Single writer for the results file; writes the header on first use."""

    def __init__(self, path: Path):
        self.path = path
        new = not path.exists() or path.stat().st_size == 0
        self.fh = path.open("a", newline="")
        self.writer = csv.writer(self.fh)
        if new:
            self.writer.writerow(RESULT_COLUMNS)
            self.fh.flush()

    def write(self, record: RunRecord) -> None:
        self.writer.writerow(record.to_row())
        self.fh.flush()
        os.fsync(self.fh.fileno())

    def close(self) -> None:
        self.fh.close()


def run_experiment(config: ExperimentConfig, out_dir=".", workers: int = 1,
                   results_name: str = "results.csv") -> list:
    """Run every cell not already present in ``out_dir/results_name``.

    Returns all records (previously stored and new).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / results_name
    check_seed_collisions(config)
    existing = read_results(path)
    done = {r.key for r in existing}
    todo = [c for c in config.cells() if c.key not in done]
    logger.info("%d cells done, %d to run", len(done), len(todo))
    new = []
    appender = _Appender(path)
    try:
        if workers <= 1:
            for cell in todo:
                rec = run_cell(config, cell)
                appender.write(rec)
                new.append(rec)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(run_cell, config, c) for c in todo]
                for fut in as_completed(futures):
                    rec = fut.result()
                    appender.write(rec)
                    new.append(rec)
    finally:
        appender.close()
    return existing + new


# --------------------------------------------------------------------------
# Summaries
# --------------------------------------------------------------------------

@dataclass
class SummaryRow:
    tau: float
    function: str
    dim: int
    algorithms: list
    means: dict
    stdevs: dict
    counts: dict
    symbols: dict
    comparison: stats.ComparisonResult | None = None


def _algorithm_order(names) -> list:
    known = [a for a in ALGORITHMS if a in names]
    return known + sorted(set(names) - set(known))


def summarize(records, alpha: float = 0.05) -> list:
    """Per (tau, function, D): mean and st.dev of per-run means for every
    algorithm plus the pairwise significance symbols."""
    ok = [r for r in records if not r.error]
    algos = _algorithm_order({r.algorithm for r in ok})
    groups: dict = {}
    for r in ok:
        groups.setdefault((r.tau, r.function, r.dim), {}).setdefault(r.algorithm, []).append(r.mean_value)
    rows = []
    for (tau, function, dim) in sorted(groups, key=lambda k: (k[0], catalogue().index(k[1]), k[2])):
        by_algo = groups[(tau, function, dim)]
        means = {a: float(np.mean(v)) for a, v in by_algo.items()}
        stdevs = {a: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0 for a, v in by_algo.items()}
        counts = {a: len(v) for a, v in by_algo.items()}
        symbols = {a: "" for a in algos}
        comparison = None
        present = [a for a in algos if counts.get(a, 0) >= 2]
        if len(present) >= 2:
            comparison = stats.pairwise_compare({a: by_algo[a] for a in present}, alpha)
            for a in present:
                symbols[a] = _relabel(comparison, a, algos)
        rows.append(SummaryRow(tau, function, dim, algos, means, stdevs, counts, symbols, comparison))
    return rows


def _relabel(comparison: stats.ComparisonResult, name: str, algos: list) -> str:
    """Significance symbols numbered by the column position in ``algos``."""
    out = []
    for other in algos:
        if other == name or other not in comparison.names:
            continue
        key = (name, other) if (name, other) in comparison.pairwise else (other, name)
        res = comparison.pairwise[key]
        if res.significant:
            out.append(f"{algos.index(other) + 1}{'+' if res.better == name else '-'}")
    return " ".join(out)


def format_summary(rows, fmt: str = "text") -> str:
    """Render summary rows as an aligned text table or as CSV."""
    if not rows:
        return ""
    algos = rows[0].algorithms
    header = ["tau", "function", "D"]
    for i, a in enumerate(algos, 1):
        header += [f"{i}:{a} mean", f"{i}:{a} st.dev", f"{i}:{a} stat"]
    table = []
    for row in rows:
        line = [f"{row.tau:g}", row.function, str(row.dim)]
        for a in algos:
            if a in row.means:
                line += [f"{row.means[a]:.6g}", f"{row.stdevs[a]:.3g}", row.symbols.get(a, "")]
            else:
                line += ["", "", ""]
        table.append(line)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(table)
        return buf.getvalue()
    if fmt != "text":
        raise ValueError("fmt must be 'text' or 'csv'")
    widths = [max(len(r[i]) for r in [header] + table) for i in range(len(header))]
    fmt_line = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()  # noqa: E731
    lines = [fmt_line(header), "  ".join("-" * w for w in widths)]
    lines += [fmt_line(r) for r in table]
    return "\n".join(lines) + "\n"


def write_summary(records, out_dir, alpha: float = 0.05) -> tuple[Path, Path]:
    rows = summarize(records, alpha)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, txt_path = out / "summary.csv", out / "summary.txt"
    csv_path.write_text(format_summary(rows, "csv"))
    txt_path.write_text(format_summary(rows, "text"))
    return csv_path, txt_path


# --------------------------------------------------------------------------
# Scatter data for 2-D problems
# --------------------------------------------------------------------------

def objective_grid(objective: ObjectiveFunction, n: int = SCATTER_GRID) -> np.ndarray:
    """``(n*n, 3)`` rows ``x1, x2, f`` over an ``n x n`` lattice of the domain."""
    lo, hi = objective.domain.lower, objective.domain.upper
    g1 = np.linspace(lo[0], hi[0], n)
    g2 = np.linspace(lo[1], hi[1], n)
    X1, X2 = np.meshgrid(g1, g2, indexing="ij")
    pts = np.column_stack([X1.ravel(), X2.ravel()])
    return np.column_stack([pts, objective(pts)])


def _svg(points, optimum, lo, hi, size: int = 400) -> str:
    def px(p):
        return ((p[0] - lo[0]) / (hi[0] - lo[0]) * size, size - (p[1] - lo[1]) / (hi[1] - lo[1]) * size)

    def cross(p, colour):
        x, y = px(p)
        return (f'<path d="M{x-5:.2f},{y-5:.2f} L{x+5:.2f},{y+5:.2f} M{x-5:.2f},{y+5:.2f} '
                f'L{x+5:.2f},{y-5:.2f}" stroke="{colour}" stroke-width="1.5"/>')

    body = [cross(p, "black") for p in points] + [cross(optimum, "red")]
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">'
            f'<rect width="{size}" height="{size}" fill="white" stroke="grey"/>'
            + "".join(body) + "</svg>\n")


def emit_scatter(records, function: str, out_dir, tau: float | None = None, dim: int = 2,
                 svg: bool = True) -> list:
    """Write grid, points (and optional SVG) files for each matching 2-D cell.

    Returns the list of written paths.
    """
    if dim != 2:
        raise UnsupportedDim("scatter data is only produced for D = 2")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for rec in records:
        if rec.function != function or rec.dim != dim or rec.error:
            continue
        if tau is not None and rec.tau != tau:
            continue
        shift = np.asarray(rec.shift) if rec.shift else None
        objective = ObjectiveFunction.create(function, dim, shift=shift)
        stem = rec.key.replace("/", "_")
        grid_path = out / f"{stem}_grid.csv"
        np.savetxt(grid_path, objective_grid(objective), delimiter=",", header="x1,x2,f",
                   comments="", fmt="%.17g")
        pts_path = out / f"{stem}_points.csv"
        with pts_path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "x1", "x2", "f"])
            for p, v in zip(rec.points, rec.values):
                w.writerow(["elite", repr(float(p[0])), repr(float(p[1])), repr(float(v))])
            o = objective.optimum_location
            w.writerow(["optimum", repr(float(o[0])), repr(float(o[1])), repr(objective.known_optimum_value)])
        written += [grid_path, pts_path]
        if svg:
            svg_path = out / f"{stem}.svg"
            svg_path.write_text(_svg(rec.points, objective.optimum_location,
                                     objective.domain.lower, objective.domain.upper))
            written.append(svg_path)
    return written

