"""The ``simulate`` command: parameter sweeps over the three models.

Modes: ``finite`` (exact cooperation-frequency heatmaps), ``replicator``
(fixed points, flow curves, optional trajectories) and ``abm``
(replicated agent-based campaigns). Configuration is a flat key=value
text file; repeated keys or comma-separated values form lists; keys are
case-insensitive; unknown keys are hard errors. Every invocation writes
a ``run.manifest`` before any result file, recording the resolved
configuration and all seeds, so outputs are reproducible byte-for-byte.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, abm, networks, replicator, wellmixed
from .game import AIBehavior, donation
from .rng import derive_seed


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


class CellError(RuntimeError):
    """A grid cell failed; the message names the cell."""


_BEHAVIOR_NAMES = {
    "samaritan": AIBehavior.SAMARITAN,
    "malicious": AIBehavior.MALICIOUS,
    "discriminatory": AIBehavior.DISCRIMINATORY,
}

_MODES = ("finite", "replicator", "abm")

# sweep defaults standing in for unstated axis ranges; all recorded in
# the manifest so recalibration is a config change
_DEFAULT_M = tuple(range(0, 101, 5))
_DEFAULT_B = (1.1, 1.5) + tuple(float(v) for v in range(2, 11))
_DEFAULT_BETAS = (0.1, 1.0, 5.0)


def behavior_name(b: AIBehavior) -> str:
    return b.name.lower()


# ---------------------------------------------------------------- parsing


def _read_pairs(path: Path) -> list[tuple[str, str]]:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    pairs = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
        key, value = text.split("=", 1)
        key = key.strip().lower()
        value = value.strip()
        if not key:
            raise ConfigError(f"{path}:{line_no}: empty key")
        pairs.append((key, value))
    return pairs


class _Options:
    """Raw key -> values multimap with typed, consuming accessors."""

    def __init__(self, pairs: list[tuple[str, str]]):
        self._raw: dict[str, list[str]] = {}
        for key, value in pairs:
            parts = [p.strip() for p in value.split(",") if p.strip()]
            self._raw.setdefault(key, []).extend(parts if parts else [value])
        self._seen: set[str] = set()

    def _single(self, key: str) -> str | None:
        self._seen.add(key)
        values = self._raw.get(key)
        if values is None:
            return None
        if len(values) != 1:
            raise ConfigError(f"key '{key}' expects a single value, got {values}")
        return values[0]

    def _many(self, key: str) -> list[str] | None:
        self._seen.add(key)
        return self._raw.get(key)

    def take_str(self, key: str, default: str | None = None) -> str | None:
        value = self._single(key)
        return default if value is None else value

    def take_int(self, key: str, default: int | None = None) -> int | None:
        value = self._single(key)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"key '{key}' expects an integer, got {value!r}") from None

    def take_float(self, key: str, default: float | None = None) -> float | None:
        value = self._single(key)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"key '{key}' expects a number, got {value!r}") from None

    def take_bool(self, key: str, default: bool) -> bool:
        value = self._single(key)
        if value is None:
            return default
        lowered = value.lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ConfigError(f"key '{key}' expects true/false, got {value!r}")

    def take_floats(self, key: str, default: tuple[float, ...]) -> tuple[float, ...]:
        values = self._many(key)
        if values is None:
            return default
        try:
            return tuple(float(v) for v in values)
        except ValueError:
            raise ConfigError(f"key '{key}' expects numbers, got {values}") from None

    def take_ints(self, key: str, default: tuple[int, ...]) -> tuple[int, ...]:
        values = self._many(key)
        if values is None:
            return default
        try:
            return tuple(int(v) for v in values)
        except ValueError:
            raise ConfigError(f"key '{key}' expects integers, got {values}") from None

    def take_behaviors(self, key: str,
                       default: tuple[AIBehavior, ...]) -> tuple[AIBehavior, ...]:
        values = self._many(key)
        if values is None:
            return default
        out = []
        for v in values:
            try:
                out.append(_BEHAVIOR_NAMES[v.lower()])
            except KeyError:
                raise ConfigError(
                    f"key '{key}': unknown behavior {v!r}; "
                    f"choose from {sorted(_BEHAVIOR_NAMES)}"
                ) from None
        return tuple(out)

    def finish(self) -> None:
        unknown = set(self._raw) - self._seen
        if unknown:
            raise ConfigError(
                f"unknown key(s): {', '.join(sorted(unknown))}"
            )


def _check_mode(opts: _Options, mode: str) -> None:
    declared = opts.take_str("mode")
    if declared is not None and declared.lower() != mode:
        raise ConfigError(
            f"config declares mode={declared!r} but the '{mode}' command was invoked"
        )


# ------------------------------------------------------------- mode specs


@dataclass(frozen=True)
class FiniteSpec:
    n: int
    c: float
    m_values: tuple[int, ...]
    b_values: tuple[float, ...]
    betas: tuple[float, ...]
    behaviors: tuple[AIBehavior, ...]
    beta_ai: float | None
    out: Path
    seed: int
    workers: int


@dataclass(frozen=True)
class ReplicatorSpec:
    c: float
    alphas: tuple[float, ...]
    b_values: tuple[float, ...]
    betas: tuple[float, ...]
    behaviors: tuple[AIBehavior, ...]
    beta_ai: float | None
    x0_values: tuple[float, ...]
    t_end: float
    dt: float
    curve_points: int
    out: Path
    seed: int
    workers: int


@dataclass(frozen=True)
class AbmSpec:
    topology: str
    rows: int
    cols: int
    periodic: bool
    nodes: int
    ba_m: int
    ba_graphs: int
    b: float
    c: float
    betas: tuple[float, ...]
    behaviors: tuple[AIBehavior, ...]
    beta_ai: float | None
    ai_fractions: tuple[float, ...]
    steps: int
    runs: int
    sample_window: int
    sample_interval: int
    snapshot_steps: tuple[int, ...]
    ai_placement: str
    out: Path
    seed: int
    workers: int


def parse_config(path: Path | None, mode: str, out: Path, seed: int | None,
                 workers: int):
    """Resolve a config file (or pure defaults) into a mode spec."""
    if mode not in _MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    opts = _Options(_read_pairs(path) if path is not None else [])
    _check_mode(opts, mode)
    cfg_seed = opts.take_int("seed")
    master_seed = seed if seed is not None else (cfg_seed if cfg_seed is not None else 0)
    common = dict(out=out, seed=master_seed, workers=max(1, workers))
    if mode == "finite":
        spec = _finite_spec(opts, common)
    elif mode == "replicator":
        spec = _replicator_spec(opts, common)
    else:
        spec = _abm_spec(opts, common)
    opts.finish()
    return spec


def _check_donation(b_values, c, key: str) -> None:
    for b in b_values:
        if not b > c > 0:
            raise ConfigError(
                f"donation game requires b > c > 0; key '{key}' has b={b} with c={c}"
            )


def _finite_spec(opts: _Options, common: dict) -> FiniteSpec:
    n = opts.take_int("n", 100)
    if n < 2:
        raise ConfigError("key 'n': need at least 2 humans")
    c = opts.take_float("c", 1.0)
    m_values = opts.take_ints("m_values", _DEFAULT_M)
    if any(m < 0 for m in m_values):
        raise ConfigError("key 'm_values': AI counts must be >= 0")
    b_values = opts.take_floats("b_values", _DEFAULT_B)
    _check_donation(b_values, c, "b_values")
    betas = opts.take_floats("betas", _DEFAULT_BETAS)
    if any(beta < 0 for beta in betas):
        raise ConfigError("key 'betas': selection intensities must be >= 0")
    behaviors = opts.take_behaviors(
        "behaviors", (AIBehavior.SAMARITAN, AIBehavior.DISCRIMINATORY))
    beta_ai = opts.take_float("beta_ai")
    return FiniteSpec(n=n, c=c, m_values=tuple(sorted(m_values)),
                      b_values=tuple(sorted(b_values)), betas=betas,
                      behaviors=behaviors, beta_ai=beta_ai, **common)


def _replicator_spec(opts: _Options, common: dict) -> ReplicatorSpec:
    c = opts.take_float("c", 1.0)
    alphas = opts.take_floats("alphas", (0.1, 0.5))
    if any(not 0.0 <= a < 1.0 for a in alphas):
        raise ConfigError("key 'alphas': AI fractions must lie in [0, 1)")
    b_values = opts.take_floats("b_values", (1.5, 2.0, 4.0, 6.0, 8.0, 10.0))
    _check_donation(b_values, c, "b_values")
    betas = opts.take_floats("betas", _DEFAULT_BETAS)
    if any(beta < 0 for beta in betas):
        raise ConfigError("key 'betas': selection intensities must be >= 0")
    behaviors = opts.take_behaviors("behaviors", (AIBehavior.SAMARITAN,))
    if AIBehavior.MALICIOUS in behaviors:
        raise ConfigError(
            "key 'behaviors': no replicator equation exists for malicious AI"
        )
    x0_values = opts.take_floats("x0_values", ())
    if any(not 0.0 <= x <= 1.0 for x in x0_values):
        raise ConfigError("key 'x0_values': starting fractions must lie in [0, 1]")
    t_end = opts.take_float("t_end", 200.0)
    dt = opts.take_float("dt", 0.01)
    if dt <= 0 or t_end < 0:
        raise ConfigError("keys 't_end'/'dt': need t_end >= 0 and dt > 0")
    curve_points = opts.take_int("curve_points", 1001)
    if curve_points < 2:
        raise ConfigError("key 'curve_points': need at least 2 points")
    beta_ai = opts.take_float("beta_ai")
    return ReplicatorSpec(c=c, alphas=alphas, b_values=b_values, betas=betas,
                          behaviors=behaviors, beta_ai=beta_ai,
                          x0_values=x0_values, t_end=t_end, dt=dt,
                          curve_points=curve_points, **common)


def _abm_spec(opts: _Options, common: dict) -> AbmSpec:
    topology = (opts.take_str("topology", "lattice") or "lattice").lower()
    if topology not in ("lattice", "complete", "ba"):
        raise ConfigError("key 'topology': choose lattice, complete or ba")
    rows = opts.take_int("rows", 50)
    cols = opts.take_int("cols", 50)
    periodic = opts.take_bool("periodic", False)
    nodes = opts.take_int("nodes", 1000)
    ba_m = opts.take_int("ba_m", 2)
    ba_graphs = opts.take_int("ba_graphs", 10)
    if topology == "lattice":
        if rows < 2 or cols < 2:
            raise ConfigError("keys 'rows'/'cols': lattice dimensions must be >= 2")
        node_count = rows * cols
    else:
        if nodes < 2:
            raise ConfigError("key 'nodes': need at least 2 nodes")
        if topology == "ba":
            if ba_m < 1 or nodes <= ba_m:
                raise ConfigError("keys 'nodes'/'ba_m': need nodes > ba_m >= 1")
            if ba_graphs < 1:
                raise ConfigError("key 'ba_graphs': need at least one network")
        node_count = nodes
    b = opts.take_float("b", 2.0)
    c = opts.take_float("c", 1.0)
    _check_donation((b,), c, "b")
    betas = opts.take_floats("betas", _DEFAULT_BETAS)
    if any(beta < 0 for beta in betas):
        raise ConfigError("key 'betas': selection intensities must be >= 0")
    behaviors = opts.take_behaviors("behaviors", (AIBehavior.SAMARITAN,))
    beta_ai = opts.take_float("beta_ai")
    ai_fractions = opts.take_floats("ai_fractions", (0.0, 0.1, 0.2, 0.3, 0.4))
    if any(not 0.0 <= f < 1.0 for f in ai_fractions):
        raise ConfigError("key 'ai_fractions': fractions must lie in [0, 1)")
    steps = opts.take_int("steps", 100_000)
    if steps < 1:
        raise ConfigError("key 'steps': need at least one step")
    runs = opts.take_int("runs", 200 if topology == "ba" else 30)
    if runs < 1:
        raise ConfigError("key 'runs': need at least one run")
    sample_window = opts.take_int("sample_window", min(1000, steps))
    sample_interval = opts.take_int("sample_interval", 100)
    if not 1 <= sample_window <= steps:
        raise ConfigError("key 'sample_window': must lie in [1, steps]")
    if sample_interval < 1:
        raise ConfigError("key 'sample_interval': must be >= 1")
    if topology == "lattice":
        default_snaps = tuple(sorted({s for s in (0, 5000, 10_000, steps)
                                      if s <= steps}))
    else:
        default_snaps = ()
    snapshot_steps = opts.take_ints("snapshot_steps", default_snaps)
    if topology != "lattice" and snapshot_steps:
        raise ConfigError("key 'snapshot_steps': snapshots need a lattice topology")
    if any(not 0 <= s <= steps for s in snapshot_steps):
        raise ConfigError("key 'snapshot_steps': steps must lie in [0, steps]")
    ai_placement = (opts.take_str("ai_placement", "uniform") or "uniform").lower()
    if ai_placement not in ("uniform", "hub", "hub-biased"):
        raise ConfigError("key 'ai_placement': choose uniform or hub")
    return AbmSpec(topology=topology, rows=rows, cols=cols, periodic=periodic,
                   nodes=nodes, ba_m=ba_m, ba_graphs=ba_graphs, b=b, c=c,
                   betas=betas, behaviors=behaviors, beta_ai=beta_ai,
                   ai_fractions=ai_fractions, steps=steps, runs=runs,
                   sample_window=sample_window, sample_interval=sample_interval,
                   snapshot_steps=tuple(sorted(set(snapshot_steps))),
                   ai_placement=ai_placement, **common)


# ---------------------------------------------------------------- outputs


def _fmt(x: float) -> str:
    """Compact float for file names and manifest values."""
    return f"{x:g}"


def _csv_num(x) -> str:
    value = float(x)
    return repr(int(value)) if value.is_integer() and abs(value) < 1e15 else repr(value)


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class Manifest:
    """Flat key=value provenance record, written before any result."""

    def __init__(self, path: Path):
        self.path = path
        self.entries: list[tuple[str, str]] = []

    def add(self, key: str, value) -> None:
        if isinstance(value, float):
            value = _fmt(value)
        elif isinstance(value, (list, tuple)):
            value = ",".join(
                _fmt(v) if isinstance(v, float) else str(v) for v in value)
        self.entries.append((key, str(value)))

    def write(self) -> None:
        lines = [f"{k} = {v}\n" for k, v in self.entries]
        self.path.write_text("".join(lines), encoding="utf-8", newline="\n")

    def finish(self) -> None:
        with self.path.open("a", encoding="utf-8", newline="\n") as fh:
            fh.write(f"finished_utc = {_utc_now()}\n")


def _common_manifest(spec, mode: str, out_dir: Path) -> Manifest:
    manifest = Manifest(out_dir / "run.manifest")
    manifest.add("tool", f"coopsim {__version__}")
    manifest.add("mode", mode)
    manifest.add("created_utc", _utc_now())
    manifest.add("master_seed", spec.seed)
    manifest.add("workers", spec.workers)
    for key, value in sorted(vars(spec).items()):
        if key in ("out", "seed", "workers"):
            continue
        if key == "behaviors":
            value = ",".join(behavior_name(b) for b in value)
        manifest.add(f"config.{key}", value)
    return manifest


def _write_csv(path: Path, header: str, rows: list[str]) -> None:
    path.write_text(header + "\n" + "".join(r + "\n" for r in rows),
                    encoding="utf-8", newline="\n")


# ------------------------------------------------------------ mode drivers


def run_finite(spec: FiniteSpec) -> list[Path]:
    """One heatmap CSV per (behavior, beta): columns M, b, coop_frequency."""
    out_dir = spec.out
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = [(behavior, beta) for behavior in spec.behaviors for beta in spec.betas]
    names = {cell: f"finite_{behavior_name(cell[0])}_beta{_fmt(cell[1])}.csv"
             for cell in cells}
    manifest = _common_manifest(spec, "finite", out_dir)
    for i, cell in enumerate(cells):
        manifest.add(f"cell.{i}.id", names[cell].removesuffix(".csv"))
    for name in names.values():
        manifest.add("output", name)
    manifest.write()

    written = []
    for behavior, beta in cells:
        rows = []
        for m in spec.m_values:
            for b in spec.b_values:
                try:
                    cfg = wellmixed.WellMixedConfig(
                        n=spec.n, m=m, beta_h=beta, ai=behavior,
                        matrix=donation(b, spec.c), beta_ai=spec.beta_ai)
                    freq = wellmixed.cooperation_frequency(cfg)
                except Exception as exc:
                    raise CellError(
                        f"finite cell {behavior_name(behavior)} beta={_fmt(beta)} "
                        f"M={m} b={_fmt(b)}: {exc}") from exc
                rows.append(f"{m},{_csv_num(b)},{_csv_num(freq)}")
        path = out_dir / names[(behavior, beta)]
        _write_csv(path, "M,b,coop_frequency", rows)
        written.append(path)
    manifest.finish()
    return written


def run_replicator(spec: ReplicatorSpec) -> list[Path]:
    """Fixed-point table plus flow curves and optional trajectories."""
    out_dir = spec.out
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = [(behavior, alpha, beta, b)
             for behavior in spec.behaviors
             for alpha in spec.alphas
             for beta in spec.betas
             for b in spec.b_values]

    def cell_tag(cell) -> str:
        behavior, alpha, beta, b = cell
        return (f"{behavior_name(behavior)}_alpha{_fmt(alpha)}"
                f"_beta{_fmt(beta)}_b{_fmt(b)}")

    manifest = _common_manifest(spec, "replicator", out_dir)
    outputs = [Path("fixed_points.csv")]
    for i, cell in enumerate(cells):
        manifest.add(f"cell.{i}.id", cell_tag(cell))
        outputs.append(Path(f"curve_{cell_tag(cell)}.csv"))
        for x0 in spec.x0_values:
            outputs.append(Path(f"traj_{cell_tag(cell)}_x0{_fmt(x0)}.csv"))
    for path in outputs:
        manifest.add("output", path.name)
    manifest.write()

    written = []
    fp_rows = []
    xs = np.linspace(0.0, 1.0, spec.curve_points)
    for cell in cells:
        behavior, alpha, beta, b = cell
        tag = cell_tag(cell)
        try:
            matrix = donation(b, spec.c)
            cfg = replicator.ReplicatorConfig(
                alpha=alpha, beta_h=beta, ai=behavior, matrix=matrix,
                beta_ai=spec.beta_ai)
            beta_ai = spec.beta_ai if spec.beta_ai is not None else beta
            alpha_c = (_csv_num(replicator.critical_alpha(beta, beta_ai, matrix))
                       if behavior == AIBehavior.SAMARITAN else "")
            for fp in replicator.find_fixed_points(cfg):
                fp_rows.append(
                    f"{behavior_name(behavior)},{_csv_num(alpha)},{_csv_num(beta)},"
                    f"{_csv_num(b)},{alpha_c},{_csv_num(fp.x)},{fp.stability}")
            ys = replicator.rhs(cfg, xs)
            curve_rows = [f"{_csv_num(x)},{_csv_num(y)}" for x, y in zip(xs, ys)]
            curve_path = out_dir / f"curve_{tag}.csv"
            _write_csv(curve_path, "x,dxdt", curve_rows)
            written.append(curve_path)
            for x0 in spec.x0_values:
                traj = replicator.integrate(cfg, x0, spec.t_end, spec.dt)
                traj_rows = [f"{_csv_num(t)},{_csv_num(x)}" for t, x in traj]
                traj_path = out_dir / f"traj_{tag}_x0{_fmt(x0)}.csv"
                _write_csv(traj_path, "t,x", traj_rows)
                written.append(traj_path)
        except CellError:
            raise
        except Exception as exc:
            raise CellError(f"replicator cell {tag}: {exc}") from exc
    fp_path = out_dir / "fixed_points.csv"
    _write_csv(fp_path, "behavior,alpha,beta,b,alpha_c,x,stability", fp_rows)
    written.insert(0, fp_path)
    manifest.finish()
    return written


def _abm_graphs(spec: AbmSpec, out_dir: Path) -> tuple[list, list[Path]]:
    """Build the interaction graph(s); BA networks are also saved."""
    if spec.topology == "lattice":
        return [networks.square_lattice(spec.rows, spec.cols, spec.periodic)], []
    if spec.topology == "complete":
        return [networks.complete(spec.nodes)], []
    graphs = []
    paths = []
    net_dir = out_dir / "networks"
    net_dir.mkdir(parents=True, exist_ok=True)
    for i in range(spec.ba_graphs):
        g = networks.barabasi_albert(spec.nodes, spec.ba_m,
                                     derive_seed(spec.seed, 1_000_000 + i))
        graphs.append(g)
        path = net_dir / f"ba_{i}.txt"
        networks.save_edgelist(g, path)
        paths.append(path)
    return graphs, paths


@dataclass(frozen=True)
class _AbmCell:
    index: int
    tag: str
    behavior: AIBehavior
    beta: float
    fraction: float
    ai_count: int
    seed: int


def _abm_cell_task(spec: AbmSpec, cell: _AbmCell, graphs: list):
    """Run one grid cell; returns everything the writer needs."""
    base = abm.SimConfig(
        graph=graphs[0], ai_count=cell.ai_count, ai_behavior=cell.behavior,
        matrix=donation(spec.b, spec.c), beta_h=cell.beta, beta_ai=spec.beta_ai,
        steps=spec.steps, seed=0, sample_window=spec.sample_window,
        sample_interval=spec.sample_interval,
        ai_placement="hub" if spec.ai_placement == "hub-biased" else spec.ai_placement,
    )
    captured: dict = {}

    def keep_first(i: int, result: abm.RunResult) -> None:
        if i == 0:
            captured["series"] = result.series
            captured["snapshots"] = result.snapshots

    agg = abm.replicate(
        base, spec.runs, cell.seed,
        graphs=graphs if spec.topology == "ba" else None,
        snapshot_steps=spec.snapshot_steps, on_result=keep_first)
    return agg, captured["series"], captured["snapshots"]


_AGG_HEADER = ("topology,behavior,beta_h,beta_ai,b,c,ai_fraction,ai_count,"
               "nodes,num_humans,steps,runs,mean_coop,std_coop,cell_seed")


def run_abm(spec: AbmSpec) -> list[Path]:
    """Replicated campaign per (behavior, beta, ai_fraction) grid cell."""
    out_dir = spec.out
    out_dir.mkdir(parents=True, exist_ok=True)
    graphs, graph_paths = _abm_graphs(spec, out_dir)
    node_count = graphs[0].node_count

    cells = []
    for behavior in spec.behaviors:
        for beta in spec.betas:
            for fraction in spec.ai_fractions:
                index = len(cells)
                ai_count = round(fraction * node_count)
                if ai_count >= node_count:
                    raise ConfigError(
                        f"key 'ai_fractions': fraction {fraction} leaves no humans")
                tag = (f"{behavior_name(behavior)}_beta{_fmt(beta)}"
                       f"_f{_fmt(fraction)}")
                cells.append(_AbmCell(index=index, tag=tag, behavior=behavior,
                                      beta=beta, fraction=fraction,
                                      ai_count=ai_count,
                                      seed=derive_seed(spec.seed, index)))

    manifest = _common_manifest(spec, "abm", out_dir)
    manifest.add("node_count", node_count)
    for path in graph_paths:
        manifest.add("output", f"networks/{path.name}")
    manifest.add("output", "aggregate.csv")
    for cell in cells:
        manifest.add(f"cell.{cell.index}.id", cell.tag)
        manifest.add(f"cell.{cell.index}.seed", cell.seed)
        manifest.add(f"cell.{cell.index}.run_seeds",
                     [derive_seed(cell.seed, i) for i in range(spec.runs)])
        manifest.add("output", f"ts_{cell.tag}.csv")
        for s in spec.snapshot_steps:
            manifest.add("output", f"snap_{cell.tag}_step{s}.txt")
    manifest.write()

    written = list(graph_paths)
    agg_path = out_dir / "aggregate.csv"

    def write_cell(cell: _AbmCell, agg, series, snapshots, agg_fh) -> None:
        ts_path = out_dir / f"ts_{cell.tag}.csv"
        abm.write_timeseries_csv(series, ts_path)
        written.append(ts_path)
        for step_no, grid in sorted(snapshots.items()):
            snap_path = out_dir / f"snap_{cell.tag}_step{step_no}.txt"
            snap_path.write_text(grid, encoding="utf-8", newline="\n")
            written.append(snap_path)
        num_humans = node_count - cell.ai_count
        beta_ai = spec.beta_ai if spec.beta_ai is not None else cell.beta
        agg_fh.write(
            f"{spec.topology},{behavior_name(cell.behavior)},{_csv_num(cell.beta)},"
            f"{_csv_num(beta_ai)},{_csv_num(spec.b)},{_csv_num(spec.c)},"
            f"{_csv_num(cell.fraction)},{cell.ai_count},{node_count},{num_humans},"
            f"{spec.steps},{spec.runs},{_csv_num(agg.mean)},{_csv_num(agg.std)},"
            f"{cell.seed}\n")
        agg_fh.flush()

    with agg_path.open("w", encoding="utf-8", newline="\n") as agg_fh:
        agg_fh.write(_AGG_HEADER + "\n")
        agg_fh.flush()
        if spec.workers > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=spec.workers) as pool:
                futures = [pool.submit(_abm_cell_task, spec, cell, graphs)
                           for cell in cells]
                for cell, future in zip(cells, futures):
                    try:
                        agg, series, snapshots = future.result()
                    except Exception as exc:
                        raise CellError(f"abm cell {cell.tag}: {exc}") from exc
                    write_cell(cell, agg, series, snapshots, agg_fh)
        else:
            for cell in cells:
                try:
                    agg, series, snapshots = _abm_cell_task(spec, cell, graphs)
                except Exception as exc:
                    raise CellError(f"abm cell {cell.tag}: {exc}") from exc
                write_cell(cell, agg, series, snapshots, agg_fh)
    written.append(agg_path)
    manifest.finish()
    return written


# -------------------------------------------------------------- entry point


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Cooperation dynamics in hybrid human-AI populations: "
                    "exact finite-population analytics, replicator dynamics, "
                    "and networked agent-based simulation.",
    )
    parser.add_argument("--version", action="version",
                        version=f"coopsim {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode, blurb in (
        ("finite", "exact cooperation-frequency sweeps (well-mixed analytics)"),
        ("replicator", "mean-field fixed points, flow curves, trajectories"),
        ("abm", "replicated agent-based campaigns on a graph"),
    ):
        p = sub.add_parser(mode, help=blurb)
        p.add_argument("--config", type=Path, default=None,
                       help="key=value config file (defaults apply without it)")
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (default: ./out)")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (overrides the config file; default 0)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                       help="worker processes for grid cells (abm mode)")
    args = parser.parse_args(argv)

    try:
        spec = parse_config(args.config, args.mode, args.out, args.seed,
                            args.workers)
        runner = {"finite": run_finite, "replicator": run_replicator,
                  "abm": run_abm}[args.mode]
        runner(spec)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
