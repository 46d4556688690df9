"""Agent-based simulation of the hybrid population on a graph.

Each node is either a human (cooperate or defect, may imitate) or an AI
agent with a fixed policy. Fitness is the sum of one-shot payoffs
against all neighbors. One elementary step picks a focal human uniformly
at random, then a role model uniformly among the focal's neighbors; the
focal adopts the role model's exposed action with the Fermi probability
on the fitness difference (beta_h for human role models, beta_ai for AI
ones). A discriminatory AI mirrors its observer, so imitating it can
never change the focal's strategy and the event is a structural no-op.

The inner loop lives in a swappable kernel (compiled or pure Python,
bit-identical); this module owns configuration, initialization, sampling
and aggregation. AI positions and policies never change during a run,
and fitness is refreshed locally (focal plus neighbors) on every
adopted imitation, which the from-scratch recomputation invariant in
the test suite validates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import kernel
from ._kernel_py import _pay
from .game import AIBehavior, PayoffMatrix, Strategy
from .networks import Graph
from .rng import SplitMix64, derive_seed

_PLACEMENTS = ("uniform", "hub")


@dataclass(frozen=True)
class SimConfig:
    """Full specification of one simulation run."""

    graph: Graph
    ai_count: int
    ai_behavior: AIBehavior
    matrix: PayoffMatrix
    beta_h: float
    steps: int
    seed: int
    beta_ai: float | None = None
    sample_window: int | None = None  # defaults to min(1000, steps)
    sample_interval: int = 100
    ai_placement: str = "uniform"

    def __post_init__(self):
        if not 0 <= self.ai_count < self.graph.node_count:
            raise ValueError("ai_count must satisfy 0 <= M < node_count")
        if self.beta_h < 0.0:
            raise ValueError("beta_h must be >= 0")
        if self.beta_ai is None:
            object.__setattr__(self, "beta_ai", self.beta_h)
        elif self.beta_ai < 0.0:
            raise ValueError("beta_ai must be >= 0")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.sample_window is None:
            object.__setattr__(self, "sample_window", min(1000, self.steps))
        if not 1 <= self.sample_window <= self.steps:
            raise ValueError("sample_window must lie in [1, steps]")
        if self.sample_interval < 1:
            raise ValueError("sample_interval must be >= 1")
        placement = self.ai_placement
        if placement == "hub-biased":
            placement = "hub"
            object.__setattr__(self, "ai_placement", placement)
        if placement not in _PLACEMENTS:
            raise ValueError(f"ai_placement must be one of {_PLACEMENTS}")


@dataclass(frozen=True)
class AgentRole:
    """Either a human with a strategy or an AI with a fixed behavior."""

    strategy: Strategy | None = None
    behavior: AIBehavior | None = None

    def __post_init__(self):
        if (self.strategy is None) == (self.behavior is None):
            raise ValueError("role is either exactly a strategy or a behavior")

    @classmethod
    def human(cls, strategy: Strategy) -> "AgentRole":
        return cls(strategy=strategy)

    @classmethod
    def ai(cls, behavior: AIBehavior) -> "AgentRole":
        return cls(behavior=behavior)

    @property
    def is_ai(self) -> bool:
        return self.behavior is not None

    @property
    def action_code(self) -> int:
        """0 cooperate, 1 defect, 2 mirror."""
        if self.strategy is not None:
            return int(self.strategy)
        return int(self.behavior)


def pairwise_payoff(role_i: AgentRole, role_j: AgentRole, m: PayoffMatrix) -> float:
    """Payoff to i for one encounter between i and j.

    Humans play their strategy, Samaritans cooperate, Malicious AIs
    defect, and a discriminatory AI mirrors its opponent's resolved
    action; two discriminators cooperate with each other.
    """
    return _pay(role_i.action_code, role_j.action_code, m.r, m.s, m.t, m.p)


@dataclass
class SimState:
    """Mutable run state; arrays are shared with the stepping kernel."""

    graph: Graph
    ai_behavior: AIBehavior
    indptr: np.ndarray
    indices: np.ndarray
    action: np.ndarray       # int8 exposed action per node (0/1/2)
    is_ai: np.ndarray        # uint8 flag per node
    fitness: np.ndarray      # float64 payoff sum per node
    humans: np.ndarray       # int64 indices of human nodes
    coop_count: int
    step_index: int
    rng_state: int

    @property
    def num_humans(self) -> int:
        return int(self.humans.shape[0])

    @property
    def human_coop_fraction(self) -> float:
        return self.coop_count / self.num_humans

    def role(self, node: int) -> AgentRole:
        if self.is_ai[node]:
            return AgentRole.ai(self.ai_behavior)
        return AgentRole.human(Strategy(int(self.action[node])))

    def ai_nodes(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.is_ai)]


def compute_fitness(indptr: np.ndarray, indices: np.ndarray,
                    action: np.ndarray, m: PayoffMatrix) -> np.ndarray:
    """From-scratch fitness of every node under the current actions."""
    n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.float64)
    act = action.tolist()
    idx = indices.tolist()
    ptr = indptr.tolist()
    for i in range(n):
        total = 0.0
        ai = act[i]
        for pos in range(ptr[i], ptr[i + 1]):
            total += _pay(ai, act[idx[pos]], m.r, m.s, m.t, m.p)
        out[i] = total
    return out


def initialize(cfg: SimConfig, *, ai_nodes: Iterable[int] | None = None,
               strategies: dict[int, Strategy] | None = None) -> SimState:
    """Fresh run state: AI placement, random C/D humans, full fitness.

    The RNG is seeded from cfg.seed; placement draws come first, then
    one strategy draw per human in node order, so the whole run is a
    pure function of the config. ``ai_nodes`` and ``strategies`` pin
    positions or strategies explicitly (used by tests); pinned choices
    consume no draws.
    """
    g = cfg.graph
    n = g.node_count
    if any(len(nbrs) == 0 for nbrs in g.adjacency):
        raise ValueError("graph must have no isolated nodes")
    rng = SplitMix64(cfg.seed)

    if ai_nodes is not None:
        ai_list = sorted(int(i) for i in ai_nodes)
        if len(ai_list) != cfg.ai_count:
            raise ValueError("ai_nodes must match cfg.ai_count")
    elif cfg.ai_placement == "hub":
        by_degree = sorted(range(n), key=lambda i: (-len(g.adjacency[i]), i))
        ai_list = sorted(by_degree[:cfg.ai_count])
    else:
        pool = list(range(n))
        for i in range(cfg.ai_count):
            j = i + rng.randbelow(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        ai_list = sorted(pool[:cfg.ai_count])

    is_ai = np.zeros(n, dtype=np.uint8)
    is_ai[ai_list] = 1
    action = np.empty(n, dtype=np.int8)
    ai_code = int(cfg.ai_behavior)
    for node in range(n):
        if is_ai[node]:
            action[node] = ai_code
        elif strategies is not None and node in strategies:
            action[node] = int(strategies[node])
        else:
            action[node] = 0 if rng.uniform() < 0.5 else 1

    indptr, indices = g.csr()
    fitness = compute_fitness(indptr, indices, action, cfg.matrix)
    humans = np.flatnonzero(is_ai == 0).astype(np.int64)
    coop = int(np.sum(action[humans] == 0))
    return SimState(
        graph=g,
        ai_behavior=cfg.ai_behavior,
        indptr=indptr,
        indices=indices,
        action=action,
        is_ai=is_ai,
        fitness=fitness,
        humans=humans,
        coop_count=coop,
        step_index=0,
        rng_state=rng.state,
    )


@dataclass
class TimeSeries:
    """Sampled observables; fractions are over humans only.

    ``coop_count`` keeps the raw cooperator counts alongside the
    fractions so either normalization can be plotted.
    """

    steps: list[int] = field(default_factory=list)
    coop_frac: list[float] = field(default_factory=list)
    def_frac: list[float] = field(default_factory=list)
    mean_fitness: list[float] = field(default_factory=list)
    coop_count: list[int] = field(default_factory=list)

    def append(self, step: int, coop: int, num_humans: int, mean_fit: float):
        frac = coop / num_humans
        self.steps.append(step)
        self.coop_frac.append(frac)
        self.def_frac.append(1.0 - frac)
        self.mean_fitness.append(mean_fit)
        self.coop_count.append(coop)


@dataclass(frozen=True)
class RunSummary:
    """Per-run statistics over the final sampling window."""

    coop_frac_mean: float
    coop_count_mean: float
    final_coop_frac: float
    num_humans: int
    steps: int


@dataclass
class RunResult:
    series: TimeSeries
    state: SimState
    summary: RunSummary
    snapshots: dict[int, str]
    visits: np.ndarray
    ups: np.ndarray
    downs: np.ndarray


def step(state: SimState, cfg: SimConfig, backend: str | None = None) -> SimState:
    """Advance the state by one elementary event, in place."""
    return _advance(state, cfg, 1, cfg.steps + 1, kernel.get_run_steps(backend))[0]


def _advance(state: SimState, cfg: SimConfig, n_steps: int, window_start: int,
             run_steps, visits=None, ups=None, downs=None):
    size = state.num_humans + 1
    if visits is None:
        visits = np.zeros(size, dtype=np.int64)
        ups = np.zeros(size, dtype=np.int64)
        downs = np.zeros(size, dtype=np.int64)
    m = cfg.matrix
    rng_state, coop, wsum = run_steps(
        state.indptr, state.indices, state.action, state.is_ai,
        state.fitness, state.humans,
        m.r, m.s, m.t, m.p, cfg.beta_h, cfg.beta_ai,
        n_steps, state.rng_state, state.coop_count,
        state.step_index, window_start,
        visits, ups, downs,
    )
    state.rng_state = int(rng_state)
    state.coop_count = int(coop)
    state.step_index += n_steps
    return state, int(wsum)


def snapshot(state: SimState, rows: int, cols: int) -> str:
    """Row-major character grid: 'C' cooperator, 'D' defector, 'A' AI."""
    g = state.graph
    if g.kind != "lattice" or g.rows != rows or g.cols != cols:
        raise ValueError("snapshot requires a lattice graph with matching dimensions")
    lines = []
    for r in range(rows):
        chars = []
        for c in range(cols):
            i = r * cols + c
            if state.is_ai[i]:
                chars.append("A")
            else:
                chars.append("C" if state.action[i] == 0 else "D")
        lines.append("".join(chars))
    return "\n".join(lines) + "\n"


def run(cfg: SimConfig, *, snapshot_steps: Iterable[int] = (),
        backend: str | None = None) -> RunResult:
    """Execute a full run: cfg.steps events with sampling and summary.

    The time series is sampled at step 0, every cfg.sample_interval
    steps, and at the final step. The summary averages the human
    cooperation fraction over every one of the final cfg.sample_window
    steps (not just sampled ones). Snapshots are captured at the
    requested step indices (lattice graphs only).
    """
    snap_steps = sorted(set(int(s) for s in snapshot_steps))
    if snap_steps and (snap_steps[0] < 0 or snap_steps[-1] > cfg.steps):
        raise ValueError("snapshot steps must lie in [0, steps]")
    run_steps = kernel.get_run_steps(backend)
    state = initialize(cfg)
    num_humans = state.num_humans
    window_start = cfg.steps - cfg.sample_window

    sample_points = set(range(0, cfg.steps + 1, cfg.sample_interval))
    sample_points.add(cfg.steps)
    cuts = sorted(sample_points | set(snap_steps))

    size = num_humans + 1
    visits = np.zeros(size, dtype=np.int64)
    ups = np.zeros(size, dtype=np.int64)
    downs = np.zeros(size, dtype=np.int64)

    series = TimeSeries()
    snapshots: dict[int, str] = {}
    window_sum = 0

    def observe(at: int) -> None:
        if at in sample_points:
            mean_fit = float(np.mean(state.fitness[state.humans]))
            series.append(at, state.coop_count, num_humans, mean_fit)
        if at in snap_steps:
            snapshots[at] = snapshot(state, cfg.graph.rows, cfg.graph.cols)

    observe(0)
    done = 0
    for cut in cuts:
        if cut == 0:
            continue
        state, wsum = _advance(state, cfg, cut - done, window_start,
                               run_steps, visits, ups, downs)
        window_sum += wsum
        done = cut
        observe(cut)

    count_mean = window_sum / cfg.sample_window
    summary = RunSummary(
        coop_frac_mean=count_mean / num_humans,
        coop_count_mean=count_mean,
        final_coop_frac=state.coop_count / num_humans,
        num_humans=num_humans,
        steps=cfg.steps,
    )
    return RunResult(series=series, state=state, summary=summary,
                     snapshots=snapshots, visits=visits, ups=ups, downs=downs)


@dataclass(frozen=True)
class Aggregate:
    """Replica statistics of the per-run windowed cooperation fraction."""

    mean: float
    std: float
    runs: int
    seeds: tuple[int, ...]
    values: tuple[float, ...]


def replicate(cfg: SimConfig, runs: int, base_seed: int, *,
              graphs: list[Graph] | None = None,
              snapshot_steps: Iterable[int] = (),
              backend: str | None = None,
              on_result: Callable[[int, RunResult], None] | None = None) -> Aggregate:
    """Aggregate ``runs`` independent replicas (mean and sample std).

    Run i uses the seed derived from (base_seed, i). When ``graphs`` is
    given the replicas cycle through them in order, which is how a fixed
    set of pre-generated scale-free networks is shared across runs.
    Snapshots are only captured for run 0; ``on_result`` sees every run.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    seeds = []
    values = []
    for i in range(runs):
        seed = derive_seed(base_seed, i)
        seeds.append(seed)
        cfg_i = replace(cfg, seed=seed)
        if graphs:
            cfg_i = replace(cfg_i, graph=graphs[i % len(graphs)])
        result = run(cfg_i, snapshot_steps=snapshot_steps if i == 0 else (),
                     backend=backend)
        values.append(result.summary.coop_frac_mean)
        if on_result is not None:
            on_result(i, result)
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if runs > 1 else 0.0
    return Aggregate(mean=mean, std=std, runs=runs,
                     seeds=tuple(seeds), values=tuple(values))


def write_timeseries_csv(series: TimeSeries, path: str | Path) -> None:
    """CSV with the fixed schema step,coop_frac,def_frac,mean_fitness."""
    lines = ["step,coop_frac,def_frac,mean_fitness\n"]
    for i, step_no in enumerate(series.steps):
        lines.append(
            f"{step_no},{series.coop_frac[i]!r},{series.def_frac[i]!r},"
            f"{series.mean_fitness[i]!r}\n"
        )
    Path(path).write_text("".join(lines), encoding="utf-8", newline="\n")
