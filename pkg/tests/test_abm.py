"""Agent-based simulation: event mechanics, bookkeeping, reproducibility."""

from __future__ import annotations

import numpy as np
import pytest

from coopsim import kernel, networks
from coopsim.abm import (
    AgentRole,
    SimConfig,
    compute_fitness,
    initialize,
    pairwise_payoff,
    replicate,
    run,
    snapshot,
    step,
    write_timeseries_csv,
)
from coopsim.game import AIBehavior, Strategy, donation
from coopsim.rng import SplitMix64

SAM = AIBehavior.SAMARITAN
MAL = AIBehavior.MALICIOUS
DIS = AIBehavior.DISCRIMINATORY
C, D = Strategy.COOPERATE, Strategy.DEFECT
M21 = donation(2.0, 1.0)


def _lattice_cfg(seed=1, **kw):
    defaults = dict(graph=networks.square_lattice(6, 6), ai_count=6,
                    ai_behavior=SAM, matrix=M21, beta_h=0.5, steps=500,
                    seed=seed)
    defaults.update(kw)
    return SimConfig(**defaults)


# ------------------------------------------------------------------ roles


def test_agent_role_exclusivity():
    human = AgentRole.human(C)
    ai = AgentRole.ai(MAL)
    assert not human.is_ai and ai.is_ai
    with pytest.raises(ValueError):
        AgentRole(strategy=C, behavior=MAL)
    with pytest.raises(ValueError):
        AgentRole()


def test_pairwise_payoff_against_table():
    assert pairwise_payoff(AgentRole.human(C), AgentRole.human(D), M21) == M21.s
    assert pairwise_payoff(AgentRole.human(D), AgentRole.human(C), M21) == M21.t
    assert pairwise_payoff(AgentRole.human(C), AgentRole.ai(SAM), M21) == M21.r
    assert pairwise_payoff(AgentRole.human(D), AgentRole.ai(SAM), M21) == M21.t
    assert pairwise_payoff(AgentRole.human(C), AgentRole.ai(MAL), M21) == M21.s
    # the mirror matches whatever it faces
    assert pairwise_payoff(AgentRole.human(C), AgentRole.ai(DIS), M21) == M21.r
    assert pairwise_payoff(AgentRole.human(D), AgentRole.ai(DIS), M21) == M21.p
    assert pairwise_payoff(AgentRole.ai(DIS), AgentRole.human(D), M21) == M21.p
    # two mirrors settle on mutual cooperation
    assert pairwise_payoff(AgentRole.ai(DIS), AgentRole.ai(DIS), M21) == M21.r


# -------------------------------------------------------------- initialize


def test_initialize_counts_and_fitness():
    cfg = _lattice_cfg(seed=3)
    state = initialize(cfg)
    assert state.is_ai.sum() == 6
    assert len(state.humans) == 30
    assert state.coop_count == int(
        sum(state.action[h] == 0 for h in state.humans))
    ref = compute_fitness(state.indptr, state.indices, state.action, M21)
    np.testing.assert_allclose(state.fitness, ref, atol=0)


def test_initialize_pinned_layout():
    g = networks.complete(4)
    cfg = SimConfig(graph=g, ai_count=2, ai_behavior=DIS, matrix=M21,
                    beta_h=1.0, steps=10, seed=0)
    state = initialize(cfg, ai_nodes=[1, 3], strategies={0: C, 2: D})
    assert list(np.flatnonzero(state.is_ai)) == [1, 3]
    assert state.role(0) == AgentRole.human(C)
    assert state.role(2) == AgentRole.human(D)
    assert state.role(1) == AgentRole.ai(DIS)
    # C human: vs mirror R twice, vs D human S -> 2R + S
    assert state.fitness[0] == pytest.approx(2 * M21.r + M21.s)
    # D human: vs mirror P twice, vs C human T
    assert state.fitness[2] == pytest.approx(2 * M21.p + M21.t)


def test_initialize_hub_placement():
    g = networks.barabasi_albert(80, 2, seed=6)
    cfg = SimConfig(graph=g, ai_count=5, ai_behavior=SAM, matrix=M21,
                    beta_h=1.0, steps=10, seed=9, ai_placement="hub")
    state = initialize(cfg)
    degs = np.asarray(g.degrees())
    order = sorted(range(80), key=lambda i: (-degs[i], i))
    assert sorted(np.flatnonzero(state.is_ai)) == sorted(order[:5])


def test_initialize_uniform_placement_varies_with_seed():
    layouts = set()
    for seed in range(8):
        state = initialize(_lattice_cfg(seed=seed))
        layouts.add(tuple(np.flatnonzero(state.is_ai)))
    assert len(layouts) > 1


def test_initialize_rejects_isolated_node():
    adj = ((1,), (0,), ())  # node 2 has no neighbors
    g = networks.Graph(node_count=3, adjacency=adj)
    cfg = SimConfig(graph=g, ai_count=0, ai_behavior=SAM, matrix=M21,
                    beta_h=1.0, steps=5, seed=1)
    with pytest.raises(ValueError):
        initialize(cfg)


def test_config_validation():
    g = networks.complete(5)
    with pytest.raises(ValueError):
        SimConfig(graph=g, ai_count=5, ai_behavior=SAM, matrix=M21,
                  beta_h=1.0, steps=10, seed=0)  # no humans left
    with pytest.raises(ValueError):
        SimConfig(graph=g, ai_count=1, ai_behavior=SAM, matrix=M21,
                  beta_h=-1.0, steps=10, seed=0)
    with pytest.raises(ValueError):
        SimConfig(graph=g, ai_count=1, ai_behavior=SAM, matrix=M21,
                  beta_h=1.0, steps=0, seed=0)
    with pytest.raises(ValueError):
        SimConfig(graph=g, ai_count=1, ai_behavior=SAM, matrix=M21,
                  beta_h=1.0, steps=10, seed=0, sample_window=11)


# ---------------------------------------------------------------- dynamics


def test_ai_actions_never_change():
    cfg = _lattice_cfg(seed=11, ai_behavior=MAL, steps=4000, beta_h=2.0)
    result = run(cfg)
    state = result.state
    ai_nodes = np.flatnonzero(state.is_ai)
    assert np.all(state.action[ai_nodes] == 1)  # malicious stays a defector
    assert np.all(state.action[state.humans] != 2)  # humans never mirror


def test_incremental_fitness_stays_exact():
    for behavior in (SAM, MAL, DIS):
        cfg = _lattice_cfg(seed=17, ai_behavior=behavior, steps=20_000)
        result = run(cfg)
        ref = compute_fitness(result.state.indptr, result.state.indices,
                              result.state.action, M21)
        np.testing.assert_allclose(result.state.fitness, ref, atol=1e-9)


def test_mirror_neighbors_are_inert():
    # a human walled in by mirrors sees only its own action: no flips,
    # and no acceptance randomness is consumed (two draws per event)
    g = networks.complete(3)
    cfg = SimConfig(graph=g, ai_count=2, ai_behavior=DIS, matrix=M21,
                    beta_h=5.0, steps=200, seed=42)
    state = initialize(cfg, ai_nodes=[1, 2], strategies={0: D})
    start_coop = state.coop_count
    result_state = state
    for _ in range(200):
        result_state = step(result_state, cfg)
    assert result_state.action[0] == 1
    assert result_state.coop_count == start_coop
    probe = SplitMix64(42)
    for _ in range(2 * 200):
        probe.next_u64()
    assert result_state.rng_state == probe.state


def test_neutral_temperature_flips_half_the_time():
    # beta 0: one exposure to the opposite action accepts with p = 1/2
    g = networks.complete(2)
    flips = 0
    trials = 400
    for seed in range(trials):
        cfg = SimConfig(graph=g, ai_count=1, ai_behavior=SAM, matrix=M21,
                        beta_h=0.0, steps=1, seed=seed)
        state = initialize(cfg, ai_nodes=[1], strategies={0: D})
        step(state, cfg)
        flips += int(state.action[0] == 0)
    assert abs(flips / trials - 0.5) < 0.08  # 3 sigma ~ 0.075


def test_visit_counters_account_every_event():
    cfg = _lattice_cfg(seed=23, steps=3000)
    result = run(cfg)
    assert int(result.visits.sum()) == cfg.steps
    assert int(result.ups.sum()) >= 0
    # flips move the count by one, so ups/downs reconcile with the final k
    state0 = initialize(cfg)
    net = int(result.ups.sum()) - int(result.downs.sum())
    assert state0.coop_count + net == result.state.coop_count


def test_series_and_summary_bookkeeping():
    cfg = _lattice_cfg(seed=29, steps=400, sample_interval=100,
                       sample_window=400)
    result = run(cfg)
    assert result.series.steps == [0, 100, 200, 300, 400]
    assert result.series.coop_frac[0] == initialize(cfg).human_coop_fraction
    assert result.summary.final_coop_frac == result.series.coop_frac[-1]
    # replay event by event; the window covers the whole run here
    state = initialize(cfg)
    counts = []
    for _ in range(cfg.steps):
        step(state, cfg)
        counts.append(state.coop_count)
    assert result.summary.coop_count_mean == pytest.approx(np.mean(counts))
    assert result.summary.coop_frac_mean == pytest.approx(
        np.mean(counts) / result.summary.num_humans)


def test_same_seed_reproduces_run():
    cfg = _lattice_cfg(seed=31, steps=2000)
    a = run(cfg)
    b = run(cfg)
    assert a.series.coop_frac == b.series.coop_frac
    assert np.array_equal(a.state.action, b.state.action)
    assert a.state.rng_state == b.state.rng_state
    c = run(_lattice_cfg(seed=32, steps=2000))
    assert a.series.coop_frac != c.series.coop_frac


@pytest.mark.skipif(len(kernel.available_backends()) < 2,
                    reason="compiled kernel unavailable")
def test_kernels_agree_exactly():
    for behavior, beta in ((SAM, 0.5), (MAL, 1.5), (DIS, 0.1)):
        cfg = _lattice_cfg(seed=37, ai_behavior=behavior, beta_h=beta,
                           steps=5000)
        a = run(cfg, backend="python")
        b = run(cfg, backend="compiled")
        assert a.series.coop_frac == b.series.coop_frac
        assert np.array_equal(a.state.action, b.state.action)
        assert np.array_equal(a.state.fitness, b.state.fitness)
        assert np.array_equal(a.visits, b.visits)
        assert np.array_equal(a.ups, b.ups)
        assert np.array_equal(a.downs, b.downs)
        assert a.state.rng_state == b.state.rng_state


def test_unknown_backend_rejected():
    cfg = _lattice_cfg()
    with pytest.raises((KeyError, RuntimeError, ValueError)):
        run(cfg, backend="fortran")


# ---------------------------------------------------------------- snapshots


def test_snapshot_exact_grids():
    g = networks.square_lattice(2, 2)
    cfg = SimConfig(graph=g, ai_count=0, ai_behavior=SAM, matrix=M21,
                    beta_h=1.0, steps=5, seed=0)
    state = initialize(cfg, strategies={i: C for i in range(4)})
    assert snapshot(state, 2, 2) == "CC\nCC\n"
    cfg2 = SimConfig(graph=g, ai_count=1, ai_behavior=MAL, matrix=M21,
                     beta_h=1.0, steps=5, seed=0)
    state2 = initialize(cfg2, ai_nodes=[1],
                        strategies={0: C, 2: D, 3: D})
    assert snapshot(state2, 2, 2) == "CA\nDD\n"


def test_snapshot_requires_lattice():
    cfg = SimConfig(graph=networks.complete(4), ai_count=1, ai_behavior=SAM,
                    matrix=M21, beta_h=1.0, steps=5, seed=0)
    state = initialize(cfg)
    with pytest.raises(ValueError):
        snapshot(state, 2, 2)


def test_run_collects_requested_snapshots():
    cfg = _lattice_cfg(seed=41, steps=300)
    result = run(cfg, snapshot_steps=(0, 150, 300))
    assert sorted(result.snapshots) == [0, 150, 300]
    grid = result.snapshots[0]
    assert grid.count("\n") == 6
    assert set(grid) <= {"C", "D", "A", "\n"}
    assert grid.count("A") == 6


# ---------------------------------------------------------------- replicate


def test_replicate_aggregate_stats():
    cfg = _lattice_cfg(seed=0, steps=800)
    seen = []
    agg = replicate(cfg, 4, base_seed=55,
                    on_result=lambda i, r: seen.append((i, r.summary)))
    assert agg.runs == 4
    assert len(agg.seeds) == 4 and len(set(agg.seeds)) == 4
    assert [i for i, _ in seen] == [0, 1, 2, 3]
    vals = [s.coop_frac_mean for _, s in seen]
    assert agg.values == pytest.approx(vals)
    assert agg.mean == pytest.approx(np.mean(vals))
    assert agg.std == pytest.approx(np.std(vals, ddof=1))


def test_replicate_single_run_has_zero_std():
    agg = replicate(_lattice_cfg(steps=200), 1, base_seed=3)
    assert agg.runs == 1 and agg.std == 0.0


def test_replicate_cycles_graphs():
    graphs = [networks.barabasi_albert(40, 2, seed=s) for s in (1, 2, 3)]
    cfg = SimConfig(graph=graphs[0], ai_count=4, ai_behavior=SAM, matrix=M21,
                    beta_h=0.5, steps=300, seed=0)
    finals = {}
    agg = replicate(cfg, 6, base_seed=9, graphs=graphs,
                    on_result=lambda i, r: finals.setdefault(
                        i, r.state.graph))
    assert agg.runs == 6
    for i, g in finals.items():
        assert g is graphs[i % 3]


def test_replicate_snapshots_only_first_run():
    cfg = _lattice_cfg(seed=0, steps=100)
    snaps = {}
    replicate(cfg, 3, base_seed=7, snapshot_steps=(0, 100),
              on_result=lambda i, r: snaps.setdefault(i, dict(r.snapshots)))
    assert sorted(snaps[0]) == [0, 100]
    assert snaps[1] == {} and snaps[2] == {}


# ------------------------------------------------------------------- files


def test_timeseries_csv_format(tmp_path):
    cfg = _lattice_cfg(seed=13, steps=200, sample_interval=100)
    result = run(cfg)
    path = tmp_path / "ts.csv"
    write_timeseries_csv(result.series, path)
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0] == "step,coop_frac,def_frac,mean_fitness"
    assert len(lines) == 1 + len(result.series.steps)
    assert "\r" not in text and text.endswith("\n")
    first = lines[1].split(",")
    assert first[0] == "0"
    assert float(first[1]) == result.series.coop_frac[0]
