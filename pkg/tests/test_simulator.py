import csv
import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import ctmc_exponential, reference_replication

from prioloss import (
    Deterministic,
    ErlangK,
    Exponential,
    Hyperexponential,
    Job,
    SimConfig,
    SystemModel,
    ZeroExponential,
    erlang_b,
    run,
    run_replication,
    select_victim,
)
from prioloss.model import cumulative_rates
from prioloss.simulator import _draw_block, _victim_slot, replication_seed, write_replications_csv

MIXED = SystemModel.build(
    3,
    [
        (0.8, Deterministic(0.5)),
        (1.2, Hyperexponential(((0.3, 0.5), (0.7, 3.0)))),
        (1.0, ZeroExponential(0.4, 1.5)),
        (0.6, ErlangK(3, 2.0)),
    ],
)


def jobs(*classes):
    return [Job(k, float(n), n) for n, k in enumerate(classes)]


# --- victim selection -------------------------------------------------------

def test_fcfd_displaces_earliest_of_lowest_class():
    busy = jobs(2, 3, 3)
    assert select_victim(busy, 3, "fcfd") == busy[1]
    assert select_victim(busy, 1, "fcfd") == busy[1]


def test_lcfd_displaces_latest_of_strictly_lower_class():
    busy = jobs(2, 3, 3)
    assert select_victim(busy, 3, "lcfd") is None
    assert select_victim(busy, 2, "lcfd") == busy[2]


@pytest.mark.parametrize("protocol", ["fcfd", "lcfd"])
def test_higher_priority_servers_block(protocol):
    assert select_victim(jobs(1, 1), 3, protocol) is None


@given(
    classes=st.lists(st.integers(1, 4), min_size=1, max_size=6),
    arriving=st.integers(1, 4),
    fcfd=st.booleans(),
    perm=st.randoms(use_true_random=False),
)
def test_compiled_victim_choice_matches(classes, arriving, fcfd, perm):
    busy = jobs(*classes)
    perm.shuffle(busy)
    scls = np.array([j.class_index - 1 for j in busy], dtype=np.int64)
    sseq = np.array([j.seq for j in busy], dtype=np.int64)
    slot = _victim_slot(scls, sseq, arriving - 1, fcfd)
    victim = select_victim(busy, arriving, "fcfd" if fcfd else "lcfd")
    assert (slot < 0 and victim is None) or busy[slot] == victim


# --- event loop against independent implementations ------------------------

@pytest.mark.parametrize("protocol", ["fcfd", "lcfd"])
@pytest.mark.parametrize("servers", [1, 3])
def test_event_loop_matches_reference(protocol, servers):
    model = SystemModel(servers, MIXED.classes, protocol)
    cfg = SimConfig(arrivals=4000, replications=2, warmup=300)
    seed = replication_seed(7, 0)
    fast = run_replication(model, cfg, seed)
    slow = run_replication(model, cfg, seed, compiled=False)
    assert dataclasses.asdict(fast).keys() == dataclasses.asdict(slow).keys()
    for field in ("arrivals", "blocked", "preempted", "completed", "in_service_at_end"):
        np.testing.assert_array_equal(getattr(fast, field), getattr(slow, field))
    np.testing.assert_allclose(fast.work, slow.work, rtol=1e-12)

    rng = np.random.Generator(np.random.PCG64(seed))
    total = cumulative_rates(model)[-1]
    gaps, kinds, services = _draw_block(model, rng, cfg.arrivals, total, cumulative_rates(model) / total)
    ref = reference_replication(servers, model.n_classes, gaps, kinds, services, cfg.warmup, protocol)
    got = np.stack([fast.arrivals, fast.blocked, fast.preempted, fast.completed, fast.in_service_at_end], axis=1)
    np.testing.assert_array_equal(got, ref)


# --- integrity --------------------------------------------------------------

@pytest.mark.parametrize("protocol", ["fcfd", "lcfd"])
def test_conservation_and_protocol_zeros(protocol):
    rep = run(MIXED.with_protocol(protocol), SimConfig(arrivals=50_000, replications=4, seed=3))
    for s in rep.replications:
        assert s.conserved()
        if protocol == "fcfd":
            assert s.blocked[0] == 0
        else:
            assert s.preempted[0] == 0
    assert ((rep.gamma_hat >= 0) & (rep.gamma_hat <= 1)).all()


def test_zero_atom_jobs_complete_instantly():
    model = SystemModel.build(1, [(2.0, ZeroExponential(0.9, 0.5))])
    rep = run(model, SimConfig(arrivals=20_000, replications=2, seed=1))
    for s in rep.replications:
        assert s.conserved()
        assert s.completed[0] > 0.85 * s.arrivals[0] * 0.9


def test_seeded_determinism():
    cfg = SimConfig(arrivals=30_000, replications=3, seed=99)
    a, b = run(MIXED, cfg), run(MIXED, cfg)
    assert a.to_dict() == b.to_dict()


def test_order_independence():
    cfg = SimConfig(arrivals=20_000, replications=4, seed=5)
    a = run(MIXED, cfg)
    b = run(MIXED, cfg, order=[3, 1, 0, 2])
    c = run(MIXED, cfg, workers=2)
    assert a.to_dict() == b.to_dict() == c.to_dict()


def test_distinct_replication_streams():
    a = run_replication(MIXED, SimConfig(arrivals=5000), replication_seed(1, 0))
    b = run_replication(MIXED, SimConfig(arrivals=5000), replication_seed(1, 1))
    assert not np.array_equal(a.work, b.work)


def test_run_rejects_bad_config():
    with pytest.raises(ValueError, match="replications"):
        run(MIXED, SimConfig(arrivals=1000, replications=1))
    with pytest.raises(ValueError, match="warmup"):
        run(MIXED, SimConfig(arrivals=1000, warmup=1000))
    with pytest.raises(ValueError, match="order"):
        run(MIXED, SimConfig(arrivals=1000, replications=2), order=[0, 0])


def test_busy_time_equals_work_received():
    rep = run(MIXED, SimConfig(arrivals=200_000, replications=3, seed=8))
    for s in rep.replications:
        # edge effect: jobs straddling the warmup boundary
        assert s.busy_area == pytest.approx(s.work.sum(), rel=2e-3)
        assert s.busy_area / s.horizon <= MIXED.servers
    assert 0 < rep.utilisation <= 1


# --- statistical sanity -----------------------------------------------------

def test_light_traffic():
    model = SystemModel.build(2, [(0.01, Exponential(10.0)), (0.01, Exponential(5.0))])
    rep = run(model, SimConfig(arrivals=100_000, replications=2, seed=4))
    for s in rep.replications:
        assert (s.blocked + s.preempted).sum() < 0.01 * s.arrivals.sum()


def test_single_server_single_class_is_erlang():
    lam, mu = 1.0, 1.25
    rep = run(SystemModel.build(1, [(lam, Exponential(mu))]), SimConfig(arrivals=200_000, replications=10, seed=6))
    a = lam / mu
    # FCFD: every arrival to a busy server displaces the job in service
    assert abs(rep.gamma_hat[0] - a / (1 + a)) <= rep.gamma_halfwidth[0] * 1.5
    rep = run(
        SystemModel.build(1, [(lam, Exponential(mu))], "lcfd"), SimConfig(arrivals=200_000, replications=10, seed=6)
    )
    assert abs(rep.gamma_hat[0] - erlang_b(1, a)) <= rep.gamma_halfwidth[0] * 1.5


@pytest.mark.parametrize("protocol", ["fcfd", "lcfd"])
def test_matches_exact_markov_chain(benchmark, protocol):
    q_exact, gamma_exact = ctmc_exponential(2, [1, 1, 1], [10, 5, 2], lcfd=protocol == "lcfd")
    rep = run(benchmark.with_protocol(protocol), SimConfig(arrivals=500_000, replications=10, seed=12, confidence=0.999))
    assert (np.abs(rep.gamma_hat - gamma_exact) <= rep.gamma_halfwidth + 1e-12).all()
    assert (np.abs(rep.q_hat - q_exact) <= rep.q_halfwidth + 1e-12).all()


def test_csv_export(tmp_path):
    rep = run(MIXED, SimConfig(arrivals=5000, replications=2, seed=1))
    path = tmp_path / "reps.csv"
    write_replications_csv(rep, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["replication", "class", "arrivals", "blocked", "preempted", "completed", "in_service_at_end"]
    assert len(rows) == 1 + 2 * MIXED.n_classes
    assert rows[1][:2] == ["0", "1"]
