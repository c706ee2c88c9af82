import pytest

from hbavss.simnet import (PHASES, NonQuiescent, Scenario, ScenarioError, account, run,
                           schedule_fuzz, trace_hash)


def test_honest_small_run_passes():
    res = run(Scenario(4, 1, seed=1))
    assert res.passed
    assert all(len(res.outputs[i]) == 1 for i in range(1, 5))
    assert all(o.path == "normal" for outs in res.outputs.values() for o in outs.values())


def test_determinism():
    a = run(Scenario(4, 1, batch=2, seed=5, backend="dlog"))
    b = run(Scenario(4, 1, batch=2, seed=5, backend="dlog"))
    c = run(Scenario(4, 1, batch=2, seed=6, backend="dlog"))
    assert a.trace_hash == b.trace_hash
    assert [r.line() for r in a.trace] == [r.line() for r in b.trace]
    assert a.trace_hash != c.trace_hash


def test_garbled_party_recovers():
    res = run(Scenario(4, 1, seed=2, dealer_fault="garble:2"))
    assert res.passed
    ev = res.events[2]
    assert any(e[1] == "implicate_sent" for e in ev)
    assert res.outputs[2][0].path == "recovery"
    assert all(any(e[1] == "recovery_start" for e in res.events[i]) for i in range(1, 5))
    phi = res.dealer.bivariates[0]
    assert res.outputs[2][0].shares == tuple(phi(2, k) for k in (1, 2))


def test_trials_one_is_run():
    sc = Scenario(4, 1, seed=9, backend="dlog")
    rep = schedule_fuzz(sc, 1)
    assert rep.passed and rep.trials == 1


def test_fuzz_reports_replay_seed_for_a_broken_run():
    def broken(sc):
        if sc.seed % 2:
            raise NonQuiescent("injected")
        return run(sc)
    rep = schedule_fuzz(Scenario(4, 1, seed=3, backend="dlog"), 6, runner=broken)
    assert rep.failures and all(seed % 2 for seed, _ in rep.failures)
    seed = rep.failures[0][0]
    with pytest.raises(NonQuiescent):
        broken(Scenario(4, 1, seed=seed, backend="dlog"))


def test_account_empty_and_conservation():
    m = account([])
    assert m.total_bytes == 0 and m.bytes_per_secret == 0.0 and sum(m.phase_bytes.values()) == 0
    res = run(Scenario(4, 1, batch=2, seed=4, backend="dlog", dealer_fault="garble:1"))
    m = res.metrics
    assert sum(m.kind_bytes.values()) == sum(m.phase_bytes.values()) == m.total_bytes
    assert set(m.phase_bytes) == set(PHASES)
    assert m.hash_name == "sha256"


def test_broadcast_bytes_match_recount():
    # 8 commitments of 48 bytes, (2,4) code: shard = ceil(388/2) = 194 bytes
    shard = 8 + 194
    leaf = 32 + shard + 5 + 2 * 32
    val = 13 + leaf
    ready = 13 + 32
    expected = 4 * val + 12 * val + 12 * ready
    # FIFO: every VAL lands before any party can deliver, so all four echo
    res = run(Scenario(4, 1, batch=4, seed=1, scheduler="fifo"))
    assert res.metrics.phase_bytes["broadcast"] == expected == 5596


def test_worst_case_costs_at_least_honest():
    honest = run(Scenario(4, 1, batch=4, seed=1, backend="dlog"))
    worst = run(Scenario(4, 1, batch=4, seed=1, backend="dlog", dealer_fault="garble:1",
                         party_faults=((2, "spurious-implicate"),)))
    assert worst.metrics.total_bytes >= honest.metrics.total_bytes
    assert worst.metrics.phase_bytes["recovery"] > 0


@pytest.mark.parametrize("kw", [
    dict(n=3, t=1),
    dict(n=4, t=1, party_faults=((1, "silent"), (2, "silent"))),
    dict(n=4, t=1, party_faults=((5, "silent"),)),
    dict(n=4, t=1, scheduler="adversarial-delay"),
    dict(n=4, t=1, dealer_fault="sneaky"),
    dict(n=4, t=1, party_faults=((1, "crash:x"),)),
])
def test_scenario_validation(kw):
    with pytest.raises(ScenarioError):
        Scenario(**kw)


def test_partial_dealer_no_output_no_violation():
    res = run(Scenario(4, 1, seed=1, backend="dlog", dealer_fault="partial:1"))
    assert res.passed
    assert not any(res.outputs[i] for i in range(1, 5))


def test_trace_lines_format():
    res = run(Scenario(4, 1, seed=1, backend="dlog"))
    step, kind, s, r, inst, nb = res.trace[0].line().split(",")
    assert kind in {"VAL", "FRAG"} and s == "5" and int(nb) > 13
    assert trace_hash(res.trace) == res.trace_hash
