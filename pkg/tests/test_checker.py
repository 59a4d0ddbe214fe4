"""State-space exploration, the six membership properties, and the
concrete-versus-abstract sweeps on small rings (the wide parameter ranges
run in the acceptance suite).

One finding is pinned here rather than hidden: with population-honest
bookkeeping on the guess-exit rollover (the convicted sender leaves c1 when
its vacated slot passes), the steady-voucher-count property P3 is simply
false in the tie case.  The winning class can lose its own sender — the
abstract witness ends in the guess-exit transition, and for six stations
the run is concretely realizable.  The property only looks provable if the
exit transition skips the class-counter decrement, and that variant leaks
population and breaks the simulation against the ring.  P4 and the
boundary-scoped properties survive.
"""

from __future__ import annotations

import pytest

from ttpmem.abstraction import (
    abstract_inputs_for_slot,
    abstract_successors,
    abstraction_map,
)
from ttpmem.checker import (
    PropertyVerdict,
    ResourceCap,
    check_P1,
    check_P2,
    check_P3,
    check_P4,
    check_properties,
    explore,
    single_fault_sweep,
    two_fault_sweep,
    x_values,
)
from ttpmem.ring import FaultSpec, Ring, Scenario, is_single_clique, partition_classes


def test_exploration_reaches_the_settled_ring():
    g = explore(4, 2)
    assert g.states[0].c_in == 4
    settled = [
        s for s in g.states
        if s.fault_seen and s.r == 2 and (s.c1 == 0 or s.c0 == 0)
    ]
    assert settled, "no stabilized state reachable"
    # every explored state has at least one successor: the ring never wedges
    for i, s in enumerate(g.states):
        assert g.edges[i], f"deadlocked state {s}"


def test_explored_paths_replay_from_the_start():
    g = explore(3, 2)
    for i in range(len(g.states)):
        path = g.path(i)
        assert len(path) <= len(g.states)
        if g.states[i].fault_seen:
            assert path[0] == "fault"


def test_x_value_scopes():
    assert x_values(5, "any") == [1, 2, 3, 4, 5]
    assert x_values(5, "majority") == [3, 4, 5]
    assert x_values(5, "tie") == []
    assert x_values(6, "tie") == [3]
    with pytest.raises(ValueError):
        x_values(4, "plurality")


def test_property_verdicts_on_small_rings():
    for n in (3, 4, 5, 6):
        verdicts = {v.prop: v for v in check_properties(n, "any")}
        for prop in ("P1", "P2", "P4", "P6", "P7"):
            print(verdicts[prop].report_line())
            assert verdicts[prop].holds, verdicts[prop].report_line()
        if n % 2 == 1:
            assert verdicts["P3"].holds  # no tie x exists: vacuous
        else:
            assert not verdicts["P3"].holds
            assert verdicts["P3"].witness[-1] == "r1_guess_exit_rollover"


def test_majority_keeps_every_voucher():
    g = explore(5, 3)
    boundary = [
        s for s in g.states if s.fault_seen and s.r == 0 and s.cp == s.n
    ]
    assert boundary
    assert all(s.c1 == 3 for s in boundary)
    assert check_P2(g).holds


def test_tie_race_is_decided_but_the_winner_still_thins():
    for n, x in ((4, 2), (6, 3)):
        g = explore(n, x)
        assert check_P1(g).holds
        assert check_P4(g).holds
        p3 = check_P3(g)
        assert not p3.holds
        assert p3.witness[0] == "fault"
        assert p3.witness[-1] == "r1_guess_exit_rollover"
        assert f"dropped to {x - 1}" in p3.detail


def test_the_p3_counterexample_is_concretely_realizable():
    # Six stations, tie: the sender's two successors reject (slots 1-2),
    # the other two vouchers sit at slots 3-4.  Both checks convict the
    # sender, so it leaves even though its class wins the round.
    sc = Scenario(n=6, rounds=4, faults=(FaultSpec(0, frozenset({3, 4})),))
    ring = Ring(sc)
    pre = abstraction_map(ring)
    taken = []
    trigger_seen = shrunk_after = False
    while ring.slot < sc.total_slots:
        slot = ring.slot
        ring.step()
        post = abstraction_map(ring)
        inp = abstract_inputs_for_slot(ring, slot)
        ev = ring.events[slot]
        match = [
            t for t in abstract_successors(pre, inp)
            if t.post == post and t.emits == ev.emitted
        ]
        assert match, f"slot {slot} not simulated"
        taken.append(match[0].name)
        if pre.fault_seen and pre.d1 == 3 and pre.d0 < 3:
            trigger_seen = True
        if trigger_seen and post.c1 != 3:
            shrunk_after = True
        pre = post
    assert (2, 0, "second_check") in ring.departures
    assert "r1_guess_exit_rollover" in taken
    assert trigger_seen and shrunk_after
    # convergence is untouched: the two surviving vouchers form the clique
    assert is_single_clique(ring)
    assert partition_classes(ring) == {"1": (3, 4)}


def test_tie_constraint_is_vacuous_on_odd_rings():
    verdicts = check_properties(5, "tie")
    assert all(v.holds for v in verdicts)
    assert any("vacuous" in v.detail for v in verdicts)


def test_literal_guard_variant_changes_no_verdicts():
    for n in (3, 4, 5, 6):
        literal = {v.prop: v.holds for v in check_properties(n, "any",
                                                             literal_guard=True)}
        default = {v.prop: v.holds for v in check_properties(n, "any")}
        assert literal == default


def test_weak_gate_mutant_breaks_convergence():
    verdicts = {v.prop: v for v in check_properties(4, "any", weak_gate=True)}
    assert not verdicts["P1"].holds
    assert not verdicts["P7"].holds
    assert verdicts["P7"].witness, "failure must come with a path"
    assert verdicts["P7"].witness[0] == "fault"


def test_unbudgeted_mutant_overshoots_the_round():
    verdicts = {v.prop: v for v in check_properties(4, "any",
                                                    strengthened=False)}
    broken = [p for p, v in verdicts.items() if not v.holds and p != "P3"]
    assert broken, "dropping the d-guards should break more than P3"
    assert all(verdicts[p].witness for p in broken)


def test_report_lines_are_single_lines():
    v = PropertyVerdict("P1", 4, "any", False, ("fault", "r0_send_fault_round"),
                        "c1=c0=2 at round end")
    line = v.report_line()
    assert "\n" not in line
    assert "FAILS" in line and "witness=2" in line


def test_single_fault_sweep_is_exhaustive_and_clean():
    result = single_fault_sweep(4)
    assert result.runs == 4 * 2 ** 3
    for v in result.verdicts:
        print(v.report_line())
        assert v.holds
    assert {v.prop for v in result.verdicts} == {"NC", "CA", "SIM"}


def test_weak_gate_ring_fails_the_convergence_sweep():
    result = single_fault_sweep(4, gate="weak")
    nc = next(v for v in result.verdicts if v.prop == "NC")
    assert not nc.holds
    assert nc.witness, "a concrete counterexample scenario is expected"


def test_two_fault_sweep_is_clean_on_the_smallest_ring():
    result = two_fault_sweep(4)
    assert result.runs > 100
    for v in result.verdicts:
        print(v.report_line())
        assert v.holds


def test_two_fault_sweep_respects_its_budget():
    with pytest.raises(ResourceCap):
        two_fault_sweep(5, max_runs=10)
