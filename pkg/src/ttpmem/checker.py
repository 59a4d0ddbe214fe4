"""Explicit-state checking of the counter abstraction, and cross-validation
of concrete runs against it.

``explore`` builds the reachable abstract state space for a fixed ring size
and voucher count (the slot-owner nondeterminism and the g input are both
branched); properties are then scanned over the graph, with shortest
violating paths reconstructed from the BFS tree:

* P1  at the end of the fault round the two classes never tie;
* P2  with a voucher majority, no voucher dies during the fault round;
* P3  once every voucher has sent while rejecters still lag (the tie race
      is decided), the voucher class never shrinks;
* P4  at that decision point the rejecters' gates can no longer pass;
* P6  from the second round boundary on, one class is extinct;
* P7  after two full rounds only one class remains, for good.

``single_fault_sweep`` / ``two_fault_sweep`` drive the concrete ring over
every admissible fault placement and compare it against the abstraction
(per-slot simulation), the counting predictions (every gate), and the
two-round convergence claim.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .abstraction import (
    AbstractInputs,
    AbstractState,
    abstract_init,
    abstract_inputs_for_slot,
    abstract_successors,
    abstraction_map,
    conserves_population,
)
from .kfault import counting_gate_checks, tree_gate_checks
from .ring import (
    FaultSpec,
    Ring,
    Scenario,
    is_single_clique,
    partition_classes,
    scenario_text,
)


class ResourceCap(RuntimeError):
    """A sweep hit its configured run budget before finishing."""


# -- abstract state-space exploration -----------------------------------------


def _canon(s: AbstractState) -> AbstractState:
    # tg/sg are write-only decorations; r only matters as 0 / 1 / >=2.
    return replace(s, tg=0, sg=0, r=min(s.r, 2))


class StateGraph:
    def __init__(self, n: int, x: int, flags: Dict[str, bool]):
        self.n = n
        self.x = x
        self.flags = flags
        self.states: List[AbstractState] = []
        self.index: Dict[AbstractState, int] = {}
        self.edges: List[List[Tuple[str, int]]] = []
        self.parent: List[Optional[Tuple[int, str]]] = []

    def add(self, s: AbstractState) -> Tuple[int, bool]:
        i = self.index.get(s)
        if i is not None:
            return i, False
        i = len(self.states)
        self.index[s] = i
        self.states.append(s)
        self.edges.append([])
        self.parent.append(None)
        return i, True

    def path(self, i: int) -> Tuple[str, ...]:
        names: List[str] = []
        while self.parent[i] is not None:
            j, name = self.parent[i]
            names.append(name)
            i = j
        return tuple(reversed(names))


def explore(
    n: int,
    x: int,
    *,
    weak_gate: bool = False,
    strengthened: bool = True,
    literal_guard: bool = False,
    max_states: int = 200_000,
) -> StateGraph:
    flags = dict(weak_gate=weak_gate, strengthened=strengthened,
                 literal_guard=literal_guard)
    g = StateGraph(n, x, flags)
    init = _canon(abstract_init(n))
    g.add(init)
    frontier = [0]
    while frontier:
        if len(g.states) > max_states:
            raise ResourceCap(
                f"exploration for n={n} x={x} passed {max_states} states"
            )
        nxt: List[int] = []
        for i in frontier:
            s = g.states[i]
            if s.c_in > 0:
                input_choices: Iterable[AbstractInputs] = (
                    AbstractInputs(fault=True, x=x),
                )
            else:
                input_choices = (AbstractInputs(g=False), AbstractInputs(g=True))
            seen_here = set()
            for inp in input_choices:
                for tr in abstract_successors(s, inp, **flags):
                    post = _canon(tr.post)
                    if (tr.name, post) in seen_here:
                        continue
                    seen_here.add((tr.name, post))
                    assert conserves_population(s, post), (
                        f"{tr.name} loses stations: {s} -> {post}"
                    )
                    if strengthened:
                        # per-round budgets keep the d-counters below the
                        # class populations; the unbudgeted mutant may not
                        assert post.d0 <= post.c0 and post.d1 <= post.c1 \
                            and post.df <= post.cf and 1 <= post.cp <= n, (
                                f"{tr.name} broke a counter bound: {post}"
                            )
                    j, fresh = g.add(post)
                    g.edges[i].append((tr.name, j))
                    if fresh:
                        g.parent[j] = (i, tr.name)
                        nxt.append(j)
        frontier = nxt
    return g


# -- property verdicts ---------------------------------------------------------


@dataclass(frozen=True)
class PropertyVerdict:
    prop: str
    n: int
    constraint: str
    holds: bool
    witness: Tuple[str, ...] = ()
    detail: str = ""

    def report_line(self) -> str:
        verdict = "HOLDS" if self.holds else "FAILS"
        line = f"{self.prop} n={self.n} constraint={self.constraint} {verdict} witness={len(self.witness)}"
        if not self.holds and self.detail:
            line += f"  [{self.detail}]"
        return line


def _fault_round_end(g: StateGraph) -> List[int]:
    return [
        i for i, s in enumerate(g.states)
        if s.fault_seen and s.r == 0 and s.cp == s.n
    ]


def check_P1(g: StateGraph) -> PropertyVerdict:
    """End of the fault round: the class sizes differ (no standing tie)."""
    for i in _fault_round_end(g):
        s = g.states[i]
        if s.c1 == s.c0:
            return PropertyVerdict("P1", g.n, f"x={g.x}", False, g.path(i),
                                   f"c1=c0={s.c1} at round end")
    return PropertyVerdict("P1", g.n, f"x={g.x}", True)


def check_P2(g: StateGraph) -> PropertyVerdict:
    """Voucher majority: every voucher survives the fault round."""
    for i in _fault_round_end(g):
        s = g.states[i]
        if s.c1 != g.x:
            return PropertyVerdict("P2", g.n, f"x={g.x}", False, g.path(i),
                                   f"c1={s.c1} != x={g.x} at round end")
    return PropertyVerdict("P2", g.n, f"x={g.x}", True)


def _decided_tie_states(g: StateGraph) -> List[int]:
    return [
        i for i, s in enumerate(g.states)
        if s.fault_seen and s.d1 == g.x and s.d0 < g.x
    ]


def check_P3(g: StateGraph) -> PropertyVerdict:
    """From any state where all x vouchers have sent this round and fewer
    rejecters have, the voucher class never shrinks again."""
    start = _decided_tie_states(g)
    local_parent: Dict[int, Tuple[int, str]] = {}
    frontier = list(start)
    seen = set(start)
    while frontier:
        nxt: List[int] = []
        for i in frontier:
            s = g.states[i]
            if s.c1 != g.x:
                names: List[str] = []
                j = i
                while j in local_parent:
                    j, name = local_parent[j][0], local_parent[j][1]
                    names.append(name)
                witness = g.path(j) + tuple(reversed(names))
                return PropertyVerdict("P3", g.n, f"x={g.x}", False, witness,
                                       f"c1 dropped to {s.c1}")
            for name, k in g.edges[i]:
                if k not in seen:
                    seen.add(k)
                    local_parent[k] = (i, name)
                    nxt.append(k)
        frontier = nxt
    return PropertyVerdict("P3", g.n, f"x={g.x}", True)


def check_P4(g: StateGraph) -> PropertyVerdict:
    """At those decision states a rejecter's fault-round gate cannot pass."""
    for i in _decided_tie_states(g):
        s = g.states[i]
        if s.c1 + s.c0 - 2 * s.d1 > 0:
            return PropertyVerdict("P4", g.n, f"x={g.x}", False, g.path(i),
                                   f"rejecter gate margin {s.c1 + s.c0 - 2 * s.d1}")
    return PropertyVerdict("P4", g.n, f"x={g.x}", True)


def check_P6(g: StateGraph) -> PropertyVerdict:
    """At every later round boundary at least one class is extinct."""
    for i, s in enumerate(g.states):
        if s.fault_seen and s.r >= 1 and s.cp == s.n:
            if s.c1 > 0 and s.c0 > 0:
                return PropertyVerdict("P6", g.n, f"x={g.x}", False, g.path(i),
                                       f"c1={s.c1}, c0={s.c0} at boundary")
    return PropertyVerdict("P6", g.n, f"x={g.x}", True)


def check_P7(g: StateGraph) -> PropertyVerdict:
    """Two full rounds after the fault, exactly one class remains, forever."""
    for i, s in enumerate(g.states):
        if s.fault_seen and s.r >= 2:
            if s.c1 > 0 and s.c0 > 0:
                return PropertyVerdict("P7", g.n, f"x={g.x}", False, g.path(i),
                                       f"c1={s.c1}, c0={s.c0} after two rounds")
    return PropertyVerdict("P7", g.n, f"x={g.x}", True)


def _merge(prop: str, n: int, constraint: str,
           verdicts: Sequence[PropertyVerdict]) -> PropertyVerdict:
    for v in verdicts:
        if not v.holds:
            return replace(v, constraint=constraint)
    detail = "" if verdicts else "no admissible x: vacuous"
    return PropertyVerdict(prop, n, constraint, True, (), detail)


def x_values(n: int, constraint: str) -> List[int]:
    if constraint == "any":
        return list(range(1, n + 1))
    if constraint == "majority":
        return [x for x in range(1, n + 1) if x > n - x]
    if constraint == "tie":
        return [n // 2] if n % 2 == 0 else []
    raise ValueError(f"unknown constraint {constraint!r}")


def check_properties(
    n: int,
    constraint: str = "any",
    *,
    weak_gate: bool = False,
    strengthened: bool = True,
    literal_guard: bool = False,
    max_states: int = 200_000,
) -> List[PropertyVerdict]:
    """All six properties for one ring size.  P2 is checked on the majority
    part of the x-range, P3/P4 on the tie part, P1/P6/P7 everywhere."""
    xs = x_values(n, constraint)
    graphs = {
        x: explore(n, x, weak_gate=weak_gate, strengthened=strengthened,
                   literal_guard=literal_guard, max_states=max_states)
        for x in xs
    }
    majority = [x for x in xs if x > n - x]
    tie = [x for x in xs if x == n - x]
    return [
        _merge("P1", n, constraint, [check_P1(graphs[x]) for x in xs]),
        _merge("P2", n, constraint, [check_P2(graphs[x]) for x in majority]),
        _merge("P3", n, constraint, [check_P3(graphs[x]) for x in tie]),
        _merge("P4", n, constraint, [check_P4(graphs[x]) for x in tie]),
        _merge("P6", n, constraint, [check_P6(graphs[x]) for x in xs]),
        _merge("P7", n, constraint, [check_P7(graphs[x]) for x in xs]),
    ]


# -- concrete sweeps -----------------------------------------------------------


def single_fault_scenarios(n: int) -> Iterable[Scenario]:
    """Every placement of one asymmetric fault in the first round: the
    pre-fault regime is rotationally stationary, so this is exhaustive."""
    for slot in range(n):
        others = [i for i in range(n) if i != slot % n]
        for r in range(len(others) + 1):
            for accept in combinations(others, r):
                yield Scenario(
                    n=n, rounds=4,
                    faults=(FaultSpec(slot, frozenset(accept)),),
                )


@dataclass(frozen=True)
class SweepResult:
    n: int
    runs: int
    verdicts: Tuple[PropertyVerdict, ...]

    def all_hold(self) -> bool:
        return all(v.holds for v in self.verdicts)


def _scenario_witness(sc: Scenario, extra: str) -> Tuple[str, ...]:
    return tuple(scenario_text(sc).splitlines()) + (extra,)


def single_fault_sweep(n: int, gate: str = "strict") -> SweepResult:
    """Exhaustive one-fault sweep checking convergence (NC), the counting
    predictions at every gate (CA), and per-slot simulation by the
    abstraction (SIM)."""
    runs = 0
    nc_fail: Optional[Tuple[str, ...]] = None
    nc_detail = ""
    round1_splits = 0
    ca_fail: Optional[Tuple[str, ...]] = None
    ca_detail = ""
    sim_fail: Optional[Tuple[str, ...]] = None
    sim_detail = ""
    for sc in single_fault_scenarios(n):
        runs += 1
        fault_slot = sc.faults[0].slot
        ring = Ring(sc, gate=gate, record=False)
        pre = abstraction_map(ring)
        sim_ok_here = True
        while ring.slot < sc.total_slots:
            slot = ring.slot
            ring.step()
            if sim_fail is None and sim_ok_here:
                post = abstraction_map(ring)
                ev = ring.events[slot]
                inp = abstract_inputs_for_slot(ring, slot)
                matches = [
                    tr for tr in abstract_successors(pre, inp,
                                                     weak_gate=gate == "weak")
                    if tr.post == post and tr.emits == ev.emitted
                ]
                if not matches:
                    sim_fail = _scenario_witness(sc, f"slot {slot}")
                    sim_detail = f"no abstract step {pre} -> {post} (inputs {inp})"
                    sim_ok_here = False
                pre = post
            if ring.slot == fault_slot + n:
                if len(partition_classes(ring)) > 1:
                    round1_splits += 1
            if ring.slot == fault_slot + 2 * n:
                single = is_single_clique(ring) and len(partition_classes(ring)) == 1
                if not single and nc_fail is None:
                    nc_fail = _scenario_witness(
                        sc, f"classes at round-2 end: {partition_classes(ring)}"
                    )
                    nc_detail = "still partitioned two rounds after the fault"
        if ca_fail is None:
            bad = [c for c in counting_gate_checks(ring) if not c.ok]
            bad += [c for c in tree_gate_checks(ring) if not c.ok]
            if bad:
                c = bad[0]
                ca_fail = _scenario_witness(sc, f"slot {c.slot} s{c.sid}")
                ca_detail = f"predicted {c.predicted}, ring held {c.actual}"
    if round1_splits == 0 and nc_fail is None:
        nc_fail = (f"n={n}",)
        nc_detail = "no scenario was still split after one round; two-round claim untestable"
    scope = f"k=1 exhaustive ({runs} runs, {round1_splits} round-1 splits)"
    return SweepResult(
        n=n, runs=runs,
        verdicts=(
            PropertyVerdict("NC", n, scope, nc_fail is None,
                            nc_fail or (), nc_detail),
            PropertyVerdict("CA", n, scope, ca_fail is None,
                            ca_fail or (), ca_detail),
            PropertyVerdict("SIM", n, scope, sim_fail is None,
                            sim_fail or (), sim_detail),
        ),
    )


def kfault_scenarios(n: int, k: int) -> Iterable[Scenario]:
    """Every admissible placement of k faults, successive ones at most one
    round apart: each later fault must strike a slot whose owner actually
    sends, and its accept set ranges over the receivers still listening
    there.  A prefix run with the earlier faults decides both — it is
    identical to the full run up to the new fault's slot."""
    rounds = k + 3

    def extend(faults: Tuple[FaultSpec, ...]) -> Iterable[Scenario]:
        if len(faults) == k:
            yield Scenario(n=n, rounds=rounds, faults=faults)
            return
        prev = faults[-1].slot
        for gap in range(1, n + 1):
            slot = prev + gap
            prefix = Ring(Scenario(n=n, rounds=rounds, faults=faults),
                          record=False)
            prefix.run_until(slot)
            owner = slot % n
            st = prefix.station(owner)
            if not (st.location.is_active and st.acc > st.fail):
                continue  # silent slot: nothing to corrupt
            receivers = [sid for sid in prefix.active_ids() if sid != owner]
            for r in range(len(receivers) + 1):
                for accept in combinations(receivers, r):
                    yield from extend(
                        faults + (FaultSpec(slot, frozenset(accept)),)
                    )

    for slot1 in range(n):
        others = [i for i in range(n) if i != slot1]
        for r1 in range(len(others) + 1):
            for accept1 in combinations(others, r1):
                yield from extend((FaultSpec(slot1, frozenset(accept1)),))


def two_fault_scenarios(n: int) -> Iterable[Scenario]:
    return kfault_scenarios(n, 2)


def _chain_sweep(
    n: int,
    k: int,
    scope: str,
    scenarios: Iterable[Scenario],
    max_runs: Optional[int],
    cap_is_error: bool,
) -> SweepResult:
    runs = 0
    degenerate = 0
    nc_fail: Optional[Tuple[str, ...]] = None
    nc_detail = ""
    ca_fail: Optional[Tuple[str, ...]] = None
    ca_detail = ""
    for sc in scenarios:
        runs += 1
        if max_runs is not None and runs > max_runs:
            if cap_is_error:
                raise ResourceCap(
                    f"{k}-fault sweep for n={n} exceeded the budget of "
                    f"{max_runs} runs"
                )
            runs -= 1
            break
        last = sc.faults[-1].slot
        ring = Ring(sc, record=False)
        ring.run_until(last + 2 * n)
        if nc_fail is None:
            classes = partition_classes(ring)
            if not classes:
                degenerate += 1  # vacuous clique: distinct from success
            if not (is_single_clique(ring) and len(classes) <= 1):
                nc_fail = _scenario_witness(
                    sc, f"classes at round-2 end: {classes}"
                )
                nc_detail = "still partitioned two rounds after the last fault"
        if ca_fail is None:
            bad = [c for c in tree_gate_checks(ring) if not c.ok]
            if bad:
                c = bad[0]
                ca_fail = _scenario_witness(sc, f"slot {c.slot} s{c.sid}")
                ca_detail = f"predicted {c.predicted}, ring held {c.actual}"
    scope = f"{scope} ({runs} runs)"
    if degenerate:
        scope += f", {degenerate} degenerate"
    return SweepResult(
        n=n, runs=runs,
        verdicts=(
            PropertyVerdict("NC", n, scope, nc_fail is None, nc_fail or (), nc_detail),
            PropertyVerdict("CA", n, scope, ca_fail is None, ca_fail or (), ca_detail),
        ),
    )


def two_fault_sweep(n: int, max_runs: Optional[int] = None) -> SweepResult:
    """Exhaustive two-fault sweep: convergence within two rounds of the
    second fault (NC) and tree-oracle agreement at every gate (CA)."""
    return _chain_sweep(n, 2, "k=2 exhaustive", kfault_scenarios(n, 2),
                        max_runs, cap_is_error=True)


def kfault_sample_sweep(n: int, k: int, sample: int = 100) -> SweepResult:
    """Bounded k-fault sweep for k >= 3, where the scenario space grows
    factorially and exhaustion is out of reach: the first ``sample``
    admissible chains are run and judged like the exhaustive sweeps."""
    return _chain_sweep(n, k, f"k={k} sample", kfault_scenarios(n, k),
                        sample, cap_is_error=False)


def cross_check(
    n_values: Sequence[int],
    k: int = 1,
    max_runs: Optional[int] = None,
    gate: str = "strict",
) -> List[SweepResult]:
    if k == 1:
        return [single_fault_sweep(n, gate=gate) for n in n_values]
    if k == 2:
        return [two_fault_sweep(n, max_runs=max_runs) for n in n_values]
    if k >= 3:
        return [
            kfault_sample_sweep(n, k, sample=max_runs or 100)
            for n in n_values
        ]
    raise ValueError(f"need at least one fault, got k={k}")
