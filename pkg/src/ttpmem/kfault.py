"""Counter tree for runs with several asymmetric faults, and the counting
oracles that predict every clique-gate comparison from bus-observable events.

Each fault splits every existing class in two (vouchers get label suffix
'1', everyone else '0'), giving a binary tree whose depth grows with the
fault count.  Per class the tree keeps a population counter C_w and an
emission counter d_w for the round that started at the fault which created
the level; the leaf level additionally carries two auxiliary counters per
class — d^A_w (emissions in the current window) and d^F_w (slots where a
class member's frame went missing from the window: its gate failed, or it
is gone and its last frame just aged out of the window) — which reset at
every round boundary of any fault.

``predict_gate`` turns those counters into the (acc, fail) pair an active
station must hold when its own slot comes up, selecting the arithmetic by
the station's position relative to the fault rounds.  The predictions use
only observable slot outcomes, never the stations' internal counters, so
agreement with a concrete run is a genuine cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .ring import Ring, SlotEvent


def expected_counter_count(k: int) -> int:
    """Closed form for the number of counters a k-fault tree needs: per
    level i one (C, d) pair for each of its i+1 classes, one elapsed-slots
    clock per fault, and the two auxiliaries for each of the k+1 leaves."""
    return sum(2 * (i + 1) for i in range(1, k + 1)) + k + 2 * (k + 1)


class CounterTree:
    def __init__(self, n: int):
        self.n = n
        self.fault_slots: List[int] = []
        # levels[i] (i = 0 for the first fault) maps label -> [C, d]
        self.levels: List[Dict[str, List[int]]] = []
        self.aux_a: Dict[str, int] = {}
        self.aux_f: Dict[str, int] = {}
        self.label: Dict[int, str] = {i: "" for i in range(n)}
        self.active: set = set(range(n))
        # Virtual pre-run emissions keep window arithmetic uniform.
        self.last_emission: Dict[int, int] = {i: i - n for i in range(n)}
        self.departed_at: Dict[int, int] = {}
        self._slot_begun = -1

    # -- event intake --------------------------------------------------------

    def begin_slot(self, slot: int) -> None:
        """Apply start-of-slot bookkeeping (auxiliary resets at each fault's
        round boundary) before this slot's gate is evaluated."""
        if self._slot_begun >= slot:
            return
        self._slot_begun = slot
        if self.fault_slots and any(
            slot == fs + self.n
            for fs in self.fault_slots
            if fs + self.n > self.fault_slots[-1]
        ):
            for w in self.aux_a:
                self.aux_a[w] = 0
                self.aux_f[w] = 0

    def observe(self, ev: SlotEvent) -> None:
        self.begin_slot(ev.slot)
        if ev.owner_loc in ("listen", "counting"):
            raise ValueError("counter tree is undefined while stations integrate")
        if ev.fault:
            assert ev.accepted is not None
            self._split(ev.slot, ev.owner, ev.accepted)
            self.last_emission[ev.owner] = ev.slot
        elif ev.emitted:
            if self.fault_slots:
                w = self.label[ev.owner]
                if ev.slot < self.fault_slots[-1] + self.n:
                    self.levels[-1][w][1] += 1
                if w in self.aux_a:
                    self.aux_a[w] += 1
            self.last_emission[ev.owner] = ev.slot
        else:
            owner = ev.owner
            if owner not in self.active:
                # A gone station's slot: if its last frame was exactly one
                # round ago, gaters' windows lose it right now.
                if self.fault_slots and self.last_emission[owner] == ev.slot - self.n:
                    w = self.label[owner]
                    if w in self.aux_f:
                        self.aux_f[w] += 1
        # Departures (the owner's failed gate, or a sender convicted by its
        # successors' verdicts mid-slot) shrink the class populations.
        for sid, kind in ev.departed:
            if sid not in self.active:
                continue
            self.active.discard(sid)
            self.departed_at[sid] = ev.slot
            if self.fault_slots:
                w = self.label[sid]
                self.levels[-1][w][0] -= 1
                if kind == "gate" and w in self.aux_f:
                    self.aux_f[w] += 1

    def _split(self, slot: int, emitter: int, accepted: Tuple[int, ...]) -> None:
        self.fault_slots.append(slot)
        old_label = dict(self.label)
        vouched = set(accepted) | {emitter}
        for sid in self.label:
            self.label[sid] = old_label[sid] + ("1" if sid in vouched else "0")
        new_level: Dict[str, List[int]] = {}
        if self.levels:
            prev = self.levels[-1]
            emitter_class = old_label[emitter]
            for w, (c, _d) in prev.items():
                if w == emitter_class:
                    c1 = 1 + len(accepted)
                    new_level[w + "1"] = [c1, 1]
                    new_level[w + "0"] = [c - c1, 0]
                else:
                    new_level[w + "0"] = [c, 0]
        else:
            x = 1 + len(accepted)
            new_level["1"] = [x, 1]
            new_level["0"] = [self.n - x, 0]
        self.levels.append(new_level)
        self.aux_a = {w: (1 if w == old_label[emitter] + "1" else 0) for w in new_level}
        self.aux_f = {w: 0 for w in new_level}

    # -- predictions ----------------------------------------------------------

    def predict_gate(self, sid: int, slot: int) -> Tuple[int, int]:
        """(acc, fail) an active station must hold at its gate this slot."""
        self.begin_slot(slot)
        if sid not in self.active:
            raise ValueError(f"s{sid} is not active at slot {slot}")
        if not self.fault_slots:
            return (self.n, 0)
        j = len(self.fault_slots)
        w_s = self.label[sid]
        cp = [slot - fs for fs in self.fault_slots]

        if cp[0] < self.n:
            # Window still contains every fault: acc is the working set
            # minus all foreign-class frames, which are exactly fail.
            working = len(self.active) + sum(
                1
                for gone, dslot in self.departed_at.items()
                if self.last_emission[gone] > slot - self.n
            )
            foreign = 0
            for level, counters in enumerate(self.levels, start=1):
                mine = w_s[:level]
                foreign += sum(d for w, (_c, d) in counters.items() if w != mine)
            return (working - foreign, foreign)

        if cp[-1] < self.n:
            # Faults 1..i have aged out of the window, i+1..j are inside.
            i = max(idx for idx in range(j) if cp[idx] >= self.n) + 1
            acc = sum(self.levels[l - 1][w_s[:l]][1] for l in range(i, j + 1))
            acc -= sum(
                self.aux_a[w] + self.aux_f[w]
                for w in self.aux_a
                if w[:i] == w_s[:i]
            )
            fail = sum(
                d
                for l in range(i, j + 1)
                for w, (_c, d) in self.levels[l - 1].items()
                if w != w_s[:l]
            )
            fail -= sum(
                self.aux_a[w] + self.aux_f[w]
                for w in self.aux_a
                if w[:i] != w_s[:i]
            )
            return (acc, fail)

        if cp[-1] < 2 * self.n:
            # One full round past the last fault: the frozen round-one
            # counts, corrected by this round's missing frames.
            acc = self.levels[-1][w_s][1] - self.aux_f[w_s]
            fail = sum(
                d - self.aux_f[w]
                for w, (_c, d) in self.levels[-1].items()
                if w != w_s
            )
            return (acc, fail)

        # Stabilized: plain same-class / other-class headcount.
        same = sum(1 for a in self.active if self.label[a] == w_s)
        other = len(self.active) - same
        return (same, other)

    # -- audits ----------------------------------------------------------------

    def counters_in_use(self) -> List[str]:
        names: List[str] = []
        for level, counters in enumerate(self.levels, start=1):
            for w in sorted(counters):
                names.append(f"C_{w}")
                names.append(f"d_{w}")
        for i in range(1, len(self.fault_slots) + 1):
            names.append(f"Cp({i})")
        for w in sorted(self.aux_a):
            names.append(f"dA_{w}")
            names.append(f"dF_{w}")
        return names


@dataclass(frozen=True)
class GateCheck:
    slot: int
    sid: int
    predicted: Tuple[int, int]
    actual: Tuple[int, int]

    @property
    def ok(self) -> bool:
        return self.predicted == self.actual


def tree_gate_checks(ring: Ring) -> List[GateCheck]:
    """Replay a completed run through a fresh counter tree and compare every
    active station's gate operands with the tree's prediction."""
    tree = CounterTree(ring.n)
    checks: List[GateCheck] = []
    for ev in ring.events:
        if ev.gate is not None and ev.owner_loc in ("in", "agree", "disagree"):
            tree.begin_slot(ev.slot)
            checks.append(
                GateCheck(
                    slot=ev.slot,
                    sid=ev.owner,
                    predicted=tree.predict_gate(ev.owner, ev.slot),
                    actual=ev.gate,
                )
            )
        tree.observe(ev)
    return checks


def counting_gate_checks(ring: Ring) -> List[GateCheck]:
    """Single-fault counting prediction, written as its own closed form
    (independent of :class:`CounterTree`): during the fault round a station
    holds acc = |W| - d_other / fail = d_other; afterwards the pair is the
    live headcount of its class versus the rest."""
    if len(ring.scenario.faults) != 1:
        raise ValueError("counting_gate_checks applies to single-fault runs")
    n = ring.n
    fault_slot = ring.scenario.faults[0].slot
    checks: List[GateCheck] = []
    active = set(range(n))
    last_emission = {i: i - n for i in range(n)}
    label: Dict[int, str] = {}
    d_by_class = {"1": 0, "0": 0}
    for ev in ring.events:
        slot = ev.slot
        if ev.gate is not None and ev.owner_loc in ("in", "agree", "disagree"):
            if slot <= fault_slot:
                predicted = (n, 0)
            elif slot < fault_slot + n:
                mine = label[ev.owner]
                other = d_by_class["0" if mine == "1" else "1"]
                working = len(active) + sum(
                    1 for gone in label if gone not in active
                    and last_emission[gone] > slot - n
                )
                predicted = (working - other, other)
            else:
                mine = label[ev.owner]
                same = sum(1 for a in active if label[a] == mine)
                predicted = (same, len(active) - same)
            checks.append(GateCheck(slot=slot, sid=ev.owner,
                                    predicted=predicted, actual=ev.gate))
        # bookkeeping
        if ev.fault:
            assert ev.accepted is not None
            vouched = set(ev.accepted) | {ev.owner}
            label = {i: ("1" if i in vouched else "0") for i in range(n)}
            d_by_class["1"] += 1
            last_emission[ev.owner] = slot
        elif ev.emitted:
            if label and slot < fault_slot + n:
                d_by_class[label[ev.owner]] += 1
            last_emission[ev.owner] = slot
        for sid, _kind in ev.departed:
            active.discard(sid)
    return checks
