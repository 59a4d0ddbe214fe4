"""Counter abstraction of the single-fault ring.

Stations are anonymous here: the state keeps only population counters per
class (c_in = untouched by the fault, c1 = vouched for the faulty frame,
c0 = rejected it, cf = failed) plus progress counters within the current
round — d1/d0 = frames sent by each class since the round started, df =
slots that passed silently, cp = slots elapsed in the round, r = rounds
completed since the fault.  One abstract transition corresponds to one slot
of the concrete ring; the slot owner's class is the nondeterminism.

Inputs per step: ``fault`` (the asymmetric fault strikes now, splitting the
ring into x vouchers and n-x rejecters), and ``g`` (at the faulty station's
next own slot: both successor checks went against it, so it left silently
during the round instead of reaching its gate).

The clique gate shows up as guard arithmetic: during the fault round a
station of the rejecting class has acc = c0+c1-d1 and fail = d1 when its
slot comes up, so "acc > fail" is the guard c0+c1 > 2*d1 (dually for the
vouching class); from the next round on the comparison is c0 > c1 /
c1 > c0.  The d-guards (d < c before a rollover, d = c at it) pin each
class's per-round slot budget; dropping them (``strengthened=False``) and
weakening the gate to >= (``weak_gate=True``) are deliberate mutations used
to show the checked properties actually depend on these details.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

from .protocol import Location
from .ring import Ring


@dataclass(frozen=True)
class AbstractState:
    n: int
    c_in: int   # stations the fault has not touched yet (pre-fault: all)
    c0: int     # active rejecters of the faulty frame
    c1: int     # active vouchers (the faulty sender included)
    cf: int     # failed stations
    cp: int     # slot position within the current round, 1..n
    r: int      # completed rounds since the fault
    d0: int     # rejecter-class frames sent this round
    d1: int     # voucher-class frames sent this round
    df: int     # silent slots this round
    tg: int     # global slot counter mod n, 1..n (decoration)
    sg: int     # faulty station's slot index, 0 = not yet known (decoration)
    fault_seen: bool = False
    g_exit: bool = False  # the faulty sender left via its successors' verdict

    def population(self) -> int:
        return self.c_in + self.c0 + self.c1 + self.cf


@dataclass(frozen=True)
class AbstractInputs:
    fault: bool = False
    g: bool = False
    x: int = 0  # vouchers created by the fault (sender included), 1..n


def abstract_init(n: int) -> AbstractState:
    # d1 = c1 = 1 before the fault: the future faulty sender is counted as
    # having sent this round, so the fault slot itself needs no special
    # progress bookkeeping.
    return AbstractState(
        n=n, c_in=n, c0=0, c1=1, cf=0,
        cp=1, r=0, d0=0, d1=1, df=0,
        tg=1, sg=0, fault_seen=False, g_exit=False,
    )


@dataclass(frozen=True)
class AbstractTransition:
    name: str
    emits: bool
    post: AbstractState


def abstract_successors(
    s: AbstractState,
    inp: AbstractInputs,
    *,
    weak_gate: bool = False,
    strengthened: bool = True,
    literal_guard: bool = False,
) -> List[AbstractTransition]:
    """All slot-steps enabled at ``s`` under the given inputs."""

    def gate(acc_like: int, fail_like: int) -> bool:
        return acc_like >= fail_like if weak_gate else acc_like > fail_like

    def budget(d: int, c: int) -> bool:
        # d-strengthening: only c-d members of a class still have a slot
        # left this round.  The mutant drops the constraint.
        return d < c if strengthened else True

    def exhausted(d: int, c: int) -> bool:
        return d == c if strengthened else True

    tg2 = s.tg % s.n + 1
    out: List[AbstractTransition] = []

    def add(name: str, emits: bool, **changes) -> None:
        out.append(AbstractTransition(name, emits, replace(s, tg=tg2, **changes)))

    # -- before the fault ---------------------------------------------------
    if s.c_in > 0:
        if inp.fault:
            if not 1 <= inp.x <= s.n:
                raise ValueError(f"fault input needs 1 <= x <= n, got x={inp.x}")
            add("fault", True,
                sg=s.tg, c_in=0, c1=inp.x, c0=s.n - inp.x, fault_seen=True)
        else:
            add("tick", True)
        return out

    mid = s.cp < s.n
    roll = s.cp == s.n

    # -- rejecter-class slots ----------------------------------------------
    if s.c0 > 0:
        if mid and budget(s.d0, s.c0) and s.r == 0 and gate(s.c0 + s.c1, 2 * s.d1):
            add("r0_send_fault_round", True, cp=s.cp + 1, d0=s.d0 + 1)
        if mid and budget(s.d0, s.c0) and s.r == 0 and not gate(s.c0 + s.c1, 2 * s.d1):
            add("r0_fail_fault_round", False,
                cp=s.cp + 1, c0=s.c0 - 1, cf=s.cf + 1, df=s.df + 1)
        if mid and budget(s.d0, s.c0) and s.r > 0 and gate(s.c0, s.c1):
            add("r0_send_later_round", True, cp=s.cp + 1, d0=s.d0 + 1)
        if mid and budget(s.d0, s.c0) and s.r > 0 and not gate(s.c0, s.c1):
            add("r0_fail_later_round", False,
                cp=s.cp + 1, c0=s.c0 - 1, cf=s.cf + 1, df=s.df + 1)
        if roll and exhausted(s.d0, s.c0) and gate(s.c0, s.c1):
            add("r0_send_rollover", True,
                cp=1, r=s.r + 1, d0=1, d1=0, df=0)
        if roll and exhausted(s.d0, s.c0) and not gate(s.c0, s.c1):
            add("r0_fail_rollover", False,
                cp=1, r=s.r + 1, c0=s.c0 - 1, cf=s.cf + 1, d0=0, d1=0, df=1)

    # -- voucher-class slots -------------------------------------------------
    if s.c1 > 0:
        if mid and budget(s.d1, s.c1) and s.r == 0 and gate(s.c0 + s.c1, 2 * s.d0):
            add("r1_send_fault_round", True, cp=s.cp + 1, d1=s.d1 + 1)
        if mid and budget(s.d1, s.c1) and s.r == 0 and not gate(s.c0 + s.c1, 2 * s.d0):
            add("r1_fail_fault_round", False,
                cp=s.cp + 1, c1=s.c1 - 1, cf=s.cf + 1, df=s.df + 1)
        if mid and budget(s.d1, s.c1) and s.r > 0 and gate(s.c1, s.c0):
            # After a silent departure of the faulty sender at the rollover,
            # the first two slots of the new round belong to the stations
            # that rejected it back then; they cannot be voucher sends.
            if literal_guard or not (s.r == 1 and s.g_exit and s.cp in (1, 2)):
                add("r1_send_later_round", True, cp=s.cp + 1, d1=s.d1 + 1)
        if mid and budget(s.d1, s.c1) and s.r > 0 and not gate(s.c1, s.c0):
            add("r1_fail_later_round", False,
                cp=s.cp + 1, c1=s.c1 - 1, cf=s.cf + 1, df=s.df + 1)
        if roll and exhausted(s.d1, s.c1) and gate(s.c1, s.c0):
            if not (s.r == 0 and inp.g):
                add("r1_send_rollover", True,
                    cp=1, r=s.r + 1, d1=1, d0=0, df=0)
            else:
                # The faulty sender's own slot, but both successor checks
                # convicted it during the round: it leaves without sending.
                add("r1_guess_exit_rollover", False,
                    cp=1, r=s.r + 1, c1=s.c1 - 1, cf=s.cf + 1,
                    d1=0, d0=0, df=1, g_exit=True)
        if roll and exhausted(s.d1, s.c1) and not gate(s.c1, s.c0):
            # With g the sender was already convicted by its successors; the
            # slot is silent either way, but the flag still marks that the
            # two convicting stations own the next two slots.
            add("r1_fail_rollover", False,
                cp=1, r=s.r + 1, c1=s.c1 - 1, cf=s.cf + 1, d1=0, d0=0, df=1,
                g_exit=s.g_exit or (s.r == 0 and inp.g))

    # -- slots of failed stations --------------------------------------------
    if s.cf > 0:
        if mid and budget(s.df, s.cf):
            add("idle_slot", False, cp=s.cp + 1, df=s.df + 1)
        if roll and exhausted(s.df, s.cf):
            add("idle_rollover", False, cp=1, r=s.r + 1, df=1, d0=0, d1=0)

    return out


def conserves_population(pre: AbstractState, post: AbstractState) -> bool:
    """Post-fault slot steps move stations between classes, never lose them."""
    if not post.fault_seen:
        return True
    if not pre.fault_seen:  # the fault step itself re-bases the population
        return post.population() == pre.n
    return post.population() == pre.population()


# -- concrete-to-abstract map -------------------------------------------------


def abstraction_map(ring: Ring) -> AbstractState:
    """Counter view of the ring's current state (before slot ``ring.slot``).

    Defined for runs with at most one fault and no integrating stations.
    The faulty sender is counted as a voucher until its own next slot even
    if both successor checks already convicted it — the silent departure is
    only booked at the slot where its sending would have been due, which is
    exactly when the abstract g-branch fires.
    """
    n = ring.n
    sigma = ring.slot
    if len(ring.fault_slots) > 1:
        raise ValueError("abstraction is defined for at most one fault")
    for st in ring.stations:
        if st.location in (Location.INTEG_LISTEN, Location.INTEG_COUNTING):
            raise ValueError("abstraction is undefined while stations integrate")

    tg = sigma % n + 1
    if not ring.fault_slots:
        return replace(abstract_init(n), tg=tg)

    fault_slot = ring.fault_slots[0]
    faulty = fault_slot % n
    exit_slot: Optional[int] = None
    for slot, sid, kind in ring.departures:
        if sid == faulty and kind == "second_check":
            exit_slot = slot

    defer = exit_slot is not None and sigma <= fault_slot + n
    c1 = sum(
        1 for st in ring.stations
        if st.location.is_active and ring.labels[st.sid].startswith("1")
    )
    c0 = sum(
        1 for st in ring.stations
        if st.location.is_active and ring.labels[st.sid].startswith("0")
    )
    cf = n - c1 - c0
    if defer:
        c1 += 1
        cf -= 1

    elapsed = sigma - 1 - fault_slot  # slots completed after the fault slot
    cp = elapsed % n + 1
    r = elapsed // n
    window = fault_slot + n * r
    d0 = d1 = df = 0
    for ev in ring.events[window:sigma]:
        if not ev.emitted:
            df += 1
        elif ring.labels[ev.owner].startswith("1"):
            d1 += 1
        else:
            d0 += 1

    return AbstractState(
        n=n, c_in=0, c0=c0, c1=c1, cf=cf,
        cp=cp, r=r, d0=d0, d1=d1, df=df,
        tg=tg, sg=faulty + 1, fault_seen=True,
        g_exit=exit_slot is not None and sigma > fault_slot + n,
    )


def abstract_inputs_for_slot(ring: Ring, slot: int) -> AbstractInputs:
    """Inputs the abstract automaton consumes for the ring's given slot."""
    if not ring.fault_slots or slot < ring.fault_slots[0]:
        return AbstractInputs()
    fault_slot = ring.fault_slots[0]
    if slot == fault_slot:
        ev = ring.events[fault_slot]
        assert ev.accepted is not None
        return AbstractInputs(fault=True, x=1 + len(ev.accepted))
    g = False
    if slot == fault_slot + ring.n:
        faulty = fault_slot % ring.n
        g = any(
            sid == faulty and kind == "second_check" and dep_slot < slot
            for dep_slot, sid, kind in ring.departures
        )
    return AbstractInputs(g=g)
