"""Per-station state and rules of the TDMA membership protocol.

N stations share a broadcast bus in fixed slot order (slot t belongs to
station t mod N).  Every station keeps

* a membership vector: one bit per station, bit i = "I believe station i is
  operating".  A frame carries the sender's vector, and a receiver accepts a
  frame iff the received vector agrees with its own expectation (this
  equality test stands in for the CRC, which covers the vector).
* two counters: ``acc`` counts frames accepted since the station last sent,
  ``fail`` counts frames it rejected (or judged faulty) in the same window.

Acknowledgment is implicit: after sending, a station watches its first and
second successors' frames to find out whether its own frame was received
(``check_first_successor`` / ``check_second_successor``).  At every own slot
the clique-avoidance gate ``acc > fail`` decides whether the station may
keep sending; a station that loses the gate clears its vector and counters
and falls silent.

Functions here mutate a single :class:`StationState`; the slot/bus
choreography lives in :mod:`ttpmem.ring`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

StationId = int

# A membership vector is an int bitmask; bit i (1 << i) is station i's bit.
MembershipVector = int


def full_vector(n: int) -> MembershipVector:
    return (1 << n) - 1


def get_bit(vector: MembershipVector, i: StationId) -> int:
    return (vector >> i) & 1


def with_bit(vector: MembershipVector, i: StationId, value: int) -> MembershipVector:
    if value:
        return vector | (1 << i)
    return vector & ~(1 << i)


def vector_str(vector: MembershipVector, n: int) -> str:
    """Render bit 0 first: station order left to right."""
    return "".join(str((vector >> i) & 1) for i in range(n))


class Location(Enum):
    """Where a station is in its lifecycle."""

    ACTIVE_IN = "in"            # active, no fault observed yet
    ACTIVE_AGREE = "agree"      # active, sided with the faulty frame
    ACTIVE_DISAGREE = "disagree"  # active, rejected the faulty frame
    FAILED = "failed"           # silent, out of the membership
    INTEG_LISTEN = "listen"     # silent, rebuilding a vector from traffic
    INTEG_COUNTING = "counting"  # silent, counting toward the re-entry gate

    @property
    def is_active(self) -> bool:
        return self in (Location.ACTIVE_IN, Location.ACTIVE_AGREE, Location.ACTIVE_DISAGREE)

    @property
    def is_receiving(self) -> bool:
        """Stations that track traffic (active or integrating)."""
        return self is not Location.FAILED


class CheckPhase(Enum):
    IDLE = "idle"
    AWAIT_FIRST = "await_first"    # next frame judges my own transmission
    AWAIT_SECOND = "await_second"  # first successor rejected me; second decides


class CheckOutcome(Enum):
    MEMBERSHIP = "membership"       # successor acknowledged my frame
    SECOND_WAIT = "second_wait"     # first successor did not see my frame
    FIRST_FAULTED = "first_faulted"   # first successor itself judged faulty
    SECOND_FAULTED = "second_faulted"  # second successor itself judged faulty
    LEAVE = "leave"                 # both successors rejected me: I am send-faulty


@dataclass(frozen=True)
class Frame:
    sender: StationId
    vector: MembershipVector


@dataclass
class StationState:
    sid: StationId
    n: int
    member: MembershipVector
    acc: int
    fail: int
    location: Location
    check: CheckPhase = CheckPhase.IDLE
    first_succ: Optional[StationId] = None
    # Slot at which integration listening began (None unless integrating).
    listen_from: Optional[int] = None
    # Slot of this station's most recent transmission (None if never sent
    # since the run began; the all-active start counts as a virtual send).
    last_sent: Optional[int] = None


def initial_station(sid: StationId, n: int) -> StationState:
    """Steady-state start: everyone active and mutually recognized.

    Station i last sent i+1 slots ago, so it has accepted the n-i-1 frames
    since then plus its own (acc = n-i), rejected nothing, and only station
    n-1 — whose frame was the most recent — is still awaiting its first
    successor's acknowledgment.
    """
    return StationState(
        sid=sid,
        n=n,
        member=full_vector(n),
        acc=n - sid,
        fail=0,
        location=Location.ACTIVE_IN,
        check=CheckPhase.AWAIT_FIRST if sid == n - 1 else CheckPhase.IDLE,
        first_succ=None,
        last_sent=sid - n,  # virtual slot of the previous round
    )


def crc_correct(frame: Frame, expected: MembershipVector, clean: bool) -> bool:
    """Frame-acceptance test: the CRC covers the membership vector, so a
    receiver's check passes iff the frame is uncorrupted and the sender's
    vector equals the receiver's expectation."""
    return clean and frame.vector == expected


def clique_gate(st: StationState, weak: bool = False) -> bool:
    """Clique-avoidance decision at the station's own slot.

    The sound gate requires strictly more agreement than disagreement;
    ``weak=True`` is the deliberately broken >= variant kept for mutation
    tests.
    """
    if weak:
        return st.acc >= st.fail
    return st.acc > st.fail


def begin_emission(st: StationState) -> Frame:
    """Reset the counting window and put a frame on the bus.

    The sender counts itself (acc=1) and starts watching for its first
    successor's acknowledgment.  Its own membership bit is set (relevant for
    a re-entering station whose bit was still 0).
    """
    st.member = with_bit(st.member, st.sid, 1)
    st.acc = 1
    st.fail = 0
    st.check = CheckPhase.AWAIT_FIRST
    st.first_succ = None
    return Frame(sender=st.sid, vector=st.member)


def leave_active(st: StationState) -> None:
    """Fall silent: clear the vector (own bit included) and both counters."""
    st.member = 0
    st.acc = 0
    st.fail = 0
    st.location = Location.FAILED
    st.check = CheckPhase.IDLE
    st.first_succ = None
    st.listen_from = None


def check_first_successor(st: StationState, frame: Frame, clean: bool) -> CheckOutcome:
    """First frame after my own: does the sender acknowledge me?

    Passing with my bit at 1 means my frame was received (membership point).
    Passing with my bit at 0 means the sender did not see my frame; judge it
    receive-faulty for now and let the second successor arbitrate.  If
    neither variant matches, the sender itself is judged faulty and the next
    frame becomes the first-successor candidate.
    """
    base = with_bit(st.member, frame.sender, 1)
    if crc_correct(frame, with_bit(base, st.sid, 1), clean):
        return CheckOutcome.MEMBERSHIP
    if crc_correct(frame, with_bit(base, st.sid, 0), clean):
        return CheckOutcome.SECOND_WAIT
    return CheckOutcome.FIRST_FAULTED


def check_second_successor(
    st: StationState, frame: Frame, clean: bool, first: StationId
) -> CheckOutcome:
    """Second successor arbitrates between me and the first successor.

    Sender siding with me (my bit 1, first successor's bit 0) confirms the
    first successor was receive-faulty.  Sender siding with the first
    successor (my bit 0, its bit 1) convicts me: my own transmission was
    faulty and I must leave.  Anything else: this sender is judged faulty
    and the wait continues.
    """
    base = with_bit(st.member, frame.sender, 1)
    mine = with_bit(with_bit(base, st.sid, 1), first, 0)
    theirs = with_bit(with_bit(base, st.sid, 0), first, 1)
    if crc_correct(frame, mine, clean):
        return CheckOutcome.MEMBERSHIP
    if crc_correct(frame, theirs, clean):
        return CheckOutcome.LEAVE
    return CheckOutcome.SECOND_FAULTED


class ReceiveEvent(Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    LEAVE = "leave"  # second-check verdict: own transmission was faulty


def receive_step(st: StationState, frame: Frame, clean: bool) -> ReceiveEvent:
    """Process a frame from another station (receiver is active or
    integrating).  The returned event tells the ring's bookkeeping whether
    the frame counted as agreement, disagreement, or triggered departure.
    """
    s = frame.sender
    if st.check is CheckPhase.AWAIT_FIRST:
        outcome = check_first_successor(st, frame, clean)
        if outcome is CheckOutcome.MEMBERSHIP:
            st.member = with_bit(st.member, s, 1)
            st.acc += 1
            st.check = CheckPhase.IDLE
            return ReceiveEvent.ACCEPT
        if outcome is CheckOutcome.SECOND_WAIT:
            st.member = with_bit(st.member, s, 0)
            st.fail += 1
            st.check = CheckPhase.AWAIT_SECOND
            st.first_succ = s
            return ReceiveEvent.REJECT
        # First-successor candidate judged faulty; next frame takes its place.
        st.member = with_bit(st.member, s, 0)
        st.fail += 1
        return ReceiveEvent.REJECT

    if st.check is CheckPhase.AWAIT_SECOND:
        assert st.first_succ is not None
        outcome = check_second_successor(st, frame, clean, st.first_succ)
        if outcome is CheckOutcome.MEMBERSHIP:
            st.member = with_bit(st.member, s, 1)
            st.acc += 1
            st.check = CheckPhase.IDLE
            st.first_succ = None
            return ReceiveEvent.ACCEPT
        if outcome is CheckOutcome.LEAVE:
            leave_active(st)
            return ReceiveEvent.LEAVE
        st.member = with_bit(st.member, s, 0)
        st.fail += 1
        return ReceiveEvent.REJECT

    # No acknowledgment pending: plain accept/reject.  The sender's bit is
    # set before comparing, so a valid frame from a station we had written
    # off (a re-entering one) is accepted and restores its bit.
    if crc_correct(frame, with_bit(st.member, s, 1), clean):
        st.member = with_bit(st.member, s, 1)
        st.acc += 1
        return ReceiveEvent.ACCEPT
    st.member = with_bit(st.member, s, 0)
    st.fail += 1
    return ReceiveEvent.REJECT


def silent_step(st: StationState, owner: StationId) -> None:
    """A slot passed with no frame: clear the owner's bit, touch no counter."""
    st.member = with_bit(st.member, owner, 0)


def start_integration(st: StationState, copied: MembershipVector, slot: int) -> None:
    """Failed -> listening: adopt a vector snapshot from the bus traffic.

    The re-entering station keeps its own bit at 0 until its gate passes.
    """
    st.member = with_bit(copied, st.sid, 0)
    st.location = Location.INTEG_LISTEN
    st.listen_from = slot
    st.acc = 0
    st.fail = 0


def reintegrate_step(st: StationState, slot: int, weak: bool = False) -> Optional[Frame]:
    """Advance an integrating station at its own slot.

    After at least one full listening round the counters are reset and the
    counting round begins; one round later the clique gate decides re-entry.
    Returns the re-entry frame if one is sent this slot, else None.
    """
    if st.location is Location.INTEG_LISTEN:
        assert st.listen_from is not None
        if slot - st.listen_from >= st.n:
            st.acc = 0
            st.fail = 0
            st.location = Location.INTEG_COUNTING
        return None
    if st.location is Location.INTEG_COUNTING:
        if clique_gate(st, weak=weak):
            return begin_emission(st)
        leave_active(st)
        return None
    return None
