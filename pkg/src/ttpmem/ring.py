"""Synchronous N-station ring: slot choreography, fault injection, traces.

A scenario fixes the ring size, a horizon in rounds, a list of asymmetric
transmission faults (slot + the set of receivers that still get the frame
uncorrupted) and optional re-integration events.  :class:`Ring` executes it
slot by slot: the slot owner runs its clique gate and either broadcasts or
falls silent, receivers update vectors/counters per the protocol rules, and
every fault splits the current classes — the bookkeeping here tracks those
classes as bit-string labels ('1' appended for stations that vouched for the
faulty frame, '0' for everyone else).

Scenario file format (one directive per line, '#' comments allowed)::

    n = 4
    rounds = 4
    fault slot=0 accept=2,3
    integrate station=3 slot=12

Trace format (one line per slot, fixed field order)::

    slot=0 owner=s0 sent=1 s0[m=1111 a=1 f=0 loc=agree] s1[...] ...
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .protocol import (
    CheckPhase,
    Frame,
    Location,
    ReceiveEvent,
    StationState,
    begin_emission,
    clique_gate,
    full_vector,
    initial_station,
    leave_active,
    receive_step,
    reintegrate_step,
    silent_step,
    start_integration,
    vector_str,
    with_bit,
)


class ScenarioError(ValueError):
    """Ill-formed or unrealizable scenario input."""


@dataclass(frozen=True)
class FaultSpec:
    """Asymmetric fault at ``slot``: only stations in ``accept`` receive the
    frame uncorrupted; every other receiver sees a corrupted frame."""

    slot: int
    accept: frozenset

    def __str__(self) -> str:
        ids = ",".join(f"s{i}" for i in sorted(self.accept))
        return f"fault@{self.slot}->{{{ids}}}"


@dataclass(frozen=True)
class IntegrationSpec:
    station: int
    slot: int


@dataclass(frozen=True)
class Scenario:
    n: int
    rounds: int
    faults: Tuple[FaultSpec, ...] = ()
    integrations: Tuple[IntegrationSpec, ...] = ()

    @property
    def total_slots(self) -> int:
        return self.n * self.rounds

    def validate(self) -> List[str]:
        """Static checks.  Raises ScenarioError on hard violations, returns
        a list of warnings for admissible-but-unusual inputs."""
        if self.n < 3:
            raise ScenarioError(f"need at least 3 stations, got n={self.n}")
        if self.rounds < 1:
            raise ScenarioError(f"need at least 1 round, got rounds={self.rounds}")
        warnings: List[str] = []
        prev = None
        for f in self.faults:
            if not 0 <= f.slot < self.total_slots:
                raise ScenarioError(f"fault slot {f.slot} outside horizon [0,{self.total_slots})")
            if prev is not None:
                if f.slot <= prev:
                    raise ScenarioError("fault slots must be strictly increasing")
                if f.slot - prev > self.n:
                    warnings.append(
                        f"gap of {f.slot - prev} slots between faults at {prev} and {f.slot} "
                        f"exceeds one round; counting predictions are not guaranteed there"
                    )
            owner = f.slot % self.n
            for sid in f.accept:
                if not 0 <= sid < self.n:
                    raise ScenarioError(f"fault accept id s{sid} out of range")
                if sid == owner:
                    raise ScenarioError(f"fault at slot {f.slot}: sender s{owner} cannot be its own receiver")
            prev = f.slot
        if self.faults and self.total_slots < self.faults[-1].slot + 2 * self.n:
            warnings.append(
                f"horizon ends {self.total_slots} slots in; less than two full rounds after "
                f"the last fault at slot {self.faults[-1].slot}, so stabilization cannot be judged"
            )
        for ev in self.integrations:
            if not 0 <= ev.station < self.n:
                raise ScenarioError(f"integration station s{ev.station} out of range")
            if not 0 <= ev.slot < self.total_slots:
                raise ScenarioError(f"integration slot {ev.slot} outside horizon")
        return warnings


def parse_scenario(text: str) -> Scenario:
    n: Optional[int] = None
    rounds: Optional[int] = None
    faults: List[FaultSpec] = []
    integrations: List[IntegrationSpec] = []

    def kv_args(parts: Sequence[str], lineno: int) -> Dict[str, str]:
        out: Dict[str, str] = {}
        for p in parts:
            if "=" not in p:
                raise ScenarioError(f"line {lineno}: expected key=value, got {p!r}")
            k, v = p.split("=", 1)
            out[k.strip()] = v.strip()
        return out

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "fault":
            args = kv_args(tokens[1:], lineno)
            if "slot" not in args:
                raise ScenarioError(f"line {lineno}: fault needs slot=")
            accept_raw = args.get("accept", "")
            accept = frozenset(int(x) for x in accept_raw.split(",") if x.strip() != "")
            try:
                faults.append(FaultSpec(slot=int(args["slot"]), accept=accept))
            except ValueError as e:
                raise ScenarioError(f"line {lineno}: {e}") from None
            extra = set(args) - {"slot", "accept"}
            if extra:
                raise ScenarioError(f"line {lineno}: unknown fault argument(s) {sorted(extra)}")
        elif tokens[0] == "integrate":
            args = kv_args(tokens[1:], lineno)
            if "station" not in args or "slot" not in args:
                raise ScenarioError(f"line {lineno}: integrate needs station= and slot=")
            integrations.append(IntegrationSpec(station=int(args["station"]), slot=int(args["slot"])))
        elif "=" in line:
            key, _, value = line.partition("=")
            key = key.strip()
            try:
                ivalue = int(value.strip())
            except ValueError:
                raise ScenarioError(f"line {lineno}: {key} needs an integer, got {value.strip()!r}") from None
            if key == "n":
                n = ivalue
            elif key == "rounds":
                rounds = ivalue
            else:
                raise ScenarioError(f"line {lineno}: unknown setting {key!r}")
        else:
            raise ScenarioError(f"line {lineno}: cannot parse {line!r}")
    if n is None:
        raise ScenarioError("scenario does not set n")
    if rounds is None:
        raise ScenarioError("scenario does not set rounds")
    scenario = Scenario(
        n=n, rounds=rounds,
        faults=tuple(sorted(faults, key=lambda f: f.slot)),
        integrations=tuple(integrations),
    )
    scenario.validate()
    return scenario


def scenario_text(scenario: Scenario) -> str:
    lines = [f"n = {scenario.n}", f"rounds = {scenario.rounds}"]
    for f in scenario.faults:
        accept = ",".join(str(i) for i in sorted(f.accept))
        lines.append(f"fault slot={f.slot} accept={accept}")
    for ev in scenario.integrations:
        lines.append(f"integrate station={ev.station} slot={ev.slot}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SlotRecord:
    """Post-slot snapshot used for traces and table rendering."""

    slot: int
    owner: int
    emitted: bool
    note: str  # 'sent' | 'silent (gate failed)' | 'silent (failed)' | ...
    stations: Tuple[Tuple[int, int, int, str], ...]  # (vector, acc, fail, loc)


@dataclass(frozen=True)
class SlotEvent:
    """Compact per-slot observables: everything the counting oracles and the
    abstraction map are allowed to see (no station-internal counters except
    the gate operands at the moment the gate runs)."""

    slot: int
    owner: int
    owner_loc: str        # owner's location before the slot ran
    emitted: bool
    gate: Optional[Tuple[int, int]]  # (acc, fail) at gate evaluation
    departed: Tuple[Tuple[int, str], ...]  # (sid, 'gate'|'second_check'|'integ_gate')
    fault: bool
    accepted: Optional[Tuple[int, ...]]  # receivers that accepted, fault slots only


class Ring:
    """One executable scenario instance.  ``step()`` runs a single slot;
    ``run()`` drives to the horizon."""

    def __init__(self, scenario: Scenario, gate: str = "strict", record: bool = True):
        if gate not in ("strict", "weak"):
            raise ValueError(f"gate must be 'strict' or 'weak', got {gate!r}")
        self.scenario = scenario
        self.warnings = scenario.validate()
        self.n = scenario.n
        self.weak_gate = gate == "weak"
        self.record = record
        self.stations: List[StationState] = [initial_station(i, self.n) for i in range(self.n)]
        self.labels: List[str] = [""] * self.n
        self.slot = 0
        self.last_frame: Optional[Frame] = None
        self.fault_slots: List[int] = []
        self.events: List[SlotEvent] = []
        self.records: List[SlotRecord] = []
        self.departures: List[Tuple[int, int, str]] = []  # (slot, sid, kind)
        self._faults: Dict[int, FaultSpec] = {}
        for f in scenario.faults:
            self._faults[f.slot] = f
        self._integrations: Dict[int, List[int]] = {}
        for ev in scenario.integrations:
            self._integrations.setdefault(ev.slot, []).append(ev.station)

    # -- queries -----------------------------------------------------------

    def active_ids(self) -> List[int]:
        return [st.sid for st in self.stations if st.location.is_active]

    def station(self, sid: int) -> StationState:
        return self.stations[sid]

    # -- execution ---------------------------------------------------------

    def step(self) -> None:
        t = self.slot
        if t >= self.scenario.total_slots:
            raise IndexError("scenario horizon exhausted")
        owner = self.stations[t % self.n]
        fault = self._faults.get(t)

        for sid in self._integrations.get(t, ()):
            st = self.stations[sid]
            if st.location is not Location.FAILED:
                raise ScenarioError(
                    f"integrate station=s{sid} slot={t}: station is {st.location.value}, not failed"
                )
            if self.last_frame is None:
                self.warnings.append(
                    f"s{sid} cannot start integrating at slot {t}: no frame ever sent"
                )
            else:
                start_integration(st, self.last_frame.vector, t)

        owner_loc = owner.location
        frame: Optional[Frame] = None
        gate_vals: Optional[Tuple[int, int]] = None
        departed: List[Tuple[int, str]] = []

        if owner.location.is_active:
            gate_vals = (owner.acc, owner.fail)
            if clique_gate(owner, weak=self.weak_gate):
                frame = begin_emission(owner)
                owner.last_sent = t
            else:
                leave_active(owner)
                departed.append((owner.sid, "gate"))
        reentered = False
        if owner.location in (Location.INTEG_LISTEN, Location.INTEG_COUNTING):
            counting = owner.location is Location.INTEG_COUNTING
            if counting:
                gate_vals = (owner.acc, owner.fail)
            frame = reintegrate_step(owner, t, weak=self.weak_gate)
            if frame is not None:
                owner.last_sent = t
                owner.location = Location.ACTIVE_IN
                reentered = True
            elif counting and owner.location is Location.FAILED:
                departed.append((owner.sid, "integ_gate"))

        if fault is not None:
            if frame is None:
                raise ScenarioError(
                    f"fault at slot {t}: owner s{owner.sid} is silent, nothing to corrupt"
                )
            for sid in fault.accept:
                if not self.stations[sid].location.is_receiving:
                    raise ScenarioError(
                        f"fault at slot {t}: accept lists s{sid}, which is not receiving"
                    )

        accepted: List[int] = []
        if frame is None:
            for st in self.stations:
                if st.sid != owner.sid and st.location.is_receiving:
                    silent_step(st, owner.sid)
        else:
            self.last_frame = frame
            for st in self.stations:
                if st.sid == owner.sid or not st.location.is_receiving:
                    continue
                clean = fault is None or st.sid in fault.accept
                ev = receive_step(st, frame, clean)
                if ev is ReceiveEvent.ACCEPT:
                    accepted.append(st.sid)
                elif ev is ReceiveEvent.LEAVE:
                    departed.append((st.sid, "second_check"))
            if fault is not None:
                vouched = set(accepted) | {owner.sid}
                for st in self.stations:
                    self.labels[st.sid] += "1" if st.sid in vouched else "0"
                    if st.location.is_active:
                        st.location = (
                            Location.ACTIVE_AGREE
                            if st.sid in vouched
                            else Location.ACTIVE_DISAGREE
                        )
                self.fault_slots.append(t)

        if reentered:
            # Classes may merge only now: receivers that accepted the
            # re-entry frame have restored the sender's bit.
            self._adopt_label(owner)

        for sid, kind in departed:
            self.departures.append((t, sid, kind))

        self.events.append(
            SlotEvent(
                slot=t,
                owner=owner.sid,
                owner_loc=owner_loc.value,
                emitted=frame is not None,
                gate=gate_vals,
                departed=tuple(departed),
                fault=fault is not None,
                accepted=tuple(sorted(accepted)) if fault is not None else None,
            )
        )
        if self.record:
            self.records.append(self._snapshot(t, owner.sid, frame is not None, owner_loc))
        self.slot += 1

    def _adopt_label(self, st: StationState) -> None:
        for other in self.stations:
            if other.sid != st.sid and other.location.is_active and other.member == st.member:
                self.labels[st.sid] = self.labels[other.sid]
                return

    def _snapshot(self, t: int, owner: int, emitted: bool, owner_loc: Location) -> SlotRecord:
        if emitted:
            note = "sent"
        elif owner_loc.is_active:
            note = "silent (gate failed)"
        elif owner_loc is Location.INTEG_LISTEN:
            note = "silent (listening)"
        elif owner_loc is Location.INTEG_COUNTING:
            note = "silent (gate failed)" if self.stations[owner].location is Location.FAILED else "silent (counting)"
        else:
            note = "silent (failed)"
        return SlotRecord(
            slot=t,
            owner=owner,
            emitted=emitted,
            note=note,
            stations=tuple(
                (st.member, st.acc, st.fail, st.location.value) for st in self.stations
            ),
        )

    def run_until(self, slot: int) -> "Ring":
        while self.slot < min(slot, self.scenario.total_slots):
            self.step()
        return self

    def run(self) -> "Ring":
        return self.run_until(self.scenario.total_slots)


def run_scenario(scenario: Scenario, gate: str = "strict", record: bool = True) -> Ring:
    return Ring(scenario, gate=gate, record=record).run()


# -- partitions and stabilization -------------------------------------------


def partition_classes(ring: Ring) -> Dict[str, Tuple[int, ...]]:
    """Group the currently active stations into classes.

    Classes are keyed by fault-history label; the grouping must coincide
    with grouping by membership-vector equality (internal soundness check —
    a divergence would mean the label bookkeeping and the protocol state
    disagree about who belongs together).
    """
    by_label: Dict[str, List[int]] = {}
    by_vector: Dict[int, List[int]] = {}
    for st in ring.stations:
        if st.location.is_active:
            by_label.setdefault(ring.labels[st.sid], []).append(st.sid)
            by_vector.setdefault(st.member, []).append(st.sid)
    label_groups = sorted(tuple(v) for v in by_label.values())
    vector_groups = sorted(tuple(v) for v in by_vector.values())
    assert label_groups == vector_groups, (
        f"class labels {by_label} disagree with vector partition {by_vector}"
    )
    return {k: tuple(v) for k, v in sorted(by_label.items())}


def is_single_clique(ring: Ring) -> bool:
    """All active stations hold identical vectors that acknowledge exactly
    the active set — i.e. the survivors fully recognize each other and
    nobody else.  An empty active set is vacuously a clique; reports must
    flag that case as degenerate rather than call it success."""
    active = [st for st in ring.stations if st.location.is_active]
    if not active:
        return True
    mask = 0
    for st in active:
        mask = with_bit(mask, st.sid, 1)
    return all(st.member == mask for st in active)


@dataclass(frozen=True)
class StabilizationReport:
    scenario: Scenario
    classes_after_round1: Dict[str, Tuple[int, ...]]
    classes_after_round2: Dict[str, Tuple[int, ...]]
    single_clique: bool
    active_after_round2: Tuple[int, ...]

    @property
    def degenerate(self) -> bool:
        """Nobody left active: the clique is vacuous, not a success."""
        return not self.active_after_round2

    @property
    def converged_in_two_rounds(self) -> bool:
        return self.single_clique and len(self.classes_after_round2) <= 1


def check_stabilization(scenario: Scenario, gate: str = "strict") -> StabilizationReport:
    """Run the scenario and judge convergence: after the last fault, one full
    round may leave several classes, but by the end of the second round the
    active stations must form a single clique."""
    if not scenario.faults:
        raise ScenarioError("stabilization check needs at least one fault")
    last = scenario.faults[-1].slot
    if scenario.total_slots < last + 2 * scenario.n:
        raise ScenarioError(
            f"horizon too short to judge stabilization: need {last + 2 * scenario.n} slots, "
            f"scenario has {scenario.total_slots}"
        )
    ring = Ring(scenario, gate=gate, record=False)
    ring.run_until(last + scenario.n)
    classes_r1 = partition_classes(ring)
    ring.run_until(last + 2 * scenario.n)
    classes_r2 = partition_classes(ring)
    return StabilizationReport(
        scenario=scenario,
        classes_after_round1=classes_r1,
        classes_after_round2=classes_r2,
        single_clique=is_single_clique(ring),
        active_after_round2=tuple(ring.active_ids()),
    )


# -- rendering ---------------------------------------------------------------


def trace_lines(ring: Ring) -> List[str]:
    lines = []
    for rec in ring.records:
        parts = [f"slot={rec.slot}", f"owner=s{rec.owner}", f"sent={int(rec.emitted)}"]
        for sid, (member, acc, fail, loc) in enumerate(rec.stations):
            parts.append(f"s{sid}[m={vector_str(member, ring.n)} a={acc} f={fail} loc={loc}]")
        lines.append(" ".join(parts))
    return lines


def initial_table(n: int) -> str:
    rows = ["initial state"]
    rows.append("  station  vector  acc  fail  location")
    for i in range(n):
        rows.append(
            f"  s{i:<6}  {vector_str(full_vector(n), n):<6}  {n - i:<3}  {0:<4}  in"
        )
    return "\n".join(rows)


def render_table(rec: SlotRecord, n: int) -> str:
    rows = [f"after slot {rec.slot} - s{rec.owner} {rec.note}"]
    rows.append("  station  vector  acc  fail  location")
    for sid, (member, acc, fail, loc) in enumerate(rec.stations):
        rows.append(f"  s{sid:<6}  {vector_str(member, n):<6}  {acc:<3}  {fail:<4}  {loc}")
    return "\n".join(rows)


def render_run_tables(ring: Ring) -> str:
    blocks = [initial_table(ring.n)]
    blocks.extend(render_table(rec, ring.n) for rec in ring.records)
    return "\n\n".join(blocks) + "\n"
