"""Deterministic cycle scheduler for the full pipeline.

Composes the SPI slave, the frame mappers and the bridge stages into one
system-clock domain, records every named signal per cycle into a Trace,
and exports VCD or CSV waveforms.  Evaluation order within a cycle is
fixed: pins, SPI slave, mapper1, AHB slave interface, APB controller,
APB interface, mapper2, trace.

The engine models the host side of each command frame as a well-behaved
AHB master: the decoded transfer type is presented for exactly one
accepted cycle and then dropped to IDLE while address, data and prdata
stay on the bus, so each command frame performs exactly one APB transfer.
The response snapshot is captured at that transfer's enable cycle.
Commands that never start a transfer (idle type, not ready, or a decode
miss) are held for a short settle window and the snapshot is captured at
its end, which is when Hresp reports the decode error.
"""

import json
from collections import deque
from dataclasses import dataclass, replace

from .ahb_slave_if import (
    DEFAULT_DECODE_MAP,
    DecodeMap,
    DecodeRegion,
    SlaveIfState,
    compute_valid,
    decode_select,
    slave_if_tick,
)
from .apb_fsm import ENABLE_STATES, FsmState, fsm_next, fsm_outputs
from .apb_if import ApbPeripheral, ApbStage, ResponseMode
from .bus_types import (
    AhbRequest,
    CommandFrame,
    ResponseFrame,
    TransType,
    is_onehot_or_zero,
)
from .spi_link import SpiPins, SpiSlaveState, load_response, mapper1, mapper2, spi_tick


class ConfigError(ValueError):
    """A scenario or engine parameter violates its invariants."""


class EngineError(RuntimeError):
    """The pipeline reached a state the transport layer cannot handle."""


# Every signal recorded per cycle, with its width.  clk is a constant 1;
# the cycle index itself stands in for the clock edges.
SIGNALS = (
    ("clk", 1),
    ("resetn", 1),
    ("sclk", 1),
    ("mosi", 1),
    ("miso", 1),
    ("csn", 1),
    ("start_transaction", 1),
    ("Prdata", 32),
    ("Haddr", 32),
    ("Hwdata", 32),
    ("Htrans", 2),
    ("Hreadyin", 1),
    ("Hwrite", 1),
    ("valid", 1),
    ("tempselx", 3),
    ("Hwritereg", 1),
    ("Haddr1", 32),
    ("Haddr2", 32),
    ("Hwdata1", 32),
    ("Hwdata2", 32),
    ("fsm_state", 3),
    ("Pwrite", 1),
    ("Penable", 1),
    ("Pselx", 3),
    ("Paddr", 32),
    ("Pwdata", 32),
    ("Pwriteout", 1),
    ("Penableout", 1),
    ("Pselxout", 3),
    ("Pwdataout", 32),
    ("Paddrout", 32),
    ("Hreadyout", 1),
    ("Hresp", 2),
    ("Hrdata", 32),
    ("data_to_slave", 104),
)


class Trace:
    """Time-indexed record of named signals as (cycle, value) change lists."""

    def __init__(self):
        self._widths = {}
        self._changes = {}
        self.cycles = 0

    def declare(self, name, width):
        if name in self._widths:
            raise ValueError(f"signal already declared: {name}")
        self._widths[name] = width
        self._changes[name] = []

    def record(self, cycle, name, value):
        width = self._widths[name]
        if value < 0 or value >> width:
            raise ValueError(f"{name} value {value:#x} exceeds {width} bits")
        changes = self._changes[name]
        if changes:
            last_cycle, last_value = changes[-1]
            if cycle <= last_cycle:
                raise ValueError(f"{name}: record at cycle {cycle} is not increasing")
            if value == last_value:
                return
        changes.append((cycle, value))

    @property
    def signal_names(self):
        return tuple(self._widths)

    def width(self, name):
        return self._widths[name]

    def changes(self, name):
        return tuple(self._changes[name])

    def value_at(self, name, cycle):
        """Signal value during the given cycle (0 before its first change)."""
        value = 0
        for c, v in self._changes[name]:
            if c > cycle:
                break
            value = v
        return value

    def series(self, name):
        """Per-cycle values for cycles 0..cycles-1."""
        out = []
        value = 0
        it = iter(self._changes[name])
        nxt = next(it, None)
        for cycle in range(self.cycles):
            while nxt is not None and nxt[0] == cycle:
                value = nxt[1]
                nxt = next(it, None)
            out.append(value)
        return out


@dataclass(frozen=True)
class Violation:
    cycle: int
    rule: str
    detail: str


def check_trace(trace: Trace):
    """Run the APB protocol monitor over the externally observed signals.

    Checks setup-before-enable, the one-cycle Penable pulse, setup/enable
    stability of address, data, write flag and selects, and the one-hot
    select encoding.  Returns the list of violations, empty when clean.
    """
    names = ("Pselxout", "Penableout", "Paddrout", "Pwriteout", "Pwdataout")
    series = {n: trace.series(n) for n in names}
    violations = []
    prev = None
    for cycle in range(trace.cycles):
        cur = {n: series[n][cycle] for n in names}
        if not is_onehot_or_zero(cur["Pselxout"]):
            violations.append(
                Violation(cycle, "one-hot-pselx", f"Pselxout={cur['Pselxout']:#05b}")
            )
        if cur["Penableout"]:
            if not cur["Pselxout"]:
                violations.append(
                    Violation(cycle, "setup-before-enable", "enable without select")
                )
            if prev is None:
                violations.append(
                    Violation(cycle, "setup-before-enable", "enable with no setup cycle")
                )
            elif prev["Penableout"]:
                violations.append(
                    Violation(cycle, "penable-width", "Penableout high two cycles running")
                )
            elif not prev["Pselxout"]:
                violations.append(
                    Violation(cycle, "setup-before-enable", "no setup phase before enable")
                )
            else:
                for name in ("Pselxout", "Paddrout", "Pwriteout", "Pwdataout"):
                    if prev[name] != cur[name]:
                        violations.append(
                            Violation(
                                cycle,
                                "setup-stability",
                                f"{name} changed between setup and enable "
                                f"({prev[name]:#x} -> {cur[name]:#x})",
                            )
                        )
        prev = cur
    return violations


@dataclass(frozen=True)
class ScenarioFrame:
    """One command frame plus the idle gap that follows it."""

    frame: CommandFrame
    idle_gap: int = 0

    def __post_init__(self):
        if self.idle_gap < 0:
            raise ConfigError(f"idle gap must be non-negative: {self.idle_gap}")


@dataclass(frozen=True)
class Scenario:
    """Everything a deterministic run needs."""

    cycles: int
    reset_cycles: int = 2
    sclk_divider: int = 4
    response_mode: ResponseMode = ResponseMode.OPEN_LOOP
    decode_map: DecodeMap = DEFAULT_DECODE_MAP
    frames: tuple = ()
    peripherals: tuple = ()

    def __post_init__(self):
        if self.cycles < 1:
            raise ConfigError(f"cycles must be positive: {self.cycles}")
        if self.reset_cycles < 1:
            raise ConfigError(f"reset duration must be positive: {self.reset_cycles}")
        if self.sclk_divider < 2:
            raise ConfigError(f"sclk divider must be at least 2: {self.sclk_divider}")
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "peripherals", tuple(self.peripherals))


def _parse_word(value, what):
    if isinstance(value, int):
        parsed = value
    elif isinstance(value, str):
        try:
            parsed = int(value, 0) if value.startswith(("0x", "0X")) else int(value, 16)
        except ValueError as exc:
            raise ConfigError(f"bad {what}: {value!r}") from exc
    else:
        raise ConfigError(f"bad {what}: {value!r}")
    return parsed


def scenario_from_dict(obj) -> Scenario:
    """Build a Scenario from the JSON file layout, validating as it goes."""
    try:
        if not isinstance(obj, dict):
            raise ConfigError("scenario must be a JSON object")
        unknown = set(obj) - {
            "cycles", "reset_cycles", "sclk_divider", "response_mode",
            "decode_map", "frames", "peripherals",
        }
        if unknown:
            raise ConfigError(f"unknown scenario fields: {sorted(unknown)}")
        regions = obj.get("decode_map")
        if regions is None:
            decode_map = DEFAULT_DECODE_MAP
        else:
            decode_map = DecodeMap(
                tuple(
                    DecodeRegion(
                        _parse_word(r["lo"], "region lo"),
                        _parse_word(r["hi"], "region hi"),
                        int(r["select"]),
                    )
                    for r in regions
                )
            )
        frames = tuple(
            ScenarioFrame(
                CommandFrame.from_hex(f["hex"]), int(f.get("idle_gap", 0))
            )
            for f in obj.get("frames", ())
        )
        peripherals = tuple(
            ApbPeripheral(
                int(p["select"]),
                {
                    _parse_word(a, "register address"): _parse_word(v, "register value")
                    for a, v in p.get("registers", {}).items()
                },
            )
            for p in obj.get("peripherals", ())
        )
        return Scenario(
            cycles=int(obj["cycles"]),
            reset_cycles=int(obj.get("reset_cycles", 2)),
            sclk_divider=int(obj.get("sclk_divider", 4)),
            response_mode=ResponseMode(obj.get("response_mode", "open_loop")),
            decode_map=decode_map,
            frames=frames,
            peripherals=peripherals,
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario: {exc}") from exc


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "cycles": scenario.cycles,
        "reset_cycles": scenario.reset_cycles,
        "sclk_divider": scenario.sclk_divider,
        "response_mode": scenario.response_mode.value,
        "decode_map": [
            {"lo": f"0x{r.lo:08x}", "hi": f"0x{r.hi:08x}", "select": r.select}
            for r in scenario.decode_map.regions
        ],
        "frames": [
            {"hex": sf.frame.to_hex(), "idle_gap": sf.idle_gap}
            for sf in scenario.frames
        ],
        "peripherals": [
            {
                "select": p.select,
                "registers": {f"0x{a:08x}": f"0x{v:08x}" for a, v in p.registers.items()},
            }
            for p in scenario.peripherals
        ],
    }


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return scenario_from_dict(obj)


@dataclass(frozen=True)
class CoreCycle:
    """Everything observable during one bridge-core cycle."""

    state: FsmState        # FSM state during the cycle
    pipe: SlaveIfState     # registered pipeline values during the cycle
    valid: int
    tempselx: int
    attempted: int
    decode_hit: int
    outs: "FsmOutputs"
    snap: "ApbSnapshot"


class BridgeCore:
    """The bridge proper: AHB slave interface, APB controller, APB stage.

    step() evaluates one full cycle: Moore outputs come from the registered
    state, valid/tempselx are combinational from the presented request, and
    the registers then take their rising-edge values.
    """

    def __init__(self, decode_map=DEFAULT_DECODE_MAP,
                 response_mode=ResponseMode.OPEN_LOOP, peripherals=()):
        self.decode_map = decode_map
        self.apb = ApbStage(response_mode, peripherals)
        self.fsm_state = FsmState.IDLE
        self.pipe = SlaveIfState()

    def reset(self):
        self.fsm_state = FsmState.IDLE
        self.pipe = SlaveIfState()
        self.apb.reset()

    def step(self, req: AhbRequest) -> CoreCycle:
        tempselx = decode_select(self.decode_map, req.haddr)
        valid = compute_valid(req.hreadyin, req.htrans, tempselx)
        attempted = (
            1
            if req.hreadyin and req.htrans in (TransType.NONSEQ, TransType.SEQ)
            else 0
        )
        decode_hit = 1 if tempselx else 0
        view = replace(self.pipe, valid=valid, tempselx=tempselx)
        outs = fsm_outputs(self.fsm_state, view)
        snap = self.apb.cycle(outs, self.pipe.prdata_latch, attempted, decode_hit)
        rec = CoreCycle(
            state=self.fsm_state,
            pipe=self.pipe,
            valid=valid,
            tempselx=tempselx,
            attempted=attempted,
            decode_hit=decode_hit,
            outs=outs,
            snap=snap,
        )
        next_state = fsm_next(self.fsm_state, valid, req.hwrite, self.pipe.hwritereg)
        self.pipe = slave_if_tick(self.pipe, req, self.decode_map)
        self.fsm_state = next_state
        return rec


_SETTLE_CYCLES = 4    # hold window for commands that never start a transfer
_CAPTURE_LIMIT = 16   # safety bound from presentation to the enable phase
_PROCESS_GAP = 16     # host wait between command end and response clock-out

_IDLE_REQUEST = AhbRequest()


class Engine:
    """One simulation instance: SPI slave, mappers, bridge core and trace."""

    def __init__(self, decode_map=DEFAULT_DECODE_MAP,
                 response_mode=ResponseMode.OPEN_LOOP, peripherals=(),
                 reset_cycles=2):
        if reset_cycles < 1:
            raise ConfigError(f"reset duration must be positive: {reset_cycles}")
        self.core = BridgeCore(decode_map, response_mode, peripherals)
        self.spi = SpiSlaveState()
        self.presented = _IDLE_REQUEST
        self.trace = Trace()
        for name, width in SIGNALS:
            self.trace.declare(name, width)
        self.responses = []
        self.cycle = 0
        self._reset_left = reset_cycles
        self._pending = None

    def step(self, sclk=0, mosi=0, csn=1):
        """Advance every stage one system-clock cycle."""
        if self._reset_left:
            self._record_reset(sclk, mosi, csn)
            self._reset_left -= 1
            self.cycle += 1
            self.trace.cycles = self.cycle
            return
        pins = SpiPins(sclk=sclk, mosi=mosi, miso=self.spi.miso, csn=csn)
        self.spi = spi_tick(self.spi, pins)
        if self.spi.start_transaction:
            self._begin_frame(CommandFrame(self.spi.shift_in))
        req = self.presented
        rec = self.core.step(req)
        self._track_capture(rec)
        self._record(pins, req, rec)
        self.cycle += 1
        self.trace.cycles = self.cycle

    def run_idle(self, cycles):
        for _ in range(cycles):
            self.step()

    def _begin_frame(self, frame: CommandFrame):
        if self._pending is not None:
            raise EngineError("command frame received while a response is pending")
        req = mapper1(frame)
        tempselx = decode_select(self.core.decode_map, req.haddr)
        valid = compute_valid(req.hreadyin, req.htrans, tempselx)
        self.presented = req
        self._pending = {
            "await_enable": bool(valid),
            "one_shot": bool(valid),
            "settle": _SETTLE_CYCLES,
            "age": 0,
        }

    def _track_capture(self, rec: CoreCycle):
        p = self._pending
        if p is None:
            return
        p["age"] += 1
        if p["await_enable"]:
            if rec.snap.penable:
                self._capture(rec.snap)
                return
            if p["age"] > _CAPTURE_LIMIT:
                raise EngineError("transfer never reached the enable phase")
            if p["one_shot"]:
                # The transfer was accepted this cycle; a well-behaved master
                # drops the transfer type while holding address and data.
                self.presented = replace(self.presented, htrans=TransType.IDLE)
                p["one_shot"] = False
        else:
            p["settle"] -= 1
            if p["settle"] <= 0:
                self._capture(rec.snap)

    def _capture(self, snap):
        self.responses.append(mapper2(snap))
        self.presented = replace(self.presented, htrans=TransType.IDLE)
        self._pending = None

    def inject_frame(self, frame: CommandFrame, idle_gap=2) -> ResponseFrame:
        """Present a command frame directly at the mapper1 boundary.

        Skips the SPI serialization but runs the identical presentation and
        capture flow, so responses match the bit-level transport.
        """
        while self._reset_left:
            self.step()
        if self._pending is not None:
            raise EngineError("previous frame still awaiting its response")
        guard = 0
        while self.core.fsm_state != FsmState.IDLE:
            self.step()
            guard += 1
            if guard > _CAPTURE_LIMIT:
                raise EngineError("bridge did not return to idle")
        self._begin_frame(frame)
        guard = 0
        while self._pending is not None:
            self.step()
            guard += 1
            if guard > _CAPTURE_LIMIT + _SETTLE_CYCLES:
                raise EngineError("frame was never captured")
        self.run_idle(idle_gap)
        return self.responses[-1]

    def transfer_frame_spi(self, frame: CommandFrame, divider) -> ResponseFrame:
        """Full bit-level exchange: clock the command in over MOSI, wait for
        the bridge, then clock the response out over MISO."""
        if divider < 2:
            raise ConfigError(f"sclk divider must be at least 2: {divider}")
        while self._reset_left:
            self.step()
        half_high = divider // 2
        half_low = divider - half_high
        produced = len(self.responses)

        self.step(sclk=0, mosi=0, csn=0)  # select; sclk idles low in mode 0
        for bit in frame.wire_bits():
            for _ in range(half_low):
                self.step(sclk=0, mosi=bit, csn=0)
            for _ in range(half_high):
                self.step(sclk=1, mosi=bit, csn=0)
        self.step(sclk=0, mosi=0, csn=0)  # trailing falling edge
        for _ in range(_PROCESS_GAP):
            self.step(sclk=0, mosi=0, csn=0)
        if len(self.responses) != produced + 1:
            raise EngineError("command frame did not produce a response")

        self.spi = load_response(self.spi, self.responses[-1])
        bits = []
        for _ in range(ResponseFrame.WIDTH):
            for _ in range(half_high):
                self.step(sclk=1, mosi=0, csn=0)
            for _ in range(half_low):
                self.step(sclk=0, mosi=0, csn=0)
            bits.append(self.spi.miso)
        self.step()  # deselect
        return ResponseFrame.from_wire_bits(bits)

    def _record_reset(self, sclk, mosi, csn):
        values = {name: 0 for name, _ in SIGNALS}
        values.update(clk=1, resetn=0, sclk=sclk, mosi=mosi, csn=csn)
        for name, value in values.items():
            self.trace.record(self.cycle, name, value)

    def _record(self, pins: SpiPins, req: AhbRequest, rec: CoreCycle):
        values = {
            "clk": 1,
            "resetn": 1,
            "sclk": pins.sclk,
            "mosi": pins.mosi,
            "miso": self.spi.miso,
            "csn": pins.csn,
            "start_transaction": self.spi.start_transaction,
            "Prdata": req.prdata,
            "Haddr": req.haddr,
            "Hwdata": req.hwdata,
            "Htrans": int(req.htrans),
            "Hreadyin": req.hreadyin,
            "Hwrite": req.hwrite,
            "valid": rec.valid,
            "tempselx": rec.tempselx,
            "Hwritereg": rec.pipe.hwritereg,
            "Haddr1": rec.pipe.haddr1,
            "Haddr2": rec.pipe.haddr2,
            "Hwdata1": rec.pipe.hwdata1,
            "Hwdata2": rec.pipe.hwdata2,
            "fsm_state": int(rec.state),
            "Pwrite": rec.outs.pwrite,
            "Penable": rec.outs.penable,
            "Pselx": rec.outs.pselx,
            "Paddr": rec.outs.paddr,
            "Pwdata": rec.outs.pwdata,
            "Pwriteout": rec.snap.pwrite,
            "Penableout": rec.snap.penable,
            "Pselxout": rec.snap.pselx,
            "Pwdataout": rec.snap.pwdata,
            "Paddrout": rec.snap.paddr,
            "Hreadyout": rec.snap.hreadyout,
            "Hresp": rec.snap.hresp,
            "Hrdata": rec.snap.hrdata,
            "data_to_slave": self.spi.shift_out,
        }
        for name, value in values.items():
            self.trace.record(self.cycle, name, value)


def run_engine(scenario: Scenario):
    """Like :func:`run` but also hands back the engine, so callers can
    inspect post-run state such as peripheral register files."""
    engine = Engine(
        decode_map=scenario.decode_map,
        response_mode=scenario.response_mode,
        peripherals=scenario.peripherals,
        reset_cycles=scenario.reset_cycles,
    )
    responses = []
    for sf in scenario.frames:
        responses.append(engine.transfer_frame_spi(sf.frame, scenario.sclk_divider))
        engine.run_idle(sf.idle_gap)
    while engine.cycle < scenario.cycles:
        engine.step()
    return engine, responses


def run(scenario: Scenario):
    """Run a scenario end to end; returns (trace, response frames).

    The run is a pure function of the scenario: reset is asserted for the
    configured duration, each command frame is exchanged over the bit-level
    SPI transport, and the engine idles out to at least the requested cycle
    count.  Frames always run to completion even past that count.
    """
    engine, responses = run_engine(scenario)
    return engine.trace, responses


def pipelined_write_burst(core: BridgeCore, writes):
    """Drive back-to-back writes through a bridge core at full rate.

    Presents the next write at IDLE, at WWAIT and at enable cycles, the
    points where the controller commits a new transfer, and holds the last
    address on the bus otherwise so the decoded select stays stable.  The
    write addresses should live in one decode region, as a real burst to a
    single peripheral would.

    Returns (first_active_cycle, enable_cycles): the cycle the FSM left
    IDLE and the cycle index of every enable phase, counted from the first
    presented cycle.
    """
    writes = list(writes)
    queue = deque(writes)
    last_addr = writes[0][0]
    first_active = None
    enables = []
    t = 0
    guard = 4 * len(writes) + 16
    while len(enables) < len(writes) or core.fsm_state != FsmState.IDLE:
        state = core.fsm_state
        if queue and (
            state == FsmState.IDLE
            or state == FsmState.WWAIT
            or state in ENABLE_STATES
        ):
            addr, data = queue.popleft()
            last_addr = addr
            req = AhbRequest(
                haddr=addr, hwdata=data, htrans=TransType.NONSEQ, hwrite=1, hreadyin=1
            )
        else:
            req = AhbRequest(haddr=last_addr, htrans=TransType.IDLE, hreadyin=1)
        rec = core.step(req)
        if first_active is None and rec.state != FsmState.IDLE:
            first_active = t
        if rec.snap.penable:
            enables.append(t)
        t += 1
        if t > guard:
            raise EngineError("write burst did not complete")
    return first_active, enables


def random_request(rng, decode_map=DEFAULT_DECODE_MAP, mapped_bias=0.75):
    """One random transfer presentation; rng is a seeded random.Random."""
    if decode_map.regions and rng.random() < mapped_bias:
        region = rng.choice(decode_map.regions)
        haddr = rng.randint(region.lo, region.hi)
    else:
        haddr = rng.getrandbits(32)
    return AhbRequest(
        haddr=haddr,
        hwdata=rng.getrandbits(32),
        htrans=TransType(rng.randrange(4)),
        hwrite=rng.getrandbits(1),
        hreadyin=1 if rng.random() < 0.9 else 0,
        prdata=rng.getrandbits(32),
    )


def _vcd_id(index):
    # Printable identifier codes, two characters past the single-char range.
    first = 33 + index % 94
    if index < 94:
        return chr(first)
    return chr(first) + chr(33 + index // 94 - 1)


def export_vcd(trace: Trace) -> str:
    """Render the trace as a Value Change Dump (timescale 1ns, one
    timestamp per cycle)."""
    lines = [
        "$timescale 1ns $end",
        "$scope module bridge $end",
    ]
    ids = {}
    for index, name in enumerate(trace.signal_names):
        ids[name] = _vcd_id(index)
        lines.append(f"$var wire {trace.width(name)} {ids[name]} {name} $end")
    lines.append("$upscope $end")
    lines.append("$enddefinitions $end")

    def fmt(name, value):
        if trace.width(name) == 1:
            return f"{value}{ids[name]}"
        return f"b{value:b} {ids[name]}"

    if ids:
        lines.append("$dumpvars")
        for name in trace.signal_names:
            changes = trace.changes(name)
            initial = changes[0][1] if changes and changes[0][0] == 0 else 0
            lines.append(fmt(name, initial))
        lines.append("$end")

    events = {}
    for name in trace.signal_names:
        for cycle, value in trace.changes(name):
            if cycle > 0:
                events.setdefault(cycle, []).append((name, value))
    for cycle in sorted(events):
        lines.append(f"#{cycle}")
        for name, value in events[cycle]:
            lines.append(fmt(name, value))
    return "\n".join(lines) + "\n"


def export_csv(trace: Trace) -> str:
    """One header row of signal names, one row of hex values per cycle."""
    names = trace.signal_names
    rows = [",".join(names)]
    series = {name: trace.series(name) for name in names}
    digits = {name: (trace.width(name) + 3) // 4 for name in names}
    for cycle in range(trace.cycles):
        rows.append(
            ",".join(f"{series[name][cycle]:0{digits[name]}x}" for name in names)
        )
    return "\n".join(rows) + "\n"
