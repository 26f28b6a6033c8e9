"""Eight-state APB controller.

Sequences the APB setup and enable phases for reads, writes and
back-to-back pipelined writes.  Transition table (inputs are valid,
hwrite, hwritereg)::

    IDLE     -> WWAIT    if valid and hwrite
             -> READ     if valid and not hwrite
             -> IDLE     otherwise
    READ     -> RENABLE
    RENABLE  -> same rule as IDLE
    WWAIT    -> WRITEP   if valid else WRITE
    WRITE    -> WENABLEP if valid else WENABLE
    WRITEP   -> WENABLEP
    WENABLE  -> same rule as IDLE
    WENABLEP -> WRITEP   if valid and hwritereg
             -> WRITE    if not valid and hwritereg
             -> READ     if not hwritereg

WWAIT inserts the one-cycle gap that lets pipelined write data land in
the first register stage before the APB setup phase starts; the WRITEP
and WENABLEP states run the pipelined path, which addresses the second
register stage.
"""

from dataclasses import dataclass
from enum import IntEnum

from .ahb_slave_if import SlaveIfState
from .bus_types import _check_width, is_onehot_or_zero


class FsmState(IntEnum):
    IDLE = 0
    READ = 1
    RENABLE = 2
    WWAIT = 3
    WRITE = 4
    WRITEP = 5
    WENABLE = 6
    WENABLEP = 7


WRITE_STATES = frozenset(
    {FsmState.WRITE, FsmState.WRITEP, FsmState.WENABLE, FsmState.WENABLEP}
)
ENABLE_STATES = frozenset({FsmState.RENABLE, FsmState.WENABLE, FsmState.WENABLEP})
READY_STATES = frozenset(
    {FsmState.IDLE, FsmState.RENABLE, FsmState.WENABLE, FsmState.WENABLEP}
)
# States whose outputs address the second pipeline stage.
PIPELINED_STATES = frozenset({FsmState.WRITEP, FsmState.WENABLEP})
# States with the peripheral selects forced off.
SELECT_OFF_STATES = frozenset({FsmState.IDLE, FsmState.WWAIT})


@dataclass(frozen=True)
class FsmOutputs:
    """Moore outputs of the controller for one cycle."""

    pwrite: int = 0
    penable: int = 0
    pselx: int = 0
    paddr: int = 0
    pwdata: int = 0
    hreadyout: int = 0

    def __post_init__(self):
        _check_width("pselx", self.pselx, 3)
        if not is_onehot_or_zero(self.pselx):
            raise ValueError(f"pselx must be zero or one-hot: {self.pselx:#05b}")
        if self.penable and not self.pselx:
            raise ValueError("penable asserted without a selected slave")


def _entry_state(valid, hwrite):
    if valid and hwrite:
        return FsmState.WWAIT
    if valid:
        return FsmState.READ
    return FsmState.IDLE


def fsm_next(state: FsmState, valid: int, hwrite: int, hwritereg: int) -> FsmState:
    """Next-state function, evaluated at each rising clock edge."""
    if state in (FsmState.IDLE, FsmState.RENABLE, FsmState.WENABLE):
        return _entry_state(valid, hwrite)
    if state == FsmState.READ:
        return FsmState.RENABLE
    if state == FsmState.WWAIT:
        return FsmState.WRITEP if valid else FsmState.WRITE
    if state == FsmState.WRITE:
        return FsmState.WENABLEP if valid else FsmState.WENABLE
    if state == FsmState.WRITEP:
        return FsmState.WENABLEP
    if state == FsmState.WENABLEP:
        if not hwritereg:
            return FsmState.READ
        return FsmState.WRITEP if valid else FsmState.WRITE
    raise ValueError(f"unknown state {state!r}")


def fsm_outputs(state: FsmState, pipe: SlaveIfState) -> FsmOutputs:
    """Moore output function over the current state and pipeline bundle."""
    pipelined = state in PIPELINED_STATES
    return FsmOutputs(
        pwrite=1 if state in WRITE_STATES else 0,
        penable=1 if state in ENABLE_STATES else 0,
        pselx=0 if state in SELECT_OFF_STATES else pipe.tempselx,
        paddr=pipe.haddr2 if pipelined else pipe.haddr1,
        pwdata=pipe.hwdata2 if pipelined else pipe.hwdata1,
        hreadyout=1 if state in READY_STATES else 0,
    )


def transition_edges():
    """Labeled transition list, aggregated by input condition."""
    entry = [("¬valid", FsmState.IDLE), ("valid∧hwrite", FsmState.WWAIT),
             ("valid∧¬hwrite", FsmState.READ)]
    edges = []
    for src in (FsmState.IDLE, FsmState.RENABLE, FsmState.WENABLE):
        edges.extend((src, label, dst) for label, dst in entry)
    edges.append((FsmState.READ, "1", FsmState.RENABLE))
    edges.append((FsmState.WWAIT, "valid", FsmState.WRITEP))
    edges.append((FsmState.WWAIT, "¬valid", FsmState.WRITE))
    edges.append((FsmState.WRITE, "valid", FsmState.WENABLEP))
    edges.append((FsmState.WRITE, "¬valid", FsmState.WENABLE))
    edges.append((FsmState.WRITEP, "1", FsmState.WENABLEP))
    edges.append((FsmState.WENABLEP, "valid∧hwritereg", FsmState.WRITEP))
    edges.append((FsmState.WENABLEP, "¬valid∧hwritereg", FsmState.WRITE))
    edges.append((FsmState.WENABLEP, "¬hwritereg", FsmState.READ))
    return edges


def to_dot() -> str:
    """Transition graph in dot format."""
    lines = [
        "digraph apb_fsm {",
        "  rankdir=LR;",
        '  node [shape=ellipse, fontname="sans-serif"];',
    ]
    for src, label, dst in transition_edges():
        lines.append(f'  {src.name} -> {dst.name} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
