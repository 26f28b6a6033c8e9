"""APB output stage and the AHB response path.

Passes controller outputs through to the externally named signals
(Pwriteout, Penableout, Pselxout, Pwdataout, Paddrout), produces Hresp
and Hrdata, and optionally models closed-loop APB peripheral register
files so reads can return previously written data instead of the
host-supplied prdata.
"""

from dataclasses import dataclass, replace
from enum import Enum

from .apb_fsm import FsmOutputs
from .bus_types import ApbSnapshot, MASK32

HRESP_OKAY = 0b00
HRESP_ERROR = 0b01


class ResponseMode(Enum):
    OPEN_LOOP = "open_loop"      # hrdata echoes the host-supplied prdata
    CLOSED_LOOP = "closed_loop"  # hrdata comes from a peripheral register file


class PeripheralNotSelected(ValueError):
    """An access targeted a peripheral whose select line is inactive."""


@dataclass(frozen=True)
class ApbPeripheral:
    """Register file behind one select line; addresses are word aligned."""

    select: int
    registers: dict

    def __post_init__(self):
        if not 0 <= self.select <= 2:
            raise ValueError(f"select index out of range: {self.select}")
        for addr, value in self.registers.items():
            if addr & 0x3:
                raise ValueError(f"register address not word aligned: {addr:#x}")
            if addr >> 32 or value >> 32 or addr < 0 or value < 0:
                raise ValueError("register address and value must be 32-bit")


def peripheral_access(p: ApbPeripheral, snap: ApbSnapshot):
    """Complete one APB access against a peripheral.

    Returns (updated peripheral, read data).  Writes store pwdata and
    return the location's prior value; reads leave the registers alone.
    Absent locations read as zero.  Low address bits are ignored, the
    register file is word addressed.
    """
    if not snap.penable:
        raise PeripheralNotSelected("access requires the enable phase")
    if snap.pselx != 1 << p.select:
        raise PeripheralNotSelected(
            f"pselx {snap.pselx:#05b} does not select line {p.select}"
        )
    addr = snap.paddr & ~0x3 & MASK32
    prior = p.registers.get(addr, 0)
    if snap.pwrite:
        regs = dict(p.registers)
        regs[addr] = snap.pwdata
        return ApbPeripheral(p.select, regs), prior
    return p, prior


def apb_stage(outs: FsmOutputs) -> ApbSnapshot:
    """Same-cycle pass-through of controller outputs onto the external
    signal names.  hresp and hrdata are filled in by the response path."""
    return ApbSnapshot(
        paddr=outs.paddr,
        pwdata=outs.pwdata,
        pselx=outs.pselx,
        pwrite=outs.pwrite,
        penable=outs.penable,
        hreadyout=outs.hreadyout,
    )


def compute_hresp(attempted: int, decode_hit: int) -> int:
    """OKAY unless a presented transfer missed the decode map."""
    return HRESP_ERROR if (attempted and not decode_hit) else HRESP_OKAY


class ApbStage:
    """Stateful response path: registered hrdata plus peripheral files."""

    def __init__(self, mode=ResponseMode.OPEN_LOOP, peripherals=()):
        self.mode = mode
        self._peripherals = {p.select: p for p in peripherals}
        if len(self._peripherals) != len(tuple(peripherals)):
            raise ValueError("peripheral select indices must be distinct")
        self._hrdata = 0

    @property
    def peripherals(self):
        return tuple(self._peripherals.values())

    def peripheral(self, select):
        return self._peripherals.get(select)

    def reset(self):
        self._hrdata = 0

    def cycle(self, outs: FsmOutputs, prdata_latch: int, attempted: int,
              decode_hit: int) -> ApbSnapshot:
        """Produce the full cycle snapshot and complete any enabled access.

        hrdata loads at the enable cycle (read data is valid in the APB
        access phase) and holds its value between transfers.
        """
        snap = apb_stage(outs)
        if snap.penable:
            if self.mode is ResponseMode.OPEN_LOOP:
                self._hrdata = prdata_latch
            else:
                select = snap.pselx.bit_length() - 1
                p = self._peripherals.get(select)
                if p is not None:
                    updated, data = peripheral_access(p, snap)
                    self._peripherals[select] = updated
                    self._hrdata = data
                else:
                    self._hrdata = 0
        return replace(
            snap,
            hresp=compute_hresp(attempted, decode_hit),
            hrdata=self._hrdata,
        )


def load_register_file(text: str) -> dict:
    """Parse ``address value`` hex lines into a register dict.

    Blank lines and ``#`` comments are skipped; addresses and values may
    carry an optional 0x prefix.
    """
    registers = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'address value', got {raw!r}")
        addr, value = (int(p, 16) for p in parts)
        registers[addr] = value
    return registers


def dump_register_file(registers: dict) -> str:
    lines = [f"{addr:08x} {value:08x}" for addr, value in sorted(registers.items())]
    return "\n".join(lines) + ("\n" if lines else "")
