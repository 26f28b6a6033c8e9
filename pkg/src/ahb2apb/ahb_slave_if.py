"""AHB-facing stage of the bridge.

Samples the presented AHB transfer each cycle, derives the combinational
``valid`` and ``tempselx`` controls, and pipelines addresses and write
data through two register stages so the APB controller can run one
transfer behind the AHB side.
"""

from dataclasses import dataclass, replace

from .bus_types import AhbRequest, TransType, _check_width, is_onehot_or_zero


@dataclass(frozen=True)
class DecodeRegion:
    """One address range mapped onto a peripheral select line."""

    lo: int
    hi: int
    select: int  # select line index, 0..2

    def __post_init__(self):
        _check_width("lo", self.lo, 32)
        _check_width("hi", self.hi, 32)
        if self.lo > self.hi:
            raise ValueError(f"empty region: lo {self.lo:#x} > hi {self.hi:#x}")
        if not 0 <= self.select <= 2:
            raise ValueError(f"select index out of range: {self.select}")

    def contains(self, addr):
        return self.lo <= addr <= self.hi


@dataclass(frozen=True)
class DecodeMap:
    """Up to three disjoint address regions, one per select line."""

    regions: tuple

    def __post_init__(self):
        regions = tuple(self.regions)
        object.__setattr__(self, "regions", regions)
        if len(regions) > 3:
            raise ValueError("decode map holds at most 3 regions")
        selects = [r.select for r in regions]
        if len(set(selects)) != len(selects):
            raise ValueError("decode map select indices must be distinct")
        for i, a in enumerate(regions):
            for b in regions[i + 1 :]:
                if a.lo <= b.hi and b.lo <= a.hi:
                    raise ValueError(
                        f"decode regions overlap: [{a.lo:#x},{a.hi:#x}] and [{b.lo:#x},{b.hi:#x}]"
                    )


DEFAULT_DECODE_MAP = DecodeMap(
    (
        DecodeRegion(0x8000_0000, 0x83FF_FFFF, 0),
        DecodeRegion(0x8400_0000, 0x87FF_FFFF, 1),
        DecodeRegion(0x8800_0000, 0x8FFF_FFFF, 2),
    )
)


def decode_select(decode_map: DecodeMap, haddr: int) -> int:
    """One-hot select for the region containing ``haddr``, else 0."""
    for region in decode_map.regions:
        if region.contains(haddr):
            return 1 << region.select
    return 0


def compute_valid(hreadyin: int, htrans: TransType, tempselx: int) -> int:
    """A transfer is valid when the master is ready, the type is an
    actual data transfer (NONSEQ or SEQ) and the address decodes."""
    transfer = htrans in (TransType.NONSEQ, TransType.SEQ)
    return 1 if (hreadyin and transfer and tempselx) else 0


@dataclass(frozen=True)
class SlaveIfState:
    """Registered pipeline state plus the derived combinational controls.

    haddr1/hwdata1 hold the most recently accepted transfer, haddr2/hwdata2
    the one before it.  valid and tempselx are recomputed from the request
    every cycle and stored here only so downstream stages see one bundle.
    """

    haddr1: int = 0
    haddr2: int = 0
    hwdata1: int = 0
    hwdata2: int = 0
    hwritereg: int = 0
    valid: int = 0
    tempselx: int = 0
    prdata_latch: int = 0

    def __post_init__(self):
        _check_width("tempselx", self.tempselx, 3)
        if not is_onehot_or_zero(self.tempselx):
            raise ValueError(f"tempselx must be zero or one-hot: {self.tempselx:#05b}")
        if self.valid and not self.tempselx:
            raise ValueError("valid requires a decoded select")


def slave_if_tick(state: SlaveIfState, req: AhbRequest, decode_map: DecodeMap) -> SlaveIfState:
    """Advance the slave interface one rising clock edge.

    The address/data pipeline shifts only on accepted transfers (valid=1);
    prdata is latched unconditionally.
    """
    tempselx = decode_select(decode_map, req.haddr)
    valid = compute_valid(req.hreadyin, req.htrans, tempselx)
    if valid:
        return SlaveIfState(
            haddr1=req.haddr,
            haddr2=state.haddr1,
            hwdata1=req.hwdata,
            hwdata2=state.hwdata1,
            hwritereg=req.hwrite,
            valid=valid,
            tempselx=tempselx,
            prdata_latch=req.prdata,
        )
    return replace(
        state, valid=valid, tempselx=tempselx, prdata_latch=req.prdata
    )
