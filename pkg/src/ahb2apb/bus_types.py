"""Bus signal types and the bit-exact host-link frame codec.

The host link carries one AHB transfer presentation per 100-bit command
frame and one APB-side result per 104-bit response frame.  Bit index k of
a frame is the numeric bit position; the highest index is transmitted
first on the wire (MSB first).  Multi-bit fields are packed big-endian
inside their slice, so a field's MSB sits at the slice's highest index.

Command frame layout::

    [99:68] prdata   [67:36] haddr    [35:4] hwdata
    [3:2]   htrans   [1]     hreadyin [0]    hwrite

Response frame layout::

    [103:72] hrdata  [71:40] paddr    [39:8] pwdata
    [7:5]    pselx   [4:3]   hresp    [2]    hreadyout
    [1]      pwrite  [0]     penable

Both frame types serialize to 26 lowercase hex digits (the 100-bit
command frame is zero-padded at the top so the two wire formats share
one width).
"""

from dataclasses import dataclass
from enum import IntEnum

MASK32 = 0xFFFF_FFFF
COMMAND_BITS = 100
RESPONSE_BITS = 104
FRAME_HEX_DIGITS = 26


class FrameLengthError(ValueError):
    """A wire frame had the wrong number of bits or hex digits."""


class TransType(IntEnum):
    """AHB transfer type (Htrans)."""

    IDLE = 0
    BUSY = 1
    NONSEQ = 2
    SEQ = 3


def _check_width(name, value, bits):
    if not isinstance(value, int) or value < 0 or value >> bits:
        raise ValueError(f"{name} does not fit in {bits} bits: {value!r}")


def is_onehot_or_zero(value):
    return value & (value - 1) == 0


@dataclass(frozen=True)
class AhbRequest:
    """One AHB-side transfer presentation (the decoded command frame)."""

    haddr: int = 0
    hwdata: int = 0
    htrans: TransType = TransType.IDLE
    hwrite: int = 0
    hreadyin: int = 0
    prdata: int = 0

    def __post_init__(self):
        _check_width("haddr", self.haddr, 32)
        _check_width("hwdata", self.hwdata, 32)
        _check_width("hwrite", self.hwrite, 1)
        _check_width("hreadyin", self.hreadyin, 1)
        _check_width("prdata", self.prdata, 32)
        object.__setattr__(self, "htrans", TransType(self.htrans))


@dataclass(frozen=True)
class ApbSnapshot:
    """One cycle of APB-side outputs plus the AHB responses."""

    paddr: int = 0
    pwdata: int = 0
    pselx: int = 0
    pwrite: int = 0
    penable: int = 0
    hreadyout: int = 0
    hresp: int = 0
    hrdata: int = 0

    def __post_init__(self):
        _check_width("paddr", self.paddr, 32)
        _check_width("pwdata", self.pwdata, 32)
        _check_width("pselx", self.pselx, 3)
        _check_width("pwrite", self.pwrite, 1)
        _check_width("penable", self.penable, 1)
        _check_width("hreadyout", self.hreadyout, 1)
        _check_width("hresp", self.hresp, 2)
        _check_width("hrdata", self.hrdata, 32)
        if not is_onehot_or_zero(self.pselx):
            raise ValueError(f"pselx must be zero or one-hot: {self.pselx:#05b}")
        if self.penable and not self.pselx:
            raise ValueError("penable asserted without a selected slave")


@dataclass(frozen=True)
class _Frame:
    """A fixed-width bit vector; subclasses pin the width."""

    WIDTH = 0

    value: int = 0

    def __post_init__(self):
        if not isinstance(self.value, int) or self.value < 0 or self.value >> self.WIDTH:
            raise FrameLengthError(
                f"frame value does not fit in {self.WIDTH} bits: {self.value:#x}"
            )

    def bit(self, index):
        if not 0 <= index < self.WIDTH:
            raise IndexError(f"bit index {index} out of range for {self.WIDTH}-bit frame")
        return (self.value >> index) & 1

    def wire_bits(self):
        """Bits in transmission order, highest index first."""
        return [(self.value >> i) & 1 for i in range(self.WIDTH - 1, -1, -1)]

    @classmethod
    def from_wire_bits(cls, bits):
        bits = list(bits)
        if len(bits) != cls.WIDTH:
            raise FrameLengthError(f"expected {cls.WIDTH} bits, got {len(bits)}")
        value = 0
        for b in bits:
            value = (value << 1) | (b & 1)
        return cls(value)

    def to_hex(self):
        return f"{self.value:0{FRAME_HEX_DIGITS}x}"

    @classmethod
    def from_hex(cls, text):
        text = text.strip().lower()
        if len(text) != FRAME_HEX_DIGITS:
            raise FrameLengthError(
                f"expected {FRAME_HEX_DIGITS} hex digits, got {len(text)}"
            )
        try:
            value = int(text, 16)
        except ValueError as exc:
            raise FrameLengthError(f"not a hex string: {text!r}") from exc
        if value >> cls.WIDTH:
            raise FrameLengthError(f"value exceeds {cls.WIDTH} bits: {text}")
        return cls(value)


class CommandFrame(_Frame):
    """100-bit command frame carried host-to-bridge over MOSI."""

    WIDTH = COMMAND_BITS


class ResponseFrame(_Frame):
    """104-bit response frame carried bridge-to-host over MISO."""

    WIDTH = RESPONSE_BITS


def encode_command(req: AhbRequest) -> CommandFrame:
    """Pack an AHB request into the 100-bit command frame."""
    value = (
        (req.prdata << 68)
        | (req.haddr << 36)
        | (req.hwdata << 4)
        | (int(req.htrans) << 2)
        | (req.hreadyin << 1)
        | req.hwrite
    )
    return CommandFrame(value)


def decode_command(frame: CommandFrame) -> AhbRequest:
    """Exact inverse of :func:`encode_command`."""
    v = frame.value
    return AhbRequest(
        haddr=(v >> 36) & MASK32,
        hwdata=(v >> 4) & MASK32,
        htrans=TransType((v >> 2) & 0b11),
        hwrite=v & 1,
        hreadyin=(v >> 1) & 1,
        prdata=(v >> 68) & MASK32,
    )


def encode_response(snap: ApbSnapshot) -> ResponseFrame:
    """Pack an APB snapshot into the 104-bit response frame."""
    value = (
        (snap.hrdata << 72)
        | (snap.paddr << 40)
        | (snap.pwdata << 8)
        | (snap.pselx << 5)
        | (snap.hresp << 3)
        | (snap.hreadyout << 2)
        | (snap.pwrite << 1)
        | snap.penable
    )
    return ResponseFrame(value)


def decode_response(frame: ResponseFrame) -> ApbSnapshot:
    """Exact inverse of :func:`encode_response`."""
    v = frame.value
    return ApbSnapshot(
        paddr=(v >> 40) & MASK32,
        pwdata=(v >> 8) & MASK32,
        pselx=(v >> 5) & 0b111,
        pwrite=(v >> 1) & 1,
        penable=v & 1,
        hreadyout=(v >> 2) & 1,
        hresp=(v >> 3) & 0b11,
        hrdata=(v >> 72) & MASK32,
    )
