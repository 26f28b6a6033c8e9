"""Bit-level mode-0 SPI slave plus the frame mappers.

The slave is clocked by the system clock and watches sclk as an ordinary
sampled input, so sclk must run at half the system rate or slower.  MOSI
is sampled on rising sclk edges, MISO changes on falling edges, and both
directions are MSB first.  Reception is paused while a response is being
shifted out so the response clock-out phase cannot masquerade as command
bits.
"""

from dataclasses import dataclass, replace

from .bus_types import (
    AhbRequest,
    ApbSnapshot,
    CommandFrame,
    ResponseFrame,
    decode_command,
    encode_response,
)

_RX_BITS = CommandFrame.WIDTH
_TX_BITS = ResponseFrame.WIDTH
_RX_MASK = (1 << _RX_BITS) - 1


class SpiBusyError(RuntimeError):
    """A response load was attempted while one is still shifting out."""


@dataclass(frozen=True)
class SpiPins:
    """Raw pin values for one system-clock cycle (csn is active low)."""

    sclk: int = 0
    mosi: int = 0
    miso: int = 0
    csn: int = 1


@dataclass(frozen=True)
class SpiSlaveState:
    shift_in: int = 0           # command accumulator, MSB arrives first
    bit_count: int = 0          # command bits received, 0..100
    shift_out: int = 0          # loaded response register
    out_count: int = _TX_BITS   # response bits emitted; 104 means idle
    start_transaction: int = 0  # one-cycle pulse on frame completion
    last_sclk: int = 0          # edge detector
    miso: int = 0               # value currently driven on MISO


def spi_tick(state: SpiSlaveState, pins: SpiPins) -> SpiSlaveState:
    """Advance the slave one system-clock cycle."""
    rising = pins.sclk and not state.last_sclk
    falling = state.last_sclk and not pins.sclk

    if pins.csn:
        # Deselected: abort any partial exchange, keep only the edge detector.
        return replace(
            state,
            bit_count=0,
            out_count=_TX_BITS,
            start_transaction=0,
            last_sclk=pins.sclk,
        )

    shift_in = state.shift_in
    bit_count = state.bit_count
    out_count = state.out_count
    start = 0
    miso = state.miso

    transmitting = out_count < _TX_BITS
    if rising and not transmitting:
        shift_in = ((shift_in << 1) | (pins.mosi & 1)) & _RX_MASK
        bit_count += 1
        if bit_count == _RX_BITS:
            start = 1
            bit_count = 0
    if falling and transmitting:
        miso = (state.shift_out >> (_TX_BITS - 1 - out_count)) & 1
        out_count += 1

    return SpiSlaveState(
        shift_in=shift_in,
        bit_count=bit_count,
        shift_out=state.shift_out,
        out_count=out_count,
        start_transaction=start,
        last_sclk=pins.sclk,
        miso=miso,
    )


def load_response(state: SpiSlaveState, frame: ResponseFrame) -> SpiSlaveState:
    """Stage a response for transmission; the next falling edges emit bits
    103 down to 0."""
    if state.out_count not in (0, _TX_BITS):
        raise SpiBusyError(
            f"response transmission in progress ({state.out_count} bits sent)"
        )
    return replace(state, shift_out=frame.value, out_count=0)


def mapper1(frame: CommandFrame) -> AhbRequest:
    """Spread the received command frame onto the AHB-side signals."""
    return decode_command(frame)


def mapper2(snap: ApbSnapshot) -> ResponseFrame:
    """Aggregate the APB-side outputs into the response frame."""
    return encode_response(snap)
