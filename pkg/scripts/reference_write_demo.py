#!/usr/bin/env python3
"""Reproduce the host-input / simulator-output table for one write.

Sends the reference command frame through the full SPI pipeline and
prints the input fields next to the decoded response fields.
"""

from ahb2apb import (
    AhbRequest,
    Engine,
    TransType,
    decode_response,
    encode_command,
)

REQUEST = AhbRequest(
    haddr=0x8C000000,
    hwdata=0x87654321,
    htrans=TransType.NONSEQ,
    hwrite=1,
    hreadyin=1,
    prdata=0x12345678,
)


def main():
    frame = encode_command(REQUEST)
    engine = Engine()
    response = engine.transfer_frame_spi(frame, divider=4)
    snap = decode_response(response)

    rows = [
        (f"Prdata   0x{REQUEST.prdata:08X}", f"Hrdata    0x{snap.hrdata:08X}"),
        (f"Haddr    0x{REQUEST.haddr:08X}", f"Paddr     0x{snap.paddr:08X}"),
        (f"Hwdata   0x{REQUEST.hwdata:08X}", f"Pwdata    0x{snap.pwdata:08X}"),
        (f"Htrans   {int(REQUEST.htrans):02b}", f"Pselx     {snap.pselx:03b}"),
        (f"Hreadyin {REQUEST.hreadyin}", f"Hresp     {snap.hresp:02b}"),
        (f"Hwrite   {REQUEST.hwrite}", f"Hreadyout {snap.hreadyout}"),
        ("-", f"Pwrite    {snap.pwrite}"),
        ("-", f"Penable   {snap.penable}"),
    ]
    print(f"{'Input to bridge':<24}| Output from bridge")
    print("-" * 24 + "+" + "-" * 24)
    for left, right in rows:
        print(f"{left:<24}| {right}")
    print()
    print(f"command frame : {frame.to_hex()}")
    print(f"response frame: {response.to_hex()}")
    print(f"simulated cycles: {engine.cycle}")


if __name__ == "__main__":
    main()
