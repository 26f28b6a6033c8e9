#!/usr/bin/env python3
"""Regenerate the waveform artifacts for the bundled scenarios.

Writes a VCD and CSV per scenario into out/; the VCD loads in any
standard waveform viewer (gtkwave etc.).
"""

from pathlib import Path

from ahb2apb import export_csv, export_vcd, load_scenario, run

REPO = Path(__file__).resolve().parent.parent
OUT = REPO / "out"

SCENARIOS = ["reference_write", "single_write", "decode_miss", "closed_loop_write_read"]


def main():
    OUT.mkdir(exist_ok=True)
    for name in SCENARIOS:
        scenario = load_scenario(REPO / "scenarios" / f"{name}.json")
        trace, responses = run(scenario)
        (OUT / f"{name}.vcd").write_text(export_vcd(trace))
        (OUT / f"{name}.csv").write_text(export_csv(trace))
        print(f"{name}: {trace.cycles} cycles, {len(responses)} response frame(s)")
        for i, frame in enumerate(responses):
            print(f"  response {i}: {frame.to_hex()}")


if __name__ == "__main__":
    main()
