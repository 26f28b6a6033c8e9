#!/usr/bin/env python3
"""Measure pipelined write throughput at the bridge core.

Drives N back-to-back writes for N = 1..16 and prints the cycle count
between leaving IDLE and the final enable phase; the pipelined path
sustains one write per two cycles after the initial WWAIT, so the span
is 2N+1.
"""

from ahb2apb import BridgeCore, pipelined_write_burst


def main():
    print(f"{'N':>3} {'cycles':>7} {'expected':>9}")
    for n in range(1, 17):
        core = BridgeCore()
        writes = [(0x8000_0000 + 4 * i, 0xD000_0000 + i) for i in range(n)]
        first_active, enables = pipelined_write_burst(core, writes)
        span = enables[-1] - first_active + 1
        marker = "" if span == 2 * n + 1 else "  <-- MISMATCH"
        print(f"{n:>3} {span:>7} {2 * n + 1:>9}{marker}")


if __name__ == "__main__":
    main()
