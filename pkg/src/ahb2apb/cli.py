"""Command-line front end.

Runs scenario files with optional VCD/CSV export and golden-response
comparison, serves the SPI-over-TCP transport for a host client, exports
the controller's transition graph, and drives seeded random-frame checks.

Exit codes: 0 success, 1 golden mismatch, 2 bad input, 3 protocol
monitor violation.

Wire protocol for --serve (one line per message)::

    CMD <26 hex digits>     host -> simulator
    RSP <26 hex digits>     simulator -> host
    ERR <message>           simulator -> host
"""

import argparse
import json
import random
import socket
import sys

from . import sim_engine
from .apb_fsm import to_dot
from .apb_if import dump_register_file
from .bus_types import CommandFrame, FrameLengthError, decode_command, decode_response, encode_command
from .sim_engine import ConfigError, Engine, check_trace, load_scenario, run_engine


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ahb2apb",
        description="Cycle-accurate AHB-to-APB bridge simulator with an SPI host link",
    )
    parser.add_argument("--scenario", metavar="PATH", help="run a JSON scenario file")
    parser.add_argument("--vcd", metavar="PATH", help="write the trace as VCD")
    parser.add_argument("--csv", metavar="PATH", help="write the trace as CSV")
    parser.add_argument(
        "--golden", metavar="PATH",
        help="compare response frames against a golden file (one hex frame per line)",
    )
    parser.add_argument(
        "--json", action="store_true",
        help="print per-frame results as JSON lines instead of text",
    )
    parser.add_argument(
        "--serve", metavar="PORT", type=int,
        help="serve the SPI-over-TCP transport on 127.0.0.1:PORT",
    )
    parser.add_argument(
        "--fsm-dot", metavar="PATH", nargs="?", const="-",
        help="export the controller transition graph as dot (default stdout)",
    )
    parser.add_argument(
        "--dump-regs", metavar="PATH",
        help="write the closed-loop peripheral register files after a run",
    )
    parser.add_argument(
        "--random", metavar="N", type=int,
        help="run N seeded random frames through the bridge and monitor the trace",
    )
    parser.add_argument(
        "--seed", metavar="N", type=int, default=0,
        help="seed for the random-frame generator (default 0)",
    )
    return parser


def _frame_report(index, frame, response):
    req = decode_command(frame)
    snap = decode_response(response)
    return {
        "frame": index,
        "command_hex": frame.to_hex(),
        "request": {
            "haddr": f"0x{req.haddr:08x}",
            "hwdata": f"0x{req.hwdata:08x}",
            "htrans": int(req.htrans),
            "hwrite": req.hwrite,
            "hreadyin": req.hreadyin,
            "prdata": f"0x{req.prdata:08x}",
        },
        "response_hex": response.to_hex(),
        "response": {
            "paddr": f"0x{snap.paddr:08x}",
            "pwdata": f"0x{snap.pwdata:08x}",
            "pselx": snap.pselx,
            "pwrite": snap.pwrite,
            "penable": snap.penable,
            "hreadyout": snap.hreadyout,
            "hresp": snap.hresp,
            "hrdata": f"0x{snap.hrdata:08x}",
        },
    }


def _print_report(report, as_json, out):
    if as_json:
        print(json.dumps(report), file=out)
        return
    req, rsp = report["request"], report["response"]
    print(
        f"frame {report['frame']}: "
        f"Haddr={req['haddr']} Hwdata={req['hwdata']} Htrans={req['htrans']} "
        f"Hwrite={req['hwrite']} Hreadyin={req['hreadyin']} Prdata={req['prdata']}",
        file=out,
    )
    print(
        f"    -> Paddr={rsp['paddr']} Pwdata={rsp['pwdata']} Pselx={rsp['pselx']:#05b} "
        f"Pwrite={rsp['pwrite']} Penable={rsp['penable']} Hreadyout={rsp['hreadyout']} "
        f"Hresp={rsp['hresp']:#04b} Hrdata={rsp['hrdata']}",
        file=out,
    )


def cmd_run(args, out=None, err=None):
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        scenario = load_scenario(args.scenario)
    except (ConfigError, FrameLengthError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return 2
    engine, responses = run_engine(scenario)
    trace = engine.trace

    if args.vcd:
        with open(args.vcd, "w", encoding="utf-8") as fh:
            fh.write(sim_engine.export_vcd(trace))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(sim_engine.export_csv(trace))
    if args.dump_regs:
        with open(args.dump_regs, "w", encoding="utf-8") as fh:
            for p in engine.core.apb.peripherals:
                fh.write(f"# peripheral select={p.select}\n")
                fh.write(dump_register_file(p.registers))

    for index, (sf, response) in enumerate(zip(scenario.frames, responses)):
        _print_report(_frame_report(index, sf.frame, response), args.json, out)

    violations = check_trace(trace)
    if violations:
        for v in violations:
            print(f"monitor violation at cycle {v.cycle}: {v.rule}: {v.detail}", file=err)
        return 3

    if args.golden:
        try:
            with open(args.golden, "r", encoding="utf-8") as fh:
                golden = [
                    line.strip().lower()
                    for line in fh
                    if line.strip() and not line.lstrip().startswith("#")
                ]
        except OSError as exc:
            print(f"error: {exc}", file=err)
            return 2
        actual = [r.to_hex() for r in responses]
        if golden != actual:
            print(f"golden mismatch: expected {golden}, got {actual}", file=err)
            return 1
        print(f"golden match: {len(actual)} frame(s)", file=out)
    return 0


def _serve_session(conn, engine):
    with conn, conn.makefile("rw", encoding="ascii", newline="\n") as stream:
        for line in stream:
            line = line.strip()
            if not line:
                continue
            parts = line.split(None, 1)
            if len(parts) != 2 or parts[0] != "CMD":
                stream.write("ERR expected 'CMD <26 hex digits>'\n")
                stream.flush()
                continue
            try:
                frame = CommandFrame.from_hex(parts[1])
            except FrameLengthError as exc:
                stream.write(f"ERR {exc}\n")
                stream.flush()
                continue
            response = engine.inject_frame(frame)
            stream.write(f"RSP {response.to_hex()}\n")
            stream.flush()


def cmd_serve(args, err=None):
    err = err if err is not None else sys.stderr
    server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        server.bind(("127.0.0.1", args.serve))
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return 2
    server.listen(1)
    print(f"serving on 127.0.0.1:{server.getsockname()[1]}", file=err)
    try:
        while True:
            conn, _addr = server.accept()
            engine = Engine()
            try:
                _serve_session(conn, engine)
            except (ConnectionError, BrokenPipeError):
                pass  # client dropped; session over
    except KeyboardInterrupt:
        return 0
    finally:
        server.close()


def cmd_fsm_dot(args, out=None):
    out = out if out is not None else sys.stdout
    dot = to_dot()
    if args.fsm_dot == "-":
        out.write(dot)
    else:
        with open(args.fsm_dot, "w", encoding="utf-8") as fh:
            fh.write(dot)
    return 0


def cmd_random(args, out=None, err=None):
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    if args.random < 1:
        print("error: --random needs a positive count", file=err)
        return 2
    rng = random.Random(args.seed)
    engine = Engine()
    for _ in range(args.random):
        engine.inject_frame(encode_command(sim_engine.random_request(rng)))
    violations = check_trace(engine.trace)
    if args.vcd:
        with open(args.vcd, "w", encoding="utf-8") as fh:
            fh.write(sim_engine.export_vcd(engine.trace))
    print(
        f"{args.random} random frames (seed {args.seed}), "
        f"{engine.cycle} cycles, {len(violations)} monitor violations",
        file=out,
    )
    for v in violations:
        print(f"monitor violation at cycle {v.cycle}: {v.rule}: {v.detail}", file=err)
    return 3 if violations else 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.serve is not None:
        return cmd_serve(args)
    if args.fsm_dot is not None:
        return cmd_fsm_dot(args)
    if args.random is not None:
        return cmd_random(args)
    if args.scenario is not None:
        return cmd_run(args)
    parser.print_usage(sys.stderr)
    print("error: nothing to do (use --scenario, --serve, --fsm-dot or --random)",
          file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
