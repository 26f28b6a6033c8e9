/**
 * Command-line entry point.
 *
 * Usage:
 *   node dist/main.js <host> <port> --fields <json> [--expect <json>]
 *
 * --fields and --expect take inline JSON or @path-to-json-file.  Field
 * values may be numbers or hex strings ("0x8C000000").  Exits 0 when the
 * exchange (and validation, if requested) succeeds, 1 on any mismatch,
 * 2 on bad arguments or transport errors.
 */

import { readFileSync } from "node:fs";

import { sendRequest } from "./client.js";
import { RequestFields, ResponseFields } from "./frames.js";
import { formatReport, validateReport } from "./validate.js";

function parseJsonArg(arg: string): Record<string, unknown> {
  const text = arg.startsWith("@") ? readFileSync(arg.slice(1), "utf-8") : arg;
  return JSON.parse(text) as Record<string, unknown>;
}

function toNumber(value: unknown, name: string): number {
  if (typeof value === "number" && Number.isInteger(value)) {
    return value;
  }
  if (typeof value === "string") {
    const parsed = value.startsWith("0x") || value.startsWith("0X")
      ? Number.parseInt(value, 16)
      : Number.parseInt(value, 10);
    if (Number.isInteger(parsed)) {
      return parsed;
    }
  }
  throw new RangeError(`field ${name} is not an integer: ${String(value)}`);
}

function requestFromJson(obj: Record<string, unknown>): RequestFields {
  const fields: RequestFields = {
    haddr: 0,
    hwdata: 0,
    htrans: 0,
    hwrite: 0,
    hreadyin: 0,
    prdata: 0,
  };
  for (const [key, value] of Object.entries(obj)) {
    if (!(key in fields)) {
      throw new RangeError(`unknown request field: ${key}`);
    }
    fields[key as keyof RequestFields] = toNumber(value, key);
  }
  return fields;
}

function expectedFromJson(obj: Record<string, unknown>): Partial<ResponseFields> {
  const expected: Partial<ResponseFields> = {};
  for (const [key, value] of Object.entries(obj)) {
    expected[key as keyof ResponseFields] = toNumber(value, key);
  }
  return expected;
}

function usage(): never {
  console.error(
    "usage: main.js <host> <port> --fields <json|@file> [--expect <json|@file>]",
  );
  process.exit(2);
}

async function main(): Promise<number> {
  const argv = process.argv.slice(2);
  if (argv.length < 2) {
    usage();
  }
  const [host, portText, ...rest] = argv;
  const port = Number.parseInt(portText, 10);
  if (!Number.isInteger(port)) {
    usage();
  }
  let fieldsArg: string | undefined;
  let expectArg: string | undefined;
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) {
      usage();
    }
    if (flag === "--fields") {
      fieldsArg = value;
    } else if (flag === "--expect") {
      expectArg = value;
    } else {
      usage();
    }
  }
  if (fieldsArg === undefined) {
    usage();
  }

  const fields = requestFromJson(parseJsonArg(fieldsArg));
  const response = await sendRequest(host, port, fields);
  console.log(JSON.stringify(response));
  if (expectArg !== undefined) {
    const report = validateReport(expectedFromJson(parseJsonArg(expectArg)), response);
    console.log(formatReport(report));
    if (!report.ok) {
      return 1;
    }
  }
  return 0;
}

main()
  .then((code) => process.exit(code))
  .catch((err) => {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    process.exit(2);
  });
