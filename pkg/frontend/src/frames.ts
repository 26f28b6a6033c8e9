/**
 * Host-side frame codec for the bridge simulator's wire format.
 *
 * Deliberately re-implemented from the wire layout, with no code shared
 * with the simulator, so that agreement between the two codecs is a real
 * cross-check and not a tautology.
 *
 * Command frame (100 bits, sent MSB first, padded to 26 hex digits):
 *   [99:68] prdata  [67:36] haddr  [35:4] hwdata
 *   [3:2]   htrans  [1] hreadyin   [0] hwrite
 *
 * Response frame (104 bits, 26 hex digits):
 *   [103:72] hrdata [71:40] paddr  [39:8] pwdata
 *   [7:5]    pselx  [4:3] hresp    [2] hreadyout
 *   [1]      pwrite [0] penable
 */

export interface RequestFields {
  haddr: number;
  hwdata: number;
  htrans: number;
  hwrite: number;
  hreadyin: number;
  prdata: number;
}

export interface ResponseFields {
  paddr: number;
  pwdata: number;
  pselx: number;
  pwrite: number;
  penable: number;
  hreadyout: number;
  hresp: number;
  hrdata: number;
}

type Layout<T> = ReadonlyArray<readonly [keyof T, number, number]>;

const COMMAND_BITS = 100n;
const RESPONSE_BITS = 104n;
export const FRAME_HEX_DIGITS = 26;

const COMMAND_LAYOUT: Layout<RequestFields> = [
  ["prdata", 68, 32],
  ["haddr", 36, 32],
  ["hwdata", 4, 32],
  ["htrans", 2, 2],
  ["hreadyin", 1, 1],
  ["hwrite", 0, 1],
];

const RESPONSE_LAYOUT: Layout<ResponseFields> = [
  ["hrdata", 72, 32],
  ["paddr", 40, 32],
  ["pwdata", 8, 32],
  ["pselx", 5, 3],
  ["hresp", 3, 2],
  ["hreadyout", 2, 1],
  ["pwrite", 1, 1],
  ["penable", 0, 1],
];

function pack<T>(fields: T, layout: Layout<T>): bigint {
  let value = 0n;
  for (const [name, lsb, width] of layout) {
    const field = Number(fields[name]);
    if (!Number.isInteger(field) || field < 0 || field >= 2 ** width) {
      throw new RangeError(`${String(name)} does not fit in ${width} bits: ${field}`);
    }
    value |= BigInt(field) << BigInt(lsb);
  }
  return value;
}

function unpack<T>(value: bigint, layout: Layout<T>): T {
  const fields = {} as Record<keyof T, number>;
  for (const [name, lsb, width] of layout) {
    const mask = (1n << BigInt(width)) - 1n;
    fields[name] = Number((value >> BigInt(lsb)) & mask);
  }
  return fields as T;
}

function toHex(value: bigint): string {
  return value.toString(16).padStart(FRAME_HEX_DIGITS, "0");
}

function fromHex(text: string, bits: bigint, what: string): bigint {
  const trimmed = text.trim().toLowerCase();
  if (trimmed.length !== FRAME_HEX_DIGITS || !/^[0-9a-f]+$/.test(trimmed)) {
    throw new RangeError(`${what} must be ${FRAME_HEX_DIGITS} hex digits: ${text}`);
  }
  const value = BigInt(`0x${trimmed}`);
  if (value >> bits !== 0n) {
    throw new RangeError(`${what} exceeds ${bits} bits: ${text}`);
  }
  return value;
}

/** Encode request fields into the 26-hex-digit command frame. */
export function encodeCommand(fields: RequestFields): string {
  return toHex(pack(fields, COMMAND_LAYOUT));
}

/** Decode a command frame back into request fields. */
export function decodeCommand(hex: string): RequestFields {
  return unpack(fromHex(hex, COMMAND_BITS, "command frame"), COMMAND_LAYOUT);
}

/** Encode response fields into the 26-hex-digit response frame. */
export function encodeResponse(fields: ResponseFields): string {
  return toHex(pack(fields, RESPONSE_LAYOUT));
}

/** Decode a response frame back into response fields. */
export function decodeResponse(hex: string): ResponseFields {
  return unpack(fromHex(hex, RESPONSE_BITS, "response frame"), RESPONSE_LAYOUT);
}
