/** Field-by-field comparison of expected versus actual response fields. */

import { ResponseFields } from "./frames.js";

export interface ValidationRow {
  field: string;
  expected: number;
  actual: number;
  ok: boolean;
}

export interface ValidationReport {
  rows: ValidationRow[];
  ok: boolean;
}

const HEX_FIELDS = new Set(["paddr", "pwdata", "hrdata"]);

/**
 * Compare the fields named in `expected` against `actual`.  Fields absent
 * from `expected` are not checked, so known-inconsistent fields can be
 * left out of a validation run.
 */
export function validateReport(
  expected: Partial<ResponseFields>,
  actual: ResponseFields,
): ValidationReport {
  const rows: ValidationRow[] = [];
  for (const [field, value] of Object.entries(expected)) {
    if (value === undefined) {
      continue;
    }
    if (!(field in actual)) {
      throw new RangeError(`unknown response field: ${field}`);
    }
    const actualValue = actual[field as keyof ResponseFields];
    rows.push({ field, expected: value, actual: actualValue, ok: value === actualValue });
  }
  return { rows, ok: rows.every((row) => row.ok) };
}

function show(field: string, value: number): string {
  return HEX_FIELDS.has(field)
    ? `0x${value.toString(16).padStart(8, "0")}`
    : String(value);
}

/** Render the report as a pass/fail table, one line per field. */
export function formatReport(report: ValidationReport): string {
  const lines = report.rows.map((row) => {
    const status = row.ok ? "PASS" : "FAIL";
    return `${status}  ${row.field.padEnd(10)} expected ${show(row.field, row.expected)}  actual ${show(row.field, row.actual)}`;
  });
  lines.push(report.ok ? "all fields consistent" : "FIELD MISMATCH");
  return lines.join("\n");
}
