/** Minimal numeric-CSV reader for the simulator outputs. */

export interface Table {
  header: string[];
  rows: number[][];
}

export class CsvError extends Error {}

export function parseCsv(text: string, name: string): Table {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new CsvError(`${name}: empty file`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",").map((c) => Number(c));
    if (cells.length !== header.length || cells.some((c) => !Number.isFinite(c))) {
      throw new CsvError(`${name}: malformed row ${i + 1}: ${lines[i]}`);
    }
    rows.push(cells);
  }
  if (rows.length === 0) {
    throw new CsvError(`${name}: header only, no data rows`);
  }
  return { header, rows };
}

export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new CsvError(`missing column ${name} (have: ${table.header.join(",")})`);
  }
  return table.rows.map((r) => r[idx]);
}
