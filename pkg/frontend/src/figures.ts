/** The three simulator figures from the harness CSV outputs. */

import * as fs from "fs";
import * as path from "path";

import { CsvError, Table, column, parseCsv } from "./csv";
import { Series, renderChart } from "./svg";

export class MissingInputError extends Error {}

const SCHEME_STYLES: { column: string; file: string; label: string; color: string }[] = [
  { column: "Proposed", file: "proposed", label: "Proposed OTA", color: "#d81b9f" },
  { column: "Seperate", file: "separate_ota", label: "Seperate OTA", color: "#1f4fd8" },
  { column: "Local", file: "local_mmse", label: "Local MMSE", color: "#1a9c2f" },
  { column: "HD", file: "half_duplex", label: "HD", color: "#222222" },
];

function readTable(dir: string, name: string): Table {
  const full = path.join(dir, name);
  if (!fs.existsSync(full)) {
    throw new MissingInputError(`missing input file: ${full}`);
  }
  return parseCsv(fs.readFileSync(full, "utf8"), name);
}

export function renderFig1(inDir: string): string {
  const table = readTable(inDir, "fig1.csv");
  const iters = column(table, "Itr");
  const series: Series[] = [];
  for (const s of SCHEME_STYLES) {
    if (table.header.includes(s.column)) {
      series.push({ label: s.label, x: iters, y: column(table, s.column), color: s.color, marker: true });
    }
  }
  return renderChart({
    title: "Sum of UL and DL rates vs training iterations",
    xLabel: "Iterations",
    yLabel: "R [bps/Hz]",
    series,
  });
}

export function renderFig2(inDir: string): string {
  const table = readTable(inDir, "fig2.csv");
  const res = column(table, "Res");
  const series: Series[] = [];
  for (const s of SCHEME_STYLES) {
    if (table.header.includes(s.column)) {
      series.push({ label: s.label, x: res, y: column(table, s.column), color: s.color, marker: true });
    }
  }
  return renderChart({
    title: "Effective sum rate vs available resources",
    xLabel: "r_tot",
    yLabel: "R_eff [bps/Hz]",
    series,
  });
}

export function renderFig3(inDir: string): string {
  const series: Series[] = [];
  for (const s of SCHEME_STYLES) {
    for (const side of ["dl", "ul"] as const) {
      const name = `fig3_${s.file}_${side}.csv`;
      if (!fs.existsSync(path.join(inDir, name))) {
        continue;
      }
      const table = readTable(inDir, name);
      series.push({
        label: side === "dl" ? s.label : `${s.label} (UL)`,
        x: column(table, "x"),
        y: column(table, "y"),
        color: s.color,
        dashed: side === "ul",
        legend: side === "dl",
      });
    }
  }
  if (series.length === 0) {
    throw new MissingInputError(`missing input file: ${path.join(inDir, "fig3_*_dl.csv")}`);
  }
  return renderChart({
    title: "CDF of per-UE rates (solid: DL, dashed: UL)",
    xLabel: "UE rate [bps/Hz]",
    yLabel: "CDF",
    series,
    yRange: [0, 1],
  });
}

export function renderAll(inDir: string, outDir: string): string[] {
  fs.mkdirSync(outDir, { recursive: true });
  const jobs: [string, (d: string) => string][] = [
    ["fig1.svg", renderFig1],
    ["fig2.svg", renderFig2],
    ["fig3.svg", renderFig3],
  ];
  const written: string[] = [];
  for (const [name, render] of jobs) {
    const out = path.join(outDir, name);
    fs.writeFileSync(out, render(inDir));
    written.push(out);
  }
  return written;
}

export { CsvError };
