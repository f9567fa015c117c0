import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli";
import { MissingInputError, renderAll, renderFig1, renderFig3 } from "../src/figures";

let dir: string;
let out: string;

const FIG1 = "Itr,Proposed,Seperate,Local,HD\n1,100,90,80,50\n2,150,120,95,60\n3,180,140,100,65\n";
const FIG2 = "Res,Proposed,Seperate,Local\n1000,120,90,95\n5000,200,160,140\n";

function cdf(name: string, values: number[]): void {
  const n = values.length;
  const lines = values.map((v, i) => `${v},${(i / (n - 1)).toFixed(4)}`);
  fs.writeFileSync(path.join(dir, name), "x,y\n" + lines.join("\n") + "\n");
}

function writeFixtures(): void {
  fs.writeFileSync(path.join(dir, "fig1.csv"), FIG1);
  fs.writeFileSync(path.join(dir, "fig2.csv"), FIG2);
  for (const scheme of ["proposed", "separate_ota", "local_mmse"]) {
    cdf(`fig3_${scheme}_dl.csv`, [1, 2, 4, 8]);
    cdf(`fig3_${scheme}_ul.csv`, [0.5, 1.5, 3, 6]);
  }
}

beforeEach(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "figs-in-"));
  out = fs.mkdtempSync(path.join(os.tmpdir(), "figs-out-"));
  writeFixtures();
});

afterEach(() => {
  fs.rmSync(dir, { recursive: true, force: true });
  fs.rmSync(out, { recursive: true, force: true });
});

describe("renderAll", () => {
  it("writes three non-empty SVG images", () => {
    const written = renderAll(dir, out);
    expect(written.length).toBe(3);
    for (const file of written) {
      const body = fs.readFileSync(file, "utf8");
      expect(body.length).toBeGreaterThan(500);
      expect(body.startsWith("<svg")).toBe(true);
      expect(body.endsWith("</svg>")).toBe(true);
    }
  });

  it("leaves the inputs byte-identical", () => {
    const before = new Map(
      fs.readdirSync(dir).map((n) => [n, fs.readFileSync(path.join(dir, n))])
    );
    renderAll(dir, out);
    for (const [name, buf] of before) {
      expect(fs.readFileSync(path.join(dir, name)).equals(buf)).toBe(true);
    }
  });

  it("names the missing file", () => {
    fs.unlinkSync(path.join(dir, "fig2.csv"));
    expect(() => renderAll(dir, out)).toThrow(MissingInputError);
    expect(() => renderAll(dir, out)).toThrow(/fig2\.csv/);
  });

  it("fails gracefully on a header-only CSV", () => {
    fs.writeFileSync(path.join(dir, "fig1.csv"), "Itr,Proposed,Seperate,Local,HD\n");
    expect(() => renderAll(dir, out)).toThrow(/no data rows/);
  });
});

describe("figure content", () => {
  it("fig1 draws one polyline per scheme with its legend", () => {
    const svg = renderFig1(dir);
    expect((svg.match(/<polyline /g) ?? []).length).toBe(4);
    for (const label of ["Proposed OTA", "Seperate OTA", "Local MMSE", "HD"]) {
      expect(svg).toContain(label);
    }
  });

  it("fig3 dashes the UL curves and keeps DL solid", () => {
    const svg = renderFig3(dir);
    const dashed = (svg.match(/stroke-dasharray/g) ?? []).length;
    // 3 dashed polylines (UL curves); legend swatches are solid DL entries
    expect(dashed).toBe(3);
    expect((svg.match(/<polyline /g) ?? []).length).toBe(6);
  });

  it("fig3 tolerates a subset of schemes", () => {
    fs.unlinkSync(path.join(dir, "fig3_local_mmse_dl.csv"));
    fs.unlinkSync(path.join(dir, "fig3_local_mmse_ul.csv"));
    const svg = renderFig3(dir);
    expect((svg.match(/<polyline /g) ?? []).length).toBe(4);
  });
});

describe("cli", () => {
  it("renders and reports the written files", () => {
    const log = vi.spyOn(console, "log").mockImplementation(() => {});
    const code = main(["render", "--in", dir, "--out", out]);
    expect(code).toBe(0);
    expect(log).toHaveBeenCalledTimes(3);
    log.mockRestore();
  });

  it("returns nonzero and names the file when an input is missing", () => {
    fs.unlinkSync(path.join(dir, "fig1.csv"));
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    const code = main(["render", "--in", dir, "--out", out]);
    expect(code).toBe(1);
    expect(String(err.mock.calls[0][0])).toMatch(/fig1\.csv/);
    err.mockRestore();
  });

  it("rejects unknown commands and flags", () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(main(["plot"])).toBe(1);
    expect(main(["render", "--bogus", "x"])).toBe(1);
    expect(main(["render", "--in", dir])).toBe(1);
    err.mockRestore();
  });
});
