#!/usr/bin/env node
/** usage: cli.js render --in <dir> --out <dir> */

import { CsvError, MissingInputError, renderAll } from "./figures";

function parseArgs(argv: string[]): { inDir: string; outDir: string } {
  if (argv[0] !== "render") {
    throw new Error(`unknown command ${argv[0] ?? "(none)"}; expected: render --in DIR --out DIR`);
  }
  let inDir: string | undefined;
  let outDir: string | undefined;
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (value === undefined) throw new Error(`missing value for ${key}`);
    if (key === "--in") inDir = value;
    else if (key === "--out") outDir = value;
    else throw new Error(`unknown flag ${key}`);
  }
  if (!inDir || !outDir) throw new Error("both --in and --out are required");
  return { inDir, outDir };
}

export function main(argv: string[]): number {
  try {
    const { inDir, outDir } = parseArgs(argv);
    for (const file of renderAll(inDir, outDir)) {
      console.log(file);
    }
    return 0;
  } catch (err) {
    if (err instanceof MissingInputError || err instanceof CsvError || err instanceof Error) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    console.error(`error: ${String(err)}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
